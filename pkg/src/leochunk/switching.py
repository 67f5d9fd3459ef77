"""Onboard optical switching fabrics."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SwitchFabric:
    name: str
    switch_time_s: float
    power_w: float
    insertion_loss_db: float
    trl: int

    def __post_init__(self):
        if self.switch_time_s <= 0 or self.power_w <= 0 or self.insertion_loss_db < 0:
            raise ValueError(
                f"{self.name}: switch_time_s and power_w must be > 0, insertion loss >= 0"
            )


_BUILTIN = (
    SwitchFabric("POLATIS", 25e-3, 5.0, 1.0, 9),
    SwitchFabric("GLSUN", 8e-3, 1.25, 2.6, 9),
    SwitchFabric("AGILTRON", 0.1e-6, 10.0, 3.5, 9),
    SwitchFabric("InP-SOA", 5.2e-9, 0.58, 0.0, 4),
)


def builtin_fabrics() -> list[SwitchFabric]:
    return list(_BUILTIN)


def lookup(name: str, extra: dict[str, SwitchFabric] | None = None) -> SwitchFabric:
    table = {f.name.lower(): f for f in _BUILTIN}
    if extra:
        table.update({k.lower(): v for k, v in extra.items()})
    try:
        return table[name.lower()]
    except KeyError:
        names = [f.name for f in _BUILTIN] + list(extra or ())
        raise KeyError(f"unknown fabric {name!r}; builtin fabrics: {', '.join(names)}") from None


def path_switching_delay(fabric: SwitchFabric, n_satellites: int) -> float:
    if n_satellites < 0:
        raise ValueError("n_satellites must be >= 0")
    return n_satellites * fabric.switch_time_s


def path_insertion_loss(fabric: SwitchFabric, n_satellites: int) -> float:
    """Accumulated insertion loss in dB over ``n_satellites`` fabrics."""
    if n_satellites < 0:
        raise ValueError("n_satellites must be >= 0")
    return n_satellites * fabric.insertion_loss_db
