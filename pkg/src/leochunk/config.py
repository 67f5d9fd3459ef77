"""Scenario configuration: YAML ingestion, profiles, strict validation.

A config file is a YAML mapping.  Everything is optional except that the
result must name at least one constellation and one fabric; omitted values
come from the selected profile.  Unknown keys are rejected, and every
violation found is reported at once.

Example::

    profile: desk
    constellations: [telesat]
    fabrics: [InP-SOA, GLSUN]
    chunk_sizes: "1MB..1GB log 12"
    seeds: [1, 2, 3]
    link_budget: {visibility_km: 40}
"""
from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .channel import LinkBudgetParams
from .engine import SimConfig
from .orbital import EUROPEAN_OGS, PRESETS, GroundStation, WalkerDeltaSpec
from .switching import SwitchFabric, builtin_fabrics


class ConfigError(ValueError):
    """Raised with every validation problem found in a configuration."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(self.problems))


# ---------------------------------------------------------------------------
# chunk sizes

_UNITS = {"": 1, "B": 1, "KB": 10**3, "MB": 10**6, "GB": 10**9, "TB": 10**12}
_SIZE_RE = re.compile(r"^\s*([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\s*([KMGT]?B)?\s*$", re.I)


def parse_size(value) -> int:
    """``"500MB"`` -> 500_000_000 (decimal units). Plain numbers are bytes."""
    if isinstance(value, bool):
        raise ValueError(f"not a size: {value!r}")
    if isinstance(value, (int, float)):
        size = float(value)
    else:
        m = _SIZE_RE.match(str(value))
        if not m:
            raise ValueError(f"not a size: {value!r}")
        size = float(m.group(1)) * _UNITS[(m.group(2) or "").upper()]
    if not math.isfinite(size) or size < 1:
        raise ValueError(f"size must be at least 1 byte: {value!r}")
    return int(round(size))


def format_size(n: int) -> str:
    for unit in ("GB", "MB", "KB"):
        if n >= _UNITS[unit] and n % _UNITS[unit] == 0:
            return f"{n // _UNITS[unit]}{unit}"
    return f"{n}B"


_GRID_RE = re.compile(r"^\s*(\S+?)\s*\.\.\s*(\S+)\s+(log|lin|step)\s+(\S+)\s*$", re.I)


def parse_chunk_grid(spec) -> list[int]:
    """Parse a chunk-size grid.

    Accepted forms: a list of sizes, a single size, ``"A..B log N"``
    (N log-spaced points), ``"A..B lin N"`` (N evenly spaced points) or
    ``"A..B step S"``.  Returns sorted unique byte counts.
    """
    if isinstance(spec, (list, tuple)):
        sizes = [parse_size(v) for v in spec]
    else:
        m = _GRID_RE.match(str(spec))
        if not m:
            sizes = [parse_size(spec)]
        else:
            lo, hi, kind, arg = m.groups()
            lo, hi = parse_size(lo), parse_size(hi)
            if hi < lo:
                raise ValueError(f"empty chunk grid {spec!r}: upper bound below lower bound")
            kind = kind.lower()
            if kind == "step":
                step = parse_size(arg)
                sizes = list(range(lo, hi + 1, step))
            else:
                n = int(arg)
                if n < 1:
                    raise ValueError(f"chunk grid needs at least one point: {spec!r}")
                pts = np.geomspace(lo, hi, n) if kind == "log" else np.linspace(lo, hi, n)
                sizes = [int(round(p)) for p in pts]
    sizes = sorted(set(sizes))
    if not sizes:
        raise ValueError("chunk grid is empty")
    return sizes


# ---------------------------------------------------------------------------
# profiles

PROFILES: dict[str, dict[str, Any]] = {
    # short runs on the smallest constellation; used by the test suite
    "desk": {
        "constellations": ["telesat"],
        "fabrics": ["InP-SOA", "AGILTRON", "GLSUN", "POLATIS"],
        "chunk_sizes": "1MB..1GB log 12",
        "n_snapshots": 20,
        "chunks_per_snapshot": 250,
        "max_chunks_per_snapshot": 5000,
    },
    # the reference parameter block (50 snapshots) on every constellation
    "reference": {
        "constellations": ["telesat", "amazon-leo-1", "starlink-p1"],
        "fabrics": ["InP-SOA", "AGILTRON", "GLSUN", "POLATIS"],
        "chunk_sizes": "1MB..1GB log 12",
        "n_snapshots": 50,
        "chunks_per_snapshot": 1000,
        "max_chunks_per_snapshot": 20000,
    },
    # continuous Poisson traffic for the whole duration; expensive
    "full": {
        "constellations": ["telesat", "amazon-leo-1", "starlink-p1"],
        "fabrics": ["InP-SOA", "AGILTRON", "GLSUN", "POLATIS"],
        "chunk_sizes": "1MB..1GB log 12",
        "n_snapshots": 50,
        "chunks_per_snapshot": None,
        "max_chunks_per_snapshot": None,
    },
}


@dataclass(frozen=True)
class ScenarioConfig:
    constellations: tuple[WalkerDeltaSpec, ...]
    fabrics: tuple[SwitchFabric, ...]
    chunk_sizes: tuple[int, ...]
    ground_stations: tuple[GroundStation, ...] = EUROPEAN_OGS
    seeds: tuple[int, ...] = (1,)
    profile: str = "desk"
    target_load: float = 1.5
    duration_s: float = 600.0
    n_snapshots: int = 20
    chunks_per_snapshot: int | None = 250
    max_chunks_per_snapshot: int | None = 5000
    min_window_holds: float = 20.0
    k_paths: int = 5
    min_elevation_deg: float = 13.0
    ogs_policy: str = "shared"
    preferred_elevation_deg: float | None = 30.0
    tau_proc_s: float = 1e-3
    max_wait_s: float = 10e-3
    latency_threshold_s: float = 60e-3
    insertion_loss_in_budget: bool = False
    include_wait: bool = False
    power_scope: str = "path"
    hold_switch_time: bool = True
    link_budget: LinkBudgetParams = field(default_factory=LinkBudgetParams)

    def sim_config(self) -> SimConfig:
        return SimConfig(
            tau_proc_s=self.tau_proc_s,
            max_wait_s=self.max_wait_s,
            include_wait=self.include_wait,
            hold_switch_time=self.hold_switch_time,
            insertion_loss_in_budget=self.insertion_loss_in_budget,
            power_scope=self.power_scope,
            chunks_per_snapshot=self.chunks_per_snapshot,
            min_window_holds=self.min_window_holds,
            max_chunks_per_snapshot=self.max_chunks_per_snapshot,
        )

    def constellation(self, name: str) -> WalkerDeltaSpec:
        for c in self.constellations:
            if c.name.lower() == name.lower():
                return c
        raise ConfigError(f"constellation {name!r} not in config; have {[c.name for c in self.constellations]}")

    def fabric(self, name: str) -> SwitchFabric:
        for f in self.fabrics:
            if f.name.lower() == name.lower():
                return f
        raise ConfigError(f"fabric {name!r} not in config; have {[f.name for f in self.fabrics]}")

    def to_dict(self) -> dict:
        """Effective configuration in the same shape :func:`parse_config` accepts."""
        d = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name in ("constellations", "fabrics", "ground_stations"):
                v = [dataclasses.asdict(x) for x in v]
            elif f.name == "link_budget":
                v = dataclasses.asdict(v)
            elif f.name in ("chunk_sizes", "seeds"):
                v = list(v)
            d[f.name] = v
        return d

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


_SCALARS = {
    "target_load": float, "duration_s": float, "n_snapshots": int,
    "chunks_per_snapshot": int, "max_chunks_per_snapshot": int, "min_window_holds": float,
    "k_paths": int, "min_elevation_deg": float, "ogs_policy": str, "tau_proc_s": float,
    "max_wait_s": float, "latency_threshold_s": float, "preferred_elevation_deg": float,
    "insertion_loss_in_budget": bool,
    "include_wait": bool, "power_scope": str, "hold_switch_time": bool,
}
_NULLABLE = {"chunks_per_snapshot", "max_chunks_per_snapshot", "preferred_elevation_deg"}
_KNOWN = set(_SCALARS) | {
    "profile", "constellations", "fabrics", "custom_fabrics", "chunk_sizes",
    "ground_stations", "seeds", "link_budget",
}


def _record(cls, raw, what, problems):
    """Build a dataclass from a mapping, rejecting unknown keys."""
    if not isinstance(raw, dict):
        problems.append(f"{what}: expected a mapping, got {type(raw).__name__}")
        return None
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - names)
    if unknown:
        problems.append(f"{what}: unknown keys {unknown}; allowed {sorted(names)}")
        return None
    try:
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        problems.append(f"{what}: {exc}")
        return None


def _coerce(key, value, typ, problems):
    if value is None and key in _NULLABLE:
        return None
    if typ is bool:
        if not isinstance(value, bool):
            problems.append(f"{key}: expected true/false, got {value!r}")
        return value
    if typ is str:
        return str(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{key}: expected a number, got {value!r}")
        return None
    if typ is int and float(value) != int(value):
        problems.append(f"{key}: expected an integer, got {value!r}")
        return None
    return typ(value)


def parse_config(raw: dict | None) -> ScenarioConfig:
    """Validate a raw mapping, apply profile defaults and return the config."""
    raw = dict(raw or {})
    problems: list[str] = []
    unknown = sorted(set(raw) - _KNOWN)
    if unknown:
        problems.append(f"unknown keys {unknown}; allowed {sorted(_KNOWN)}")

    profile = raw.get("profile", "desk")
    if profile not in PROFILES:
        problems.append(f"profile: unknown {profile!r}; choose from {sorted(PROFILES)}")
        profile = "desk"
    merged = {**PROFILES[profile], **{k: v for k, v in raw.items() if k in _KNOWN}}
    kw: dict[str, Any] = {"profile": profile}

    consts = []
    for i, c in enumerate(merged.get("constellations") or []):
        if isinstance(c, str):
            if c.lower() in PRESETS:
                consts.append(PRESETS[c.lower()])
            else:
                problems.append(f"constellations[{i}]: unknown preset {c!r}; available {sorted(PRESETS)}")
        else:
            spec = _record(WalkerDeltaSpec, c, f"constellations[{i}]", problems)
            if spec is not None:
                consts.append(spec)
    if not merged.get("constellations"):
        problems.append("constellations: at least one is required")
    kw["constellations"] = tuple(consts)

    custom = {}
    for i, f in enumerate(raw.get("custom_fabrics") or []):
        fab = _record(SwitchFabric, f, f"custom_fabrics[{i}]", problems)
        if fab is not None:
            custom[fab.name.lower()] = fab
    table = {f.name.lower(): f for f in builtin_fabrics()}
    table.update(custom)
    fabs = []
    for i, f in enumerate(merged.get("fabrics") or []):
        if isinstance(f, str):
            if f.lower() in table:
                fabs.append(table[f.lower()])
            else:
                names = [b.name for b in builtin_fabrics()] + [c.name for c in custom.values()]
                problems.append(f"fabrics[{i}]: unknown fabric {f!r}; builtin fabrics: {', '.join(names)}")
        else:
            fab = _record(SwitchFabric, f, f"fabrics[{i}]", problems)
            if fab is not None:
                fabs.append(fab)
    if not merged.get("fabrics"):
        problems.append("fabrics: at least one is required")
    kw["fabrics"] = tuple(fabs)

    try:
        kw["chunk_sizes"] = tuple(parse_chunk_grid(merged.get("chunk_sizes")))
    except (TypeError, ValueError) as exc:
        problems.append(f"chunk_sizes: {exc}")

    if "ground_stations" in merged:
        stations = []
        for i, g in enumerate(merged["ground_stations"] or []):
            gs = _record(GroundStation, g, f"ground_stations[{i}]", problems)
            if gs is not None:
                stations.append(gs)
        if len(stations) < 2:
            problems.append("ground_stations: at least two stations are required")
        kw["ground_stations"] = tuple(stations)

    if "seeds" in merged:
        seeds = merged["seeds"]
        seeds = [seeds] if isinstance(seeds, int) else seeds
        if not seeds or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds):
            problems.append(f"seeds: expected a non-empty list of integers, got {merged['seeds']!r}")
        else:
            kw["seeds"] = tuple(seeds)

    for key, typ in _SCALARS.items():
        if key in merged:
            v = _coerce(key, merged[key], typ, problems)
            if v is not None or key in _NULLABLE:
                kw[key] = v

    lb = merged.get("link_budget") or {}
    if lb:
        params = _record(LinkBudgetParams, lb, "link_budget", problems)
        if params is not None:
            kw["link_budget"] = params

    # range checks on scalars that survived type coercion
    checks = [
        ("target_load", lambda v: v > 0, "must be > 0"),
        ("duration_s", lambda v: v > 0, "must be > 0"),
        ("n_snapshots", lambda v: v >= 1, "must be >= 1"),
        ("k_paths", lambda v: v >= 1, "must be >= 1"),
        ("min_elevation_deg", lambda v: 0 <= v < 90, "must lie in [0, 90)"),
        ("preferred_elevation_deg", lambda v: v is None or 0 <= v < 90, "must lie in [0, 90) or be null"),
        ("tau_proc_s", lambda v: v >= 0, "must be >= 0"),
        ("max_wait_s", lambda v: v >= 0, "must be >= 0"),
        ("latency_threshold_s", lambda v: v > 0, "must be > 0"),
        ("min_window_holds", lambda v: v >= 0, "must be >= 0"),
        ("chunks_per_snapshot", lambda v: v is None or v >= 1, "must be >= 1 or null"),
        ("max_chunks_per_snapshot", lambda v: v is None or v >= 1, "must be >= 1 or null"),
        ("ogs_policy", lambda v: v in ("all-visible", "max-elevation", "shared"),
         "must be one of all-visible, max-elevation, shared"),
        ("power_scope", lambda v: v in ("path", "constellation"), "must be 'path' or 'constellation'"),
    ]
    for key, ok, msg in checks:
        if key in kw and kw[key] is not None or key in _NULLABLE and key in kw:
            if not ok(kw[key]):
                problems.append(f"{key}: {msg} (got {kw[key]!r})")

    if problems:
        raise ConfigError(problems)
    return ScenarioConfig(**kw)


def load_config(path) -> ScenarioConfig:
    """Read, validate and default a YAML scenario file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: no such file")
    text = path.read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{where}: YAML parse error: {problem}") from None
    if raw is not None and not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return parse_config(raw)
