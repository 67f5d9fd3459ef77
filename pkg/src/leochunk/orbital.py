"""Walker-Delta constellation geometry and ideal circular propagation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_KM = 6371.0
MU_EARTH = 398600.4418  # km^3/s^2
EARTH_ROTATION_RAD_S = 7.2921159e-5


@dataclass(frozen=True)
class WalkerDeltaSpec:
    total_sats: int
    planes: int
    inclination_deg: float
    altitude_km: float
    phasing_factor: int = 0
    name: str = "custom"

    def __post_init__(self):
        errors = []
        if self.planes < 1 or self.total_sats < 1:
            errors.append("total_sats and planes must be positive")
        elif self.total_sats % self.planes:
            errors.append(
                f"total_sats={self.total_sats} is not divisible by planes={self.planes}"
            )
        if not 0.0 < self.inclination_deg < 180.0:
            errors.append("inclination_deg must lie in (0, 180)")
        if self.altitude_km <= 0:
            errors.append("altitude_km must be positive")
        if not 0 <= self.phasing_factor < max(self.planes, 1):
            errors.append("phasing_factor must lie in [0, planes)")
        if errors:
            raise ValueError("; ".join(errors))

    @property
    def sats_per_plane(self) -> int:
        return self.total_sats // self.planes

    @property
    def radius_km(self) -> float:
        return EARTH_RADIUS_KM + self.altitude_km

    @property
    def period_s(self) -> float:
        return orbital_period(self.altitude_km)


PRESETS = {
    "starlink-p1": WalkerDeltaSpec(1584, 72, 53.0, 550.0, 0, "starlink-p1"),
    "telesat": WalkerDeltaSpec(220, 20, 50.88, 1325.0, 0, "telesat"),
    "amazon-leo-1": WalkerDeltaSpec(784, 28, 33.0, 590.0, 0, "amazon-leo-1"),
}


def preset(name: str) -> WalkerDeltaSpec:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise KeyError(
            f"unknown constellation {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None


@dataclass(frozen=True)
class OrbitalElements:
    """Circular-orbit elements of one satellite (angles in degrees)."""

    sat_id: int
    plane_idx: int
    slot_idx: int
    raan_deg: float
    anomaly_deg: float
    inclination_deg: float
    altitude_km: float


@dataclass(frozen=True)
class SatelliteState:
    sat_id: int
    plane_idx: int
    slot_idx: int
    position: np.ndarray  # ECI, km
    epoch: float


@dataclass(frozen=True)
class GroundStation:
    name: str
    latitude_deg: float
    longitude_deg: float
    altitude_km: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"{self.name}: latitude {self.latitude_deg} outside [-90, 90]")
        if not -180.0 <= self.longitude_deg <= 180.0:
            raise ValueError(f"{self.name}: longitude {self.longitude_deg} outside [-180, 180]")


EUROPEAN_OGS = (
    GroundStation("Maspalomas", 27.76, -15.59),
    GroundStation("Athens", 37.98, 23.72),
    GroundStation("Milan", 45.4642, 9.19),
    GroundStation("Bilbao", 43.263, -2.935),
)


def orbital_period(altitude_km: float) -> float:
    a = EARTH_RADIUS_KM + altitude_km
    return 2.0 * math.pi * math.sqrt(a**3 / MU_EARTH)


def generate_walker_delta(spec: WalkerDeltaSpec) -> list[OrbitalElements]:
    """One element set per satellite, plane-major order (sat_id = plane * S + slot)."""
    per_plane = spec.sats_per_plane
    out = []
    for p in range(spec.planes):
        raan = p * 360.0 / spec.planes
        for s in range(per_plane):
            anomaly = (
                s * 360.0 / per_plane + p * spec.phasing_factor * 360.0 / spec.total_sats
            ) % 360.0
            out.append(
                OrbitalElements(
                    sat_id=p * per_plane + s,
                    plane_idx=p,
                    slot_idx=s,
                    raan_deg=raan,
                    anomaly_deg=anomaly,
                    inclination_deg=spec.inclination_deg,
                    altitude_km=spec.altitude_km,
                )
            )
    return out


def _eci(raan, inc, u, radius):
    # in-plane vector (r cos u, r sin u, 0) rotated by inclination about x, then RAAN about z
    cu, su = np.cos(u), np.sin(u)
    co, so = np.cos(raan), np.sin(raan)
    ci, si = np.cos(inc), np.sin(inc)
    x = radius * (co * cu - so * ci * su)
    y = radius * (so * cu + co * ci * su)
    z = radius * (si * su)
    return np.stack([x, y, z], axis=-1)


def propagate(elements: OrbitalElements, t: float) -> SatelliteState:
    if t < 0:
        raise ValueError("t must be >= 0")
    a = EARTH_RADIUS_KM + elements.altitude_km
    omega = math.sqrt(MU_EARTH / a**3)
    u = math.radians(elements.anomaly_deg) + omega * t
    pos = _eci(
        math.radians(elements.raan_deg), math.radians(elements.inclination_deg), u, a
    )
    return SatelliteState(elements.sat_id, elements.plane_idx, elements.slot_idx, pos, t)


def propagate_all(elements: list[OrbitalElements], t: float) -> np.ndarray:
    """Vectorised positions (N, 3) in km for all satellites at time ``t``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    alt = np.array([e.altitude_km for e in elements])
    a = EARTH_RADIUS_KM + alt
    omega = np.sqrt(MU_EARTH / a**3)
    u = np.radians([e.anomaly_deg for e in elements]) + omega * t
    raan = np.radians([e.raan_deg for e in elements])
    inc = np.radians([e.inclination_deg for e in elements])
    return _eci(raan, inc, u, a)


def ground_station_eci(gs: GroundStation, t: float) -> np.ndarray:
    lat = math.radians(gs.latitude_deg)
    lon = math.radians(gs.longitude_deg) + EARTH_ROTATION_RAD_S * t
    r = EARTH_RADIUS_KM + gs.altitude_km
    return np.array(
        [r * math.cos(lat) * math.cos(lon), r * math.cos(lat) * math.sin(lon), r * math.sin(lat)]
    )


def look_angles(gs_pos: np.ndarray, sat_pos: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Slant range (km) and elevation (deg) from ground position(s) to satellite position(s)."""
    d = sat_pos - gs_pos
    rng = np.linalg.norm(d, axis=-1)
    up = gs_pos / np.linalg.norm(gs_pos, axis=-1, keepdims=True)
    vertical = np.sum(d * up, axis=-1)
    # atan2 of vertical vs horizontal components stays well conditioned near zenith
    horizontal = np.linalg.norm(d - vertical[..., None] * up, axis=-1)
    return rng, np.degrees(np.arctan2(vertical, horizontal))


def slant_range_and_elevation(
    gs: GroundStation, sat: SatelliteState, t: float | None = None
) -> tuple[float, float]:
    t = sat.epoch if t is None else t
    rng, el = look_angles(ground_station_eci(gs, t), np.asarray(sat.position))
    return float(rng), float(el)
