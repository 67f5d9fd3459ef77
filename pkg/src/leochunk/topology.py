"""Snapshot topologies: Grid+ laser inter-satellite links plus ground links."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import channel
from .orbital import (
    GroundStation,
    WalkerDeltaSpec,
    generate_walker_delta,
    ground_station_eci,
    look_angles,
    propagate_all,
)

LISL, UPLINK, DOWNLINK = "LISL", "uplink", "downlink"


@dataclass(frozen=True)
class LinkEdge:
    """Directed link. A LISL appears once per direction (full duplex)."""

    src: int
    dst: int
    kind: str
    length_km: float
    capacity_bps: float = 0.0

    @property
    def key(self) -> tuple[int, int]:
        return (self.src, self.dst)


@dataclass
class SnapshotGraph:
    index: int
    time_s: float
    n_sats: int
    gs_names: tuple[str, ...]
    edges: list[LinkEdge]
    elevation_deg: dict[tuple[int, int], float] = field(default_factory=dict)
    _adj: dict[int, list[tuple[int, LinkEdge]]] | None = field(default=None, repr=False)
    _by_key: dict[tuple[int, int], LinkEdge] | None = field(default=None, repr=False)

    @property
    def nodes(self) -> range:
        return range(self.n_sats + len(self.gs_names))

    def gs_node(self, name_or_idx) -> int:
        if isinstance(name_or_idx, str):
            return self.n_sats + self.gs_names.index(name_or_idx)
        return self.n_sats + int(name_or_idx)

    def is_satellite(self, node: int) -> bool:
        return node < self.n_sats

    def label(self, node: int) -> str:
        if node < self.n_sats:
            return f"sat{node}"
        return f"gs:{self.gs_names[node - self.n_sats]}"

    @property
    def adjacency(self) -> dict[int, list[tuple[int, LinkEdge]]]:
        if self._adj is None:
            adj: dict[int, list[tuple[int, LinkEdge]]] = {n: [] for n in self.nodes}
            for e in self.edges:
                adj[e.src].append((e.dst, e))
            self._adj = adj
        return self._adj

    def edge(self, u: int, v: int) -> LinkEdge:
        if self._by_key is None:
            self._by_key = {e.key: e for e in self.edges}
        return self._by_key[(u, v)]

    def edge_keys(self) -> set[tuple[int, int]]:
        return {e.key for e in self.edges}

    def to_edge_list(self) -> str:
        lines = [f"# snapshot {self.index} t={self.time_s:.3f}s"]
        for e in self.edges:
            lines.append(
                f"{self.label(e.src)} {self.label(e.dst)} {e.kind} "
                f"{e.length_km:.3f} {e.capacity_bps:.6e}"
            )
        return "\n".join(lines) + "\n"


def grid_plus_pairs(planes: int, per_plane: int) -> np.ndarray:
    """Undirected Grid+ neighbour pairs ``(a, b)`` with ``a < b``; ids are plane-major."""
    if planes < 3 or per_plane < 3:
        raise ValueError(
            f"Grid+ needs at least 3 planes and 3 satellites per plane (got {planes}x{per_plane})"
        )
    p, s = np.meshgrid(np.arange(planes), np.arange(per_plane), indexing="ij")
    p, s = p.ravel(), s.ravel()
    me = p * per_plane + s
    intra = p * per_plane + (s + 1) % per_plane
    inter = ((p + 1) % planes) * per_plane + s
    pairs = np.concatenate([np.stack([me, intra], 1), np.stack([me, inter], 1)])
    return np.sort(pairs, axis=1)


def build_grid_plus(spec: WalkerDeltaSpec, positions: np.ndarray | None = None):
    """Grid+ LISLs as undirected ``(a, b, length_km)`` triples.

    Each satellite links to its in-plane predecessor and successor and to the
    same-slot satellite in both neighbouring planes (wrapping across the seam).
    """
    pairs = grid_plus_pairs(spec.planes, spec.sats_per_plane)
    if positions is None:
        positions = propagate_all(generate_walker_delta(spec), 0.0)
    lengths = np.linalg.norm(positions[pairs[:, 0]] - positions[pairs[:, 1]], axis=1)
    return [(int(a), int(b), float(d)) for (a, b), d in zip(pairs, lengths)]


def assign_ogs_links(
    stations: Sequence[GroundStation],
    positions: np.ndarray,
    t: float,
    min_elevation_deg: float = 10.0,
    policy: str = "shared",
    preferred_elevation_deg: float | None = None,
) -> list[tuple[int, int, float, float]]:
    """Ground links as ``(gs_idx, sat_id, range_km, elevation_deg)``.

    ``policy="shared"`` links a station to every satellite above the mask, and
    a satellite may serve several stations. With ``preferred_elevation_deg``
    set, a station uses only satellites above that angle whenever it has any,
    falling back to the hard ``min_elevation_deg`` mask otherwise.
    ``policy="all-visible"`` is the same without sharing: a satellite seen by
    several stations serves the one where it is highest (one ground port).
    ``policy="max-elevation"`` keeps only the highest visible satellite per
    station. Stations without a visible satellite get no link.
    """
    if policy not in ("all-visible", "max-elevation", "shared"):
        raise ValueError(f"unknown ground link policy {policy!r}")
    gs_pos = np.stack([ground_station_eci(gs, t) for gs in stations])
    rng, el = look_angles(gs_pos[:, None, :], positions[None, :, :])
    out = []
    if policy == "max-elevation":
        for g in range(len(stations)):
            best = int(np.argmax(el[g]))
            if el[g, best] >= min_elevation_deg:
                out.append((g, best, float(rng[g, best]), float(el[g, best])))
        return out
    if policy == "shared":
        for g in range(len(stations)):
            mask = el[g] >= min_elevation_deg
            if preferred_elevation_deg is not None:
                high = el[g] >= preferred_elevation_deg
                if high.any():
                    mask = high
            for sat in np.flatnonzero(mask):
                out.append((g, int(sat), float(rng[g, sat]), float(el[g, sat])))
        return out
    owner = np.argmax(el, axis=0)
    for sat in np.flatnonzero(el.max(axis=0) >= min_elevation_deg):
        g = int(owner[sat])
        out.append((g, int(sat), float(rng[g, sat]), float(el[g, sat])))
    out.sort()
    return out


def snapshot_schedule(sim_duration_s: float, n_snapshots: int) -> list[float]:
    if n_snapshots < 1:
        raise ValueError("n_snapshots must be >= 1")
    return [i * sim_duration_s / n_snapshots for i in range(n_snapshots)]


class TopologyBuilder:
    """Builds snapshot graphs for one constellation, station set and link budget."""

    def __init__(
        self,
        spec: WalkerDeltaSpec,
        stations: Sequence[GroundStation],
        params: channel.LinkBudgetParams | None = None,
        min_elevation_deg: float = 13.0,
        ogs_policy: str = "shared",
        preferred_elevation_deg: float | None = 30.0,
    ):
        self.spec = spec
        self.preferred_elevation_deg = preferred_elevation_deg
        self.ogs_policy = ogs_policy
        self.stations = tuple(stations)
        self.params = params or channel.LinkBudgetParams()
        self.min_elevation_deg = min_elevation_deg
        self.elements = generate_walker_delta(spec)
        self.pairs = grid_plus_pairs(spec.planes, spec.sats_per_plane)

    def build(self, t: float, index: int = 0) -> SnapshotGraph:
        pos = propagate_all(self.elements, t)
        n = self.spec.total_sats
        lengths = np.linalg.norm(pos[self.pairs[:, 0]] - pos[self.pairs[:, 1]], axis=1)
        _, _, lisl_cap = channel.received_power_lisl(self.params, lengths)
        edges: list[LinkEdge] = []
        for (a, b), d, c in zip(self.pairs.tolist(), lengths.tolist(), lisl_cap.tolist()):
            edges.append(LinkEdge(a, b, LISL, d, c))
            edges.append(LinkEdge(b, a, LISL, d, c))
        elevations: dict[tuple[int, int], float] = {}
        for g, sat, rng, el in assign_ogs_links(
            self.stations, pos, t, self.min_elevation_deg, self.ogs_policy,
            self.preferred_elevation_deg,
        ):
            gs_node = n + g
            up = channel.received_power_updown(self.params, rng, el, "up")
            down = channel.received_power_updown(self.params, rng, el, "down")
            edges.append(LinkEdge(gs_node, sat, UPLINK, rng, up.capacity_bps))
            edges.append(LinkEdge(sat, gs_node, DOWNLINK, rng, down.capacity_bps))
            elevations[(gs_node, sat)] = el
        return SnapshotGraph(
            index=index,
            time_s=t,
            n_sats=n,
            gs_names=tuple(s.name for s in self.stations),
            edges=edges,
            elevation_deg=elevations,
        )

    def build_all(self, times: Iterable[float]) -> list[SnapshotGraph]:
        return [self.build(t, i) for i, t in enumerate(times)]
