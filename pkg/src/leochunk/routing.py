"""Path computation and wavelength reservation.

K-shortest loop-free paths (Yen) weighted by propagation delay, first-fit
wavelength assignment with end-to-end continuity, and per-(link, wavelength)
reservation timelines kept in integer nanoseconds.
"""
from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, field
from functools import cached_property

from .topology import LinkEdge, SnapshotGraph

SPEED_OF_LIGHT_KM_S = 299792.458
NS = 1_000_000_000


@dataclass(frozen=True)
class PathCandidate:
    nodes: tuple[int, ...]
    edges: tuple[LinkEdge, ...]
    total_prop_delay_s: float
    bottleneck_capacity_bps: float
    n_satellites: int

    @cached_property
    def edge_keys(self) -> tuple[tuple[int, int], ...]:
        return tuple(e.key for e in self.edges)

    @property
    def length_km(self) -> float:
        return sum(e.length_km for e in self.edges)


def _prop_delay(edge: LinkEdge) -> float:
    return edge.length_km / SPEED_OF_LIGHT_KM_S


def _dijkstra(adj, src, dst, banned_nodes, banned_edges):
    dist = {src: 0.0}
    prev: dict[int, tuple[int, LinkEdge]] = {}
    heap = [(0.0, src)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if u == dst:
            break
        done.add(u)
        for v, e in adj.get(u, ()):
            if v in banned_nodes or v in done or (u, v) in banned_edges:
                continue
            nd = d + _prop_delay(e)
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                prev[v] = (u, e)
                heapq.heappush(heap, (nd, v))
    if dst not in dist:
        return None
    nodes, edges = [dst], []
    while nodes[-1] != src:
        u, e = prev[nodes[-1]]
        nodes.append(u)
        edges.append(e)
    return nodes[::-1], edges[::-1]


def _candidate(nodes, edges, n_sats_graph: int) -> PathCandidate:
    return PathCandidate(
        nodes=tuple(nodes),
        edges=tuple(edges),
        total_prop_delay_s=sum(_prop_delay(e) for e in edges),
        bottleneck_capacity_bps=min(e.capacity_bps for e in edges),
        n_satellites=sum(1 for n in nodes if n < n_sats_graph),
    )


def k_shortest_paths(snapshot: SnapshotGraph, src: int, dst: int, k: int = 5) -> list[PathCandidate]:
    """Up to ``k`` loop-free paths in nondecreasing propagation delay (Yen)."""
    if src == dst:
        raise ValueError("source and destination must differ")
    if k < 1:
        return []
    adj = snapshot.adjacency
    first = _dijkstra(adj, src, dst, set(), set())
    if first is None:
        return []
    found = [first]
    pool: list[tuple[float, tuple[int, ...], list[LinkEdge]]] = []
    seen = {tuple(first[0])}
    while len(found) < k:
        last_nodes, last_edges = found[-1]
        for i in range(len(last_nodes) - 1):
            spur = last_nodes[i]
            root_nodes = last_nodes[: i + 1]
            root_edges = last_edges[:i]
            banned_edges = {
                (p_nodes[i], p_nodes[i + 1])
                for p_nodes, _ in found
                if len(p_nodes) > i + 1 and p_nodes[: i + 1] == root_nodes
            }
            banned_nodes = set(root_nodes[:-1])
            tail = _dijkstra(adj, spur, dst, banned_nodes, banned_edges)
            if tail is None:
                continue
            nodes = root_nodes[:-1] + tail[0]
            key = tuple(nodes)
            if key in seen:
                continue
            seen.add(key)
            edges = root_edges + tail[1]
            heapq.heappush(pool, (sum(_prop_delay(e) for e in edges), key, edges))
        if not pool:
            break
        _, nodes, edges = heapq.heappop(pool)
        found.append((list(nodes), edges))
    return [_candidate(n, e, snapshot.n_sats) for n, e in found]


def transmission_delay(size_bytes: int, path: PathCandidate) -> float:
    if path.bottleneck_capacity_bps <= 0:
        raise ValueError("path has zero capacity")
    return 8.0 * size_bytes / path.bottleneck_capacity_bps


def to_ns(seconds: float) -> int:
    return int(round(seconds * NS))


# ---------------------------------------------------------------------------
# reservations

@dataclass
class PathReservation:
    chunk_id: int
    path: PathCandidate
    wavelength_idx: int
    start_ns: int
    end_ns: int
    tau_tr_ns: int
    snapshot_index: int = 0

    @property
    def start_time_s(self) -> float:
        return self.start_ns / NS


@dataclass(frozen=True)
class Blocked:
    reason: str  # "no_path" | "no_resource"


class ReservationTable:
    """Interval timelines per ``(link key, wavelength)``.

    Each timeline is a sorted list of ``(start_ns, end_ns, chunk_id)`` with
    half-open, non-overlapping intervals.
    """

    def __init__(self, n_wavelengths: int):
        self.n_wavelengths = n_wavelengths
        # link key -> one timeline per wavelength
        self._tl: dict[tuple[int, int], list[list[tuple[int, int, int]]]] = {}
        self.active: dict[int, PathReservation] = {}

    def timeline(self, key, wl) -> list[tuple[int, int, int]]:
        per_wl = self._tl.get(key)
        return per_wl[wl] if per_wl else []

    def snapshot_state(self) -> dict:
        return {
            (key, wl): list(tl)
            for key, per_wl in self._tl.items()
            for wl, tl in enumerate(per_wl)
            if tl
        }

    @staticmethod
    def _conflict_end(tl, start, end):
        """End of an interval overlapping [start, end), or None.

        Intervals are disjoint and sorted, so the last one starting before
        ``end`` is the only candidate and also has the latest end.
        """
        i = bisect.bisect_left(tl, (end,))
        if i and tl[i - 1][1] > start:
            return tl[i - 1][1]
        return None

    def earliest_start(self, keys, wl: int, now_ns: int, duration_ns: int, limit_ns: int) -> int | None:
        """Earliest t >= now where [t, t+duration) is free on every key; None if t > limit."""
        get = self._tl.get
        tls = [per_wl[wl] for per_wl in map(get, keys) if per_wl and per_wl[wl]]
        if not tls:
            return now_ns if now_ns <= limit_ns else None
        t = now_ns
        bisect_left = bisect.bisect_left
        while t <= limit_ns:
            moved = False
            for tl in tls:
                i = bisect_left(tl, (t + duration_ns,))
                if i and tl[i - 1][1] > t:
                    t = tl[i - 1][1]
                    moved = True
            if not moved:
                return t
        return None

    def reserve(self, res: PathReservation) -> None:
        if res.chunk_id in self.active:
            raise ValueError(f"chunk {res.chunk_id} already holds a reservation")
        wl = res.wavelength_idx
        if not 0 <= wl < self.n_wavelengths:
            raise ValueError(f"wavelength {wl} outside [0, {self.n_wavelengths})")
        tls = []
        for key in res.path.edge_keys:
            per_wl = self._tl.get(key)
            if per_wl is None:
                per_wl = self._tl[key] = [[] for _ in range(self.n_wavelengths)]
            tl = per_wl[wl]
            if self._conflict_end(tl, res.start_ns, res.end_ns) is not None:
                raise ValueError(f"overlapping reservation on {key} wavelength {wl}")
            tls.append(tl)
        for tl in tls:
            bisect.insort(tl, (res.start_ns, res.end_ns, res.chunk_id))
        self.active[res.chunk_id] = res

    def release(self, chunk_id: int) -> PathReservation:
        try:
            res = self.active.pop(chunk_id)
        except KeyError:
            raise KeyError(f"no active reservation for chunk {chunk_id}") from None
        item = (res.start_ns, res.end_ns, res.chunk_id)
        for key in res.path.edge_keys:
            tl = self._tl[key][res.wavelength_idx]
            tl.pop(bisect.bisect_left(tl, item))
        return res

    def affected_by(self, surviving_keys: set[tuple[int, int]], at_ns: int) -> list[int]:
        """Chunks still holding resources after ``at_ns`` on a link that no longer exists."""
        return sorted(
            cid
            for cid, r in self.active.items()
            if r.end_ns > at_ns and any(k not in surviving_keys for k in r.path.edge_keys)
        )

    def check_invariants(self) -> None:
        for (key, wl), tl in self.snapshot_state().items():
            for (s0, e0, _), (s1, _, _) in zip(tl, tl[1:]):
                if s1 < e0:
                    raise AssertionError(f"overlap on {key} wavelength {wl}")
        for r in self.active.values():
            if not 0 <= r.wavelength_idx < self.n_wavelengths:
                raise AssertionError("wavelength index out of range")


def first_fit_schedule(
    candidates: list[PathCandidate],
    chunk_id: int,
    size_bytes: int,
    now_ns: int,
    table: ReservationTable,
    max_wait_ns: int,
    boundary_ns: int | None = None,
    setup_ns: int = 0,
    trace: list | None = None,
) -> PathReservation | Blocked:
    """First (candidate, wavelength) whose earliest start is within the wait bound.

    Each link on the path is held on one wavelength for ``setup_ns`` (fabric
    reconfiguration) plus the bottleneck transmission time. Reservations that
    would run past ``boundary_ns`` (next topology change) are refused.
    """
    if not candidates:
        return Blocked("no_path")
    limit = now_ns + max_wait_ns
    for ci, path in enumerate(candidates):
        if path.bottleneck_capacity_bps <= 0:
            continue
        tau_tr = to_ns(transmission_delay(size_bytes, path))
        hold = setup_ns + tau_tr
        keys = path.edge_keys
        for wl in range(table.n_wavelengths):
            start = table.earliest_start(keys, wl, now_ns, hold, limit)
            ok = start is not None and (boundary_ns is None or start + hold <= boundary_ns)
            if trace is not None:
                trace.append(
                    {"chunk_id": chunk_id, "candidate": ci, "wavelength": wl,
                     "start_ns": start, "verdict": "accept" if ok else "reject"}
                )
            if ok:
                return PathReservation(chunk_id, path, wl, start, start + hold, tau_tr)
    if all(p.bottleneck_capacity_bps <= 0 for p in candidates):
        return Blocked("no_path")
    return Blocked("no_resource")
