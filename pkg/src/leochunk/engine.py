"""Discrete-event core: arrivals, topology changes and transmission completions.

Simulation time is kept in integer nanoseconds so that event ordering and the
latency decomposition are exact and reproducible.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import channel
from .orbital import GroundStation, WalkerDeltaSpec
from .routing import (
    NS,
    SPEED_OF_LIGHT_KM_S,
    Blocked,
    PathCandidate,
    PathReservation,
    ReservationTable,
    first_fit_schedule,
    k_shortest_paths,
    to_ns,
)
from .switching import SwitchFabric, path_insertion_loss
from .topology import SnapshotGraph, TopologyBuilder, snapshot_schedule
from .traffic import Chunk, TrafficConfig, arrival_rate, generate_arrivals, traffic_windows

SNAPSHOT_CHANGE = "snapshot_change"
TRANSMISSION_COMPLETE = "transmission_complete"
CHUNK_ARRIVAL = "chunk_arrival"


@dataclass(order=True, frozen=True)
class Event:
    time_ns: int
    sequence: int
    kind: str = field(compare=False)
    payload: object = field(compare=False, default=None)


class EventQueue:
    """Heap ordered by ``(time, sequence)``; refuses events in the past."""

    def __init__(self):
        self._heap: list[Event] = []
        self._seq = itertools.count()
        self.now_ns = 0

    def push(self, time_ns: int, kind: str, payload=None) -> Event:
        if time_ns < self.now_ns:
            raise ValueError(f"event at {time_ns} ns is before current time {self.now_ns} ns")
        ev = Event(int(time_ns), next(self._seq), kind, payload)
        heapq.heappush(self._heap, ev)
        return ev

    def pop(self) -> Event:
        ev = heapq.heappop(self._heap)
        self.now_ns = ev.time_ns
        return ev

    def __len__(self):
        return len(self._heap)


@dataclass(frozen=True)
class LatencyBreakdown:
    tau_tr: int
    tau_prop_total: int
    tau_proc_total: int
    tau_switch_total: int
    wait: int = 0

    @property
    def total(self) -> int:
        return self.tau_tr + self.tau_prop_total + self.tau_proc_total + self.tau_switch_total


def latency_of(reservation: PathReservation, fabric: SwitchFabric, tau_proc_s: float) -> LatencyBreakdown:
    path = reservation.path
    if len(path.nodes) < 2:
        raise ValueError("path must have distinct endpoints")
    n = path.n_satellites
    return LatencyBreakdown(
        tau_tr=reservation.tau_tr_ns,
        tau_prop_total=to_ns(path.length_km / SPEED_OF_LIGHT_KM_S),
        tau_proc_total=to_ns(n * tau_proc_s),
        tau_switch_total=to_ns(n * fabric.switch_time_s),
    )


# ---------------------------------------------------------------------------

class NetworkContext:
    """Snapshot graphs and cached candidate paths for one constellation.

    Shared read-only by every scenario that runs on the same constellation,
    ground segment, link budget and snapshot schedule.
    """

    def __init__(
        self,
        spec: WalkerDeltaSpec,
        stations: Sequence[GroundStation],
        params: channel.LinkBudgetParams,
        duration_s: float,
        n_snapshots: int,
        min_elevation_deg: float = 13.0,
        ogs_policy: str = "shared",
        k_paths: int = 5,
        preferred_elevation_deg: float | None = 30.0,
    ):
        self.spec = spec
        self.stations = tuple(stations)
        self.params = params
        self.duration_s = duration_s
        self.k_paths = k_paths
        self.times = snapshot_schedule(duration_s, n_snapshots)
        builder = TopologyBuilder(
            spec, self.stations, params, min_elevation_deg, ogs_policy, preferred_elevation_deg
        )
        self.snapshots: list[SnapshotGraph] = builder.build_all(self.times)
        self._routes: dict[tuple[int, int, int], list[PathCandidate]] = {}

    @property
    def n_wavelengths(self) -> int:
        return self.params.n_channels

    def routes(self, snap_idx: int, src_gs: int, dst_gs: int) -> list[PathCandidate]:
        key = (snap_idx, src_gs, dst_gs)
        if key not in self._routes:
            snap = self.snapshots[snap_idx]
            self._routes[key] = k_shortest_paths(
                snap, snap.gs_node(src_gs), snap.gs_node(dst_gs), self.k_paths
            )
        return self._routes[key]

    def reference_capacity_bps(self) -> float:
        """Harmonic mean bottleneck capacity of the shortest route over all pairs and snapshots."""
        inv = []
        g = len(self.stations)
        for i in range(len(self.snapshots)):
            for a, b in itertools.permutations(range(g), 2):
                r = self.routes(i, a, b)
                if r and r[0].bottleneck_capacity_bps > 0:
                    inv.append(1.0 / r[0].bottleneck_capacity_bps)
        if not inv:
            raise ValueError("no connected station pair in any snapshot")
        return 1.0 / float(np.mean(inv))


@dataclass(frozen=True)
class SimConfig:
    tau_proc_s: float = 1e-3
    max_wait_s: float = 10e-3
    include_wait: bool = False
    hold_switch_time: bool = True
    insertion_loss_in_budget: bool = False
    power_scope: str = "path"  # or "constellation"
    chunks_per_snapshot: int | None = None
    min_window_holds: float = 20.0
    max_chunks_per_snapshot: int | None = None
    trace: bool = False

    def __post_init__(self):
        if self.power_scope not in ("path", "constellation"):
            raise ValueError("power_scope must be 'path' or 'constellation'")
        if self.tau_proc_s < 0 or self.max_wait_s < 0:
            raise ValueError("tau_proc_s and max_wait_s must be >= 0")


@dataclass
class ChunkRecord:
    chunk_id: int
    src: int
    dst: int
    size_bytes: int
    arrival_ns: int
    verdict: str = "pending"
    start_ns: int | None = None
    wavelength: int | None = None
    n_sats: int = 0
    latency: LatencyBreakdown | None = None

    @property
    def delivered(self) -> bool:
        return self.verdict == "delivered"

    def total_ns(self, include_wait: bool = False) -> int | None:
        if self.latency is None:
            return None
        return self.latency.total + (self.latency.wait if include_wait else 0)


CSV_HEADER = (
    "chunk_id,src,dst,size,arrival,start,verdict,wavelength,n_sats,"
    "tau_tr,tau_prop,tau_proc,tau_switch,wait,total_L"
)


def records_to_csv(records: Sequence[ChunkRecord], include_wait: bool = False) -> str:
    """Per-chunk CSV. All times are integer nanoseconds."""
    lines = [CSV_HEADER]
    for r in records:
        lat = r.latency
        if lat is None:
            tail = ",,,,,,"
        else:
            tail = (
                f",{lat.tau_tr},{lat.tau_prop_total},{lat.tau_proc_total},"
                f"{lat.tau_switch_total},{lat.wait},{r.total_ns(include_wait)}"
            )
        lines.append(
            f"{r.chunk_id},{r.src},{r.dst},{r.size_bytes},{r.arrival_ns},"
            f"{'' if r.start_ns is None else r.start_ns},{r.verdict},"
            f"{'' if r.wavelength is None else r.wavelength},{r.n_sats}" + tail
        )
    return "\n".join(lines) + "\n"


@dataclass
class SimResult:
    records: list[ChunkRecord]
    rate_per_s: float
    reference_capacity_bps: float
    trace: list[dict] | None = None
    max_event_time_ns: int = 0


class Simulation:
    """One scenario: a constellation context, a fabric and a traffic configuration."""

    def __init__(
        self,
        context: NetworkContext,
        fabric: SwitchFabric,
        traffic: TrafficConfig,
        config: SimConfig = SimConfig(),
        check_invariants: bool = False,
    ):
        self.ctx = context
        self.fabric = fabric
        self.traffic = traffic
        self.config = config
        self.check_invariants = check_invariants

    def _capacity_after_insertion_loss(self, path: PathCandidate) -> PathCandidate:
        loss_db = path_insertion_loss(self.fabric, path.n_satellites)
        if loss_db == 0:
            return path
        b = self.ctx.params.bandwidth_hz
        snr = 2.0 ** (path.bottleneck_capacity_bps / b) - 1.0
        cap = float(channel.capacity(snr * 10 ** (-loss_db / 10), 1.0, b))
        return PathCandidate(path.nodes, path.edges, path.total_prop_delay_s, cap, path.n_satellites)

    def run(self) -> SimResult:
        ctx, cfg = self.ctx, self.config
        ref_cap = ctx.reference_capacity_bps()
        rate = arrival_rate(self.traffic.chunk_size_bytes, ref_cap, self.traffic.target_load, ctx.n_wavelengths)
        setup_ns = to_ns(self.fabric.switch_time_s) if cfg.hold_switch_time else 0
        window = None
        if cfg.chunks_per_snapshot:
            # long enough to reach steady state even when the fabric setup dominates holding time
            hold_s = setup_ns / NS + 8.0 * self.traffic.chunk_size_bytes / ref_cap
            window = max(cfg.chunks_per_snapshot / rate, cfg.min_window_holds * hold_s)
            if cfg.max_chunks_per_snapshot:
                window = min(window, cfg.max_chunks_per_snapshot / rate)
        windows = traffic_windows(ctx.times, ctx.duration_s, window)
        arrivals = generate_arrivals(self.traffic, len(ctx.stations), rate, windows)

        q = EventQueue()
        table = ReservationTable(ctx.n_wavelengths)
        boundaries = [to_ns(t) for t in ctx.times] + [None]
        for i, t in enumerate(ctx.times[1:], start=1):
            q.push(to_ns(t), SNAPSHOT_CHANGE, i)
        records: list[ChunkRecord] = []
        trace = [] if cfg.trace else None
        max_wait_ns = to_ns(cfg.max_wait_s)

        def schedule_next_arrival():
            c = next(arrivals, None)
            if c is not None:
                q.push(to_ns(c.arrival_time_s), CHUNK_ARRIVAL, c)

        schedule_next_arrival()
        snap = 0
        last_time = 0
        while q:
            ev = q.pop()
            if ev.time_ns < last_time:
                raise AssertionError("event time went backwards")
            last_time = ev.time_ns
            if ev.kind == SNAPSHOT_CHANGE:
                snap = ev.payload
                present = ctx.snapshots[snap].edge_keys()
                for cid in table.affected_by(present, ev.time_ns):
                    table.release(cid)
                    rec = records[cid]
                    rec.verdict = "dropped:line_of_sight"
                    rec.latency = None
            elif ev.kind == TRANSMISSION_COMPLETE:
                cid = ev.payload
                if cid in table.active:
                    table.release(cid)
                    records[cid].verdict = "delivered"
            else:
                chunk: Chunk = ev.payload
                schedule_next_arrival()
                rec = ChunkRecord(chunk.chunk_id, chunk.src, chunk.dst, chunk.size_bytes, ev.time_ns)
                records.append(rec)
                cands = ctx.routes(snap, chunk.src, chunk.dst)
                if cfg.insertion_loss_in_budget:
                    cands = [self._capacity_after_insertion_loss(p) for p in cands]
                decision = first_fit_schedule(
                    cands, chunk.chunk_id, chunk.size_bytes, ev.time_ns, table,
                    max_wait_ns, boundaries[snap + 1], setup_ns, trace,
                )
                if isinstance(decision, Blocked):
                    rec.verdict = f"dropped:{decision.reason}"
                else:
                    decision.snapshot_index = snap
                    table.reserve(decision)
                    lat = latency_of(decision, self.fabric, cfg.tau_proc_s)
                    rec.latency = LatencyBreakdown(
                        lat.tau_tr, lat.tau_prop_total, lat.tau_proc_total,
                        lat.tau_switch_total, decision.start_ns - ev.time_ns,
                    )
                    rec.start_ns = decision.start_ns
                    rec.wavelength = decision.wavelength_idx
                    rec.n_sats = decision.path.n_satellites
                    rec.verdict = "in_flight"
                    q.push(decision.end_ns, TRANSMISSION_COMPLETE, chunk.chunk_id)
            if self.check_invariants:
                table.check_invariants()
        if table.active:
            raise AssertionError("reservations left active after the event queue drained")
        return SimResult(records, rate, ref_cap, trace, last_time)
