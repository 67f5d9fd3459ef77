"""Chunk arrivals: Poisson process between uniformly drawn station pairs."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class Chunk:
    chunk_id: int
    src: int  # ground-station index
    dst: int
    size_bytes: int
    arrival_time_s: float

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError("chunk source and destination must differ")
        if self.size_bytes <= 0:
            raise ValueError("chunk size must be positive")


@dataclass(frozen=True)
class TrafficConfig:
    chunk_size_bytes: int
    target_load: float = 1.5
    seed: int = 1
    duration_s: float = 600.0

    def __post_init__(self):
        if self.target_load <= 0:
            raise ValueError("target_load must be > 0")
        if self.chunk_size_bytes <= 0:
            raise ValueError("chunk_size_bytes must be > 0")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be > 0")


def arrival_rate(
    chunk_size_bytes: float,
    bottleneck_capacity_bps: float,
    target_load: float,
    n_wavelengths: int,
) -> float:
    """Arrivals per second keeping ``target_load`` Erlang per wavelength for any chunk size."""
    if bottleneck_capacity_bps <= 0:
        raise ValueError("capacity must be positive")
    if target_load <= 0:
        raise ValueError("target_load must be > 0")
    return target_load * n_wavelengths * bottleneck_capacity_bps / (8.0 * chunk_size_bytes)


def traffic_windows(
    snapshot_times: Sequence[float], duration_s: float, window_s: float | None
) -> list[tuple[float, float]]:
    """Active arrival windows, one at the start of every snapshot interval.

    ``window_s=None`` gives continuous traffic over ``[0, duration_s)``.
    """
    if window_s is None:
        return [(0.0, duration_s)]
    ends = list(snapshot_times[1:]) + [duration_s]
    return [(t, min(t + window_s, e)) for t, e in zip(snapshot_times, ends)]


def generate_arrivals(
    cfg: TrafficConfig,
    n_stations: int,
    rate: float,
    windows: Sequence[tuple[float, float]] | None = None,
    batch: int = 4096,
) -> Iterator[Chunk]:
    """Poisson arrivals restricted to ``windows`` (default: the whole duration).

    Arrivals are drawn on the concatenated active time axis and mapped back,
    which is the same as an independent Poisson process inside each window.
    """
    if n_stations < 2:
        raise ValueError("need at least two ground stations")
    if rate <= 0:
        return
    windows = list(windows) if windows is not None else [(0.0, cfg.duration_s)]
    offsets = np.cumsum([0.0] + [e - s for s, e in windows])
    active_total = offsets[-1]
    rng = np.random.default_rng(cfg.seed)
    t = 0.0
    cid = 0
    w = 0
    while True:
        gaps = rng.exponential(1.0 / rate, batch)
        srcs = rng.integers(0, n_stations, batch)
        # second station uniform over the remaining ones (draw without replacement)
        dsts = rng.integers(0, n_stations - 1, batch)
        dsts = dsts + (dsts >= srcs)
        for gap, s, d in zip(gaps.tolist(), srcs.tolist(), dsts.tolist()):
            t += gap
            if t >= active_total:
                return
            while offsets[w + 1] <= t:
                w += 1
            real_t = windows[w][0] + (t - offsets[w])
            yield Chunk(cid, s, d, cfg.chunk_size_bytes, real_t)
            cid += 1


def chunks_to_csv(chunks, station_names: Sequence[str] | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["chunk_id", "src", "dst", "size_bytes", "arrival_time_s"])
    for c in chunks:
        src = station_names[c.src] if station_names else c.src
        dst = station_names[c.dst] if station_names else c.dst
        w.writerow([c.chunk_id, src, dst, c.size_bytes, repr(c.arrival_time_s)])
    return buf.getvalue()
