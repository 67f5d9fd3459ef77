"""Blocking ratio, energy efficiency, latency statistics and the feasibility frontier."""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .engine import ChunkRecord, SimResult
from .routing import NS
from .switching import SwitchFabric


def blocking_ratio(n_dropped: int, n_total: int) -> tuple[float, bool]:
    """Percentage of dropped chunks and an ``empty`` flag (True when nothing was generated)."""
    if n_total < 0 or n_dropped < 0 or n_dropped > n_total:
        raise ValueError("need 0 <= n_dropped <= n_total")
    if n_total == 0:
        return 0.0, True
    return 100.0 * n_dropped / n_total, False


def energy_efficiency(
    bits_received: float, fabric: SwitchFabric, n_satellites_in_scope: float, br_percent: float
) -> float:
    """Delivered bits per watt of switching hardware, scaled by ``1 - BR``."""
    if fabric.power_w <= 0:
        raise ValueError("fabric power must be positive")
    if n_satellites_in_scope <= 0:
        return 0.0
    return bits_received / (n_satellites_in_scope * fabric.power_w) * (1.0 - br_percent / 100.0)


@dataclass
class SimReport:
    n_generated: int
    n_delivered: int
    n_dropped: int
    br_percent: float
    empty_run: bool
    drops_by_reason: dict[str, int]
    latency_mean_s: float
    latency_p50_s: float
    latency_p95_s: float
    latency_p99_s: float
    tau_tr_mean_s: float
    tau_prop_mean_s: float
    tau_proc_mean_s: float
    tau_switch_mean_s: float
    wait_mean_s: float
    mean_sats: float
    bits_received: float
    ee_bits_per_w: float
    rate_per_s: float
    reference_capacity_bps: float
    scenario: dict = field(default_factory=dict)

    HEADER = (
        "# latency statistics cover delivered chunks only; percentiles p50/p95/p99;\n"
        "# BR = 100 * dropped / generated; EE = bits / (satellites in scope * P_switch) * (1 - BR)\n"
    )

    def to_text(self) -> str:
        lines = [self.HEADER.rstrip("\n")]
        for k, v in asdict(self).items():
            if k == "scenario":
                continue
            if isinstance(v, dict):
                v = ",".join(f"{a}={b}" for a, b in sorted(v.items())) or "-"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{k}: {v}")
        for k, v in self.scenario.items():
            lines.append(f"scenario.{k}: {v}")
        return "\n".join(lines) + "\n"


def _mean(xs) -> float:
    return float(np.mean(xs)) if len(xs) else math.nan


def summarize(
    result: SimResult,
    fabric: SwitchFabric,
    n_constellation_sats: int,
    power_scope: str = "path",
    include_wait: bool = False,
    scenario: dict | None = None,
) -> SimReport:
    recs = result.records
    delivered = [r for r in recs if r.delivered]
    dropped = [r for r in recs if not r.delivered]
    if any(r.verdict in ("pending", "in_flight") for r in recs):
        raise ValueError("report requested before every chunk was classified")
    br, empty = blocking_ratio(len(dropped), len(recs))
    reasons: dict[str, int] = defaultdict(int)
    for r in dropped:
        reasons[r.verdict.split(":", 1)[-1]] += 1
    totals = np.array([r.total_ns(include_wait) for r in delivered], dtype=float) / NS

    def comp(attr):
        return _mean([getattr(r.latency, attr) / NS for r in delivered])

    bits = float(sum(8 * r.size_bytes for r in delivered))
    if power_scope == "path":
        scope = float(sum(r.n_sats for r in delivered))
    else:
        scope = float(n_constellation_sats)
    ee = energy_efficiency(bits, fabric, scope, br)
    pct = (lambda p: float(np.percentile(totals, p))) if len(totals) else (lambda p: math.nan)
    return SimReport(
        n_generated=len(recs),
        n_delivered=len(delivered),
        n_dropped=len(dropped),
        br_percent=br,
        empty_run=empty,
        drops_by_reason=dict(reasons),
        latency_mean_s=_mean(totals),
        latency_p50_s=pct(50),
        latency_p95_s=pct(95),
        latency_p99_s=pct(99),
        tau_tr_mean_s=comp("tau_tr"),
        tau_prop_mean_s=comp("tau_prop_total"),
        tau_proc_mean_s=comp("tau_proc_total"),
        tau_switch_mean_s=comp("tau_switch_total"),
        wait_mean_s=comp("wait"),
        mean_sats=_mean([r.n_sats for r in delivered]),
        bits_received=bits,
        ee_bits_per_w=ee,
        rate_per_s=result.rate_per_s,
        reference_capacity_bps=result.reference_capacity_bps,
        scenario=dict(scenario or {}),
    )


# ---------------------------------------------------------------------------
# sweeps

SWEEP_FIELDS = (
    "constellation", "fabric", "chunk_size_bytes", "seed", "n_generated", "n_delivered",
    "br_percent", "latency_mean_s", "tau_tr_mean_s", "tau_prop_mean_s", "tau_proc_mean_s",
    "tau_switch_mean_s", "wait_mean_s", "mean_sats", "ee_bits_per_w", "error",
)


def merge_replicas(rows: Sequence[dict]) -> list[dict]:
    """Mean and standard deviation per (constellation, fabric, size) cell over seeds."""
    cells: dict[tuple, list[dict]] = defaultdict(list)
    for r in rows:
        if r.get("error"):
            continue
        cells[(r["constellation"], r["fabric"], r["chunk_size_bytes"])].append(r)
    out = []
    for (const, fab, size), rs in sorted(cells.items()):
        cell = {"constellation": const, "fabric": fab, "chunk_size_bytes": size, "n_seeds": len(rs)}
        for key in ("br_percent", "latency_mean_s", "ee_bits_per_w", "tau_tr_mean_s",
                    "tau_prop_mean_s", "tau_proc_mean_s", "tau_switch_mean_s", "mean_sats"):
            vals = np.array([r[key] for r in rs], dtype=float)
            cell[key] = float(np.nanmean(vals)) if np.isfinite(vals).any() else math.nan
            cell[key + "_std"] = float(np.nanstd(vals)) if np.isfinite(vals).any() else math.nan
        out.append(cell)
    return out


@dataclass(frozen=True)
class FrontierPoint:
    constellation: str
    fabric: str
    max_chunk_bytes: int | None  # None: infeasible at every swept size
    br_percent: float
    latency_mean_s: float
    ee_bits_per_w: float

    @property
    def feasible(self) -> bool:
        return self.max_chunk_bytes is not None


def feasibility_frontier(cells: Iterable[dict], latency_threshold_s: float) -> list[FrontierPoint]:
    """Largest swept chunk size whose mean latency stays within the threshold."""
    groups: dict[tuple[str, str], list[dict]] = defaultdict(list)
    for c in cells:
        groups[(c["constellation"], c["fabric"])].append(c)
    out = []
    for (const, fab), cs in groups.items():
        ok = [c for c in cs if not math.isnan(c["latency_mean_s"]) and c["latency_mean_s"] <= latency_threshold_s]
        if ok:
            best = max(ok, key=lambda c: c["chunk_size_bytes"])
            out.append(FrontierPoint(const, fab, int(best["chunk_size_bytes"]), best["br_percent"],
                                     best["latency_mean_s"], best["ee_bits_per_w"]))
        else:
            out.append(FrontierPoint(const, fab, None, math.nan, math.nan, math.nan))
    return out


def _csv(rows: Sequence[dict], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def sweep_rows_csv(rows: Sequence[dict]) -> str:
    return _csv(rows, SWEEP_FIELDS)


def sweep_matrix_csv(cells: Sequence[dict], metric: str) -> str:
    """Rows = chunk size, columns = ``constellation/fabric``, cells = ``metric``."""
    cols = sorted({(c["constellation"], c["fabric"]) for c in cells})
    sizes = sorted({c["chunk_size_bytes"] for c in cells})
    lut = {(c["constellation"], c["fabric"], c["chunk_size_bytes"]): c[metric] for c in cells}
    lines = ["chunk_size_bytes," + ",".join(f"{a}/{b}" for a, b in cols)]
    for s in sizes:
        vals = [lut.get((a, b, s), "") for a, b in cols]
        lines.append(f"{s}," + ",".join("" if v == "" else repr(float(v)) for v in vals))
    return "\n".join(lines) + "\n"


def blocking_series_csv(cells: Sequence[dict]) -> str:
    """Blocking ratio against chunk size per constellation and fabric."""
    return _csv(cells, ("constellation", "fabric", "chunk_size_bytes", "br_percent", "br_percent_std"))


def latency_breakdown_csv(cells: Sequence[dict]) -> str:
    """Stacked latency components per constellation, fabric and chunk size."""
    return _csv(cells, ("constellation", "fabric", "chunk_size_bytes", "tau_tr_mean_s",
                        "tau_prop_mean_s", "tau_proc_mean_s", "tau_switch_mean_s", "latency_mean_s"))


def frontier_csv(points: Sequence[FrontierPoint]) -> str:
    lines = ["constellation,fabric,max_chunk_bytes,br_percent,latency_mean_s,ee_gbits_per_w"]
    for p in sorted(points, key=lambda p: (p.fabric, p.constellation)):
        size = "infeasible" if p.max_chunk_bytes is None else str(p.max_chunk_bytes)
        lines.append(f"{p.constellation},{p.fabric},{size},{p.br_percent!r},{p.latency_mean_s!r},{p.ee_bits_per_w / 1e9!r}")
    return "\n".join(lines) + "\n"


def read_sweep_rows(text: str) -> list[dict]:
    """Inverse of :func:`sweep_rows_csv` (numbers parsed, blanks become NaN)."""
    rows = []
    for r in csv.DictReader(io.StringIO(text)):
        out = {}
        for k, v in r.items():
            if k in ("constellation", "fabric", "error"):
                out[k] = v or ""
            elif k in ("chunk_size_bytes", "seed", "n_generated", "n_delivered"):
                out[k] = int(v) if v else 0
            else:
                out[k] = float(v) if v else math.nan
        rows.append(out)
    return rows
