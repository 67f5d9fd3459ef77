"""Scenario execution and (constellation x fabric x size x seed) sweeps."""
from __future__ import annotations

import logging
import multiprocessing as mp
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import metrics
from .config import ScenarioConfig
from .engine import NetworkContext, SimResult, Simulation
from .metrics import SimReport
from .orbital import WalkerDeltaSpec
from .switching import SwitchFabric
from .traffic import TrafficConfig

log = logging.getLogger(__name__)


def build_context(cfg: ScenarioConfig, spec: WalkerDeltaSpec) -> NetworkContext:
    return NetworkContext(
        spec, cfg.ground_stations, cfg.link_budget, cfg.duration_s, cfg.n_snapshots,
        cfg.min_elevation_deg, cfg.ogs_policy, cfg.k_paths, cfg.preferred_elevation_deg,
    )


def run_scenario(
    cfg: ScenarioConfig,
    ctx: NetworkContext,
    fabric: SwitchFabric,
    chunk_size_bytes: int,
    seed: int,
    check_invariants: bool = False,
) -> tuple[SimReport, SimResult]:
    traffic = TrafficConfig(chunk_size_bytes, cfg.target_load, seed, cfg.duration_s)
    result = Simulation(ctx, fabric, traffic, cfg.sim_config(), check_invariants).run()
    scenario = {
        "constellation": ctx.spec.name, "fabric": fabric.name,
        "chunk_size_bytes": chunk_size_bytes, "seed": seed,
    }
    report = metrics.summarize(
        result, fabric, ctx.spec.total_sats, cfg.power_scope, cfg.include_wait, scenario
    )
    return report, result


def report_row(report: SimReport) -> dict:
    row = dict(report.scenario)
    for k in metrics.SWEEP_FIELDS:
        if k not in row and hasattr(report, k):
            row[k] = getattr(report, k)
    row["error"] = ""
    return row


# Contexts are built once in the parent and inherited by forked workers.
_CONTEXTS: dict[str, NetworkContext] = {}
_CONFIG: ScenarioConfig | None = None


def _cell(args) -> dict:
    const, fabric_name, size, seed = args
    try:
        report, _ = run_scenario(_CONFIG, _CONTEXTS[const], _CONFIG.fabric(fabric_name), size, seed)
        return report_row(report)
    except Exception as exc:  # one bad cell must not abort the sweep
        log.debug("cell %s failed:\n%s", args, traceback.format_exc())
        return {"constellation": const, "fabric": fabric_name, "chunk_size_bytes": size,
                "seed": seed, "error": f"{type(exc).__name__}: {exc}"}


@dataclass
class SweepResult:
    rows: list[dict]
    cells: list[dict]
    frontier: list[metrics.FrontierPoint]

    @property
    def failures(self) -> list[dict]:
        return [r for r in self.rows if r.get("error")]


def run_sweep(cfg: ScenarioConfig, workers: int | None = None, out_dir=None) -> SweepResult:
    """Run the Cartesian product of the config's grid, merge replicas, find the frontier."""
    global _CONFIG
    _CONFIG = cfg
    _CONTEXTS.clear()
    for spec in cfg.constellations:
        ctx = build_context(cfg, spec)
        ctx.reference_capacity_bps()  # warms the route cache before forking
        _CONTEXTS[spec.name] = ctx
    tasks = [
        (c.name, f.name, s, seed)
        for c in cfg.constellations
        for f in cfg.fabrics
        for s in cfg.chunk_sizes
        for seed in cfg.seeds
    ]
    workers = workers if workers is not None else min(len(tasks), len(os.sched_getaffinity(0)))
    if workers <= 1 or "fork" not in mp.get_all_start_methods():
        rows = [_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(workers, mp_context=mp.get_context("fork")) as pool:
            rows = list(pool.map(_cell, tasks, chunksize=1))
    cells = metrics.merge_replicas(rows)
    frontier = metrics.feasibility_frontier(cells, cfg.latency_threshold_s)
    res = SweepResult(rows, cells, frontier)
    if out_dir is not None:
        write_sweep(res, cfg, out_dir)
    return res


def write_sweep(res: SweepResult, cfg: ScenarioConfig, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "effective_config.yaml").write_text(cfg.to_yaml())
    (out / "sweep_rows.csv").write_text(metrics.sweep_rows_csv(res.rows))
    for metric, name in (("br_percent", "br"), ("latency_mean_s", "latency"), ("ee_bits_per_w", "ee")):
        (out / f"sweep_matrix_{name}.csv").write_text(metrics.sweep_matrix_csv(res.cells, metric))
    (out / "blocking_series.csv").write_text(metrics.blocking_series_csv(res.cells))
    (out / "latency_breakdown.csv").write_text(metrics.latency_breakdown_csv(res.cells))
    (out / "frontier.csv").write_text(
        f"# latency_threshold_s: {cfg.latency_threshold_s!r}\n" + metrics.frontier_csv(res.frontier)
    )
