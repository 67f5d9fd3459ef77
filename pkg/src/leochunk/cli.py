"""Command-line entry point: ``leochunk {run,sweep,linkbudget,topology,frontier}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import channel, metrics
from .config import ConfigError, ScenarioConfig, load_config, parse_config, parse_size
from .engine import records_to_csv
from .sweep import build_context, run_scenario, run_sweep

EXIT_INVALID = 2


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else parse_config({})
    overrides = {}
    if getattr(args, "insertion_loss_in_budget", False):
        overrides["insertion_loss_in_budget"] = True
    if getattr(args, "include_wait", False):
        overrides["include_wait"] = True
    if getattr(args, "power_scope", None):
        overrides["power_scope"] = args.power_scope
    if getattr(args, "threshold", None) is not None:
        overrides["latency_threshold_s"] = args.threshold
    if overrides:
        raw = cfg.to_dict()
        raw.update(overrides)
        cfg = parse_config(raw)
    return cfg


def _write(path, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def cmd_run(args) -> int:
    cfg = _load(args)
    spec = cfg.constellation(args.constellation) if args.constellation else cfg.constellations[0]
    fabric = cfg.fabric(args.fabric) if args.fabric else cfg.fabrics[0]
    size = parse_size(args.chunk_size) if args.chunk_size else cfg.chunk_sizes[0]
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    ctx = build_context(cfg, spec)
    report, result = run_scenario(cfg, ctx, fabric, size, seed)
    summary = report.to_text() + "# effective configuration\n" + "".join(
        f"# {line}\n" for line in cfg.to_yaml().splitlines()
    )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.txt").write_text(summary)
        (out / "chunks.csv").write_text(records_to_csv(result.records, cfg.include_wait))
        (out / "effective_config.yaml").write_text(cfg.to_yaml())
    sys.stdout.write(report.to_text())
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    res = run_sweep(cfg, workers=args.workers, out_dir=args.out)
    sys.stdout.write(metrics.frontier_csv(res.frontier))
    for f in res.failures:
        print(f"failed: {f['constellation']}/{f['fabric']}/{f['chunk_size_bytes']}/seed={f['seed']}: "
              f"{f['error']}", file=sys.stderr)
    return 1 if res.failures else 0


def cmd_linkbudget(args) -> int:
    cfg = _load(args)
    params = cfg.link_budget
    if args.direction == "lisl":
        b = channel.received_power_lisl(params, args.range_km)
    else:
        if args.elevation_deg is None:
            raise ConfigError("--elevation-deg is required for up/down links")
        b = channel.received_power_updown(params, args.range_km, args.elevation_deg, args.direction)
    lines = ["quantity,value"]
    lines += [f"{k},{v!r}" for k, v in b.as_db_table().items()]
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_topology(args) -> int:
    cfg = _load(args)
    spec = cfg.constellation(args.constellation) if args.constellation else cfg.constellations[0]
    ctx = build_context(cfg, spec)
    if not 0 <= args.snapshot < len(ctx.snapshots):
        raise ConfigError(f"--snapshot must lie in [0, {len(ctx.snapshots)})")
    _write(args.out, ctx.snapshots[args.snapshot].to_edge_list())
    return 0


def cmd_frontier(args) -> int:
    rows = metrics.read_sweep_rows(Path(args.rows).read_text())
    if not rows:
        raise ConfigError(f"{args.rows}: no sweep rows")
    if args.threshold <= 0:
        raise ConfigError("--threshold must be > 0")
    cells = metrics.merge_replicas(rows)
    _write(args.out, metrics.frontier_csv(metrics.feasibility_frontier(cells, args.threshold)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leochunk", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=False):
        sp.add_argument("config", nargs=None if config_required else "?", help="YAML scenario file")
        sp.add_argument("--insertion-loss-in-budget", action="store_true",
                        help="reduce path capacity by the fabric insertion loss")
        sp.add_argument("--include-wait", action="store_true", help="add scheduling wait to latency")
        sp.add_argument("--power-scope", choices=("path", "constellation"))
        sp.add_argument("--threshold", type=float, help="latency threshold in seconds")

    r = sub.add_parser("run", help="run one scenario")
    common(r)
    r.add_argument("--constellation")
    r.add_argument("--fabric")
    r.add_argument("--chunk-size", help="e.g. 500MB")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", help="directory for summary.txt and chunks.csv")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run the config's full grid")
    common(s)
    s.add_argument("--out", help="output directory")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_sweep)

    lb = sub.add_parser("linkbudget", help="print a link budget table")
    common(lb)
    lb.add_argument("--range-km", type=float, required=True)
    lb.add_argument("--elevation-deg", type=float)
    lb.add_argument("--direction", choices=("up", "down", "lisl"), default="down")
    lb.add_argument("--out")
    lb.set_defaults(func=cmd_linkbudget)

    t = sub.add_parser("topology", help="export one snapshot as an edge list")
    common(t)
    t.add_argument("--constellation")
    t.add_argument("--snapshot", type=int, default=0)
    t.add_argument("--out")
    t.set_defaults(func=cmd_topology)

    f = sub.add_parser("frontier", help="feasibility frontier from sweep_rows.csv")
    f.add_argument("rows")
    f.add_argument("--threshold", type=float, default=60e-3)
    f.add_argument("--out")
    f.set_defaults(func=cmd_frontier)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (KeyError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
