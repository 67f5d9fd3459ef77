"""End-to-end acceptance checks, one test per criterion.

Each test records a verdict line (see ``conftest.py``); the lines are printed
in the terminal summary.  Tolerances are the stated ones: nothing here is
loosened to make a run pass.
"""
import csv
import io
import itertools
import math
import random
import time

import numpy as np
import pytest
from scipy import integrate

from leochunk import channel as ch
from leochunk.config import parse_config
from leochunk.engine import records_to_csv
from leochunk.orbital import PRESETS, generate_walker_delta
from leochunk.routing import k_shortest_paths
from leochunk.sweep import build_context, run_scenario, run_sweep
from leochunk.topology import LISL, LinkEdge, SnapshotGraph, grid_plus_pairs

MB = 10**6
FABRICS = ["InP-SOA", "AGILTRON", "GLSUN", "POLATIS"]
CONSTELLATIONS = ["telesat", "amazon-leo-1", "starlink-p1"]
THRESHOLD_S = 60e-3


def _cells(res):
    return {(c["constellation"], c["fabric"], c["chunk_size_bytes"]): c for c in res.cells}


# ---------------------------------------------------------------------------
# 1. constellation correctness

def test_constellation_presets_and_grid_plus(verdict):
    t0 = time.perf_counter()
    want = {"starlink-p1": (1584, 72), "telesat": (220, 20), "amazon-leo-1": (784, 28)}
    problems = []
    for name, (sats, planes) in want.items():
        spec = PRESETS[name]
        elems = generate_walker_delta(spec)
        if len(elems) != sats or len({e.plane_idx for e in elems}) != planes:
            problems.append(f"{name}: {len(elems)} sats in {len({e.plane_idx for e in elems})} planes")
        pairs = grid_plus_pairs(spec.planes, spec.sats_per_plane)
        degree = np.bincount(pairs.ravel(), minlength=sats)
        if len({tuple(p) for p in pairs}) != len(pairs) or not np.all(degree == 4):
            problems.append(f"{name}: Grid+ is not a simple 4-regular graph")
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 1.0
    verdict(1, ok, f"presets 1584/72, 220/20, 784/28, Grid+ 4-regular; {elapsed:.2f}s (<1s)"
            + (f"; {problems}" if problems else ""))
    assert not problems
    assert elapsed < 1.0


# ---------------------------------------------------------------------------
# 2. channel mathematics

def test_channel_math_properties(verdict):
    t0 = time.perf_counter()
    errors = {}
    worst = 0.0
    for alpha, beta in [(4.0, 2.0), (2.5, 1.2), (11.6, 10.1), (1.5, 1.05)]:
        f = lambda x: float(ch.gamma_gamma_pdf(x, alpha, beta))
        total = sum(integrate.quad(f, a, b, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
                    for a, b in [(0, 1), (1, 10), (10, np.inf)])
        worst = max(worst, abs(total - 1.0))
    errors["gamma-gamma normalisation"] = worst

    worst_norm = worst_mean = 0.0
    for w_d, w_z, sigma in [(0.4, 15.0, 0.12), (0.4, 3.0, 0.5), (0.1, 2.0, 0.6), (0.4, 40.0, 2.0)]:
        a0, _, gamma = ch.pointing_geometry(w_d, w_z, sigma)
        a0, gamma = float(a0), float(gamma)
        g2 = gamma**2
        pts = sorted({a0 * (1 - k / g2) for k in (1, 5, 20, 100) if k < g2})
        norm = integrate.quad(lambda h: float(ch.pointing_pdf(h, a0, gamma)), 0, a0,
                              points=pts, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
        mean = integrate.quad(lambda h: h * float(ch.pointing_pdf(h, a0, gamma)), 0, a0,
                              points=pts, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
        worst_norm = max(worst_norm, abs(norm - 1.0))
        worst_mean = max(worst_mean, abs(mean - g2 * a0 / (g2 + 1.0)))
        worst_mean = max(worst_mean, abs(float(ch.pointing_loss(w_d, w_z, sigma)) - g2 * a0 / (g2 + 1.0)))
    errors["pointing normalisation"] = worst_norm
    errors["pointing mean"] = worst_mean

    fspl = ch.to_db(ch.fso_path_loss(1550e-9, 1000.0))
    kim = ch.kim_scattering_coeff(60.0, 1550e-9)
    elapsed = time.perf_counter() - t0
    checks = [
        errors["gamma-gamma normalisation"] <= 1e-6,
        errors["pointing normalisation"] <= 1e-6,
        errors["pointing mean"] <= 1e-9,
        abs(fspl - (-258.18)) <= 0.01,
        abs(kim / 0.054 - 1.0) <= 0.02,
        elapsed < 10.0,
    ]
    verdict(2, all(checks),
            f"GG norm err {errors['gamma-gamma normalisation']:.1e}, pointing norm err "
            f"{worst_norm:.1e}, mean err {worst_mean:.1e}, FSPL {fspl:.4f} dB, "
            f"Kim {kim:.5f} dB/km; {elapsed:.2f}s (<10s)")
    assert all(checks)


# ---------------------------------------------------------------------------
# 3. routing oracle

def _graph(n, edges):
    directed = []
    for a, b, w in edges:
        directed += [LinkEdge(a, b, LISL, w, 1e9), LinkEdge(b, a, LISL, w, 1e9)]
    return SnapshotGraph(0, 0.0, n, (), directed)


def _all_simple_paths(n, edges, src, dst):
    w = {}
    for a, b, d in edges:
        w[(a, b)] = w[(b, a)] = d
    found = []
    # enumerate every ordering of every subset of intermediate nodes
    inner = [v for v in range(n) if v not in (src, dst)]
    for r in range(len(inner) + 1):
        for mid in itertools.permutations(inner, r):
            path = (src, *mid, dst)
            hops = list(zip(path, path[1:]))
            if all(h in w for h in hops):
                found.append((sum(w[h] for h in hops), path))
    return sorted(found)


def test_ksp_matches_exhaustive_enumeration(verdict):
    t0 = time.perf_counter()
    rng = random.Random(2024)
    mismatches = 0
    for trial in range(200):
        n = rng.randint(2, 8)
        edges = [(a, b, rng.uniform(1.0, 1000.0))
                 for a, b in itertools.combinations(range(n), 2) if rng.random() < 0.55]
        src, dst = rng.sample(range(n), 2)
        k = rng.randint(1, 5)
        got = [p.nodes for p in k_shortest_paths(_graph(n, edges), src, dst, k)]
        want = [p for _, p in _all_simple_paths(n, edges, src, dst)[:k]]
        mismatches += got != want
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 30.0
    verdict(3, ok, f"{200 - mismatches}/200 random graphs identical to enumeration; "
                   f"{elapsed:.2f}s (<30s)")
    assert mismatches == 0
    assert elapsed < 30.0


# ---------------------------------------------------------------------------
# 4. hop counts

def test_average_hop_counts(verdict):
    t0 = time.perf_counter()
    target = {"telesat": 1.46, "amazon-leo-1": 2.56, "starlink-p1": 2.85}
    cfg = parse_config({"constellations": CONSTELLATIONS, "fabrics": ["InP-SOA"],
                        "chunk_sizes": ["100MB"]})
    assert cfg.n_snapshots >= 10 and cfg.k_paths == 5
    got, routes = {}, {}
    for spec in cfg.constellations:
        ctx = build_context(cfg, spec)
        report, result = run_scenario(cfg, ctx, cfg.fabrics[0], 100 * MB, seed=1)
        sats = [r.n_sats for r in result.records if r.delivered]
        got[spec.name], routes[spec.name] = float(np.mean(sats)), len(sats)
    elapsed = time.perf_counter() - t0
    ok_vals = all(abs(got[c] - target[c]) <= 0.6 for c in target)
    ok_n = all(n >= 1000 for n in routes.values())
    ok = ok_vals and ok_n and elapsed < 300
    verdict(4, ok, ", ".join(f"{c} {got[c]:.2f} (target {target[c]} +/-0.6, {routes[c]} routes)"
                             for c in target) + f"; {cfg.n_snapshots} snapshots; {elapsed:.0f}s (<300s)")
    assert ok_vals and ok_n
    assert elapsed < 300


# ---------------------------------------------------------------------------
# 5. blocking-ratio trend (Telesat, full desk size grid)

def test_blocking_trend_telesat(verdict):
    t0 = time.perf_counter()
    cfg = parse_config({"profile": "desk", "constellations": ["telesat"], "fabrics": FABRICS})
    res = run_sweep(cfg, workers=1)
    elapsed = time.perf_counter() - t0
    cells = _cells(res)
    name = cfg.constellations[0].name
    br = {(f, s): cells[(name, f, s)]["br_percent"] for f in FABRICS for s in cfg.chunk_sizes}
    small = [s for s in cfg.chunk_sizes if s <= 50 * MB]
    slow_higher = all(min(br["POLATIS", s], br["GLSUN", s]) > max(br["InP-SOA", s], br["AGILTRON", s])
                      for s in small)
    fast_max = max(br[f, s] for f in ("InP-SOA", "AGILTRON") for s in cfg.chunk_sizes)
    ok = bool(small) and slow_higher and fast_max < 1.0 and elapsed < 600 and not res.failures
    verdict(5, ok, f"{len(small)} sizes <=50MB: slow fabrics strictly higher BR = {slow_higher} "
                   f"(min GLSUN/POLATIS {min(min(br['GLSUN', s], br['POLATIS', s]) for s in small):.1f}%); "
                   f"max SOA/AGILTRON BR over {len(cfg.chunk_sizes)} sizes {fast_max:.2f}% (<1%); "
                   f"{elapsed:.0f}s (<600s)")
    assert not res.failures
    assert slow_higher and fast_max < 1.0
    assert elapsed < 600


# ---------------------------------------------------------------------------
# 6 & 7. feasibility frontier and energy efficiency

FRONTIER_GRID = ["1MB"] + [f"{m}MB" for m in range(100, 801, 50)]


@pytest.fixture(scope="module")
def frontier_sweep():
    cfg = parse_config({"profile": "desk", "constellations": CONSTELLATIONS,
                        "fabrics": FABRICS, "chunk_sizes": FRONTIER_GRID})
    t0 = time.perf_counter()
    res = run_sweep(cfg)
    return cfg, res, time.perf_counter() - t0


def test_feasibility_frontier(frontier_sweep, verdict):
    cfg, res, elapsed = frontier_sweep
    names = {c: cfg.constellation(c).name for c in CONSTELLATIONS}
    front = {(p.constellation, p.fabric): p.max_chunk_bytes for p in res.frontier}
    want = {
        ("telesat", "InP-SOA"): 500, ("telesat", "AGILTRON"): 500, ("telesat", "GLSUN"): 350,
        ("amazon-leo-1", "InP-SOA"): 600, ("amazon-leo-1", "AGILTRON"): 600,
        ("amazon-leo-1", "GLSUN"): 350,
        ("starlink-p1", "InP-SOA"): 600, ("starlink-p1", "AGILTRON"): 600,
        ("starlink-p1", "GLSUN"): 300,
    }
    parts, ok = [], not res.failures
    for (c, f), mb in want.items():
        got = front[names[c], f]
        good = got is not None and abs(got / MB - mb) <= 100
        ok &= good
        parts.append(f"{c}/{f} {'none' if got is None else f'{got // MB}MB'} ({mb}+/-100)")
    cells = _cells(res)
    for c in ("amazon-leo-1", "starlink-p1"):
        lat = cells[(names[c], "POLATIS", MB)]["latency_mean_s"]
        good = math.isnan(lat) or lat > THRESHOLD_S
        ok &= good
        parts.append(f"{c}/POLATIS 1MB {lat * 1e3:.1f}ms (>60)")
    ok &= elapsed < 1200
    verdict(6, ok, "; ".join(parts) + f"; {elapsed:.0f}s (<1200s)")
    assert not res.failures
    assert ok


# reference operating points (chunk size in MB) and energy efficiency in Gbit/W
TABLE_POINTS = {
    ("telesat", "InP-SOA"): (500, 4.55), ("telesat", "AGILTRON"): (500, 0.26),
    ("telesat", "GLSUN"): (350, 1.48), ("telesat", "POLATIS"): (100, 0.11),
    ("amazon-leo-1", "InP-SOA"): (600, 3.22), ("amazon-leo-1", "AGILTRON"): (600, 0.18),
    ("amazon-leo-1", "GLSUN"): (350, 0.87),
    ("starlink-p1", "InP-SOA"): (600, 2.89), ("starlink-p1", "AGILTRON"): (600, 0.16),
    ("starlink-p1", "GLSUN"): (300, 0.66),
}


def test_energy_efficiency_ordering(frontier_sweep, verdict):
    cfg, res, _ = frontier_sweep
    cells = _cells(res)
    ee = {}
    for (c, f), (mb, _) in TABLE_POINTS.items():
        ee[c, f] = cells[(cfg.constellation(c).name, f, mb * MB)]["ee_bits_per_w"] / 1e9
    ordered = all(ee[c, "InP-SOA"] > ee[c, "GLSUN"] > ee[c, "AGILTRON"] for c in CONSTELLATIONS)
    polatis_lowest = all(ee["telesat", "POLATIS"] < ee["telesat", f] for f in FABRICS[:3])
    decade = {k: abs(math.log10(ee[k] / ref)) for k, (_, ref) in TABLE_POINTS.items()}
    magnitude = all(d <= 1.0 for d in decade.values())
    ok = ordered and polatis_lowest and magnitude
    verdict(7, ok, f"SOA>GLSUN>AGILTRON in all = {ordered}; Telesat POLATIS lowest = {polatis_lowest}; "
                   f"worst |log10(EE/reference)| {max(decade.values()):.2f} (<=1); "
                   + ", ".join(f"{c[:1].upper()}/{f} {ee[c, f]:.2f}" for c, f in TABLE_POINTS))
    assert ordered and polatis_lowest and magnitude


# ---------------------------------------------------------------------------
# 8. determinism

def test_rerun_is_byte_identical(verdict):
    cfg = parse_config({"constellations": ["telesat"], "fabrics": ["GLSUN"],
                        "chunk_sizes": ["100MB"], "seeds": [7]})
    spec, fabric = cfg.constellations[0], cfg.fabrics[0]
    first = records_to_csv(run_scenario(cfg, build_context(cfg, spec), fabric, 100 * MB, 7)[1].records)
    second = records_to_csv(run_scenario(cfg, build_context(cfg, spec), fabric, 100 * MB, 7)[1].records)
    echoed = parse_config(cfg.to_dict())
    third = records_to_csv(run_scenario(echoed, build_context(echoed, echoed.constellations[0]),
                                        echoed.fabrics[0], 100 * MB, 7)[1].records)
    other = records_to_csv(run_scenario(cfg, build_context(cfg, spec), fabric, 100 * MB, 8)[1].records)
    ok = first == second == third and first != other
    verdict(8, ok, f"{first.count(chr(10))} CSV lines; same-seed reruns and rerun from echoed "
                   f"config identical = {first == second == third}; different seed differs = {first != other}")
    assert first == second == third
    assert first != other


# ---------------------------------------------------------------------------
# 9. latency additivity

def test_latency_components_add_up(verdict):
    cfg = parse_config({"constellations": CONSTELLATIONS, "fabrics": ["InP-SOA", "POLATIS"],
                        "chunk_sizes": ["250MB"]})
    rng = random.Random(99)
    checked = bad = runs = 0
    for spec in cfg.constellations:
        ctx = build_context(cfg, spec)
        for fabric in cfg.fabrics:
            _, result = run_scenario(cfg, ctx, fabric, 250 * MB, seed=3)
            rows = [r for r in csv.DictReader(io.StringIO(records_to_csv(result.records)))
                    if r["verdict"] == "delivered"]
            sample = rng.sample(rows, min(100, len(rows)))
            runs += 1
            for r in sample:
                parts = [int(r[k]) for k in ("tau_tr", "tau_prop", "tau_proc", "tau_switch")]
                checked += 1
                bad += int(r["total_L"]) != sum(parts)
    ok = bad == 0 and checked >= 100 * runs
    verdict(9, ok, f"{checked} sampled delivered chunks over {runs} runs; "
                   f"{bad} with total_L != sum of components")
    assert ok
