import pytest

from leochunk.cli import EXIT_INVALID, main

SMALL = """\
constellations: [telesat]
fabrics: [InP-SOA, GLSUN]
chunk_sizes: [100MB, 400MB]
n_snapshots: 4
chunks_per_snapshot: 40
max_chunks_per_snapshot: 200
"""


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "small.yaml"
    p.write_text(SMALL)
    return p


def test_run_writes_summary_and_chunks(cfg_path, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", str(cfg_path), "--fabric", "GLSUN", "--chunk-size", "200MB", "--out", str(out)]) == 0
    summary = (out / "summary.txt").read_text()
    assert "scenario.chunk_size_bytes: 200000000" in summary and "# effective configuration" in summary
    assert (out / "chunks.csv").read_text().startswith("chunk_id,src,dst,size")
    assert "n_generated:" in capsys.readouterr().out


def test_rerun_from_echoed_config_is_identical(cfg_path, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(cfg_path), "--out", str(a)]) == 0
    assert main(["run", str(a / "effective_config.yaml"), "--out", str(b)]) == 0
    assert (a / "chunks.csv").read_bytes() == (b / "chunks.csv").read_bytes()
    assert (a / "summary.txt").read_text() == (b / "summary.txt").read_text()


def test_sweep_then_frontier(cfg_path, tmp_path, capsys):
    out = tmp_path / "sweep"
    assert main(["sweep", str(cfg_path), "--out", str(out), "--workers", "1"]) == 0
    rows = (out / "sweep_rows.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 2
    for name in ("sweep_matrix_br.csv", "sweep_matrix_latency.csv", "sweep_matrix_ee.csv",
                 "blocking_series.csv", "latency_breakdown.csv", "frontier.csv", "effective_config.yaml"):
        assert (out / name).exists()
    capsys.readouterr()
    assert main(["frontier", str(out / "sweep_rows.csv"), "--threshold", "0.06"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("constellation,fabric,max_chunk_bytes") and "telesat,InP-SOA" in text


def test_linkbudget_and_topology(cfg_path, tmp_path, capsys):
    assert main(["linkbudget", "--range-km", "1000", "--elevation-deg", "60", "--direction", "up"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("quantity,value") and "L_FSO_dB" in out and "capacity_Gbps" in out
    assert main(["linkbudget", "--range-km", "3000", "--direction", "lisl"]) == 0
    assert main(["linkbudget", "--range-km", "1000", "--direction", "down"]) == EXIT_INVALID
    edge_file = tmp_path / "edges.txt"
    assert main(["topology", str(cfg_path), "--snapshot", "1", "--out", str(edge_file)]) == 0
    assert edge_file.read_text().startswith("# snapshot 1")
    assert main(["topology", str(cfg_path), "--snapshot", "99"]) == EXIT_INVALID


def test_validation_failure_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("constellations: [telesat]\nfabrics: [WARP]\n")
    assert main(["run", str(bad)]) == EXIT_INVALID
    assert "builtin fabrics" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "nope.yaml")]) == EXIT_INVALID
