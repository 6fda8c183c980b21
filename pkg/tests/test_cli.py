import random

import pytest

from paramtuner.cli import main
from paramtuner.experiments import parse_raw_csv
from paramtuner.landscape import (
    generate_synthetic,
    load_cached_landscape,
    save_landscape_csv,
)


def run_cli(*argv):
    return main(list(argv))


def test_run_writes_deterministic_csv(tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["run", "--family", "synthetic", "--sizes", "4,8", "--reps", "10"]
    assert run_cli(*args, "--out", str(p1)) == 0
    assert run_cli(*args, "--out", str(p2)) == 0
    assert p1.read_bytes() == p2.read_bytes()
    records = parse_raw_csv(str(p1))
    assert len(records) == 20
    assert {r.space_size for r in records} == {4, 8}
    assert all(r.error == "" for r in records)


def test_run_rejects_invalid_scenario(tmp_path):
    out = tmp_path / "x.csv"
    assert run_cli("run", "--family", "synthetic", "--sizes", "1", "--out", str(out)) == 2
    assert run_cli("run", "--family", "ridge-ea", "--sizes", "12", "--out", str(out)) == 2
    assert not out.exists()


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "tune.cfg"
    cfg.write_text("reps = 7\nseed = 3\n")
    out = tmp_path / "r.csv"
    assert run_cli(
        "run", "--config", str(cfg), "--family", "synthetic", "--out", str(out)
    ) == 0
    assert len(parse_raw_csv(str(out))) == 7
    # explicit flags beat the config file
    assert run_cli(
        "run", "--config", str(cfg), "--family", "synthetic",
        "--reps", "4", "--out", str(out),
    ) == 0
    assert len(parse_raw_csv(str(out))) == 4


def test_config_file_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "tune.cfg"
    cfg.write_text("budget = 12\n")
    out = tmp_path / "r.csv"
    assert run_cli(
        "run", "--config", str(cfg), "--family", "synthetic", "--out", str(out)
    ) == 2


def test_summarize_pipeline(tmp_path):
    raw1 = tmp_path / "lstep.csv"
    raw2 = tmp_path / "harmonic.csv"
    base = ["run", "--family", "synthetic", "--sizes", "16", "--reps", "15"]
    assert run_cli(*base, "--operator", "lstep", "--out", str(raw1)) == 0
    assert run_cli(*base, "--operator", "harmonic", "--out", str(raw2)) == 0
    merged = tmp_path / "merged.csv"
    merged.write_text(
        raw1.read_text() + "".join(raw2.read_text().splitlines(True)[1:])
    )
    out = tmp_path / "summary.csv"
    assert run_cli(
        "summarize", "--raw", str(merged),
        "--baseline", "lstep", "--candidate", "harmonic", "--out", str(out),
    ) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("family,configurator,operator")
    assert len(lines) == 3  # one baseline and one candidate row


def test_summarize_missing_file_exits_2(tmp_path):
    assert run_cli(
        "summarize", "--raw", str(tmp_path / "nope.csv"),
        "--baseline", "a", "--candidate", "b", "--out", str(tmp_path / "s.csv"),
    ) == 2


def test_landscape_check_certificates(tmp_path):
    land = generate_synthetic("unimodal", 32, random.Random(5))
    path = tmp_path / "grid.csv"
    save_landscape_csv(land, str(path))
    assert run_cli("landscape-check", "--file", str(path)) == 0


def test_landscape_check_explicit_pair(tmp_path):
    # a distance-monotone landscape satisfies the tightest slack (1, 1)
    land = generate_synthetic("unimodal", 8, random.Random(5))
    path = tmp_path / "line.csv"
    save_landscape_csv(land, str(path))
    assert run_cli(
        "landscape-check", "--file", str(path), "--alpha", "1.0", "--beta", "1"
    ) == 0


def test_landscape_check_needs_alpha_for_grids(tmp_path):
    path = tmp_path / "grid.csv"
    path.write_text(
        "a,b,quality\n"
        "1.0,1.0,0.0\n1.0,2.0,1.0\n2.0,1.0,2.0\n2.0,2.0,3.0\n"
    )
    assert run_cli("landscape-check", "--file", str(path)) == 2


def test_evaluate_landscape_generates_and_loads(tmp_path):
    out = tmp_path / "saps.csv"
    assert run_cli(
        "evaluate-landscape", "--out", str(out),
        "--generate", "1", "--vars", "20", "--clauses", "60",
        "--reps", "1", "--kappa", "30",
        "--alpha-count", "2", "--rho-count", "2", "--top", "1",
    ) == 0
    land = load_cached_landscape(str(out), top=1)
    assert land.space.phis == (2, 2)
    assert len(land.targets) == 1
    assert all(0.0 <= q <= 60.0 for q in land.qualities)  # mean satisfied clauses


def test_evaluate_landscape_reads_dimacs(tmp_path):
    cnf = tmp_path / "tiny.cnf"
    cnf.write_text("c tiny\np cnf 3 2\n1 -2 0\n2 3 0\n")
    out = tmp_path / "saps.csv"
    assert run_cli(
        "evaluate-landscape", "--out", str(out),
        "--instances", str(cnf),
        "--reps", "1", "--kappa", "10",
        "--alpha-count", "2", "--rho-count", "2", "--top", "1",
    ) == 0
    land = load_cached_landscape(str(out), top=1)
    assert len(land.qualities) == 4


def test_evaluate_landscape_rejects_zero_instances(tmp_path):
    out = tmp_path / "saps.csv"
    assert run_cli(
        "evaluate-landscape", "--out", str(out), "--generate", "0",
    ) == 2
