import random
import statistics

import pytest

from paramtuner.configurators import BenchmarkBackend, LandscapeBackend
from paramtuner.experiments import (
    ConfigError,
    RAW_HEADER,
    ScenarioSpec,
    SummaryRow,
    TrialRecord,
    _derive_seed,
    _materialize,
    _slice_saps,
    accounting_mode,
    default_cutoff,
    default_operator,
    default_sizes,
    emit_raw_csv,
    emit_summary_csv,
    operator_label,
    parse_raw_csv,
    run_one_repetition,
    run_scenario,
    summarize,
    with_operator,
    worker_count,
)
from paramtuner.landscape import Landscape
from paramtuner.operators import OperatorSpec
from paramtuner.space import ParameterDim, ParameterSpace


def saps_grid(qualities, alphas=5):
    space = ParameterSpace(
        (
            ParameterDim("alpha_scale", alphas, offset=1.0, step=1.0 / 15.0),
            ParameterDim("rho", 16, offset=-1.0 / 15.0, step=1.0 / 15.0),
        )
    )
    return Landscape(space, tuple(qualities), kind="cached-empirical")


# --- scenario validation ---------------------------------------------------


def test_scenario_spec_rejects_bad_inputs():
    with pytest.raises(ConfigError):
        ScenarioSpec(family="maxsat")
    with pytest.raises(ConfigError):
        ScenarioSpec(family="synthetic", configurator="smac")
    with pytest.raises(ConfigError):
        ScenarioSpec(family="synthetic", repetitions=0)
    with pytest.raises(ConfigError):
        ScenarioSpec(family="synthetic", runs=0)
    with pytest.raises(ConfigError):
        ScenarioSpec(family="synthetic", sizes=(32, 16))
    with pytest.raises(ConfigError):
        ScenarioSpec(family="synthetic", sizes=(16, 16))
    with pytest.raises(ConfigError):
        ScenarioSpec(family="synthetic", sizes=(1,))
    with pytest.raises(ConfigError):
        ScenarioSpec(family="ridge-ea", sizes=(12,))
    with pytest.raises(ConfigError):
        ScenarioSpec(family="saps-cached", sizes=(17,))


def test_scenario_spec_defaults_to_smallest_size():
    assert ScenarioSpec(family="ridge-ea").sizes == (10,)
    assert ScenarioSpec(family="synthetic").sizes == (16,)
    assert ScenarioSpec(family="saps-cached", landscape_path="x").sizes == (48,)


def test_family_defaults():
    assert default_sizes("onemax-rls") == tuple(range(10, 51, 5))
    assert default_sizes("saps-cached")[0] == 48
    assert default_sizes("saps-cached")[-1] == 480
    assert default_cutoff("onemax-rls") == 200
    assert default_cutoff("ridge-ea") == 2500
    assert default_cutoff("synthetic") == 0
    assert default_operator("ridge-ea", "paramrls") == OperatorSpec("lstep")
    assert default_operator("ridge-ea", "paramils") == OperatorSpec("random-wr")


# --- family materialization -------------------------------------------------


def test_materialize_benchmark_families():
    bundle = _materialize(ScenarioSpec(family="ridge-ea", sizes=(10,)), 10)
    assert bundle.space.decode((2,)) == (1.0,)
    assert bundle.targets == ((2,),)
    assert bundle.cutoff == 2500
    assert isinstance(bundle.backend, BenchmarkBackend)
    assert bundle.backend.init == "ridge-start"

    bundle = _materialize(ScenarioSpec(family="leadingones-ea", sizes=(10,)), 10)
    assert bundle.space.decode((3,)) == (1.6,)
    assert bundle.targets == ((3,),)

    bundle = _materialize(ScenarioSpec(family="onemax-rls", sizes=(15,)), 15)
    assert bundle.space.decode((1,)) == (1.0,)
    assert bundle.targets == ((1,),)
    assert bundle.cutoff == 200
    assert bundle.backend.algorithm == "rls"


def test_materialize_synthetic_is_deterministic():
    spec = ScenarioSpec(family="synthetic", sizes=(16,), synthetic_kind="unimodal")
    a = _materialize(spec, 16)
    b = _materialize(spec, 16)
    assert a.backend.landscape.qualities == b.backend.landscape.qualities
    assert a.targets and a.targets == b.targets
    assert isinstance(a.backend, LandscapeBackend)
    assert a.space.n_configurations == 16


def test_materialize_saps_needs_a_grid_file():
    spec = ScenarioSpec(family="saps-cached", sizes=(48,))
    with pytest.raises(ConfigError):
        _materialize(spec, 48)


def test_slice_saps_keeps_alpha_prefix_and_global_targets():
    # best five cells sit at the first alpha value, so every slice sees them
    full = saps_grid([float(80 - f) for f in range(80)])
    sub = _slice_saps(full, 48, 5)
    assert sub.space.phis == (3, 16)
    assert sub.qualities == full.qualities[:48]
    assert sub.targets == ((1, 1), (1, 2), (1, 3), (1, 4), (1, 5))
    assert sub.space.dims[0].step == full.space.dims[0].step


def test_slice_saps_rejects_slices_without_targets():
    # best cells at the largest alpha: a 3-alpha slice contains none of them
    full = saps_grid([float(f) for f in range(80)])
    with pytest.raises(ConfigError):
        _slice_saps(full, 48, 5)


def test_slice_saps_shape_errors():
    with pytest.raises(ConfigError):
        _slice_saps(Landscape(ParameterSpace.from_phis(16), tuple(map(float, range(16)))), 48, 5)
    bad_rho = Landscape(
        ParameterSpace(
            (ParameterDim("alpha_scale", 2), ParameterDim("rho", 8))
        ),
        tuple(map(float, range(16))),
    )
    with pytest.raises(ConfigError):
        _slice_saps(bad_rho, 48, 5)
    full = saps_grid([float(80 - f) for f in range(80)])
    with pytest.raises(ConfigError):
        _slice_saps(full, 96, 5)  # needs 6 alpha values, grid has 5


# --- seeding and record labels ----------------------------------------------


def test_derive_seed_is_stable_and_keyed():
    spec = ScenarioSpec(family="synthetic", sizes=(16,))
    base = _derive_seed(spec, 16, 0)
    assert base == _derive_seed(spec, 16, 0)
    assert base != _derive_seed(spec, 16, 1)
    assert base != _derive_seed(spec, 32, 0)
    assert base != _derive_seed(with_operator(spec, OperatorSpec("harmonic")), 16, 0)
    ils = ScenarioSpec(family="synthetic", sizes=(16,), configurator="paramils")
    assert base != _derive_seed(ils, 16, 0)
    # the stream is keyed by operator kind, not by the lstep radius
    wide = with_operator(spec, OperatorSpec("lstep", max_step=3))
    assert base == _derive_seed(wide, 16, 0)


def test_operator_label():
    assert operator_label(OperatorSpec("lstep")) == "lstep"
    assert operator_label(OperatorSpec("lstep", max_step=3)) == "lstep3"
    assert operator_label(OperatorSpec("random-wr")) == "random-wr"
    assert operator_label(OperatorSpec("harmonic")) == "harmonic"


def test_accounting_mode_strings():
    rls = ScenarioSpec(family="synthetic", sizes=(16,))
    assert accounting_mode(rls) == "-;tie=random"
    capped = ScenarioSpec(family="synthetic", sizes=(16,), call_cap=100)
    assert accounting_mode(capped) == "-;tie=random;cap=100"
    harm = with_operator(rls, OperatorSpec("harmonic", direction_mode="best-of-both"))
    assert accounting_mode(harm) == "best-of-both;tie=random"
    ils = ScenarioSpec(family="synthetic", sizes=(16,), configurator="paramils")
    assert accounting_mode(ils) == "-;R=0;s=3!;p_restart=0.01!"
    ils_cap = ScenarioSpec(
        family="synthetic", sizes=(16,), configurator="paramils", call_cap=5000
    )
    assert accounting_mode(ils_cap) == "-;R=0;s=3!;p_restart=0.01!;cap=5000"


# --- the repetition driver ---------------------------------------------------


def test_run_one_repetition_is_reproducible():
    spec = ScenarioSpec(family="synthetic", sizes=(16,))
    bundle = _materialize(spec, 16)
    a = run_one_repetition(spec, bundle, 16, 3)
    b = run_one_repetition(spec, bundle, 16, 3)
    assert a == b
    assert a.seed == _derive_seed(spec, 16, 3)
    assert a.error == ""
    assert a.better_calls is not None


def test_run_scenario_two_cell_mean():
    # one optimal and one suboptimal cell: half the repetitions start on the
    # optimum (0 calls), the rest evaluate the only neighbor (1 call)
    spec = ScenarioSpec(family="synthetic", sizes=(2,), repetitions=10_000)
    records = run_scenario(spec)
    assert len(records) == 10_000
    assert all(r.better_calls in (0, 1) for r in records)
    mean = statistics.fmean(r.better_calls for r in records)
    assert abs(mean - 0.5) < 0.02


def test_run_scenario_sorted_and_thread_invariant(monkeypatch):
    spec = ScenarioSpec(family="synthetic", sizes=(4, 8), repetitions=6)
    monkeypatch.delenv("TUNE_THREADS", raising=False)
    serial = run_scenario(spec)
    keys = [(r.space_size, r.repetition) for r in serial]
    assert keys == sorted(keys)
    monkeypatch.setenv("TUNE_THREADS", "4")
    assert run_scenario(spec) == serial


def test_worker_count_parsing(monkeypatch):
    monkeypatch.delenv("TUNE_THREADS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("TUNE_THREADS", "4")
    assert worker_count() == 4
    monkeypatch.setenv("TUNE_THREADS", "0")
    assert worker_count() == 1
    monkeypatch.setenv("TUNE_THREADS", "many")
    with pytest.raises(ConfigError):
        worker_count()


def test_call_cap_records_censored_repetitions():
    spec = ScenarioSpec(family="synthetic", sizes=(16,), repetitions=50, call_cap=1)
    records = run_scenario(spec)
    assert all(r.error == "" for r in records)
    assert all(r.better_calls in (0, 1) for r in records)
    assert any(r.better_calls == 1 for r in records)
    assert all(r.accounting_mode.endswith(";cap=1") for r in records)


# --- CSV formats --------------------------------------------------------------


def test_raw_csv_round_trip(tmp_path):
    records = [
        TrialRecord("synthetic", "paramrls", "lstep", 16, 0, 123, 7, "-;tie=random"),
        TrialRecord("synthetic", "paramrls", "lstep", 16, 1, 456, None,
                    "-;tie=random", error="backend exploded"),
    ]
    path = tmp_path / "raw.csv"
    emit_raw_csv(records, str(path))
    assert parse_raw_csv(str(path)) == records


def test_raw_csv_byte_determinism(tmp_path):
    spec = ScenarioSpec(family="synthetic", sizes=(4, 8), repetitions=5)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_raw_csv(run_scenario(spec), str(p1))
    emit_raw_csv(run_scenario(spec), str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_raw_csv_rejects_malformed_files(tmp_path):
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("family,calls\nx,1\n")
    with pytest.raises(ConfigError):
        parse_raw_csv(str(bad_header))
    short_row = tmp_path / "s.csv"
    short_row.write_text(",".join(RAW_HEADER) + "\nsynthetic,paramrls,lstep\n")
    with pytest.raises(ConfigError):
        parse_raw_csv(str(short_row))


def record(op, rep, calls):
    return TrialRecord("synthetic", "paramrls", op, 16, rep, rep, calls, "-;tie=random")


def test_summarize_pairs_operators():
    records = [record("lstep", i, c) for i, c in enumerate([1, 2, 3])]
    records += [record("harmonic", i, c) for i, c in enumerate([4, 5, 6])]
    records.append(record("harmonic", 3, None))  # failed repetition is excluded
    rows = summarize(records, baseline="lstep", candidate="harmonic")
    assert len(rows) == 2
    base, cand = rows
    assert base.operator == "lstep"
    assert base.mean == pytest.approx(2.0)
    assert base.stderr == pytest.approx(1.0 / 3.0**0.5)
    assert base.p_value is None and base.cliffs_delta is None
    assert cand.operator == "harmonic"
    assert cand.n == 3
    # candidate strictly dominates: exact two-sided MW on 3 vs 3 gives 0.1
    assert cand.p_value == pytest.approx(0.1)
    assert cand.cliffs_delta == pytest.approx(1.0)


def test_summarize_errors():
    records = [record("lstep", i, c) for i, c in enumerate([1, 2, 3])]
    with pytest.raises(ConfigError):
        summarize(records, baseline="lstep", candidate="lstep")
    with pytest.raises(ConfigError):
        summarize(records, baseline="lstep", candidate="harmonic")


def test_summary_csv_shape(tmp_path):
    rows = [
        SummaryRow("synthetic", "paramrls", "lstep", 16, 2.0, 0.5, None, None, 3),
        SummaryRow("synthetic", "paramrls", "harmonic", 16, 1.0, 0.25, 0.1, -1.0, 3),
    ]
    path = tmp_path / "summary.csv"
    emit_summary_csv(rows, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "family,configurator,operator,space_size,mean,stderr,p_value,cliffs_delta,n"
    assert len(lines) == 3
    assert lines[1].endswith(",,3")  # baseline carries empty test columns


def test_with_operator_swaps_only_the_operator():
    spec = ScenarioSpec(family="synthetic", sizes=(16,), repetitions=9)
    out = with_operator(spec, OperatorSpec("harmonic"))
    assert out.operator == OperatorSpec("harmonic")
    assert out.repetitions == 9
    assert out.family == spec.family
