"""Experiment families, the repetition driver, and the CSV record formats.

A scenario fixes one family at one or more space sizes and runs a
configurator repeatedly until it first samples a target configuration; the
recorded cost is the better() call counter at that moment.  Seeds derive
from one master seed through numpy's SeedSequence keyed by (configurator,
operator, size, repetition), so records are reproducible independently of
how repetitions are scheduled, and the raw CSV is byte-identical between
two invocations with the same inputs.

Families:

* ridge-ea: chi in {0.5, 1.0, ...} tuning the (1+1) EA on Ridge, n = 50,
  started on the ridge; optimal index 2 (chi = 1.0).
* leadingones-ea: chi in {0.6, 1.1, ...} on LeadingOnes from uniform
  starts; optimal index 3 (chi = 1.6).
* onemax-rls: k in {1, ..., size} tuning RLS_k on OneMax; optimal k = 1.
* saps-cached: (alpha_scale, rho) over a precomputed SAPS grid, growing
  along the alpha_scale axis in blocks of 16 cells; targets are the
  globally best cells that lie inside the sub-grid.
* synthetic: generated diagnostic landscapes (see landscape module).
"""

from __future__ import annotations

import csv
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .configurators import (
    BenchmarkBackend,
    EvalProtocol,
    LandscapeBackend,
    ParamIlsSettings,
    StopRule,
    first_optimum_sampled,
    run_param_ils,
    run_param_rls,
)
from .landscape import Landscape, generate_synthetic, load_cached_landscape, top_targets
from .operators import OperatorSpec
from .space import Configuration, ParameterDim, ParameterSpace
from .stats import compare

FAMILIES = ("ridge-ea", "leadingones-ea", "onemax-rls", "saps-cached", "synthetic")
CONFIGURATORS = ("paramrls", "paramils")

# Benchmark families grow the space five values at a time as in the tuning
# setup they reproduce; saps-cached grows along the alpha axis in blocks.
_BENCH_SIZES = tuple(range(10, 51, 5))
_SAPS_SIZES = tuple(16 * a for a in range(3, 31))
_RHO_COUNT = 16

RAW_HEADER = (
    "family",
    "configurator",
    "operator",
    "space_size",
    "repetition",
    "seed",
    "better_calls",
    "accounting_mode",
)
SUMMARY_HEADER = (
    "family",
    "configurator",
    "operator",
    "space_size",
    "mean",
    "stderr",
    "p_value",
    "cliffs_delta",
    "n",
)


class ConfigError(ValueError):
    """A scenario or CLI configuration that cannot be run as stated."""


@dataclass(frozen=True)
class ScenarioSpec:
    family: str
    configurator: str = "paramrls"
    operator: OperatorSpec = OperatorSpec("lstep")
    sizes: tuple[int, ...] = ()
    repetitions: int = 50
    runs: int = 50
    cutoff: Optional[int] = None
    master_seed: int = 0
    ils: ParamIlsSettings = field(default_factory=ParamIlsSettings)
    tie_break: str = "random"
    landscape_path: Optional[str] = None
    synthetic_kind: str = "unimodal"
    synthetic_seed: int = 0
    target_top: int = 5
    call_cap: int = 0  # safety cap per repetition; 0 leaves runs uncapped

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.configurator not in CONFIGURATORS:
            raise ConfigError(
                f"unknown configurator {self.configurator!r}; choose from {CONFIGURATORS}"
            )
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if not self.sizes:
            object.__setattr__(self, "sizes", (default_sizes(self.family)[0],))
        for size in self.sizes:
            validate_size(self.family, size)
        if tuple(sorted(set(self.sizes))) != self.sizes:
            raise ConfigError(f"sizes must be strictly increasing, got {self.sizes}")


def default_sizes(family: str) -> tuple[int, ...]:
    if family == "saps-cached":
        return _SAPS_SIZES
    if family == "synthetic":
        return (16, 32, 64, 128)
    return _BENCH_SIZES


def validate_size(family: str, size: int) -> None:
    if family == "saps-cached":
        if size not in _SAPS_SIZES:
            raise ConfigError(
                f"saps-cached sizes are multiples of 16 in {_SAPS_SIZES[0]}..{_SAPS_SIZES[-1]}, got {size}"
            )
    elif family == "synthetic":
        if size < 2:
            raise ConfigError(f"synthetic sizes must be >= 2, got {size}")
    elif size not in _BENCH_SIZES:
        raise ConfigError(f"{family} sizes are {_BENCH_SIZES}, got {size}")


def default_cutoff(family: str) -> int:
    if family == "onemax-rls":
        return 200
    if family in ("ridge-ea", "leadingones-ea"):
        return 2500
    return 0  # cached and synthetic landscapes are lookups


def default_operator(family: str, configurator: str) -> OperatorSpec:
    del family
    if configurator == "paramils":
        return OperatorSpec("random-wr")
    return OperatorSpec("lstep")


@dataclass(frozen=True)
class _SizeBundle:
    space: ParameterSpace
    backend: object
    targets: tuple[Configuration, ...]
    cutoff: int


def _materialize(spec: ScenarioSpec, size: int) -> _SizeBundle:
    cutoff = spec.cutoff if spec.cutoff is not None else default_cutoff(spec.family)
    if spec.family == "ridge-ea":
        space = ParameterSpace((ParameterDim("chi", size, offset=0.0, step=0.5),))
        return _SizeBundle(
            space, BenchmarkBackend("ridge", 50, "ea", init="ridge-start"), ((2,),), cutoff
        )
    if spec.family == "leadingones-ea":
        space = ParameterSpace((ParameterDim("chi", size, offset=0.1, step=0.5),))
        return _SizeBundle(
            space, BenchmarkBackend("leadingones", 50, "ea", init="uniform"), ((3,),), cutoff
        )
    if spec.family == "onemax-rls":
        space = ParameterSpace((ParameterDim("k", size, offset=0.0, step=1.0),))
        return _SizeBundle(
            space, BenchmarkBackend("onemax", 50, "rls", init="uniform"), ((1,),), cutoff
        )
    if spec.family == "saps-cached":
        if not spec.landscape_path:
            raise ConfigError("saps-cached needs --landscape-file pointing at the cached grid")
        full = load_cached_landscape(spec.landscape_path, top=spec.target_top)
        sub = _slice_saps(full, size, spec.target_top)
        return _SizeBundle(sub.space, LandscapeBackend(sub), sub.targets, cutoff)
    land = generate_synthetic(
        spec.synthetic_kind,
        size,
        random.Random(f"synthetic:{spec.synthetic_kind}:{size}:{spec.synthetic_seed}"),
    )
    return _SizeBundle(land.space, LandscapeBackend(land), land.targets, cutoff)


def _slice_saps(full: Landscape, size: int, top: int) -> Landscape:
    """First size/16 alpha values with the full rho axis; targets stay global."""
    if full.space.D != 2:
        raise ConfigError(f"cached SAPS grid must be 2-D, got {full.space.D}-D")
    alpha_dim, rho_dim = full.space.dims
    if rho_dim.phi != _RHO_COUNT:
        raise ConfigError(f"cached grid has {rho_dim.phi} rho values, expected {_RHO_COUNT}")
    keep = size // _RHO_COUNT
    if keep > alpha_dim.phi:
        raise ConfigError(
            f"size {size} needs {keep} alpha values, the cached grid has {alpha_dim.phi}"
        )
    space = ParameterSpace(
        (ParameterDim(alpha_dim.name, keep, alpha_dim.offset, alpha_dim.step), rho_dim)
    )
    qualities = []
    for a in range(1, keep + 1):
        for r in range(1, _RHO_COUNT + 1):
            qualities.append(full.quality((a, r)))
    global_targets = top_targets(full.space, full.qualities, top)
    targets = tuple(t for t in global_targets if t[0] <= keep)
    if not targets:
        raise ConfigError(
            f"none of the {top} best cells lie within the first {keep} alpha values; "
            f"grow the size or the target count"
        )
    return Landscape(space, tuple(qualities), kind="cached-empirical", targets=targets)


@dataclass(frozen=True)
class TrialRecord:
    family: str
    configurator: str
    operator: str
    space_size: int
    repetition: int
    seed: int
    better_calls: Optional[int]
    accounting_mode: str
    error: str = ""


_CONFIGURATOR_IDS = {name: i for i, name in enumerate(CONFIGURATORS)}
_OPERATOR_IDS = {"lstep": 0, "random": 1, "random-wr": 2, "harmonic": 3}


def _derive_seed(spec: ScenarioSpec, size: int, rep: int) -> int:
    seq = np.random.SeedSequence(
        spec.master_seed,
        spawn_key=(
            _CONFIGURATOR_IDS[spec.configurator],
            _OPERATOR_IDS[spec.operator.kind],
            size,
            rep,
        ),
    )
    return int(seq.generate_state(1, np.uint64)[0])


def operator_label(op: OperatorSpec) -> str:
    if op.kind == "lstep" and op.max_step != 1:
        return f"lstep{op.max_step}"
    return op.kind


def accounting_mode(spec: ScenarioSpec) -> str:
    """Describes what the better() counter includes for these records.

    The trailing '!' marks knobs whose defaults are desk-scale choices
    rather than part of the reproduced setup.
    """
    direction = spec.operator.direction_mode if spec.operator.kind == "harmonic" else "-"
    cap = f";cap={spec.call_cap}" if spec.call_cap else ""
    if spec.configurator == "paramils":
        ils = spec.ils
        return (
            f"{direction};R={ils.initial_samples};s={ils.perturbation_hops}!;"
            f"p_restart={ils.restart_probability}!{cap}"
        )
    return f"{direction};tie={spec.tie_break}{cap}"


def run_one_repetition(spec: ScenarioSpec, bundle: _SizeBundle, size: int, rep: int) -> TrialRecord:
    seed = _derive_seed(spec, size, rep)
    label = operator_label(spec.operator)
    mode = accounting_mode(spec)
    try:
        rng = random.Random(seed)
        proto = EvalProtocol(bundle.space, bundle.backend, bundle.cutoff, spec.runs)
        stop = first_optimum_sampled(bundle.targets, budget=spec.call_cap)
        if spec.configurator == "paramrls":
            trace = run_param_rls(
                bundle.space, spec.operator, proto, stop, rng, tie_break=spec.tie_break
            )
        else:
            trace = run_param_ils(bundle.space, spec.operator, proto, stop, rng, settings=spec.ils)
        calls = trace.first_sampled_optimum_at
        if calls is None:
            if spec.call_cap and trace.stopped_by == "call-budget":
                # Requested cap fired: a right-censored observation, not a failure.
                calls = trace.better_calls
            else:
                raise RuntimeError(f"stopped by {trace.stopped_by} before sampling a target")
        return TrialRecord(
            spec.family, spec.configurator, label, size, rep, seed, calls, mode
        )
    except Exception as exc:  # a failed repetition is recorded, not dropped
        return TrialRecord(
            spec.family, spec.configurator, label, size, rep, seed, None, mode, error=str(exc)
        )


def worker_count() -> int:
    raw = os.environ.get("TUNE_THREADS", "")
    if raw.strip():
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigError(f"TUNE_THREADS must be an integer, got {raw!r}") from None
        return max(1, threads)
    return 1


def run_scenario(spec: ScenarioSpec) -> list[TrialRecord]:
    """All repetitions at all sizes, sorted by (size, repetition)."""
    bundles = {size: _materialize(spec, size) for size in spec.sizes}
    jobs = [(size, rep) for size in spec.sizes for rep in range(spec.repetitions)]
    threads = worker_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(
                pool.map(lambda job: run_one_repetition(spec, bundles[job[0]], *job), jobs)
            )
    else:
        records = [run_one_repetition(spec, bundles[size], size, rep) for size, rep in jobs]
    records.sort(key=lambda r: (r.space_size, r.repetition))
    return records


# ---------------------------------------------------------------------------
# CSV formats.  UTF-8, LF newlines, '.' decimal separator, repr() floats, so
# identical inputs serialize byte-identically.


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_raw_csv(records: Sequence[TrialRecord], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RAW_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.family,
                    r.configurator,
                    r.operator,
                    _fmt(r.space_size),
                    _fmt(r.repetition),
                    _fmt(r.seed),
                    _fmt(r.better_calls),
                    r.accounting_mode if not r.error else f"{r.accounting_mode};error={r.error}",
                ]
            )


def parse_raw_csv(path: str) -> list[TrialRecord]:
    records = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != RAW_HEADER:
            raise ConfigError(f"{path}: expected header {','.join(RAW_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(RAW_HEADER):
                raise ConfigError(f"{path}:{lineno}: expected {len(RAW_HEADER)} fields")
            mode, _, err = row[7].partition(";error=")
            records.append(
                TrialRecord(
                    family=row[0],
                    configurator=row[1],
                    operator=row[2],
                    space_size=int(row[3]),
                    repetition=int(row[4]),
                    seed=int(row[5]),
                    better_calls=int(row[6]) if row[6] else None,
                    accounting_mode=mode,
                    error=err,
                )
            )
    return records


@dataclass(frozen=True)
class SummaryRow:
    family: str
    configurator: str
    operator: str
    space_size: int
    mean: float
    stderr: float
    p_value: Optional[float]
    cliffs_delta: Optional[float]
    n: int


def summarize(
    records: Sequence[TrialRecord], baseline: str, candidate: str
) -> list[SummaryRow]:
    """Per-(family, configurator, size) means plus candidate-vs-baseline tests.

    The baseline row carries empty test columns; the candidate row carries
    the Mann-Whitney p-value and Cliff's delta of its costs against the
    baseline's (negative delta means the candidate needs fewer calls).
    """
    if baseline == candidate:
        raise ConfigError("baseline and candidate operators must differ")
    groups: dict[tuple[str, str, int], dict[str, list[int]]] = {}
    for r in records:
        if r.better_calls is None:
            continue
        key = (r.family, r.configurator, r.space_size)
        groups.setdefault(key, {}).setdefault(r.operator, []).append(r.better_calls)
    out: list[SummaryRow] = []
    for key in sorted(groups):
        family, configurator, size = key
        samples = groups[key]
        missing = [op for op in (baseline, candidate) if op not in samples]
        if missing:
            raise ConfigError(
                f"{family}/{configurator} at size {size} has no records for {missing}; "
                f"present operators: {sorted(samples)}"
            )
        base = samples[baseline]
        cand = samples[candidate]
        report = compare(cand, base)
        out.append(
            SummaryRow(
                family, configurator, baseline, size,
                _mean(base), _stderr(base), None, None, len(base),
            )
        )
        out.append(
            SummaryRow(
                family, configurator, candidate, size,
                _mean(cand), _stderr(cand), report.p_value, report.cliffs_delta, len(cand),
            )
        )
    return out


def _mean(values: Sequence[int]) -> float:
    return sum(values) / len(values)


def _stderr(values: Sequence[int]) -> float:
    n = len(values)
    if n < 2:
        return 0.0
    mu = _mean(values)
    var = sum((v - mu) ** 2 for v in values) / (n - 1)
    return (var / n) ** 0.5


def emit_summary_csv(rows: Sequence[SummaryRow], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.family,
                    r.configurator,
                    r.operator,
                    _fmt(r.space_size),
                    _fmt(r.mean),
                    _fmt(r.stderr),
                    _fmt(r.p_value),
                    _fmt(r.cliffs_delta),
                    _fmt(r.n),
                ]
            )


def with_operator(spec: ScenarioSpec, operator: OperatorSpec) -> ScenarioSpec:
    return replace(spec, operator=operator)
