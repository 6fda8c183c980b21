"""Perturbative algorithm configurators with pluggable mutation operators.

The package compares how fast simple configurators (mutate-and-keep-the-
winner search and iterated local search) find good parameter values for
randomized target algorithms, measured in better() comparisons, depending
on the mutation operator that proposes new configurations.
"""

from .space import (
    Configuration,
    ParameterDim,
    ParameterSpace,
    l1_distance,
    neighborhood,
    sample_uniform,
    validate_config,
)
from .operators import (
    HarmonicDistribution,
    NeighborhoodExhausted,
    OperatorSpec,
    OperatorState,
    harmonic_distribution,
    harmonic_number,
    harmonic_sample_step,
    mutate_harmonic,
    mutate_l_step,
    mutate_random,
)
from .targets import (
    TargetRunResult,
    ea_final_fitness_batch,
    eval_leadingones,
    eval_onemax,
    eval_ridge,
    performance_metric,
    rls_final_fitness_batch,
    run_one_plus_one_ea,
    run_rls_k,
)
from .landscape import (
    Landscape,
    UnimodalityCertificate,
    check_approx_unimodal,
    check_unimodal_slices,
    exact_landscape,
    generate_synthetic,
    load_cached_landscape,
    minimal_certificate,
    save_landscape_csv,
)
from .stats import (
    ComparisonReport,
    MannWhitneyResult,
    cliffs_delta,
    compare,
    mann_whitney_u,
)
from .sat import (
    CnfFormula,
    SapsParams,
    count_satisfied,
    evaluate_saps_landscape,
    generate_planted_3sat,
    parse_dimacs,
    run_saps,
    to_dimacs,
)
from .configurators import (
    BenchmarkBackend,
    BetterResult,
    EvalProtocol,
    LandscapeBackend,
    ParamIlsSettings,
    RunContext,
    RunTrace,
    StopRule,
    Winner,
    call_budget,
    first_optimum_sampled,
    iterative_first_improvement,
    run_param_ils,
    run_param_rls,
)
from .experiments import (
    ConfigError,
    ScenarioSpec,
    SummaryRow,
    TrialRecord,
    emit_raw_csv,
    emit_summary_csv,
    parse_raw_csv,
    run_scenario,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "Configuration",
    "ParameterDim",
    "ParameterSpace",
    "l1_distance",
    "neighborhood",
    "sample_uniform",
    "validate_config",
    "HarmonicDistribution",
    "NeighborhoodExhausted",
    "OperatorSpec",
    "OperatorState",
    "harmonic_distribution",
    "harmonic_number",
    "harmonic_sample_step",
    "mutate_harmonic",
    "mutate_l_step",
    "mutate_random",
    "TargetRunResult",
    "ea_final_fitness_batch",
    "eval_leadingones",
    "eval_onemax",
    "eval_ridge",
    "performance_metric",
    "rls_final_fitness_batch",
    "run_one_plus_one_ea",
    "run_rls_k",
    "Landscape",
    "UnimodalityCertificate",
    "check_approx_unimodal",
    "check_unimodal_slices",
    "exact_landscape",
    "generate_synthetic",
    "load_cached_landscape",
    "minimal_certificate",
    "save_landscape_csv",
    "ComparisonReport",
    "MannWhitneyResult",
    "cliffs_delta",
    "compare",
    "mann_whitney_u",
    "CnfFormula",
    "SapsParams",
    "count_satisfied",
    "evaluate_saps_landscape",
    "generate_planted_3sat",
    "parse_dimacs",
    "run_saps",
    "to_dimacs",
    "BenchmarkBackend",
    "BetterResult",
    "EvalProtocol",
    "LandscapeBackend",
    "ParamIlsSettings",
    "RunContext",
    "RunTrace",
    "StopRule",
    "Winner",
    "call_budget",
    "first_optimum_sampled",
    "iterative_first_improvement",
    "run_param_ils",
    "run_param_rls",
    "ConfigError",
    "ScenarioSpec",
    "SummaryRow",
    "TrialRecord",
    "emit_raw_csv",
    "emit_summary_csv",
    "parse_raw_csv",
    "run_scenario",
    "summarize",
]
