#!/usr/bin/env python3
"""Operator comparison across the benchmark families, desk scale.

For every family this runs ParamRLS with the lstep, random-wr, and harmonic
operators and ParamILS with random-wr and harmonic, then writes per-family
raw CSVs plus summary CSVs testing harmonic against each baseline.  The
default sweep (sizes 10..50, 50 repetitions, 50 runs per comparison) takes
a few minutes on one core; export TUNE_THREADS to parallelize.
"""

import argparse
import os

from paramtuner.experiments import (
    ScenarioSpec,
    default_sizes,
    emit_raw_csv,
    emit_summary_csv,
    run_scenario,
    summarize,
    with_operator,
)
from paramtuner.operators import OperatorSpec

BENCH_FAMILIES = ("ridge-ea", "leadingones-ea", "onemax-rls")

# onemax's call landscape zig-zags, so the 1-ball wedges there
LSTEP_RADIUS = {"ridge-ea": 1, "leadingones-ea": 1, "onemax-rls": 2}


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results", help="directory for CSV output")
    ap.add_argument("--sizes", default="", help="comma-separated sizes (default: full sweep)")
    ap.add_argument("--reps", type=int, default=50, help="repetitions per size")
    ap.add_argument("--runs", type=int, default=50, help="target runs per comparison side")
    ap.add_argument("--seed", type=int, default=0, help="master seed")
    return ap.parse_args()


def main():
    args = parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    sizes = (
        tuple(int(s) for s in args.sizes.split(",")) if args.sizes else None
    )
    for family in BENCH_FAMILIES:
        base = ScenarioSpec(
            family=family,
            sizes=sizes or default_sizes(family),
            repetitions=args.reps,
            runs=args.runs,
            master_seed=args.seed,
        )
        rls_arms = (
            OperatorSpec("lstep", max_step=LSTEP_RADIUS[family]),
            OperatorSpec("random-wr"),
            OperatorSpec("harmonic"),
        )
        rls_records = []
        for op in rls_arms:
            rls_records += run_scenario(with_operator(base, op))
        ils = ScenarioSpec(
            family=family,
            sizes=base.sizes,
            repetitions=args.reps,
            runs=args.runs,
            master_seed=args.seed,
            configurator="paramils",
            operator=OperatorSpec("random-wr"),
        )
        ils_records = run_scenario(ils)
        ils_records += run_scenario(with_operator(ils, OperatorSpec("harmonic")))

        records = rls_records + ils_records
        raw_path = os.path.join(args.out_dir, f"{family}-raw.csv")
        emit_raw_csv(records, raw_path)
        failed = sum(1 for r in records if r.better_calls is None)
        print(f"{family}: {len(records)} records -> {raw_path}"
              + (f" ({failed} failed)" if failed else ""))

        lstep_label = "lstep" if LSTEP_RADIUS[family] == 1 else f"lstep{LSTEP_RADIUS[family]}"
        comparisons = (
            ("paramrls", rls_records, lstep_label),
            ("paramrls", rls_records, "random-wr"),
            ("paramils", ils_records, "random-wr"),
        )
        for configurator, subset, baseline in comparisons:
            rows = summarize(subset, baseline=baseline, candidate="harmonic")
            path = os.path.join(
                args.out_dir, f"{family}-{configurator}-harmonic-vs-{baseline}.csv"
            )
            emit_summary_csv(rows, path)
            print(f"{family}/{configurator}: harmonic vs {baseline} -> {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
