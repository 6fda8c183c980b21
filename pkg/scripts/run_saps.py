#!/usr/bin/env python3
"""Cached-landscape experiment on SAPS parameter grids.

Builds (or reuses) a mean-satisfied-clauses grid over (alpha_scale, rho)
from planted 3-SAT instances, then compares each configurator's default
operator against harmonic on the cached landscape.  The grid build is the
expensive part (a few minutes at the defaults); pass --grid to reuse one
written earlier, e.g. by `tune evaluate-landscape`.
"""

import argparse
import os
import random

from paramtuner.experiments import (
    ScenarioSpec,
    emit_raw_csv,
    emit_summary_csv,
    run_scenario,
    summarize,
    with_operator,
)
from paramtuner.landscape import save_landscape_csv
from paramtuner.operators import OperatorSpec
from paramtuner.sat import evaluate_saps_landscape, generate_planted_3sat
from paramtuner.space import ParameterDim, ParameterSpace


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results", help="directory for CSV output")
    ap.add_argument("--grid", default="", help="existing landscape CSV (skip the build)")
    ap.add_argument("--instances", type=int, default=10, help="planted 3-SAT instances")
    ap.add_argument("--vars", type=int, default=150)
    ap.add_argument("--clauses", type=int, default=800)
    ap.add_argument("--grid-reps", type=int, default=60, help="runs per (cell, instance)")
    ap.add_argument("--kappa", type=int, default=400, help="flips per run")
    ap.add_argument("--instance-seed", type=int, default=2025)
    ap.add_argument("--eval-seed", type=int, default=7)
    ap.add_argument("--sizes", default="480", help="comma-separated sub-grid sizes")
    ap.add_argument("--reps", type=int, default=100, help="repetitions per size")
    ap.add_argument("--seed", type=int, default=0, help="master seed for the tuning runs")
    ap.add_argument("--call-cap", type=int, default=5000,
                    help="censor a repetition after this many comparisons")
    return ap.parse_args()


def build_grid(args, path):
    inst_rng = random.Random(args.instance_seed)
    instances = [
        generate_planted_3sat(args.vars, args.clauses, inst_rng)[0]
        for _ in range(args.instances)
    ]
    grid = ParameterSpace(
        (
            ParameterDim("alpha_scale", 30, offset=1.0, step=1.0 / 15.0),
            ParameterDim("rho", 16, offset=-1.0 / 15.0, step=1.0 / 15.0),
        )
    )
    land = evaluate_saps_landscape(
        instances, grid,
        reps=args.grid_reps, kappa=args.kappa, rng=random.Random(args.eval_seed),
    )
    save_landscape_csv(land, path)
    print(f"built {land.space.phis[0]}x{land.space.phis[1]} grid -> {path}")
    return path


def main():
    args = parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    grid_path = args.grid or build_grid(args, os.path.join(args.out_dir, "saps-grid.csv"))
    sizes = tuple(int(s) for s in args.sizes.split(","))

    all_records = []
    for configurator, default_op in (
        ("paramrls", OperatorSpec("lstep")),
        ("paramils", OperatorSpec("random-wr")),
    ):
        spec = ScenarioSpec(
            family="saps-cached",
            configurator=configurator,
            operator=default_op,
            sizes=sizes,
            repetitions=args.reps,
            master_seed=args.seed,
            landscape_path=grid_path,
            call_cap=args.call_cap,
        )
        records = run_scenario(spec)
        records += run_scenario(with_operator(spec, OperatorSpec("harmonic")))
        all_records += records
        baseline = "lstep" if configurator == "paramrls" else "random-wr"
        rows = summarize(records, baseline=baseline, candidate="harmonic")
        path = os.path.join(args.out_dir, f"saps-{configurator}-harmonic-vs-{baseline}.csv")
        emit_summary_csv(rows, path)
        print(f"{configurator}: harmonic vs {baseline} -> {path}")

    raw_path = os.path.join(args.out_dir, "saps-raw.csv")
    emit_raw_csv(all_records, raw_path)
    print(f"{len(all_records)} records -> {raw_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
