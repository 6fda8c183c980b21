"""Command line front end: the ``tune`` entry point.

Subcommands:

* ``tune run``: run one scenario and write the raw per-repetition CSV.
* ``tune summarize``: aggregate a raw CSV into per-size means plus a
  baseline-vs-candidate Mann-Whitney test and Cliff's delta.
* ``tune landscape-check``: verify approximate unimodality of a landscape
  CSV, or report the minimal passing certificates.
* ``tune evaluate-landscape``: build a cached SAPS landscape over an
  (alpha_scale, rho) grid and write it as a landscape CSV.

Every flag can also come from a ``--config`` file of ``key = value`` lines,
where keys are the long flag names without the leading dashes.  Command
line values win over the file; the file wins over built-in defaults.
``TUNE_THREADS`` caps the repetition worker pool (default 1).
"""

from __future__ import annotations

import argparse
import random
import sys
from typing import Optional, Sequence

from .configurators import ParamIlsSettings
from .experiments import (
    ConfigError,
    FAMILIES,
    CONFIGURATORS,
    ScenarioSpec,
    default_operator,
    emit_raw_csv,
    emit_summary_csv,
    parse_raw_csv,
    run_scenario,
    summarize,
)
from .landscape import (
    check_approx_unimodal,
    check_unimodal_slices,
    load_cached_landscape,
    minimal_certificate,
    save_landscape_csv,
)
from .operators import OPERATOR_KINDS, OperatorSpec
from .sat import evaluate_saps_landscape, generate_planted_3sat, parse_dimacs
from .space import ParameterDim, ParameterSpace

_RUN_DEFAULTS = {
    "configurator": "paramrls",
    "operator": "",  # resolved per configurator
    "max_step": "1",
    "direction_mode": "random-direction",
    "tie_break": "random",
    "sizes": "",
    "reps": "50",
    "runs": "50",
    "cutoff": "",
    "seed": "0",
    "ils_samples": "0",
    "ils_hops": "3",
    "ils_restart": "0.01",
    "landscape_file": "",
    "synthetic_kind": "unimodal",
    "synthetic_seed": "0",
    "target_top": "5",
    "call_cap": "0",
}

# Instance hardness and cutoff chosen so the resulting grid has a steep,
# low-noise basin: a flat grid (everything solved) carries no ordinal signal.
_EVAL_DEFAULTS = {
    "generate": "10",
    "vars": "150",
    "clauses": "800",
    "instances": "",
    "reps": "60",
    "kappa": "400",
    "seed": "0",
    "ps": "0.05",
    "wp": "0.01",
    "alpha_count": "30",
    "alpha_offset": "1.0",
    "alpha_step": str(1.0 / 15.0),
    "rho_count": "16",
    "rho_offset": str(-1.0 / 15.0),
    "rho_step": str(1.0 / 15.0),
    "top": "5",
}

_CHECK_DEFAULTS = {"alpha": "", "beta": "1", "top": "5"}


def _read_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
                key, _, value = line.partition("=")
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    return values


class _Resolver:
    """CLI value if given, else config file, else the defaults table."""

    def __init__(self, args: argparse.Namespace, defaults: dict[str, str]):
        self.args = args
        self.defaults = defaults
        self.config = _read_config(args.config) if getattr(args, "config", None) else {}
        unknown = set(self.config) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}; valid: {sorted(defaults)}")

    def get(self, key: str) -> str:
        cli = getattr(self.args, key, None)
        if cli is not None:
            return str(cli)
        return self.config.get(key, self.defaults[key])

    def get_int(self, key: str) -> int:
        raw = self.get(key)
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {raw!r}") from None

    def get_float(self, key: str) -> float:
        raw = self.get(key)
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {raw!r}") from None


def _parse_sizes(raw: str) -> tuple[int, ...]:
    if not raw:
        return ()
    try:
        return tuple(int(part) for part in raw.replace(" ", "").split(",") if part)
    except ValueError:
        raise ConfigError(f"sizes must be comma-separated integers, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tune",
        description="Run and analyze algorithm-configuration experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario, write raw per-repetition CSV")
    run.add_argument("--config", help="key = value file supplying defaults for any flag")
    run.add_argument("--family", required=True, choices=FAMILIES)
    run.add_argument("--configurator", choices=CONFIGURATORS)
    run.add_argument("--operator", choices=OPERATOR_KINDS)
    run.add_argument("--max-step", type=int, dest="max_step", help="lstep ball radius")
    run.add_argument(
        "--direction-mode",
        dest="direction_mode",
        choices=("random-direction", "best-of-both"),
        help="harmonic operator direction handling",
    )
    run.add_argument("--tie-break", dest="tie_break", choices=("random", "incumbent"))
    run.add_argument("--sizes", help="comma-separated space sizes, e.g. 10,25,50")
    run.add_argument("--reps", type=int, help="repetitions per size")
    run.add_argument("--runs", type=int, help="target runs per side of a comparison")
    run.add_argument("--cutoff", type=int, help="target iterations per run (kappa)")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--ils-samples", type=int, dest="ils_samples", help="uniform screening size R")
    run.add_argument("--ils-hops", type=int, dest="ils_hops", help="perturbation hops s")
    run.add_argument(
        "--ils-restart", type=float, dest="ils_restart", help="restart probability per round"
    )
    run.add_argument("--landscape-file", dest="landscape_file", help="cached landscape CSV")
    run.add_argument(
        "--synthetic-kind",
        dest="synthetic_kind",
        choices=("unimodal", "plateau", "sawtooth", "deceptive"),
    )
    run.add_argument("--synthetic-seed", type=int, dest="synthetic_seed")
    run.add_argument("--target-top", type=int, dest="target_top", help="cached-grid target count")
    run.add_argument("--call-cap", type=int, dest="call_cap", help="abort a repetition after this many calls (0 = never)")
    run.add_argument("--out", required=True, help="raw CSV path")

    summ = sub.add_parser("summarize", help="aggregate a raw CSV, test candidate vs baseline")
    summ.add_argument("--raw", required=True, help="raw CSV from 'tune run'")
    summ.add_argument("--baseline", required=True, help="baseline operator label")
    summ.add_argument("--candidate", required=True, help="candidate operator label")
    summ.add_argument("--out", required=True, help="summary CSV path")

    check = sub.add_parser("landscape-check", help="approximate-unimodality diagnostics")
    check.add_argument("--config", help="key = value file supplying defaults for any flag")
    check.add_argument("--file", required=True, help="landscape CSV")
    check.add_argument("--alpha", type=float, help="check this alpha (else report certificates)")
    check.add_argument("--beta", type=int, help="check this beta (default 1)")
    check.add_argument("--top", type=int, help="target count when loading the grid")

    ev = sub.add_parser("evaluate-landscape", help="build a cached SAPS landscape CSV")
    ev.add_argument("--config", help="key = value file supplying defaults for any flag")
    ev.add_argument("--out", required=True, help="landscape CSV path")
    ev.add_argument("--instances", help="comma-separated DIMACS files (else generate)")
    ev.add_argument("--generate", type=int, help="number of planted 3-SAT instances to generate")
    ev.add_argument("--vars", type=int, help="variables per generated instance")
    ev.add_argument("--clauses", type=int, help="clauses per generated instance")
    ev.add_argument("--reps", type=int, help="runs per (cell, instance)")
    ev.add_argument("--kappa", type=int, help="iterations per run")
    ev.add_argument("--seed", type=int, help="master seed")
    ev.add_argument("--ps", type=float, help="smoothing probability")
    ev.add_argument("--wp", type=float, help="random-walk probability")
    ev.add_argument("--alpha-count", type=int, dest="alpha_count")
    ev.add_argument("--alpha-offset", type=float, dest="alpha_offset")
    ev.add_argument("--alpha-step", type=float, dest="alpha_step")
    ev.add_argument("--rho-count", type=int, dest="rho_count")
    ev.add_argument("--rho-offset", type=float, dest="rho_offset")
    ev.add_argument("--rho-step", type=float, dest="rho_step")
    ev.add_argument("--top", type=int, help="target cells recorded in the landscape")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    res = _Resolver(args, _RUN_DEFAULTS)
    configurator = res.get("configurator")
    op_kind = res.get("operator")
    if op_kind:
        operator = OperatorSpec(
            op_kind,
            max_step=res.get_int("max_step"),
            direction_mode=res.get("direction_mode"),
        )
    else:
        operator = default_operator(args.family, configurator)
        if res.get_int("max_step") != 1 and operator.kind == "lstep":
            operator = OperatorSpec("lstep", max_step=res.get_int("max_step"))
    cutoff_raw = res.get("cutoff")
    spec = ScenarioSpec(
        family=args.family,
        configurator=configurator,
        operator=operator,
        sizes=_parse_sizes(res.get("sizes")),
        repetitions=res.get_int("reps"),
        runs=res.get_int("runs"),
        cutoff=int(cutoff_raw) if cutoff_raw != "" else None,
        master_seed=res.get_int("seed"),
        ils=ParamIlsSettings(
            initial_samples=res.get_int("ils_samples"),
            perturbation_hops=res.get_int("ils_hops"),
            restart_probability=res.get_float("ils_restart"),
        ),
        tie_break=res.get("tie_break"),
        landscape_path=res.get("landscape_file") or None,
        synthetic_kind=res.get("synthetic_kind"),
        synthetic_seed=res.get_int("synthetic_seed"),
        target_top=res.get_int("target_top"),
        call_cap=res.get_int("call_cap"),
    )
    records = run_scenario(spec)
    emit_raw_csv(records, args.out)
    failed = sum(1 for r in records if r.better_calls is None)
    print(f"wrote {len(records)} records to {args.out}" + (f" ({failed} failed)" if failed else ""))
    return 0 if failed == 0 else 1


def _cmd_summarize(args: argparse.Namespace) -> int:
    records = parse_raw_csv(args.raw)
    rows = summarize(records, baseline=args.baseline, candidate=args.candidate)
    emit_summary_csv(rows, args.out)
    for row in rows:
        tail = ""
        if row.p_value is not None:
            tail = f"  p={row.p_value:.4g}  delta={row.cliffs_delta:+.3f}"
        print(
            f"{row.family} {row.configurator} size={row.space_size} {row.operator}: "
            f"mean={row.mean:.2f} (se {row.stderr:.2f}, n={row.n}){tail}"
        )
    return 0


def _cmd_landscape_check(args: argparse.Namespace) -> int:
    res = _Resolver(args, _CHECK_DEFAULTS)
    land = load_cached_landscape(args.file, top=res.get_int("top"))
    alpha_raw = res.get("alpha")
    if alpha_raw == "":
        if land.space.D != 1:
            raise ConfigError("certificate reports need a 1-D landscape; pass --alpha/--beta for 2-D grids")
        for cert in minimal_certificate(land):
            print(f"passes alpha={cert.alpha:.2f} beta={cert.beta}")
        return 0
    alpha = float(alpha_raw)
    beta = res.get_int("beta")
    failures = 0
    for label, result in check_unimodal_slices(land, alpha, beta):
        if result is None:
            print(f"PASS {label}: ({alpha:g}, {beta}) holds")
        elif result == "degenerate":
            failures += 1
            print(f"FAIL {label}: no unique best value")
        else:
            failures += 1
            x, y = result
            print(f"FAIL {label}: witness x={x} y={y}")
    return 0 if failures == 0 else 1


def _cmd_evaluate_landscape(args: argparse.Namespace) -> int:
    res = _Resolver(args, _EVAL_DEFAULTS)
    rng = random.Random(res.get_int("seed"))
    instance_arg = res.get("instances")
    if instance_arg:
        instances = []
        for path in instance_arg.split(","):
            path = path.strip()
            if not path:
                continue
            with open(path, "r", encoding="utf-8") as fh:
                instances.append(parse_dimacs(fh.read()))
        if not instances:
            raise ConfigError("--instances named no readable files")
    else:
        count = res.get_int("generate")
        if count < 1:
            raise ConfigError(f"need at least one instance, got --generate {count}")
        instances = [
            generate_planted_3sat(res.get_int("vars"), res.get_int("clauses"), rng)[0]
            for _ in range(count)
        ]
    grid = ParameterSpace(
        (
            ParameterDim(
                "alpha_scale",
                res.get_int("alpha_count"),
                offset=res.get_float("alpha_offset"),
                step=res.get_float("alpha_step"),
            ),
            ParameterDim(
                "rho",
                res.get_int("rho_count"),
                offset=res.get_float("rho_offset"),
                step=res.get_float("rho_step"),
            ),
        )
    )
    land = evaluate_saps_landscape(
        instances,
        grid,
        reps=res.get_int("reps"),
        kappa=res.get_int("kappa"),
        rng=rng,
        ps=res.get_float("ps"),
        wp=res.get_float("wp"),
        targets_top=res.get_int("top"),
    )
    save_landscape_csv(land, args.out)
    best = max(land.qualities)
    print(
        f"wrote {land.space.phis[0]}x{land.space.phis[1]} landscape to {args.out} "
        f"(best mean satisfied: {best:.2f})"
    )
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    commands = {
        "run": _cmd_run,
        "summarize": _cmd_summarize,
        "landscape-check": _cmd_landscape_check,
        "evaluate-landscape": _cmd_evaluate_landscape,
    }
    try:
        return commands[args.command](args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
