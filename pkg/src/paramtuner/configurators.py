"""Perturbative configurators built around a counted better() comparison.

``better(a, b)`` runs the target algorithm ``runs`` times under each
configuration with cutoff ``cutoff``, compares the mean final fitness, and
returns the second configuration only on a strict win; ties keep the first.
Every call increments one per-run counter, and that counter is the cost
measure everything else reports.

Three search strategies share this primitive:

* ``run_param_rls``: mutate the incumbent, keep the winner.  On equal means
  the incumbent is kept by ``better``, but acceptance then moves to the
  proposal with probability 1/2 by default (``tie_break="random"``) so flat
  regions do not freeze the search; pass ``tie_break="incumbent"`` for the
  strict behaviour.
* ``iterative_first_improvement``: scan the not-yet-evaluated neighbors in
  operator-dependent order and move on the first strict improvement, until
  none is left.
* ``run_param_ils``: optional uniform screening, then repeated perturb +
  first-improvement descent, tracking the best local optimum and restarting
  from scratch with a small probability per round.

Runs stop when a stop rule fires: either a configuration from the target
set enters an evaluation (the counter at that moment is the reported cost;
if the configuration appears without being evaluated in the same step, the
count stands as is), or the call budget is reached.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Protocol, Sequence

from .landscape import Landscape
from .operators import NeighborhoodExhausted, OperatorSpec, harmonic_distribution, mutate_random
from .space import Configuration, ParameterSpace, neighborhood, sample_uniform, validate_config
from . import targets as _targets


class Winner(enum.Enum):
    FIRST = "first"
    SECOND = "second"


class BetterResult(NamedTuple):
    winner: Winner
    tied: bool
    score_first: float
    score_second: float


class TargetBackend(Protocol):
    """Performance measure the comparison runs: higher is better."""

    deterministic: bool

    def performance(
        self, values: tuple[float, ...], cutoff: int, runs: int, rng: random.Random
    ) -> float: ...


@dataclass(frozen=True)
class LandscapeBackend:
    """Table lookup; evaluation noise already averaged out or absent."""

    landscape: Landscape
    deterministic: bool = True

    def performance(self, values, cutoff, runs, rng):
        del values, cutoff, runs, rng
        raise NotImplementedError("looked up by configuration, see EvalProtocol.score")


@dataclass(frozen=True)
class BenchmarkBackend:
    """Live benchmark runs: (1+1) EA or RLS_k on a pseudo-Boolean function."""

    fn: str
    n: int
    algorithm: str = "ea"
    init: str = "uniform"
    deterministic: bool = False

    def __post_init__(self) -> None:
        if self.algorithm not in ("ea", "rls"):
            raise ValueError(f"unknown target algorithm {self.algorithm!r}")

    def performance(self, values, cutoff, runs, rng):
        if self.algorithm == "ea":
            fits = _targets.ea_final_fitness_batch(
                self.fn, self.n, values[0], cutoff, runs, rng, init=self.init
            )
        else:
            k = int(round(values[0]))
            fits = _targets.rls_final_fitness_batch(self.fn, self.n, k, cutoff, runs, rng)
        return float(fits.mean())


@dataclass(frozen=True)
class EvalProtocol:
    """Everything one better() call needs: target, cutoff kappa, runs per side."""

    space: ParameterSpace
    backend: TargetBackend
    cutoff: int
    runs: int

    def __post_init__(self) -> None:
        if self.cutoff < 0:
            raise ValueError(f"cutoff must be >= 0, got {self.cutoff}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")

    def score(self, theta: Configuration, rng: random.Random) -> float:
        if isinstance(self.backend, LandscapeBackend):
            return self.backend.landscape.quality(theta)
        return self.backend.performance(self.space.decode(theta), self.cutoff, self.runs, rng)


STOP_KINDS = ("first-optimum-sampled", "call-budget")


@dataclass(frozen=True)
class StopRule:
    """Target sampling and/or a call budget; budget 0 means uncapped."""

    kind: str
    targets: frozenset[Configuration] = frozenset()
    budget: int = 0

    def __post_init__(self) -> None:
        if self.kind not in STOP_KINDS:
            raise ValueError(f"unknown stop rule {self.kind!r}")
        if self.kind == "first-optimum-sampled" and not self.targets:
            raise ValueError("first-optimum-sampled needs a nonempty target set")
        if self.kind == "call-budget" and self.budget < 1:
            raise ValueError(f"call budget must be >= 1, got {self.budget}")
        if self.budget < 0:
            raise ValueError(f"call budget cannot be negative, got {self.budget}")


def first_optimum_sampled(targets: Sequence[Configuration], budget: int = 0) -> StopRule:
    """Stop on the first target evaluation; a positive budget caps runaway runs."""
    return StopRule("first-optimum-sampled", targets=frozenset(targets), budget=budget)


def call_budget(budget: int) -> StopRule:
    return StopRule("call-budget", budget=budget)


@dataclass
class RunTrace:
    """What one configurator run produced, in better() calls."""

    better_calls: int = 0
    stopped_by: Optional[str] = None
    first_sampled_optimum_at: Optional[int] = None
    final_incumbent: Optional[Configuration] = None
    history: Optional[list[tuple[int, Configuration]]] = None


class _StopRun(Exception):
    pass


class RunContext:
    """Per-run accounting: the shared call counter, stop checks, discovered set."""

    def __init__(
        self,
        proto: EvalProtocol,
        stop: StopRule,
        rng: random.Random,
        trace: Optional[RunTrace] = None,
    ):
        self.proto = proto
        self.stop = stop
        self.rng = rng
        self.trace = trace if trace is not None else RunTrace()
        self.discovered: set[Configuration] = set()
        self._hit = False

    def observe(self, theta: Configuration, about_to_evaluate: bool = False) -> None:
        """Notify the stop rule that theta was generated.

        Hits on the target set end the run immediately unless the caller is
        about to evaluate theta, in which case that evaluation still counts.
        """
        if (
            self.stop.kind == "first-optimum-sampled"
            and not self._hit
            and theta in self.stop.targets
        ):
            self._hit = True
            if not about_to_evaluate:
                self._finish("first-optimum-sampled")

    def better(self, a: Configuration, b: Configuration) -> BetterResult:
        """The counted comparison; returns b only on a strict mean win."""
        self.trace.better_calls += 1
        sa = self.proto.score(a, self.rng)
        sb = self.proto.score(b, self.rng)
        self.discovered.add(a)
        self.discovered.add(b)
        result = BetterResult(
            winner=Winner.SECOND if sb > sa else Winner.FIRST,
            tied=sb == sa,
            score_first=sa,
            score_second=sb,
        )
        if self._hit:
            self._finish("first-optimum-sampled")
        if 0 < self.stop.budget <= self.trace.better_calls:
            self._finish("call-budget")
        return result

    def evaluate_candidate(self, incumbent: Configuration, candidate: Configuration) -> BetterResult:
        self.observe(candidate, about_to_evaluate=True)
        return self.better(incumbent, candidate)

    def _finish(self, reason: str) -> None:
        self.trace.stopped_by = reason
        if reason == "first-optimum-sampled":
            self.trace.first_sampled_optimum_at = self.trace.better_calls
        raise _StopRun()

    def record(self, theta: Configuration) -> None:
        if self.trace.history is not None:
            self.trace.history.append((self.trace.better_calls, theta))


def _propose(
    operator: OperatorSpec,
    space: ParameterSpace,
    theta: Configuration,
    state,
    ctx: RunContext,
) -> Configuration:
    """One operator proposal; judged directions count, exhaustion falls back."""

    def judge(a: Configuration, b: Configuration) -> Configuration:
        ctx.observe(a, about_to_evaluate=True)
        ctx.observe(b, about_to_evaluate=True)
        res = ctx.better(a, b)
        return b if res.winner is Winner.SECOND else a

    try:
        return operator.propose(space, theta, state, ctx.rng, judge=judge)
    except NeighborhoodExhausted:
        # Every value in the drawn dimension was proposed already; keep the
        # run alive by sampling that step with replacement instead.
        return mutate_random(space, theta, state, ctx.rng, without_replacement=False)


def run_param_rls(
    space: ParameterSpace,
    operator: OperatorSpec,
    proto: EvalProtocol,
    stop: StopRule,
    rng: random.Random,
    tie_break: str = "random",
    record_history: bool = False,
) -> RunTrace:
    """Mutate-and-keep-the-winner search from a uniform initial configuration."""
    if tie_break not in ("random", "incumbent"):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    trace = RunTrace(history=[] if record_history else None)
    ctx = RunContext(proto, stop, rng, trace)
    state = operator.fresh_state()
    theta = sample_uniform(space, rng)
    try:
        ctx.observe(theta)
        ctx.record(theta)
        while True:
            candidate = _propose(operator, space, theta, state, ctx)
            res = ctx.evaluate_candidate(theta, candidate)
            if res.winner is Winner.SECOND or (
                res.tied and tie_break == "random" and rng.random() < 0.5
            ):
                theta = candidate
                ctx.record(theta)
    except _StopRun:
        pass
    trace.final_incumbent = theta
    return trace


@dataclass(frozen=True)
class ParamIlsSettings:
    """Knobs of the iterated local search: screening size R, perturbation
    strength s, and the per-round restart probability."""

    initial_samples: int = 0
    perturbation_hops: int = 3
    restart_probability: float = 0.01

    def __post_init__(self) -> None:
        if self.initial_samples < 0:
            raise ValueError(f"initial_samples must be >= 0, got {self.initial_samples}")
        if self.perturbation_hops < 1:
            raise ValueError(f"perturbation_hops must be >= 1, got {self.perturbation_hops}")
        if not 0.0 <= self.restart_probability <= 1.0:
            raise ValueError(
                f"restart_probability must lie in [0, 1], got {self.restart_probability}"
            )


def _uniform_neighbor(
    space: ParameterSpace, theta: Configuration, rng: random.Random
) -> Configuration:
    """Uniform over the one-index-changed neighborhood (size M - D)."""
    phis = space.phis
    total = sum(phi - 1 for phi in phis)
    pick = rng.randrange(total)
    for dim, phi in enumerate(phis):
        if pick < phi - 1:
            value = pick + 1
            if value >= theta[dim]:
                value += 1
            return theta[:dim] + (value,) + theta[dim + 1:]
        pick -= phi - 1
    raise AssertionError("unreachable")


def _scan_order(
    operator: OperatorSpec,
    space: ParameterSpace,
    theta: Configuration,
    discovered: set[Configuration],
    rng: random.Random,
) -> list[Configuration]:
    """Order in which first-improvement visits the unevaluated neighbors.

    Uniform operators shuffle; the harmonic operator biases the scan toward
    small steps by sampling without replacement with the per-draw proposal
    weights; lstep restricts the scan to its step ball.
    """
    fresh = [nb for nb in neighborhood(space, theta) if nb not in discovered]
    if operator.kind == "lstep":
        fresh = [
            nb
            for nb in fresh
            if max(abs(a - b) for a, b in zip(nb, theta)) <= operator.max_step
        ]
    if operator.kind != "harmonic":
        rng.shuffle(fresh)
        return fresh
    keyed = []
    for nb in fresh:
        for dim, (a, b) in enumerate(zip(theta, nb)):
            if a != b:
                weight = harmonic_distribution(space.phis[dim]).pmf(abs(a - b))
                break
        keyed.append((rng.expovariate(1.0) / weight, nb))
    keyed.sort(key=lambda item: item[0])
    return [nb for _, nb in keyed]


def _first_improvement(
    ctx: RunContext,
    operator: OperatorSpec,
    space: ParameterSpace,
    theta: Configuration,
    rng: random.Random,
    progress: Optional[list[Configuration]] = None,
) -> Configuration:
    while True:
        moved = False
        for candidate in _scan_order(operator, space, theta, ctx.discovered, rng):
            res = ctx.evaluate_candidate(theta, candidate)
            if res.winner is Winner.SECOND:
                theta = candidate
                if progress is not None:
                    progress[0] = theta
                ctx.record(theta)
                moved = True
                break
        if not moved:
            return theta


def iterative_first_improvement(
    space: ParameterSpace,
    theta: Configuration,
    proto: EvalProtocol,
    rng: random.Random,
    operator: Optional[OperatorSpec] = None,
    stop: Optional[StopRule] = None,
    discovered: Optional[set[Configuration]] = None,
    trace: Optional[RunTrace] = None,
) -> Configuration:
    """Standalone first-improvement descent; returns the local optimum.

    With no stop rule the descent runs to completion under a budget no
    descent can exceed (every neighbor evaluated once per move).
    """
    validate_config(space, theta)
    operator = operator if operator is not None else OperatorSpec("random")
    if stop is None:
        stop = call_budget(max(1, space.n_configurations * (space.M - space.D + 1)))
    ctx = RunContext(proto, stop, rng, trace)
    if discovered is not None:
        ctx.discovered = discovered
    reached = [theta]
    try:
        return _first_improvement(ctx, operator, space, theta, rng, progress=reached)
    except _StopRun:
        return reached[0]


def run_param_ils(
    space: ParameterSpace,
    operator: OperatorSpec,
    proto: EvalProtocol,
    stop: StopRule,
    rng: random.Random,
    settings: ParamIlsSettings = ParamIlsSettings(),
    record_history: bool = False,
) -> RunTrace:
    """Iterated local search over configurations.

    The operator shapes the first-improvement scan order; perturbation hops
    are uniform neighborhood moves and are not evaluated on their own.  A
    restart clears the discovered set along with the local-search state.
    """
    trace = RunTrace(history=[] if record_history else None)
    ctx = RunContext(proto, stop, rng, trace)
    incumbent: Optional[Configuration] = None
    try:
        theta0 = sample_uniform(space, rng)
        incumbent = theta0
        ctx.observe(theta0)
        ctx.record(theta0)
        for _ in range(settings.initial_samples):
            candidate = sample_uniform(space, rng)
            res = ctx.evaluate_candidate(theta0, candidate)
            if res.winner is Winner.SECOND:
                theta0 = candidate
                incumbent = theta0
                ctx.record(theta0)
        theta_ils = _first_improvement(ctx, operator, space, theta0, rng)
        theta_inc = theta_ils
        incumbent = theta_inc
        while True:
            theta = theta_ils
            for _ in range(settings.perturbation_hops):
                theta = _uniform_neighbor(space, theta, rng)
                ctx.observe(theta)
            theta = _first_improvement(ctx, operator, space, theta, rng)
            res = ctx.better(theta_ils, theta)
            if res.winner is Winner.SECOND:
                theta_ils = theta
                ctx.record(theta_ils)
            res = ctx.better(theta_inc, theta_ils)
            if res.winner is Winner.SECOND:
                theta_inc = theta_ils
                incumbent = theta_inc
            if rng.random() < settings.restart_probability:
                theta_ils = sample_uniform(space, rng)
                ctx.observe(theta_ils)
                ctx.record(theta_ils)
                ctx.discovered.clear()
    except _StopRun:
        pass
    trace.final_incumbent = incumbent
    return trace
