"""Mutation operators for the configurators.

Four proposal rules over a ParameterSpace:

* ``lstep``      -- one dimension moves by +-d with d drawn uniformly from 1..max_step;
* ``random``     -- one dimension takes a fresh uniform value, with replacement;
* ``random-wr``  -- as above but never re-proposing a (dimension, value) pair
                    within one configurator run;
* ``harmonic``   -- one dimension moves by +-d with d harmonically distributed,
                    so large jumps stay possible while small ones dominate.

Every operator returns a configuration different from the incumbent.
Infeasible draws (outside the index range) are rejected and redrawn in full,
so the returned proposal is distributed over the feasible moves only.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .space import Configuration, ParameterSpace


class NeighborhoodExhausted(Exception):
    """Without-replacement sampling found no unproposed value in the chosen dimension.

    The caller decides what to do: restart, fall back to with-replacement, or stop.
    """

    def __init__(self, dim_index: int):
        super().__init__(f"no unproposed values left in dimension {dim_index}")
        self.dim_index = dim_index


def harmonic_number(m: int) -> float:
    if m < 1:
        raise ValueError(f"harmonic number needs m >= 1, got {m}")
    return sum(1.0 / k for k in range(1, m + 1))


@dataclass(frozen=True)
class HarmonicDistribution:
    """Step-size law P(d) = 1 / (d * H_{phi-1}) on d in 1..phi-1."""

    phi: int
    normalizer: float = field(init=False)
    _cumulative: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.phi < 2:
            raise ValueError(f"harmonic step distribution needs phi >= 2, got {self.phi}")
        h = harmonic_number(self.phi - 1)
        acc = 0.0
        cum = []
        for d in range(1, self.phi):
            acc += 1.0 / (d * h)
            cum.append(acc)
        if abs(cum[-1] - 1.0) > 1e-12:
            raise AssertionError(f"harmonic pmf sums to {cum[-1]}, not 1")
        cum[-1] = 1.0
        object.__setattr__(self, "normalizer", h)
        object.__setattr__(self, "_cumulative", tuple(cum))

    def pmf(self, d: int) -> float:
        if not 1 <= d <= self.phi - 1:
            return 0.0
        return 1.0 / (d * self.normalizer)

    def sample(self, rng: random.Random) -> int:
        return bisect.bisect_right(self._cumulative, rng.random()) + 1


_DIST_CACHE: dict[int, HarmonicDistribution] = {}


def harmonic_distribution(phi: int) -> HarmonicDistribution:
    dist = _DIST_CACHE.get(phi)
    if dist is None:
        dist = HarmonicDistribution(phi)
        _DIST_CACHE[phi] = dist
    return dist


def harmonic_sample_step(phi: int, rng: random.Random) -> int:
    """Draw a step size d in 1..phi-1 with P(d) proportional to 1/d."""
    return harmonic_distribution(phi).sample(rng)


@dataclass
class OperatorState:
    """Mutable per-run operator bookkeeping, owned by exactly one configurator run.

    max_step bounds the lstep operator.  For without-replacement sampling we
    keep the complement of the proposed set (the values still available per
    dimension) so a uniform draw is O(1); the set only shrinks within a run
    and reset() is the single explicit way to refill it.
    """

    max_step: int = 1
    _remaining: dict[int, list[int]] = field(default_factory=dict)

    def remaining_in(self, dim_index: int, phi: int) -> list[int]:
        rem = self._remaining.get(dim_index)
        if rem is None:
            rem = list(range(1, phi + 1))
            self._remaining[dim_index] = rem
        return rem

    def proposed_in(self, dim_index: int, phi: int) -> set[int]:
        rem = self._remaining.get(dim_index)
        if rem is None:
            return set()
        return set(range(1, phi + 1)) - set(rem)

    def reset(self) -> None:
        self._remaining.clear()


def mutate_l_step(
    space: ParameterSpace,
    theta: Configuration,
    state: OperatorState,
    rng: random.Random,
) -> Configuration:
    """Shift one dimension by +-d with (dimension, d, direction) uniform and feasible."""
    if state.max_step < 1:
        raise ValueError(f"max_step must be >= 1, got {state.max_step}")
    phis = space.phis
    ndims = len(phis)
    while True:
        dim = rng.randrange(ndims)
        d = rng.randint(1, state.max_step)
        new = theta[dim] + (d if rng.random() < 0.5 else -d)
        # phi >= 2 guarantees some (dim, 1, dir) is feasible, so this terminates.
        if 1 <= new <= phis[dim]:
            return theta[:dim] + (new,) + theta[dim + 1:]


def mutate_random(
    space: ParameterSpace,
    theta: Configuration,
    state: OperatorState,
    rng: random.Random,
    without_replacement: bool = False,
) -> Configuration:
    """Give one uniformly chosen dimension a fresh uniform value != its current one."""
    phis = space.phis
    dim = rng.randrange(len(phis))
    cur = theta[dim]
    if without_replacement:
        rem = state.remaining_in(dim, phis[dim])
        while True:
            if not rem or (len(rem) == 1 and rem[0] == cur):
                raise NeighborhoodExhausted(dim)
            pos = rng.randrange(len(rem))
            value = rem[pos]
            if value == cur:
                continue
            rem[pos] = rem[-1]
            rem.pop()
            break
    else:
        # Uniform over the phi-1 values != cur without building a list.
        value = rng.randint(1, phis[dim] - 1)
        if value >= cur:
            value += 1
    return theta[:dim] + (value,) + theta[dim + 1:]


def mutate_harmonic(
    space: ParameterSpace,
    theta: Configuration,
    rng: random.Random,
    mode: str = "random-direction",
    judge: Optional[Callable[[Configuration, Configuration], Configuration]] = None,
) -> Configuration:
    """Harmonic step in one uniformly chosen dimension.

    mode "random-direction" draws (dimension, step, direction) jointly and
    rejects infeasible triples in full.  mode "best-of-both" evaluates both
    directions through ``judge`` (a counted comparison supplied by the
    configurator) when both are feasible; one-sided steps need no judgment.
    """
    if mode not in ("random-direction", "best-of-both"):
        raise ValueError(f"unknown direction mode {mode!r}")
    phis = space.phis
    ndims = len(phis)
    while True:
        dim = rng.randrange(ndims)
        d = harmonic_distribution(phis[dim]).sample(rng)
        cur = theta[dim]
        up_ok = cur + d <= phis[dim]
        down_ok = cur - d >= 1
        if mode == "random-direction":
            new = cur + d if rng.random() < 0.5 else cur - d
            if not 1 <= new <= phis[dim]:
                continue
            return theta[:dim] + (new,) + theta[dim + 1:]
        if not up_ok and not down_ok:
            continue
        up = theta[:dim] + (cur + d,) + theta[dim + 1:]
        down = theta[:dim] + (cur - d,) + theta[dim + 1:]
        if up_ok and down_ok:
            if judge is None:
                raise ValueError("best-of-both mode needs a judge to compare directions")
            return judge(up, down)
        return up if up_ok else down


OPERATOR_KINDS = ("lstep", "random", "random-wr", "harmonic")


@dataclass(frozen=True)
class OperatorSpec:
    """Which operator a configurator run uses, plus its knobs."""

    kind: str
    max_step: int = 1
    direction_mode: str = "random-direction"

    def __post_init__(self) -> None:
        if self.kind not in OPERATOR_KINDS:
            raise ValueError(f"unknown operator {self.kind!r}; choose from {OPERATOR_KINDS}")
        if self.max_step < 1:
            raise ValueError(f"max_step must be >= 1, got {self.max_step}")
        if self.direction_mode not in ("random-direction", "best-of-both"):
            raise ValueError(f"unknown direction mode {self.direction_mode!r}")

    def fresh_state(self) -> OperatorState:
        return OperatorState(max_step=self.max_step)

    def propose(
        self,
        space: ParameterSpace,
        theta: Configuration,
        state: OperatorState,
        rng: random.Random,
        judge: Optional[Callable[[Configuration, Configuration], Configuration]] = None,
    ) -> Configuration:
        if self.kind == "lstep":
            return mutate_l_step(space, theta, state, rng)
        if self.kind == "random":
            return mutate_random(space, theta, state, rng, without_replacement=False)
        if self.kind == "random-wr":
            return mutate_random(space, theta, state, rng, without_replacement=True)
        return mutate_harmonic(space, theta, rng, mode=self.direction_mode, judge=judge)
