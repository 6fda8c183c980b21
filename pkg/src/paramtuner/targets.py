"""Benchmark targets: (1+1) EA and RLS_k on OneMax, LeadingOnes, and Ridge.

The tuned parameter is the EA's mutation strength chi (each bit flips with
probability chi/n) or the RLS flip count k (exactly k distinct bits flip).
Offspring are accepted on greater-or-equal fitness and a run returns the
fitness after exactly ``kappa`` iterations; under elitism that final fitness
is also the best seen.

Two execution routes produce the same run distribution:

* naive numba kernels that simulate every iteration with a self-contained
  xoshiro256++ generator (one integer seed per run, so results do not depend
  on thread scheduling);
* exact-distribution samplers for the two structured cases that dominate the
  experiment cost, Ridge from the all-zeros ridge start and LeadingOnes from
  a uniform start.  These skip the geometrically many no-change iterations
  instead of simulating them; tests check the two routes agree run-for-run
  in distribution.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numba import njit, uint64

FITNESS_FUNCTIONS = ("onemax", "leadingones", "ridge")
_FN_IDS = {"onemax": 0, "leadingones": 1, "ridge": 2}
INIT_MODES = ("uniform", "ridge-start")


def eval_onemax(x: Sequence[int]) -> int:
    return int(sum(x))


def eval_leadingones(x: Sequence[int]) -> int:
    count = 0
    for bit in x:
        if bit != 1:
            break
        count += 1
    return count


def eval_ridge(x: Sequence[int]) -> int:
    """n + i on ridge points 1^i 0^(n-i), n - OneMax(x) elsewhere."""
    n = len(x)
    ones = eval_onemax(x)
    if eval_leadingones(x) == ones:
        return n + ones
    return n - ones


_EVALUATORS = {"onemax": eval_onemax, "leadingones": eval_leadingones, "ridge": eval_ridge}


@dataclass(frozen=True)
class TargetRunResult:
    final_fitness: float
    iterations_used: int


# ---------------------------------------------------------------------------
# xoshiro256++ inside numba; seeded per run via splitmix64.

@njit(cache=True)
def _xo_seed(seed, s):
    z = uint64(seed)
    for i in range(4):
        z = z + uint64(0x9E3779B97F4A7C15)
        x = z
        x = (x ^ (x >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> uint64(27))) * uint64(0x94D049BB133111EB)
        s[i] = x ^ (x >> uint64(31))


@njit(cache=True)
def _xo_next(s):
    x = s[0] + s[3]
    result = ((x << uint64(23)) | (x >> uint64(41))) + s[0]
    t = s[1] << uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = (s[3] << uint64(45)) | (s[3] >> uint64(19))
    return result


@njit(cache=True)
def _xo_unif(s):
    return float(_xo_next(s) >> uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _xo_below(s, bound):
    # Modulo bias is ~bound/2^64, irrelevant at bound <= a few thousand.
    return int(_xo_next(s) % uint64(bound))


@njit(cache=True)
def _fitness_kernel(fn_id, x):
    n = x.size
    if fn_id == 0:
        total = 0
        for i in range(n):
            total += x[i]
        return total
    if fn_id == 1:
        lead = 0
        for i in range(n):
            if x[i] != 1:
                break
            lead += 1
        return lead
    ones = 0
    for i in range(n):
        ones += x[i]
    lead = 0
    for i in range(n):
        if x[i] != 1:
            break
        lead += 1
    if lead == ones:
        return n + ones
    return n - ones


@njit(cache=True)
def _binomial_inversion(s, n, p):
    # Count of flipped bits; inversion on the binomial cdf.
    u = _xo_unif(s)
    q = 1.0 - p
    prob = q ** n
    cdf = prob
    k = 0
    ratio = p / q
    while u > cdf and k < n:
        k += 1
        prob *= ratio * (n - k + 1) / k
        cdf += prob
    return k


@njit(cache=True)
def _ea_run_kernel(fn_id, n, p, kappa, init_uniform, seed):
    s = np.empty(4, dtype=np.uint64)
    _xo_seed(seed, s)
    x = np.zeros(n, dtype=np.uint8)
    if init_uniform:
        for i in range(n):
            if _xo_unif(s) < 0.5:
                x[i] = 1
    fit = _fitness_kernel(fn_id, x)
    perm = np.empty(n, dtype=np.int64)
    for i in range(n):
        perm[i] = i
    for _ in range(kappa):
        k = _binomial_inversion(s, n, p)
        if k == 0:
            continue  # offspring equals parent; accepted, nothing changes
        for j in range(k):
            swap = j + _xo_below(s, n - j)
            tmp = perm[j]
            perm[j] = perm[swap]
            perm[swap] = tmp
            x[perm[j]] ^= 1
        nf = _fitness_kernel(fn_id, x)
        if nf >= fit:
            fit = nf
        else:
            for j in range(k):
                x[perm[j]] ^= 1
    return fit


@njit(cache=True)
def _ea_batch_kernel(fn_id, n, p, kappa, init_uniform, seeds, out):
    for i in range(seeds.size):
        out[i] = _ea_run_kernel(fn_id, n, p, kappa, init_uniform, seeds[i])


@njit(cache=True)
def _rls_run_kernel(fn_id, n, k, kappa, seed):
    s = np.empty(4, dtype=np.uint64)
    _xo_seed(seed, s)
    x = np.zeros(n, dtype=np.uint8)
    for i in range(n):
        if _xo_unif(s) < 0.5:
            x[i] = 1
    fit = _fitness_kernel(fn_id, x)
    perm = np.empty(n, dtype=np.int64)
    for i in range(n):
        perm[i] = i
    for _ in range(kappa):
        for j in range(k):
            swap = j + _xo_below(s, n - j)
            tmp = perm[j]
            perm[j] = perm[swap]
            perm[swap] = tmp
            x[perm[j]] ^= 1
        nf = _fitness_kernel(fn_id, x)
        if nf >= fit:
            fit = nf
        else:
            for j in range(k):
                x[perm[j]] ^= 1
    return fit


@njit(cache=True)
def _rls_batch_kernel(fn_id, n, k, kappa, seeds, out):
    for i in range(seeds.size):
        out[i] = _rls_run_kernel(fn_id, n, k, kappa, seeds[i])


# ---------------------------------------------------------------------------
# Exact-distribution fast paths.

def _geometric(rng: random.Random, q: float) -> int:
    """Trials until and including the first success, success probability q."""
    u = 1.0 - rng.random()  # u in (0, 1]
    if q >= 1.0:
        return 1
    steps = math.log(u) / math.log1p(-q)
    if steps >= 2**62:
        return 2**62
    return int(steps) + 1


def _ridge_start_exact(n: int, p: float, kappa: int, rng: random.Random) -> int:
    """Ridge EA from 0^n: a pure-birth chain over the ridge position.

    From 1^i 0^(n-i) the only accepted strict changes flip exactly the block
    of K zeros after the prefix, K in 1..n-i, each with probability
    p^K (1-p)^(n-K); everything else is rejected or a no-op.
    """
    ratio = p / (1.0 - p)
    pos = 0
    t = 0
    while pos < n and t < kappa:
        base = (1.0 - p) ** n
        weight = base
        total = 0.0
        weights = []
        for _ in range(n - pos):
            weight *= ratio
            weights.append(weight)
            total += weight
        wait = _geometric(rng, total)
        if t + wait > kappa:
            break
        t += wait
        pick = rng.random() * total
        acc = 0.0
        jump = n - pos
        for idx, w in enumerate(weights):
            acc += w
            if pick <= acc:
                jump = idx + 1
                break
        pos += jump
    return n + pos


def _leadingones_exact(n: int, p: float, kappa: int, rng: random.Random) -> int:
    """LeadingOnes EA from a uniform start, skipping non-extending iterations.

    Acceptance depends only on which bits flip, so the bits past the prefix
    stay independent uniform; an extension flips the first zero (probability
    p (1-p)^cur) and then the fresh suffix extends the prefix geometrically.
    """
    cur = 0
    while cur < n and rng.random() < 0.5:
        cur += 1
    t = 0
    while cur < n and t < kappa:
        extend = p * (1.0 - p) ** cur
        wait = _geometric(rng, extend)
        if t + wait > kappa:
            break
        t += wait
        cur += 1
        while cur < n and rng.random() < 0.5:
            cur += 1
    return cur


# ---------------------------------------------------------------------------
# Public entry points.

_MAX_SEED = 2**63 - 1


def _as_rng(rng: random.Random | int | None) -> random.Random:
    if isinstance(rng, random.Random):
        return rng
    return random.Random(rng)


def _check_common(fn: str, n: int, kappa: int) -> int:
    if fn not in _FN_IDS:
        raise ValueError(f"unknown fitness function {fn!r}; choose from {FITNESS_FUNCTIONS}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    return _FN_IDS[fn]


def run_one_plus_one_ea(
    fn: str,
    n: int,
    chi: float,
    kappa: int,
    rng: random.Random | int | None,
    init: str = "uniform",
    force_naive: bool = False,
) -> TargetRunResult:
    fn_id = _check_common(fn, n, kappa)
    if init not in INIT_MODES:
        raise ValueError(f"unknown init {init!r}; choose from {INIT_MODES}")
    if not 0.0 < chi < n:
        raise ValueError(f"chi must lie in (0, n), got {chi}")
    r = _as_rng(rng)
    p = chi / n
    if not force_naive:
        if fn == "ridge" and init == "ridge-start":
            return TargetRunResult(float(_ridge_start_exact(n, p, kappa, r)), kappa)
        if fn == "leadingones" and init == "uniform":
            return TargetRunResult(float(_leadingones_exact(n, p, kappa, r)), kappa)
    seed = r.getrandbits(63)
    fit = _ea_run_kernel(fn_id, n, p, kappa, init == "uniform", seed)
    return TargetRunResult(float(fit), kappa)


def run_rls_k(
    fn: str,
    n: int,
    k: int,
    kappa: int,
    rng: random.Random | int | None,
) -> TargetRunResult:
    fn_id = _check_common(fn, n, kappa)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..n, got {k}")
    r = _as_rng(rng)
    fit = _rls_run_kernel(fn_id, n, k, kappa, r.getrandbits(63))
    return TargetRunResult(float(fit), kappa)


def ea_final_fitness_batch(
    fn: str,
    n: int,
    chi: float,
    kappa: int,
    runs: int,
    rng: random.Random,
    init: str = "uniform",
    force_naive: bool = False,
) -> np.ndarray:
    """Final fitness of ``runs`` independent EA runs, one row per run."""
    fn_id = _check_common(fn, n, kappa)
    if init not in INIT_MODES:
        raise ValueError(f"unknown init {init!r}; choose from {INIT_MODES}")
    if not 0.0 < chi < n:
        raise ValueError(f"chi must lie in (0, n), got {chi}")
    p = chi / n
    if not force_naive and fn == "ridge" and init == "ridge-start":
        return np.array([_ridge_start_exact(n, p, kappa, rng) for _ in range(runs)], dtype=np.float64)
    if not force_naive and fn == "leadingones" and init == "uniform":
        return np.array([_leadingones_exact(n, p, kappa, rng) for _ in range(runs)], dtype=np.float64)
    seeds = np.array([rng.getrandbits(63) for _ in range(runs)], dtype=np.uint64)
    out = np.empty(runs, dtype=np.int64)
    _ea_batch_kernel(fn_id, n, p, kappa, init == "uniform", seeds, out)
    return out.astype(np.float64)


def rls_final_fitness_batch(
    fn: str,
    n: int,
    k: int,
    kappa: int,
    runs: int,
    rng: random.Random,
) -> np.ndarray:
    fn_id = _check_common(fn, n, kappa)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..n, got {k}")
    seeds = np.array([rng.getrandbits(63) for _ in range(runs)], dtype=np.uint64)
    out = np.empty(runs, dtype=np.int64)
    _rls_batch_kernel(fn_id, n, k, kappa, seeds, out)
    return out.astype(np.float64)


def performance_metric(final_fitnesses: Iterable[float]) -> float:
    """Mean final fitness; the quantity the configurators compare."""
    values = list(final_fitnesses)
    if not values:
        raise ValueError("performance metric needs at least one run")
    return sum(values) / len(values)
