"""CNF formulas, a planted-satisfiable 3-SAT generator, and a SAPS solver.

SAPS (scaling and probabilistic smoothing) keeps one weight per clause,
starting at 1.  Each iteration either flips one variable or rescales the
weights:

* among the variables of currently unsatisfied clauses, take the flip that
  most reduces the total weight of unsatisfied clauses, if some flip reduces
  it strictly (ties broken uniformly);
* otherwise, with probability wp flip a random variable from a random
  unsatisfied clause, else multiply every unsatisfied clause's weight by
  alpha_scale and then, with probability ps, smooth all weights toward their
  mean: w <- rho * w + (1 - rho) * mean(w).

A run starts from a uniform random assignment, lasts kappa iterations (one
flip or one scaling event each), and reports the best number of satisfied
clauses seen.  The tuned parameters here are alpha_scale and rho.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .landscape import Landscape, top_targets
from .space import ParameterSpace


@dataclass(frozen=True)
class CnfFormula:
    """Clauses in DIMACS convention: nonzero ints, sign is polarity."""

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.num_vars < 1:
            raise ValueError(f"need at least one variable, got {self.num_vars}")
        if not self.clauses:
            raise ValueError("a formula needs at least one clause")
        for clause in self.clauses:
            if not clause:
                raise ValueError("empty clause")
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} outside 1..{self.num_vars}")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)


def count_satisfied(formula: CnfFormula, assignment: Sequence[int]) -> int:
    if len(assignment) != formula.num_vars:
        raise ValueError(
            f"assignment has {len(assignment)} values for {formula.num_vars} variables"
        )
    sat = 0
    for clause in formula.clauses:
        for lit in clause:
            value = assignment[abs(lit) - 1]
            if (value == 1) == (lit > 0):
                sat += 1
                break
    return sat


def to_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.num_vars} {formula.num_clauses}"]
    for clause in formula.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    num_vars = None
    declared_clauses = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith(("c", "%")):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad problem line: {raw!r}")
            num_vars, declared_clauses = int(parts[2]), int(parts[3])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                if current:
                    clauses.append(tuple(current))
                    current = []
            else:
                current.append(lit)
    if current:
        clauses.append(tuple(current))
    if num_vars is None:
        raise ValueError("missing 'p cnf' line")
    if declared_clauses is not None and declared_clauses != len(clauses):
        raise ValueError(f"header declares {declared_clauses} clauses, found {len(clauses)}")
    return CnfFormula(num_vars, tuple(clauses))


def generate_planted_3sat(
    num_vars: int,
    num_clauses: int,
    rng: random.Random,
) -> tuple[CnfFormula, tuple[int, ...]]:
    """Uniform 3-clauses over distinct variables, conditioned on a hidden solution.

    Returns the formula and the planted assignment (0/1 per variable) so
    callers can verify satisfiability independently.
    """
    if num_vars < 3:
        raise ValueError(f"planted 3-SAT needs at least 3 variables, got {num_vars}")
    planted = tuple(rng.randint(0, 1) for _ in range(num_vars))
    clauses = []
    variables = list(range(1, num_vars + 1))
    while len(clauses) < num_clauses:
        chosen = rng.sample(variables, 3)
        clause = tuple(v if rng.random() < 0.5 else -v for v in chosen)
        for lit in clause:
            if (planted[abs(lit) - 1] == 1) == (lit > 0):
                clauses.append(clause)
                break
    return CnfFormula(num_vars, tuple(clauses)), planted


# ---------------------------------------------------------------------------
# SAPS kernel.  The formula is flattened to CSR arrays once per formula and
# the whole run happens inside numba with a per-run integer seed.

from .targets import _xo_below, _xo_seed, _xo_unif  # noqa: E402  (shared rng kernels)


@dataclass(frozen=True)
class SapsParams:
    alpha_scale: float
    rho: float
    ps: float = 0.05
    wp: float = 0.01

    def __post_init__(self) -> None:
        if self.alpha_scale <= 0:
            raise ValueError(f"alpha_scale must be positive, got {self.alpha_scale}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        for name in ("ps", "wp"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


class _CsrFormula:
    """Flat arrays for the kernel; built once and reused across runs."""

    def __init__(self, formula: CnfFormula):
        self.num_vars = formula.num_vars
        self.num_clauses = formula.num_clauses
        lits = []
        starts = [0]
        for clause in formula.clauses:
            lits.extend(clause)
            starts.append(len(lits))
        self.cl_lits = np.array(lits, dtype=np.int32)
        self.cl_start = np.array(starts, dtype=np.int32)
        occ: list[list[int]] = [[] for _ in range(formula.num_vars + 1)]
        for ci, clause in enumerate(formula.clauses):
            for lit in clause:
                occ[abs(lit)].append(ci if lit > 0 else ~ci)  # ~ci encodes negative polarity
        occ_flat = []
        occ_starts = [0, 0]  # vars are 1-based; slot 0 stays an empty block
        for var in range(1, formula.num_vars + 1):
            occ_flat.extend(occ[var])
            occ_starts.append(len(occ_flat))
        self.occ = np.array(occ_flat, dtype=np.int64) if occ_flat else np.zeros(0, dtype=np.int64)
        self.occ_start = np.array(occ_starts, dtype=np.int64)


# Keyed by value, not id(): ids of dead formulas get reused, which would
# silently hand the kernel another formula's arrays.
_CSR_CACHE: dict[CnfFormula, _CsrFormula] = {}


def _csr_for(formula: CnfFormula) -> _CsrFormula:
    csr = _CSR_CACHE.get(formula)
    if csr is None:
        if len(_CSR_CACHE) > 64:
            _CSR_CACHE.clear()
        csr = _CsrFormula(formula)
        _CSR_CACHE[formula] = csr
    return csr


@njit(cache=True)
def _saps_kernel(
    cl_lits,
    cl_start,
    occ,
    occ_start,
    num_vars,
    num_clauses,
    alpha_scale,
    rho,
    ps,
    wp,
    kappa,
    seed,
):
    s = np.empty(4, dtype=np.uint64)
    _xo_seed(seed, s)
    assign = np.empty(num_vars + 1, dtype=np.uint8)
    for v in range(1, num_vars + 1):
        assign[v] = 1 if _xo_unif(s) < 0.5 else 0
    weights = np.ones(num_clauses, dtype=np.float64)
    ntrue = np.zeros(num_clauses, dtype=np.int32)
    unsat = np.empty(num_clauses, dtype=np.int32)
    unsat_pos = np.full(num_clauses, -1, dtype=np.int32)
    unsat_count = 0
    for c in range(num_clauses):
        t = 0
        for k in range(cl_start[c], cl_start[c + 1]):
            lit = cl_lits[k]
            var = lit if lit > 0 else -lit
            if (assign[var] == 1) == (lit > 0):
                t += 1
        ntrue[c] = t
        if t == 0:
            unsat[unsat_count] = c
            unsat_pos[c] = unsat_count
            unsat_count += 1
    best = num_clauses - unsat_count
    cand = np.empty(num_vars, dtype=np.int32)
    seen = np.zeros(num_vars + 1, dtype=np.uint8)
    ties = np.empty(num_vars, dtype=np.int32)
    for _ in range(kappa):
        if unsat_count == 0:
            break  # satisfied; the best count can only stay at its maximum
        # Gather the variables of unsatisfied clauses.
        n_cand = 0
        for ui in range(unsat_count):
            c = unsat[ui]
            for k in range(cl_start[c], cl_start[c + 1]):
                lit = cl_lits[k]
                var = lit if lit > 0 else -lit
                if seen[var] == 0:
                    seen[var] = 1
                    cand[n_cand] = var
                    n_cand += 1
        best_delta = 0.0
        n_ties = 0
        for j in range(n_cand):
            var = cand[j]
            seen[var] = 0  # reset for the next iteration
            delta = 0.0
            cur = assign[var]
            for k in range(occ_start[var], occ_start[var + 1]):
                code = occ[k]
                if code >= 0:
                    c = code
                    lit_true = cur == 1
                else:
                    c = ~code
                    lit_true = cur == 0
                if lit_true:
                    if ntrue[c] == 1:
                        delta += weights[c]  # flipping breaks this clause
                elif ntrue[c] == 0:
                    delta -= weights[c]  # flipping satisfies this clause
            if delta < best_delta - 1e-12:
                best_delta = delta
                ties[0] = var
                n_ties = 1
            elif n_ties > 0 and abs(delta - best_delta) <= 1e-12:
                ties[n_ties] = var
                n_ties += 1
        flip_var = -1
        if n_ties > 0 and best_delta < -1e-12:
            flip_var = ties[_xo_below(s, n_ties)]
        elif _xo_unif(s) < wp:
            c = unsat[_xo_below(s, unsat_count)]
            k = cl_start[c] + _xo_below(s, cl_start[c + 1] - cl_start[c])
            lit = cl_lits[k]
            flip_var = lit if lit > 0 else -lit
        else:
            for ui in range(unsat_count):
                weights[unsat[ui]] *= alpha_scale
            if _xo_unif(s) < ps:
                mean = 0.0
                for c in range(num_clauses):
                    mean += weights[c]
                mean /= num_clauses
                for c in range(num_clauses):
                    weights[c] = rho * weights[c] + (1.0 - rho) * mean
            continue
        # Apply the flip and maintain the unsatisfied-clause index.
        cur = assign[flip_var]
        for k in range(occ_start[flip_var], occ_start[flip_var + 1]):
            code = occ[k]
            if code >= 0:
                c = code
                was_true = cur == 1
            else:
                c = ~code
                was_true = cur == 0
            if was_true:
                ntrue[c] -= 1
                if ntrue[c] == 0:
                    unsat[unsat_count] = c
                    unsat_pos[c] = unsat_count
                    unsat_count += 1
            else:
                ntrue[c] += 1
                if ntrue[c] == 1:
                    pos = unsat_pos[c]
                    last = unsat[unsat_count - 1]
                    unsat[pos] = last
                    unsat_pos[last] = pos
                    unsat_pos[c] = -1
                    unsat_count -= 1
        assign[flip_var] = 1 - cur
        if num_clauses - unsat_count > best:
            best = num_clauses - unsat_count
    return best


def run_saps(
    formula: CnfFormula,
    params: SapsParams,
    kappa: int,
    rng: random.Random | int | None,
) -> int:
    """Best satisfied-clause count over a kappa-iteration SAPS run."""
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    r = rng if isinstance(rng, random.Random) else random.Random(rng)
    csr = _csr_for(formula)
    return int(
        _saps_kernel(
            csr.cl_lits,
            csr.cl_start,
            csr.occ,
            csr.occ_start,
            csr.num_vars,
            csr.num_clauses,
            params.alpha_scale,
            params.rho,
            params.ps,
            params.wp,
            kappa,
            r.getrandbits(63),
        )
    )


def evaluate_saps_landscape(
    instances: Sequence[CnfFormula],
    grid: ParameterSpace,
    reps: int,
    kappa: int,
    rng: random.Random,
    ps: float = 0.05,
    wp: float = 0.01,
    targets_top: int = 5,
) -> Landscape:
    """Mean satisfied-clause count per grid cell, averaged over instances and reps.

    The grid's first dimension decodes to alpha_scale and the second to rho.
    Every (cell, instance, repetition) run gets its own seed drawn up front,
    so the landscape is deterministic for a given rng state.
    """
    if grid.D != 2:
        raise ValueError(f"SAPS landscapes need an (alpha_scale, rho) grid, got {grid.D}-D")
    if not instances:
        raise ValueError("need at least one instance")
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    csrs = [_csr_for(f) for f in instances]
    qualities = []
    for theta in grid.all_configurations():
        alpha_scale, rho = grid.decode(theta)
        if -1e-9 <= rho <= 1.0 + 1e-9:
            rho = min(max(rho, 0.0), 1.0)  # absorb float noise from the grid decode
        params = SapsParams(alpha_scale=alpha_scale, rho=rho, ps=ps, wp=wp)
        total = 0.0
        for csr in csrs:
            for _ in range(reps):
                total += _saps_kernel(
                    csr.cl_lits,
                    csr.cl_start,
                    csr.occ,
                    csr.occ_start,
                    csr.num_vars,
                    csr.num_clauses,
                    params.alpha_scale,
                    params.rho,
                    params.ps,
                    params.wp,
                    kappa,
                    rng.getrandbits(63),
                )
        qualities.append(total / (len(instances) * reps))
    targets = top_targets(grid, qualities, targets_top)
    return Landscape(grid, tuple(qualities), kind="cached-empirical", targets=targets)
