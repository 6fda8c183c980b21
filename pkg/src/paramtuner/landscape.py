"""Configuration landscapes: exact tables, cached empirical grids, and diagnostics.

A Landscape stores one quality value per configuration of a 1-D or 2-D
ParameterSpace (higher is better).  The diagnostics view it through the
minimization lens (cost = -quality) and measure how far it deviates from
unimodality:

* ``check_approx_unimodal`` verifies the (alpha, beta) condition exhaustively:
  for every position x at distance i >= beta from the optimum and every
  position y at distance j > alpha * i, the cost of y must be strictly worse.
  Ties count as violations.
* ``minimal_certificate`` reports the Pareto set of (alpha, beta) pairs that
  pass, with alpha on a 0.01 grid.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .space import Configuration, ParameterDim, ParameterSpace

LANDSCAPE_KINDS = ("exact", "cached-empirical")
SYNTHETIC_KINDS = ("unimodal", "plateau", "sawtooth", "deceptive")


@dataclass(frozen=True)
class Landscape:
    """Qualities on a full 1-D or 2-D grid, flattened row-major, higher is better."""

    space: ParameterSpace
    qualities: tuple[float, ...]
    kind: str = "exact"
    targets: tuple[Configuration, ...] = ()

    def __post_init__(self) -> None:
        if self.space.D not in (1, 2):
            raise ValueError(f"landscapes support 1 or 2 dimensions, got {self.space.D}")
        if self.kind not in LANDSCAPE_KINDS:
            raise ValueError(f"unknown landscape kind {self.kind!r}")
        if len(self.qualities) != self.space.n_configurations:
            raise ValueError(
                f"{len(self.qualities)} qualities for {self.space.n_configurations} configurations"
            )
        if not self.targets:
            best = max(self.qualities)
            found = tuple(
                theta
                for flat, theta in enumerate(self.space.all_configurations())
                if self.qualities[flat] == best
            )
            object.__setattr__(self, "targets", found)
        else:
            for theta in self.targets:
                self.flat_index(theta)  # bounds check

    def flat_index(self, theta: Configuration) -> int:
        phis = self.space.phis
        if len(theta) != len(phis):
            raise ValueError(f"configuration {theta} does not fit a {len(phis)}-D landscape")
        flat = 0
        for idx, phi in zip(theta, phis):
            if not 1 <= idx <= phi:
                raise ValueError(f"index {idx} outside 1..{phi}")
            flat = flat * phi + (idx - 1)
        return flat

    def quality(self, theta: Configuration) -> float:
        return self.qualities[self.flat_index(theta)]

    def best_quality(self) -> float:
        return max(self.qualities)

    def unique_optimum(self) -> Configuration:
        best = max(self.qualities)
        where = [i for i, q in enumerate(self.qualities) if q == best]
        if len(where) != 1:
            raise ValueError(f"landscape has {len(where)} optima, expected exactly one")
        flat = where[0]
        phis = self.space.phis
        idx = []
        for phi in reversed(phis):
            idx.append(flat % phi + 1)
            flat //= phi
        return tuple(reversed(idx))


def exact_landscape(
    qualities: Sequence[float],
    space: Optional[ParameterSpace] = None,
    name: str = "x",
) -> Landscape:
    """Wrap a 1-D run of qualities; indices 1..len decode to themselves by default."""
    if space is None:
        space = ParameterSpace((ParameterDim(name, len(qualities)),))
    return Landscape(space, tuple(float(q) for q in qualities), kind="exact")


@dataclass(frozen=True)
class UnimodalityCertificate:
    alpha: float
    beta: int
    witness: Optional[tuple[Configuration, Configuration]] = None


def _positions_costs(land: Landscape) -> tuple[list[int], list[float], int]:
    if land.space.D != 1:
        raise ValueError("unimodality diagnostics run on 1-D landscapes; slice 2-D grids first")
    m = land.space.phis[0]
    costs = [-q for q in land.qualities]
    opt = land.unique_optimum()[0]
    return list(range(1, m + 1)), costs, opt


def check_approx_unimodal(
    land: Landscape, alpha: float, beta: int
) -> Optional[tuple[Configuration, Configuration]]:
    """None if the (alpha, beta) condition holds; else the smallest violating pair.

    A pair (x, y) violates when dist(x) >= beta, dist(y) > alpha * dist(x),
    and cost(y) <= cost(x); witnesses are ordered lexicographically by
    (position of x, position of y).
    """
    if alpha < 1.0:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    positions, costs, opt = _positions_costs(land)
    for x in positions:
        i = abs(x - opt)
        if i < beta:
            continue
        fx = costs[x - 1]
        for y in positions:
            # Distances are integers, so a 1e-9 slack only absorbs float noise
            # in alpha * i when the product should equal j exactly.
            if abs(y - opt) > alpha * i + 1e-9 and costs[y - 1] <= fx:
                return ((x,), (y,))
    return None


def minimal_certificate(land: Landscape, alpha_step: float = 0.01) -> list[UnimodalityCertificate]:
    """Pareto set of passing (alpha, beta) pairs, alpha rounded up to the grid.

    For each x the binding requirement is alpha >= j/i over positions y no
    costlier than x; beta relaxes by dropping every x closer than beta.
    """
    positions, costs, opt = _positions_costs(land)
    m = len(positions)
    dist = np.array([abs(x - opt) for x in positions], dtype=np.int64)
    cost = np.array(costs, dtype=np.float64)
    order = np.argsort(cost, kind="stable")
    # Walking costs in ascending order, track the farthest position seen so
    # far; ties must see each other, so flush equal-cost groups together.
    max_far = np.zeros(m, dtype=np.int64)
    running = 0
    rank = 0
    while rank < m:
        end = rank
        while end < m and cost[order[end]] == cost[order[rank]]:
            end += 1
        group_max = running
        for r in range(rank, end):
            group_max = max(group_max, int(dist[order[r]]))
        for r in range(rank, end):
            max_far[order[r]] = group_max
        running = group_max
        rank = end
    ratios = np.zeros(m, dtype=np.float64)
    for idx in range(m):
        if dist[idx] >= 1:
            ratios[idx] = max_far[idx] / dist[idx]
    # alpha needed if every x at distance >= beta stays in scope.
    needed = np.zeros(m + 2, dtype=np.float64)
    for beta in range(m, 0, -1):
        worst = needed[beta + 1]
        for idx in range(m):
            if dist[idx] == beta:
                worst = max(worst, ratios[idx])
        needed[beta] = worst
    grid = round(1.0 / alpha_step)
    out: list[UnimodalityCertificate] = []
    prev_alpha = None
    for beta in range(1, m + 1):
        alpha = max(1.0, needed[beta])
        # Ceil onto the grid; the 1e-9 slack keeps ratios like 11/10 that
        # land a hair above a grid point from being bumped a full step.
        alpha = -(-(alpha * grid - 1e-9) // 1) / grid
        if prev_alpha is None or alpha < prev_alpha:
            out.append(UnimodalityCertificate(alpha=float(alpha), beta=beta))
            prev_alpha = alpha
        if alpha == 1.0:
            break
    return out


def check_unimodal_slices(land: Landscape, alpha: float, beta: int) -> list[tuple[str, object]]:
    """Run the 1-D check on every axis-parallel slice of a 2-D landscape.

    Returns (slice label, result) pairs where result is None, a witness pair,
    or the string "degenerate" when a slice has no unique best cell.
    """
    if land.space.D == 1:
        return [("all", check_approx_unimodal(land, alpha, beta))]
    phi1, phi2 = land.space.phis
    d1, d2 = land.space.dims
    reports: list[tuple[str, object]] = []
    for fixed in range(1, phi2 + 1):
        qs = [land.quality((i, fixed)) for i in range(1, phi1 + 1)]
        label = f"{d1.name} at {d2.name}={d2.decode(fixed):g}"
        reports.append((label, _slice_result(qs, d1.name, alpha, beta)))
    for fixed in range(1, phi1 + 1):
        qs = [land.quality((fixed, j)) for j in range(1, phi2 + 1)]
        label = f"{d2.name} at {d1.name}={d1.decode(fixed):g}"
        reports.append((label, _slice_result(qs, d2.name, alpha, beta)))
    return reports


def _slice_result(qualities: list[float], name: str, alpha: float, beta: int):
    sub = exact_landscape(qualities, name=name)
    try:
        return check_approx_unimodal(sub, alpha, beta)
    except ValueError:
        return "degenerate"


# ---------------------------------------------------------------------------
# Synthetic landscape families.


def generate_synthetic(
    kind: str,
    m: int,
    rng: random.Random,
    alpha: float = 2.0,
) -> Landscape:
    """Deterministic families for exercising the diagnostics and configurators.

    * unimodal: quality strictly decreasing in the distance from a random peak.
    * plateau: one peak on an otherwise flat landscape.
    * sawtooth: quality bands by distance from position 1; order reversed
      inside each geometric band [alpha^k, alpha^(k+1)), so the landscape is
      (alpha, 1)-approximately unimodal but not (1, 1).
    * deceptive: quality improves away from the unique optimum at position 1.
    """
    if kind not in SYNTHETIC_KINDS:
        raise ValueError(f"unknown synthetic kind {kind!r}; choose from {SYNTHETIC_KINDS}")
    if m < 2:
        raise ValueError(f"synthetic landscapes need m >= 2, got {m}")
    if kind == "unimodal":
        # Quality strictly worsens with distance from the peak, interleaving
        # the two sides so farther always means worse regardless of side.
        opt = rng.randint(1, m)
        qualities = [0.0] * m
        level = 0.0
        for d in range(1, max(opt - 1, m - opt) + 1):
            ring = [x for x in (opt - d, opt + d) if 1 <= x <= m]
            rng.shuffle(ring)
            for x in ring:
                level -= 0.5 + rng.random()
                qualities[x - 1] = level
        return Landscape(ParameterSpace.from_phis(m), tuple(qualities))
    if kind == "plateau":
        opt = rng.randint(1, m)
        qualities = [0.0] * m
        qualities[opt - 1] = 1.0
        return Landscape(ParameterSpace.from_phis(m), tuple(qualities))
    if kind == "sawtooth":
        if alpha <= 1.0:
            raise ValueError(f"sawtooth needs alpha > 1, got {alpha}")
        # Optimum pinned at position 1; distance d = x - 1 lands in band
        # floor(log_alpha d).  Cost rises across bands and falls within one.
        def band(d: int) -> int:
            k = 0
            edge = alpha
            while d >= edge:
                k += 1
                edge *= alpha
            return k

        others = sorted(range(2, m + 1), key=lambda x: (band(x - 1), -(x - 1)))
        costs = [0.0] * m
        level = 0.0
        for x in others:
            level += 0.5 + rng.random()
            costs[x - 1] = level
        return Landscape(ParameterSpace.from_phis(m), tuple(-c for c in costs))
    # deceptive
    costs = [0.0] * m
    for x in range(2, m + 1):
        costs[x - 1] = float(m + 1 - (x - 1)) + rng.random() * 0.25
    costs[0] = 0.0  # unique optimum at position 1
    return Landscape(ParameterSpace.from_phis(m), tuple(-c for c in costs))


# ---------------------------------------------------------------------------
# Cached empirical landscapes on disk.


def save_landscape_csv(land: Landscape, path: str) -> None:
    """Write one row per cell: decoded dimension values, then quality."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([d.name for d in land.space.dims] + ["quality"])
        for flat, theta in enumerate(land.space.all_configurations()):
            row = [repr(v) for v in land.space.decode(theta)]
            row.append(repr(land.qualities[flat]))
            writer.writerow(row)


def load_cached_landscape(path: str, top: int = 5) -> Landscape:
    """Read a grid CSV back into a cached-empirical landscape.

    The last column must be named ``quality``; the remaining columns are
    dimension values that must fill a full, evenly spaced grid.  Targets are
    the ``top`` best cells (ties broken by row-major position).
    """
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-1] != "quality":
            raise ValueError(f"{path}: expected a trailing 'quality' column, got {header}")
        names = header[:-1]
        if len(names) not in (1, 2):
            raise ValueError(f"{path}: expected 1 or 2 dimension columns, got {len(names)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    dims = []
    for col, name in enumerate(names):
        values = sorted({row[col] for row in rows})
        if len(values) < 2:
            raise ValueError(f"{path}: dimension {name!r} has fewer than 2 distinct values")
        step = values[1] - values[0]
        for a, b in zip(values, values[1:]):
            if abs((b - a) - step) > 1e-9 * max(1.0, abs(step)):
                raise ValueError(f"{path}: dimension {name!r} is not evenly spaced")
        dims.append((name, values, step))
    space = ParameterSpace(
        tuple(
            ParameterDim(name, len(values), offset=values[0] - step, step=step)
            for name, values, step in dims
        )
    )
    lookup = [
        {round(v / step): i + 1 for i, v in enumerate(values)} if step else {}
        for _, values, step in dims
    ]
    qualities: list[Optional[float]] = [None] * space.n_configurations
    for row in rows:
        theta = []
        for col, (_, values, step) in enumerate(dims):
            key = round(row[col] / step)
            if key not in lookup[col]:
                raise ValueError(f"{path}: value {row[col]} off the grid in column {col + 1}")
            theta.append(lookup[col][key])
        flat = 0
        for idx, phi in zip(theta, space.phis):
            flat = flat * phi + (idx - 1)
        if qualities[flat] is not None:
            raise ValueError(f"{path}: duplicate cell at {tuple(theta)}")
        qualities[flat] = row[-1]
    missing = [flat for flat, q in enumerate(qualities) if q is None]
    if missing:
        labels = []
        for flat in missing[:5]:
            idx = []
            rest = flat
            for phi in reversed(space.phis):
                idx.append(rest % phi + 1)
                rest //= phi
            labels.append(str(space.decode(tuple(reversed(idx)))))
        raise ValueError(f"{path}: {len(missing)} grid cells missing, first {labels}")
    targets = top_targets(space, [float(q) for q in qualities], top)
    return Landscape(space, tuple(float(q) for q in qualities), kind="cached-empirical", targets=targets)


def top_targets(space: ParameterSpace, qualities: Sequence[float], top: int) -> tuple[Configuration, ...]:
    if top < 1:
        raise ValueError(f"need at least one target, got top={top}")
    ranked = sorted(enumerate(qualities), key=lambda item: (-item[1], item[0]))
    chosen = [flat for flat, _ in ranked[:top]]
    configs = list(space.all_configurations())
    return tuple(configs[flat] for flat in sorted(chosen))
