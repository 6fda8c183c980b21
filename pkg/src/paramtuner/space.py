"""Integer-indexed parameter spaces, configurations, distances, and neighborhoods."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

# A configuration is a tuple of 1-based indices, one per dimension.  Plain
# tuples keep the configurator hot loops allocation-cheap and hashable.
Configuration = tuple[int, ...]


@dataclass(frozen=True)
class ParameterDim:
    """One tunable parameter: indices 1..phi decoding to offset + index*step."""

    name: str
    phi: int
    offset: float = 0.0
    step: float = 1.0

    def __post_init__(self) -> None:
        if self.phi < 2:
            raise ValueError(f"dim {self.name!r}: needs phi >= 2, got {self.phi}")
        if self.step == 0:
            raise ValueError(f"dim {self.name!r}: step must be nonzero so decode is monotone")

    def decode(self, index: int) -> float:
        if not 1 <= index <= self.phi:
            raise ValueError(f"dim {self.name!r}: index {index} outside 1..{self.phi}")
        return self.offset + index * self.step

    def values(self) -> tuple[float, ...]:
        return tuple(self.offset + i * self.step for i in range(1, self.phi + 1))


@dataclass(frozen=True)
class ParameterSpace:
    """A grid of configurations; immutable and safe to share across workers."""

    dims: tuple[ParameterDim, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.dims, tuple):
            object.__setattr__(self, "dims", tuple(self.dims))
        if len(self.dims) < 1:
            raise ValueError("a parameter space needs at least one dimension")
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate dimension names in {names}")

    @classmethod
    def from_phis(cls, *phis: int, prefix: str = "p") -> "ParameterSpace":
        return cls(tuple(ParameterDim(f"{prefix}{i + 1}", phi) for i, phi in enumerate(phis)))

    @property
    def D(self) -> int:
        return len(self.dims)

    @property
    def phis(self) -> tuple[int, ...]:
        return tuple(d.phi for d in self.dims)

    @property
    def M(self) -> int:
        """Sum of the per-dimension ranges."""
        return sum(d.phi for d in self.dims)

    @property
    def n_configurations(self) -> int:
        out = 1
        for d in self.dims:
            out *= d.phi
        return out

    def decode(self, theta: Configuration) -> tuple[float, ...]:
        validate_config(self, theta)
        return tuple(d.decode(i) for d, i in zip(self.dims, theta))

    def all_configurations(self):
        """Row-major iterator over every configuration."""
        return itertools.product(*(range(1, d.phi + 1) for d in self.dims))


def validate_config(space: ParameterSpace, theta: Configuration) -> None:
    if len(theta) != space.D:
        raise ValueError(f"configuration {theta} has {len(theta)} indices, space has {space.D} dims")
    for dim, idx in zip(space.dims, theta):
        if not 1 <= idx <= dim.phi:
            raise ValueError(f"index {idx} outside 1..{dim.phi} in dim {dim.name!r}")


def l1_distance(a: Configuration, b: Configuration) -> int:
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return sum(abs(x - y) for x, y in zip(a, b))


def neighborhood(space: ParameterSpace, theta: Configuration) -> list[Configuration]:
    """All configurations differing from theta in exactly one index; size M - D."""
    validate_config(space, theta)
    out: list[Configuration] = []
    for i, dim in enumerate(space.dims):
        cur = theta[i]
        for v in range(1, dim.phi + 1):
            if v != cur:
                out.append(theta[:i] + (v,) + theta[i + 1:])
    return out


def sample_uniform(space: ParameterSpace, rng: random.Random) -> Configuration:
    return tuple(rng.randint(1, d.phi) for d in space.dims)
