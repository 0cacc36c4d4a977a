"""Exact grid representation of the categorical distribution parameter.

The distribution parameter theta lives on the lattice {0, eta, 2*eta, ..., 1}
with eta = 1/(m*K), so every marginal is stored as an integer count
n[d, k] with theta[d, k] = n[d, k] / (m*K).  All invariants (row sums,
boundedness, step size) are therefore checkable with integer arithmetic,
with no floating-point tolerance anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence


class InvariantViolation(RuntimeError):
    """An internal invariant was broken.  Signals a bug, never expected."""


@dataclass(frozen=True)
class Resolution:
    """Grid resolution: K categories, learning rate eta = 1/(m*K)."""

    K: int
    m: int

    def __post_init__(self) -> None:
        if self.K < 2:
            raise ValueError(f"K must be >= 2, got {self.K}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")

    @property
    def eta(self) -> Fraction:
        return Fraction(1, self.m * self.K)

    @property
    def grid(self) -> int:
        """Number of grid steps per unit probability, 1/eta = m*K."""
        return self.m * self.K


@dataclass(frozen=True)
class OneHotSolution:
    """A categorical sample: one active category index (1-based) per dimension."""

    categories: tuple[int, ...]

    @property
    def D(self) -> int:
        return len(self.categories)

    def is_all_first(self) -> bool:
        return all(c == 1 for c in self.categories)


class GridParams:
    """Distribution parameter as a D x K table of integer grid counts."""

    __slots__ = ("resolution", "counts")

    def __init__(self, resolution: Resolution, counts: np.ndarray):
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[1] != resolution.K:
            raise ValueError(f"counts must be (D, {resolution.K}), got {counts.shape}")
        self.resolution = resolution
        self.counts = counts
        self.validate()

    @property
    def D(self) -> int:
        return self.counts.shape[0]

    @property
    def K(self) -> int:
        return self.resolution.K

    def theta(self, d: int, k: int) -> Fraction:
        """Exact marginal probability of category k (1-based) in dimension d (1-based)."""
        return Fraction(int(self.counts[d - 1, k - 1]), self.resolution.grid)

    def theta_array(self) -> np.ndarray:
        """Float view of theta; exactness ends here."""
        return self.counts / self.resolution.grid

    def copy(self) -> "GridParams":
        return GridParams(self.resolution, self.counts.copy())

    def validate(self) -> None:
        grid = self.resolution.grid
        if np.any(self.counts < 0) or np.any(self.counts > grid):
            raise InvariantViolation("count outside [0, m*K]")
        row_sums = self.counts.sum(axis=1)
        if np.any(row_sums != grid):
            raise InvariantViolation(f"row sums {row_sums.tolist()} != {grid}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridParams):
            return NotImplemented
        return self.resolution == other.resolution and np.array_equal(
            self.counts, other.counts
        )


class RandomStream:
    """Deterministic seeded random stream (PCG64).

    Same seed material gives the same draw sequence on every platform.  A
    per-trial stream is derived from (master seed, key...) so that trials can
    run in any order or in parallel without affecting reproducibility.
    """

    def __init__(self, seed: int | SeedSequence):
        if isinstance(seed, SeedSequence):
            self.seed_entropy = tuple(seed.entropy) if isinstance(
                seed.entropy, (list, tuple)
            ) else (seed.entropy,)
            seq = seed
        else:
            self.seed_entropy = (int(seed),)
            seq = SeedSequence(int(seed))
        self.generator = Generator(PCG64(seq))

    @classmethod
    def derive(cls, master_seed: int, *keys: int) -> "RandomStream":
        return cls(SeedSequence((int(master_seed),) + tuple(int(k) for k in keys)))

    def integers(self, low: int, high: int, size=None) -> np.ndarray:
        return self.generator.integers(low, high, size=size, dtype=np.int64)


def init_params(D: int, res: Resolution) -> GridParams:
    """Uniform initialization: every theta[d, k] = 1/K exactly (count m)."""
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    counts = np.full((D, res.K), res.m, dtype=np.int64)
    return GridParams(res, counts)


def sample(params: GridParams, stream: RandomStream) -> OneHotSolution:
    """Draw one solution: per dimension, one uniform integer in [0, m*K)
    resolved against the cumulative counts.  Exact, no floating point."""
    grid = params.resolution.grid
    u = stream.integers(0, grid, size=params.D)
    cums = np.cumsum(params.counts, axis=1)
    cats = np.argmax(u[:, None] < cums, axis=1) + 1
    return OneHotSolution(tuple(int(c) for c in cats))


def apply_update(
    params: GridParams, winner: OneHotSolution, loser: OneHotSolution
) -> GridParams:
    """One ccGA step: theta <- theta + eta * (winner - loser), on the grid.

    In each dimension where the sampled categories differ, the winner's count
    goes up by one and the loser's down by one.  A count leaving [0, m*K]
    cannot happen for categories actually sampled from the distribution, so it
    is reported as an internal invariant violation rather than a user error.
    """
    if winner.D != params.D or loser.D != params.D:
        raise ValueError(
            f"dimension mismatch: params D={params.D}, "
            f"winner D={winner.D}, loser D={loser.D}"
        )
    counts = params.counts.copy()
    grid = params.resolution.grid
    for d in range(params.D):
        kw = winner.categories[d] - 1
        kl = loser.categories[d] - 1
        if kw == kl:
            continue
        counts[d, kw] += 1
        counts[d, kl] -= 1
        if counts[d, kl] < 0 or counts[d, kw] > grid:
            raise InvariantViolation(
                f"count left [0, {grid}] in dimension {d + 1}"
            )
    return GridParams(params.resolution, counts)


def optimal_product(params: GridParams) -> float:
    """prod_d theta[d, 1], computed exactly then converted to float."""
    return float(_optimal_product_exact(params))


def optimal_sum(params: GridParams) -> float:
    """sum_d theta[d, 1], computed exactly then converted to float."""
    return float(_optimal_sum_exact(params))


def min_optimal(params: GridParams) -> float:
    """min_d theta[d, 1]."""
    return float(Fraction(int(params.counts[:, 0].min()), params.resolution.grid))


def _optimal_product_exact(params: GridParams) -> Fraction:
    num = 1
    for n in params.counts[:, 0]:
        num *= int(n)
    return Fraction(num, params.resolution.grid ** params.D)


def _optimal_sum_exact(params: GridParams) -> Fraction:
    return Fraction(int(params.counts[:, 0].sum()), params.resolution.grid)
