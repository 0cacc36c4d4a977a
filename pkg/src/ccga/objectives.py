"""Linear categorical objectives: COM, KVal, and custom weight tables.

COM counts the dimensions whose first category is selected.  KVal reads the
solution as a base-K number, dimension 1 most significant and smaller
category indices worth more; its weights (K-k) * K**(D-d) overflow 64-bit
integers already at modest sizes, so evaluation uses Python's arbitrary
precision and comparison never materializes the weights at all.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .model import OneHotSolution


class Kind(enum.Enum):
    COM = "com"
    KVAL = "kval"
    CUSTOM = "custom"


@dataclass(frozen=True)
class LinearCategoricalObjective:
    D: int
    K: int
    kind: Kind
    # Materialized only for CUSTOM; COM/KVal weights are implicit.
    weights: tuple[tuple[int, ...], ...] | None = field(default=None)

    def weight(self, d: int, k: int) -> int:
        """Weight of category k in dimension d (both 1-based)."""
        if self.kind is Kind.COM:
            return 1 if k == 1 else 0
        if self.kind is Kind.KVAL:
            return (self.K - k) * self.K ** (self.D - d)
        return self.weights[d - 1][k - 1]

    def _check_shape(self, x: OneHotSolution) -> None:
        if x.D != self.D:
            raise ValueError(f"solution has D={x.D}, objective expects D={self.D}")
        for c in x.categories:
            if not 1 <= c <= self.K:
                raise ValueError(f"category {c} outside [1, {self.K}]")


def com(D: int, K: int) -> LinearCategoricalObjective:
    _check_problem_shape(D, K)
    return LinearCategoricalObjective(D, K, Kind.COM)


def kval(D: int, K: int) -> LinearCategoricalObjective:
    _check_problem_shape(D, K)
    return LinearCategoricalObjective(D, K, Kind.KVAL)


def custom(weights) -> LinearCategoricalObjective:
    """Custom linear objective from a D x K table of non-negative integers.

    The unique maximizer must be the all-first-categories solution; this is
    required for hitting-time semantics and is validated here.
    """
    table = tuple(tuple(int(w) for w in row) for row in weights)
    D = len(table)
    if D < 1:
        raise ValueError("weight table must have at least one row")
    K = len(table[0])
    _check_problem_shape(D, K)
    for row in table:
        if len(row) != K:
            raise ValueError("ragged weight table")
        if any(w < 0 for w in row):
            raise ValueError("weights must be non-negative")
    return LinearCategoricalObjective(D, K, Kind.CUSTOM, table)


def _check_problem_shape(D: int, K: int) -> None:
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    if K < 2:
        raise ValueError(f"K must be >= 2, got {K}")


def evaluate_exact(obj: LinearCategoricalObjective, x: OneHotSolution) -> int:
    """Exact objective value as an arbitrary-precision integer."""
    obj._check_shape(x)
    if obj.kind is Kind.COM:
        return sum(1 for c in x.categories if c == 1)
    if obj.kind is Kind.KVAL:
        K = obj.K
        value = 0
        for c in x.categories:  # Horner in base K
            value = value * K + (K - c)
        return value
    return sum(
        obj.weights[d][x.categories[d] - 1] for d in range(obj.D)
    )


def compare(obj: LinearCategoricalObjective, x: OneHotSolution, x2: OneHotSolution) -> int:
    """Ordering of f(x) vs f(x2): +1 greater, 0 equal, -1 less.

    KVal is compared lexicographically on the category indices (dimension 1
    most significant, smaller index wins), which agrees with the exact values
    because any difference in a dimension outweighs all later dimensions.
    """
    obj._check_shape(x)
    obj._check_shape(x2)
    if obj.kind is Kind.KVAL:
        for a, b in zip(x.categories, x2.categories):
            if a != b:
                return 1 if a < b else -1
        return 0
    if obj.kind is Kind.COM:
        va = sum(1 for c in x.categories if c == 1)
        vb = sum(1 for c in x2.categories if c == 1)
    else:
        va = evaluate_exact(obj, x)
        vb = evaluate_exact(obj, x2)
    return (va > vb) - (va < vb)


def optimum(obj: LinearCategoricalObjective) -> OneHotSolution:
    """The all-first-categories solution."""
    return OneHotSolution((1,) * obj.D)


def is_optimum(obj: LinearCategoricalObjective, x: OneHotSolution) -> bool:
    obj._check_shape(x)
    return x.is_all_first()
