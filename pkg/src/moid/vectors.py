"""Multi-objective utility values and the maximal-set algebra over them.

Everything in this module uses the internal maximize-all convention: a vector
is at least as good as another when every coordinate is at least as large.
Minimized objectives are negated at the model boundary and restored on output.

Finite sets of vectors are kept maximal under a pluggable dominance relation;
the relation also drives the pruning inside the elimination solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._feasible import FEASIBILITY_TOL, linear_feasible


class DimensionMismatchError(ValueError):
    """Operands live in utility spaces of different dimension."""


class EmptySetError(ValueError):
    """A utility set operation received or would produce an empty set."""


@dataclass(frozen=True)
class UtilityVector:
    """A point in R^p, one coordinate per objective (maximize-all sense)."""

    coords: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if len(coords) == 0:
            raise ValueError("utility vectors need at least one objective")
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"utility vector has non-finite coordinates: {coords}")
        object.__setattr__(self, "coords", coords)

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.float64)

    def __add__(self, other: "UtilityVector") -> "UtilityVector":
        _check_dims(self.dimension, other.dimension)
        return UtilityVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __rmul__(self, q: float) -> "UtilityVector":
        return UtilityVector(tuple(q * c for c in self.coords))

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)


def uvec(*coords: float) -> UtilityVector:
    """Shorthand constructor: ``uvec(1, -2.5)`` == ``UtilityVector((1.0, -2.5))``."""
    return UtilityVector(tuple(coords))


def zero_vector(p: int) -> UtilityVector:
    return UtilityVector((0.0,) * p)


@dataclass(frozen=True)
class UtilitySet:
    """A finite, non-empty set of utility vectors, maximal under a relation.

    ``dominance_tag`` records which relation the set was last pruned under.
    The neutral element of the set algebra is the singleton {0-vector}; empty
    sets are never produced.
    """

    vectors: tuple[UtilityVector, ...]
    dominance_tag: str = "pareto"

    def __post_init__(self):
        if not self.vectors:
            raise EmptySetError("utility sets are never empty; use the {0-vector} singleton")
        dims = {v.dimension for v in self.vectors}
        if len(dims) > 1:
            raise DimensionMismatchError(f"mixed dimensions in utility set: {sorted(dims)}")

    @property
    def dimension(self) -> int:
        return self.vectors[0].dimension

    def as_array(self) -> np.ndarray:
        return np.array([v.coords for v in self.vectors], dtype=np.float64)

    def as_tuples(self) -> set[tuple[float, ...]]:
        return {v.coords for v in self.vectors}

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)


def _check_dims(p: int, q: int) -> None:
    if p != q:
        raise DimensionMismatchError(f"dimension mismatch: {p} vs {q}")


# ---------------------------------------------------------------------------
# Dominance relations
# ---------------------------------------------------------------------------


class DominanceRelation:
    """Base class for the orderings the set algebra can prune under.

    Every relation extends weak Pareto dominance: componentwise >= implies
    dominance. Pareto and tradeoff-cone relations are transitive preorders;
    the epsilon relation is not transitive and is only safe through the
    per-step budget discipline used by the solver.
    """

    kind = "abstract"

    @property
    def tag(self) -> str:
        return self.kind

    def validate_dimension(self, p: int) -> None:  # noqa: B027 - optional hook
        pass

    def transform(self, vals: np.ndarray) -> np.ndarray:
        """Map coordinates so that dominance becomes componentwise >=."""
        return vals

    def dominates(self, u: UtilityVector, v: UtilityVector) -> bool:
        _check_dims(u.dimension, v.dimension)
        self.validate_dimension(u.dimension)
        tu = self.transform(u.as_array().reshape(1, -1))[0]
        tv = self.transform(v.as_array().reshape(1, -1))[0]
        return bool((tu >= tv).all())

    def maximal_indices(self, vals: np.ndarray) -> np.ndarray:
        """Indices (ascending) of the deduplicated, undominated rows of ``vals``."""
        keep = dedup_rows(vals)
        tvals = self.transform(vals[keep])
        return keep[maximal_rows(tvals)]

    def prune_set(self, vectors: Sequence[UtilityVector]) -> UtilitySet:
        vals = np.array([v.coords for v in vectors], dtype=np.float64)
        self.validate_dimension(vals.shape[1])
        kept = self.maximal_indices(vals)
        return UtilitySet(tuple(vectors[i] for i in kept), dominance_tag=self.tag)


class ParetoDominance(DominanceRelation):
    """Weak Pareto dominance: componentwise >= on the raw coordinates."""

    kind = "pareto"


PARETO = ParetoDominance()


# ---------------------------------------------------------------------------
# Array kernels (shared with the solver)
# ---------------------------------------------------------------------------


def dedup_rows(vals: np.ndarray) -> np.ndarray:
    """Ascending indices of the first occurrence of each distinct row."""
    n = vals.shape[0]
    if n <= 1:
        return np.arange(n)
    _, first = np.unique(vals, axis=0, return_index=True)
    first.sort()
    return first


def maximal_rows(vals: np.ndarray) -> np.ndarray:
    """Ascending indices of rows not strictly dominated (componentwise >= and !=)
    by any other row. Comparisons are exact, with no tolerance.

    Equal rows never strictly dominate each other, so duplicates are either
    all kept or all dropped together.
    """
    n = vals.shape[0]
    if n <= 1:
        return np.arange(n)
    uniq, inverse = np.unique(vals, axis=0, return_inverse=True)
    keep_unique = _maximal_distinct_mask(uniq)
    return np.nonzero(keep_unique[inverse.reshape(-1)])[0]


def _maximal_distinct_mask(u: np.ndarray, block: int = 2048) -> np.ndarray:
    """Maximality mask for rows known to be pairwise distinct and
    lexicographically sorted ascending (np.unique order)."""
    n, p = u.shape
    if n == 1:
        return np.ones(1, dtype=bool)
    if p == 1:
        mask = np.zeros(n, dtype=bool)
        mask[-1] = True  # distinct scalars: only the maximum survives
        return mask
    if p == 2:
        # Reverse lex order = first coordinate descending (ties: second
        # descending), so every earlier row has first coordinate >= current.
        # A distinct row is dominated iff its second coordinate fails to beat
        # the running maximum.
        second = u[::-1, 1]
        prev_max = np.empty_like(second)
        prev_max[0] = -np.inf
        prev_max[1:] = np.maximum.accumulate(second)[:-1]
        return (second > prev_max)[::-1].copy()

    # General case: sweep in an order where strict dominators come first
    # (descending coordinate sum; floating addition is monotone, and the
    # descending lexicographic tie-break settles rounded sum ties).
    keys = tuple(u[:, j] for j in range(p - 1, -1, -1)) + (u.sum(axis=1),)
    order = np.lexsort(keys)[::-1]
    v = u[order]
    kept_rows = np.empty((n, p))
    kept_pos = np.empty(n, dtype=np.int64)
    m = 0
    for start in range(0, n, block):
        blk = v[start : start + block]
        pos = order[start : start + block]
        if m:
            dominated = (
                (kept_rows[:m, None, :] >= blk[None, :, :]).all(axis=2)
                & (kept_rows[:m, None, :] > blk[None, :, :]).any(axis=2)
            ).any(axis=0)
            blk = blk[~dominated]
            pos = pos[~dominated]
        if blk.shape[0] > 1:
            dominated = (
                (blk[:, None, :] >= blk[None, :, :]).all(axis=2)
                & (blk[:, None, :] > blk[None, :, :]).any(axis=2)
            ).any(axis=0)
            blk = blk[~dominated]
            pos = pos[~dominated]
        k = blk.shape[0]
        kept_rows[m : m + k] = blk
        kept_pos[m : m + k] = pos
        m += k
    mask = np.zeros(n, dtype=bool)
    mask[kept_pos[:m]] = True
    return mask


def minkowski_sum_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All pairwise sums of the rows of ``a`` and ``b`` (row-major in ``a``)."""
    n, p = a.shape
    m = b.shape[0]
    return (a[:, None, :] + b[None, :, :]).reshape(n * m, p)


# ---------------------------------------------------------------------------
# Public set operations
# ---------------------------------------------------------------------------


def pareto_dominates(u: UtilityVector, v: UtilityVector) -> bool:
    """Weak Pareto dominance: every coordinate of u >= the matching one of v."""
    _check_dims(u.dimension, v.dimension)
    return all(a >= b for a, b in zip(u.coords, v.coords))


def maximal_set(
    vectors: Iterable[UtilityVector] | UtilitySet, rel: DominanceRelation = PARETO
) -> UtilitySet:
    """The undominated, deduplicated elements of ``vectors`` under ``rel``."""
    vecs = tuple(vectors.vectors if isinstance(vectors, UtilitySet) else vectors)
    if not vecs:
        raise EmptySetError("maximal_set of an empty collection")
    dims = {v.dimension for v in vecs}
    if len(dims) > 1:
        raise DimensionMismatchError(f"mixed dimensions: {sorted(dims)}")
    return rel.prune_set(vecs)


def set_scale(q: float, u: UtilitySet) -> UtilitySet:
    """Scale every element by q >= 0. q = 0 collapses to the {0-vector} singleton."""
    if q < 0:
        raise ValueError(f"set scaling requires q >= 0, got {q}")
    if q == 0:
        return UtilitySet((zero_vector(u.dimension),), dominance_tag=u.dominance_tag)
    return UtilitySet(
        tuple(UtilityVector(tuple(q * c for c in v.coords)) for v in u.vectors),
        dominance_tag=u.dominance_tag,
    )


def set_sum(u: UtilitySet, v: UtilitySet, rel: DominanceRelation = PARETO) -> UtilitySet:
    """Minkowski sum followed by pruning under ``rel``."""
    _check_dims(u.dimension, v.dimension)
    sums = [a + b for a in u.vectors for b in v.vectors]
    return maximal_set(sums, rel)


def set_max_union(
    u: UtilitySet, v: UtilitySet, rel: DominanceRelation = PARETO
) -> UtilitySet:
    """Union of the two sets followed by pruning under ``rel``."""
    _check_dims(u.dimension, v.dimension)
    return maximal_set(u.vectors + v.vectors, rel)


def convex_set_dominates(s1: UtilitySet, s2: UtilitySet, tol: float = FEASIBILITY_TOL) -> bool:
    """True iff every element of s2 is weakly Pareto-dominated by some convex
    combination of s1's elements.

    Each element is decided by a linear feasibility problem over the convex
    weights. Checking s2's extreme points suffices by convexity.
    """
    _check_dims(s1.dimension, s2.dimension)
    basis = s1.as_array()
    return all(_in_dominated_hull(basis, np.array(v.coords), tol) for v in s2.vectors)


def _in_dominated_hull(basis: np.ndarray, target: np.ndarray, tol: float) -> bool:
    # Feasibility of: q >= 0, sum q = 1, basis^T q >= target, written as
    # rows @ q <= bounds for the shared kernel.
    k = basis.shape[0]
    rows = np.vstack([-basis.T, np.ones((1, k)), -np.ones((1, k))])
    bounds = np.concatenate([-target, [1.0, -1.0]])
    return linear_feasible(rows, bounds, tol=tol).feasible
