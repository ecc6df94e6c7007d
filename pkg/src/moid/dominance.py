"""Approximate and preference-based dominance relations.

Two families live here:

* multiplicative (epsilon, lambda)-dominance on positive vectors, with the
  logarithmic grid used to compute coverings of a vector set, and
* the tradeoff relation induced by elicited preference pairs, decided through
  the convex cone spanned by their difference vectors.

Both reduce to linear feasibility problems handled by ``linear_feasible``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._feasible import FEASIBILITY_TOL, FeasibilityResult, linear_feasible
from .vectors import (
    DimensionMismatchError,
    DominanceRelation,
    EmptySetError,
    UtilitySet,
    UtilityVector,
    _check_dims,
    dedup_rows,
    maximal_rows,
)

#: Grid cell index used for zero-valued coordinates. It compares below every
#: reachable finite index, so a zero coordinate only ever covers coordinates
#: that are themselves zero (multiplying zero by (1+eps)^lambda gains nothing).
ZERO_CELL = -(2**62)


class EpsilonDomainError(ValueError):
    """Epsilon-mode dominance is only defined on the required sign domain."""


@dataclass(frozen=True)
class CoveringParams:
    """Approximation factor and per-step budget for grid coverings."""

    epsilon: float
    lam: float = 1.0

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be a positive finite real, got {self.epsilon}")
        if not (0 < self.lam <= 1):
            raise ValueError(f"lambda must lie in (0, 1], got {self.lam}")

    @property
    def log_step(self) -> float:
        return self.lam * math.log1p(self.epsilon)

    @property
    def factor(self) -> float:
        return (1.0 + self.epsilon) ** self.lam


@dataclass(frozen=True)
class GridIndex:
    """Logarithmic grid coordinates of a vector; ZERO_CELL marks zeros."""

    cells: tuple[int, ...]

    def dominates(self, other: "GridIndex") -> bool:
        _check_dims(len(self.cells), len(other.cells))
        return all(a >= b for a, b in zip(self.cells, other.cells))


def epsilon_dominates(u: UtilityVector, v: UtilityVector, params: CoveringParams) -> bool:
    """True iff (1+epsilon)^lambda * u componentwise >= v (positive vectors only)."""
    _check_dims(u.dimension, v.dimension)
    if min(u.coords) <= 0 or min(v.coords) <= 0:
        raise EpsilonDomainError(
            "epsilon dominance is defined on strictly positive vectors; "
            f"got minima {min(u.coords)} and {min(v.coords)}"
        )
    f = params.factor
    return all(f * a >= b for a, b in zip(u.coords, v.coords))


def grid_map(u: UtilityVector, params: CoveringParams) -> GridIndex:
    """Map a nonnegative vector onto the logarithmic grid.

    Positive coordinates map to ceil(log u_i / (lambda * log(1+epsilon)));
    zero coordinates map to the ZERO_CELL sentinel.
    """
    if min(u.coords) < 0:
        raise EpsilonDomainError(f"grid mapping requires nonnegative coordinates, got {u.coords}")
    return GridIndex(tuple(_grid_cells(np.array(u.coords), params)))


def _grid_cells(vals: np.ndarray, params: CoveringParams) -> np.ndarray:
    """Grid cells for an (n, p) or (p,) array of nonnegative coordinates."""
    cells = np.full(vals.shape, ZERO_CELL, dtype=np.int64)
    pos = vals > 0
    cells[pos] = np.ceil(np.log(vals[pos]) / params.log_step).astype(np.int64)
    return cells


def covering(
    vectors: Iterable[UtilityVector] | UtilitySet, params: CoveringParams
) -> UtilitySet:
    """A grid covering of the input set.

    Elements are scanned in input order. An element whose grid cell is not yet
    claimed removes every claimed cell its own cell dominates componentwise,
    then claims its cell. The output keeps, per surviving cell, the vector
    that claimed it; every input element ends up dominated within factor
    (1+epsilon)^lambda by some output element.
    """
    vecs = tuple(vectors.vectors if isinstance(vectors, UtilitySet) else vectors)
    if not vecs:
        raise EmptySetError("covering of an empty collection")
    vals = np.array([v.coords for v in vecs], dtype=np.float64)
    if (vals < 0).any():
        raise EpsilonDomainError("covering requires nonnegative coordinates")
    keep = covering_indices(vals, params)
    return UtilitySet(
        tuple(vecs[i] for i in keep), dominance_tag=EpsilonCovering(params.epsilon, params.lam).tag
    )


def covering_indices(vals: np.ndarray, params: CoveringParams) -> np.ndarray:
    """Ascending indices of the covering representatives of the rows of ``vals``."""
    cells = _grid_cells(vals, params)
    claimed: dict[tuple[int, ...], int] = {}
    for i, cell in enumerate(map(tuple, cells)):
        if cell in claimed:
            continue
        ci = np.array(cell, dtype=np.int64)
        for other in [c for c in claimed if (ci >= np.array(c, dtype=np.int64)).all()]:
            del claimed[other]
        claimed[cell] = i
    keep = np.array(sorted(claimed.values()), dtype=np.int64)
    return keep


class EpsilonCovering(DominanceRelation):
    """(epsilon, lambda)-dominance used through grid coverings.

    This relation is NOT transitive (two applications compose to a factor of
    (1+epsilon)^(lambda+lambda')), so maximal sets under it are computed as
    grid coverings rather than by pairwise tests, and the solver spends a
    lambda budget of 1/t per elimination step.
    """

    kind = "epsilon"

    def __init__(self, epsilon: float, lam: float = 1.0):
        self.params = CoveringParams(epsilon, lam)

    @property
    def epsilon(self) -> float:
        return self.params.epsilon

    @property
    def lam(self) -> float:
        return self.params.lam

    @property
    def tag(self) -> str:
        return f"epsilon({self.params.epsilon:g},{self.params.lam:g})"

    def dominates(self, u: UtilityVector, v: UtilityVector) -> bool:
        return epsilon_dominates(u, v, self.params)

    def maximal_indices(self, vals: np.ndarray) -> np.ndarray:
        keep = dedup_rows(vals)
        return keep[covering_indices(vals[keep], self.params)]


# ---------------------------------------------------------------------------
# Tradeoff cones
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TradeoffSet:
    """Elicited preference pairs (better, worse) over utility vectors.

    The induced dominance relation holds between u and v exactly when u - v
    lies in the convex cone spanned by the pairs' difference vectors together
    with the nonnegative orthant. An empty set induces plain Pareto dominance.
    """

    pairs: tuple[tuple[UtilityVector, UtilityVector], ...]

    def __post_init__(self):
        dims = {u.dimension for u, _ in self.pairs} | {v.dimension for _, v in self.pairs}
        if len(dims) > 1:
            raise DimensionMismatchError(f"mixed dimensions in tradeoff pairs: {sorted(dims)}")

    @property
    def dimension(self) -> int | None:
        return self.pairs[0][0].dimension if self.pairs else None

    def __len__(self) -> int:
        return len(self.pairs)

    def differences(self, p: int | None = None) -> np.ndarray:
        """The (k, p) matrix of better-minus-worse difference vectors."""
        if self.pairs:
            return np.array(
                [[a - b for a, b in zip(u.coords, v.coords)] for u, v in self.pairs]
            )
        if p is None:
            raise ValueError("empty tradeoff set needs an explicit dimension")
        return np.zeros((0, p))


def tradeoff_feasibility(
    u: UtilityVector, v: UtilityVector, theta: TradeoffSet
) -> FeasibilityResult:
    """Feasibility (with witness) of u - v >= sum_i q_i w_i for q >= 0."""
    _check_dims(u.dimension, v.dimension)
    if theta.dimension is not None:
        _check_dims(u.dimension, theta.dimension)
    w = theta.differences(u.dimension)
    d = u.as_array() - v.as_array()
    # Constraint rows: (W^T q)_j <= d_j for every objective j.
    return linear_feasible(w.T, d)


def tradeoff_dominates(u: UtilityVector, v: UtilityVector, theta: TradeoffSet) -> bool:
    """Cone dominance induced by the tradeoff pairs; Pareto when the set is empty."""
    return tradeoff_feasibility(u, v, theta).feasible


def check_consistency(theta: TradeoffSet) -> bool:
    """Reject tradeoff sets whose cone contains a strictly negative vector.

    If some nonnegative combination of the difference vectors is <= (-1,...,-1),
    the induced relation would prefer losing a positive amount in every
    objective to gaining it, which no Pareto-extending partial order allows.
    This test is sufficient for rejection; it is the implemented reading of
    consistency.
    """
    if not theta.pairs:
        return True
    w = theta.differences()
    bounds = -np.ones(w.shape[1])
    return not linear_feasible(w.T, bounds).feasible


def cone_dual_rays(theta: TradeoffSet, p: int) -> np.ndarray:
    """Extreme rays of the dual of the dominance cone, as rows of a matrix N.

    The dominance cone is spanned by the difference vectors plus the p unit
    vectors, so u dominates v exactly when N @ u >= N @ v componentwise. Rays
    are found by enumerating (p-1)-subsets of the defining inequalities
    {W y >= 0, y >= 0}, solving for their null direction, and keeping the
    feasible orientations. Redundant (non-extreme) rays may be included; they
    never change a verdict.
    """
    w = theta.differences(p)
    if p == 1:
        # One-dimensional cone: either plain ordering or total collapse.
        return np.ones((1, 1)) if (w >= 0).all() else np.zeros((0, 1))
    constraints = np.vstack([w, np.eye(p)])
    rays: list[np.ndarray] = []
    for subset in itertools.combinations(range(constraints.shape[0]), p - 1):
        sub = constraints[list(subset)]
        _, s, vh = np.linalg.svd(sub) if sub.size else (None, np.zeros(0), np.eye(p))
        rank = int((s > 1e-9 * (s[0] if len(s) else 1.0)).sum()) if len(s) else 0
        if rank != p - 1:
            continue
        y = vh[-1]
        for cand in (y, -y):
            if (constraints @ cand >= -1e-9).all():
                rays.append(cand / np.linalg.norm(cand))
                break
    if not rays:
        return np.zeros((0, p))
    uniq = np.unique(np.round(np.array(rays), 9), axis=0)
    return uniq


class TradeoffDominance(DominanceRelation):
    """Cone dominance as a pruning relation.

    Pruning uses the precomputed dual-ray matrix: it turns cone comparisons
    into componentwise comparisons of transformed coordinates, which is what
    makes bulk pruning affordable. The per-pair linear program remains the
    reference decision procedure (``tradeoff_dominates``) and the two routes
    are cross-checked in the test suite.
    """

    kind = "tradeoff"

    def __init__(self, theta: TradeoffSet):
        self.theta = theta
        self._rays: dict[int, np.ndarray] = {}

    @property
    def tag(self) -> str:
        return f"tradeoff(k={len(self.theta)})"

    def validate_dimension(self, p: int) -> None:
        if self.theta.dimension is not None and self.theta.dimension != p:
            raise DimensionMismatchError(
                f"tradeoff pairs have dimension {self.theta.dimension}, vectors have {p}"
            )

    def rays(self, p: int) -> np.ndarray:
        if p not in self._rays:
            self._rays[p] = cone_dual_rays(self.theta, p)
        return self._rays[p]

    def transform(self, vals: np.ndarray) -> np.ndarray:
        return vals @ self.rays(vals.shape[1]).T

    def dominates(self, u: UtilityVector, v: UtilityVector) -> bool:
        return tradeoff_dominates(u, v, self.theta)


# ---------------------------------------------------------------------------
# Tradeoff file format
# ---------------------------------------------------------------------------


def load_tradeoffs(document: str | dict) -> tuple[TradeoffSet, tuple[str, ...]]:
    """Parse a tradeoff document into an internal (maximize-all) TradeoffSet.

    The document declares per-objective senses and lists pairs in those user
    senses; minimized coordinates are negated on the way in. Returns the set
    and the declared senses.
    """
    doc = json.loads(document) if isinstance(document, str) else document
    senses = tuple(doc["senses"])
    if not all(s in ("max", "min") for s in senses):
        raise ValueError(f"objective senses must be 'max' or 'min', got {senses}")
    signs = np.array([1.0 if s == "max" else -1.0 for s in senses])
    pairs = []
    for entry in doc["pairs"]:
        better = np.asarray(entry["better"], dtype=float)
        worse = np.asarray(entry["worse"], dtype=float)
        if better.shape != (len(senses),) or worse.shape != (len(senses),):
            raise ValueError(f"tradeoff pair does not match {len(senses)} objectives: {entry}")
        pairs.append(
            (UtilityVector(tuple(signs * better)), UtilityVector(tuple(signs * worse)))
        )
    return TradeoffSet(tuple(pairs)), senses


def save_tradeoffs(theta: TradeoffSet, senses: Sequence[str]) -> str:
    """Serialize a tradeoff set back to the user-sense document format."""
    signs = np.array([1.0 if s == "max" else -1.0 for s in senses])
    doc = {
        "senses": list(senses),
        "pairs": [
            {
                "better": list(signs * np.array(u.coords)),
                "worse": list(signs * np.array(v.coords)),
            }
            for u, v in theta.pairs
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
