"""Linear feasibility kernel: decide whether A q <= b has a solution q >= 0.

A tiny phase-1 simplex with Bland's anti-cycling rule. The systems solved
here are small (a handful of variables and constraint rows), so robustness
and determinism matter more than speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Slack allowed on constraint satisfaction when declaring feasibility.
FEASIBILITY_TOL = 1e-7

_PIVOT_TOL = 1e-12


class NumericalInstabilityError(RuntimeError):
    """The simplex hit its iteration cap; the input is numerically pathological."""


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: np.ndarray | None  # q >= 0 with A q <= b + tol, when feasible

    def __bool__(self) -> bool:
        return self.feasible


def linear_feasible(
    rows: np.ndarray, bounds: np.ndarray, tol: float = FEASIBILITY_TOL
) -> FeasibilityResult:
    """Decide whether there is q >= 0 with rows @ q <= bounds.

    Args:
        rows: constraint matrix of shape (m, k); one row per constraint.
        bounds: right-hand sides, shape (m,).
        tol: slack allowed on constraint violation.

    Returns:
        FeasibilityResult with a nonnegative witness on success.

    Raises:
        ValueError: on shape mismatch or non-finite entries.
        NumericalInstabilityError: if the iteration cap is exceeded.
    """
    a = np.asarray(rows, dtype=np.float64)
    b = np.asarray(bounds, dtype=np.float64)
    if a.ndim != 2:
        a = a.reshape(len(b), -1)
    m, k = a.shape
    if b.shape != (m,):
        raise ValueError(f"bounds shape {b.shape} does not match {m} constraint rows")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValueError("constraint system contains non-finite entries")

    if m == 0:
        return FeasibilityResult(True, np.zeros(k))
    if k == 0:
        return FeasibilityResult(bool((b >= -tol).all()), np.zeros(0))
    # q = 0 is often already a witness; skip the tableau when it is.
    if (b >= -tol).all():
        return FeasibilityResult(True, np.zeros(k))

    witness = _phase_one(a, b, tol, iteration_cap=10 * (k + m))
    if witness is None:
        return FeasibilityResult(False, None)
    return FeasibilityResult(True, witness)


def _phase_one(a: np.ndarray, b: np.ndarray, tol: float, iteration_cap: int):
    """Minimize the sum of artificial variables for A q + s = b, q, s >= 0.

    Returns a witness q when the minimum is (numerically) zero, else None.
    """
    m, k = a.shape
    neg = b < 0  # rows needing an artificial variable
    n_art = int(neg.sum())

    # Standard-form tableau over [q | s | artificials | rhs]; rows with
    # negative rhs are negated so every basic solution starts nonnegative.
    n_cols = k + m + n_art
    t = np.zeros((m, n_cols + 1))
    t[:, :k] = a
    t[:, k : k + m] = np.eye(m)
    t[neg] *= -1.0
    art_cols = []
    j = k + m
    basis = np.empty(m, dtype=np.int64)
    for i in range(m):
        if neg[i]:
            t[i, j] = 1.0
            basis[i] = j
            art_cols.append(j)
            j += 1
        else:
            basis[i] = k + i
    t[:, -1] = np.where(neg, -b, b)

    # Phase-1 objective: minimize the artificial sum. Reduced costs are the
    # objective coefficients (+1 on artificial columns) minus the column sums
    # over the artificial-basic rows, leaving basic columns at zero.
    cost = np.zeros(n_cols + 1)
    for i in range(m):
        if neg[i]:
            cost -= t[i]
    cost[art_cols] += 1.0

    for _ in range(iteration_cap):
        entering = -1
        for col in range(n_cols):
            if cost[col] < -_PIVOT_TOL:  # Bland: first improving column
                entering = col
                break
        if entering < 0:
            break
        ratios = np.full(m, np.inf)
        pos = t[:, entering] > _PIVOT_TOL
        ratios[pos] = t[pos, -1] / t[pos, entering]
        best = ratios.min()
        if not np.isfinite(best):
            # Unbounded phase-1 cannot happen with a bounded-below objective;
            # treat as numerical trouble rather than guessing.
            raise NumericalInstabilityError("unbounded phase-1 pivot")
        leaving = -1
        for i in range(m):  # Bland: lowest basis index among min-ratio rows
            if ratios[i] <= best + _PIVOT_TOL:
                if leaving < 0 or basis[i] < basis[leaving]:
                    leaving = i
        piv = t[leaving, entering]
        t[leaving] /= piv
        for i in range(m):
            if i != leaving and abs(t[i, entering]) > _PIVOT_TOL:
                t[i] -= t[i, entering] * t[leaving]
        cost -= cost[entering] * t[leaving]
        basis[leaving] = entering
    else:
        raise NumericalInstabilityError(
            f"phase-1 simplex did not converge within {iteration_cap} iterations"
        )

    objective = -cost[-1]
    if objective > tol:
        return None
    q = np.zeros(k)
    for i in range(m):
        if basis[i] < k:
            q[basis[i]] = max(t[i, -1], 0.0)
    return q
