"""Euclidean projection onto the budgeted box {w in [0,1]^N : sum w = m}.

The projection of a point ``a`` is the box clamp of a uniform shift,
``clamp01(a - t)``, where the shift ``t`` solves the monotone scalar
equation ``sum(clamp01(a - t)) = m``; the sum is continuous, piecewise
linear, and nonincreasing in ``t``, so a sign-safe bisection on the
bracket ``[min(a) - 1, max(a)]`` always converges. The shift plays the
role of a Lagrange multiplier for the budget constraint and is named
``t`` here to avoid clashing with the unlearning regularizer weight
used elsewhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, ShapeError
from .numcore import bisect_root

__all__ = ["SelectionWeights", "clamp01", "project_capped_simplex", "SUM_TOL"]

# Feasibility tolerance on |sum(w) - m| after projection.
SUM_TOL = 1e-8

# Bracket-width tolerance for the bisection; the residual at the
# returned shift is bounded by N times this, comfortably under SUM_TOL
# for any desk-scale N.
_BISECT_TOL = 1e-12


@dataclass
class SelectionWeights:
    """Continuous selection scores w in [0,1]^N with budget m."""

    w: np.ndarray
    m: int

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=np.float64)
        if self.w.ndim != 1:
            raise ShapeError("selection weights must be 1-D")

    @property
    def n(self) -> int:
        return self.w.size

    def feasible(self, tol: float = SUM_TOL) -> bool:
        inside = bool(np.all(self.w >= 0.0) and np.all(self.w <= 1.0))
        return inside and abs(float(self.w.sum()) - self.m) <= tol


def clamp01(x) -> np.ndarray:
    """Elementwise clamp onto [0, 1]."""
    return np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)


def project_capped_simplex(a, m: int) -> SelectionWeights:
    """Nearest point to ``a`` (in L2) with entries in [0,1] summing to m.

    m = 0 and m = N short-circuit to the all-zeros / all-ones vectors;
    otherwise the budget shift is found by bisection. Where the budget
    equation has a flat stretch (ties in ``a``), every shift on the
    stretch clamps to the same point, so the bisection's resting place
    does not affect the output.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1:
        raise ShapeError("projection input must be 1-D")
    if not np.all(np.isfinite(a)):
        raise ShapeError("projection input must be finite")
    n = a.size
    if m < 0 or m > n:
        raise BudgetError(f"budget m={m} outside [0, {n}]")
    if m == 0:
        return SelectionWeights(np.zeros(n), 0)
    if m == n:
        return SelectionWeights(np.ones(n), n)

    def residual(t: float) -> float:
        return float(np.clip(a - t, 0.0, 1.0).sum()) - m

    lo = float(a.min()) - 1.0  # residual = n - m >= 0 here
    hi = float(a.max())  # residual = -m <= 0 here
    shift = bisect_root(residual, lo, hi, tol=_BISECT_TOL, max_iter=200)
    return SelectionWeights(np.clip(a - shift, 0.0, 1.0), m)
