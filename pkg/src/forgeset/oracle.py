"""Brute-force ground truth for tiny instances.

``enumerate_worst`` retrains on every size-m subset and ranks them by
post-retrain accuracy on the dropped subset, realizing the
hardest-to-forget definition extensionally. ``qp_project_oracle`` solves
the budgeted-box projection exactly by enumerating every clamp pattern.
Both guard against combinatorial blowups; pass ``force=True`` to
override a guard deliberately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .data import Dataset, ForgetMask
from .errors import BudgetError, TooLarge
from .metrics import compute_ua
from .models import init_params
from .unlearn import UnlearnConfig, retrain

__all__ = ["SubsetScore", "enumerate_worst", "qp_project_oracle", "save_ranking_csv"]

SUBSET_GUARD = 10_000
QP_GUARD_N = 12


@dataclass
class SubsetScore:
    subset: tuple[int, ...]
    ua: float


def enumerate_worst(
    dataset: Dataset,
    m: int,
    spec,
    config: UnlearnConfig,
    force: bool = False,
) -> list[SubsetScore]:
    """Retrain on every size-m subset (fixed seed) and rank ascending by UA.

    The lowest-UA subsets are the hardest to forget. Ties are broken by
    subset indices so the ranking is fully deterministic.
    """
    if m < 1:
        raise BudgetError("subset enumeration needs m >= 1")
    if m > dataset.n:
        raise BudgetError(f"m={m} exceeds dataset size {dataset.n}")
    count = math.comb(dataset.n, m)
    if count > SUBSET_GUARD and not force:
        raise TooLarge(f"C({dataset.n},{m}) = {count} subsets exceeds guard {SUBSET_GUARD}")
    scores = []
    for subset_idx in combinations(range(dataset.n), m):
        idx = np.asarray(subset_idx, dtype=np.int64)
        if m == dataset.n:
            # degenerate single subset: retraining on nothing is the fresh init
            theta = init_params(spec, config.rng)
        else:
            theta = retrain(dataset, ForgetMask(idx), spec, config)
        ua = compute_ua(theta, dataset.X[idx], dataset.y[idx])
        scores.append(SubsetScore(subset_idx, ua))
    scores.sort(key=lambda s: (s.ua, s.subset))
    return scores


def save_ranking_csv(scores: list[SubsetScore], path) -> None:
    """Ranked scores as CSV rows ``subset_indices,ua`` (indices ';'-joined)."""
    with open(path, "w") as fh:
        fh.write("subset_indices,ua\n")
        for s in scores:
            fh.write(";".join(str(i) for i in s.subset) + f",{s.ua!r}\n")


def qp_project_oracle(a, m: int, force: bool = False) -> np.ndarray:
    """Exact nearest point in {w in [0,1]^N : sum w = m} by clamp-pattern enumeration.

    Every minimizer clamps each coordinate to 0, to 1, or shifts it by a
    common offset; trying all 3^N patterns and keeping the feasible one
    with the least squared distance is therefore exact. Patterns are
    evaluated vectorized in chunks.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.size
    if n > QP_GUARD_N and not force:
        raise TooLarge(f"{n} coordinates means 3^{n} patterns, beyond guard N={QP_GUARD_N}")
    if m < 0 or m > n:
        raise BudgetError(f"budget m={m} outside [0, {n}]")
    if m == 0:
        return np.zeros(n)
    if m == n:
        return np.ones(n)

    powers = 3 ** np.arange(n)
    total = 3**n
    box_tol = 1e-12
    best_obj = np.inf
    best_w = None
    chunk = 3**9
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        digits = (idx[:, None] // powers) % 3  # 0: at 0, 1: at 1, 2: interior
        at_one = digits == 1
        interior = digits == 2
        n_in = interior.sum(axis=1)
        k_one = at_one.sum(axis=1)
        has_in = n_in > 0
        shift = np.zeros(idx.size)
        shift[has_in] = (
            (interior * a).sum(axis=1)[has_in] + k_one[has_in] - m
        ) / n_in[has_in]
        w = np.where(interior, a - shift[:, None], at_one.astype(np.float64))
        inside = np.where(interior, (w >= -box_tol) & (w <= 1.0 + box_tol), True).all(axis=1)
        feasible = inside & (has_in | (k_one == m))
        if not feasible.any():
            continue
        obj = ((w - a) ** 2).sum(axis=1)
        obj[~feasible] = np.inf
        j = int(np.argmin(obj))
        if obj[j] < best_obj:
            best_obj = float(obj[j])
            best_w = w[j]
    assert best_w is not None, "at least the uniform-shift pattern is always feasible"
    return np.clip(best_w, 0.0, 1.0)
