import numpy as np
import pytest

import forgeset.oracle as oracle_mod
from forgeset.data import Dataset, ForgetMask, gen_blobs
from forgeset.errors import BudgetError, TooLarge
from forgeset.metrics import compute_ua
from forgeset.numcore import RngStream
from forgeset.oracle import enumerate_worst, qp_project_oracle, save_ranking_csv
from forgeset.projection import project_capped_simplex
from forgeset.unlearn import Method, UnlearnConfig, retrain

RNG = RngStream(41)


def _config(seed=3):
    return UnlearnConfig(method=Method.RETRAIN, epochs=60, lr=0.5, rng=RNG.derive(seed))


def test_enumerate_full_mask_single_subset():
    ds = gen_blobs(3, 2, 2, 0.4, RNG.derive(1))
    scores = enumerate_worst(ds, ds.n, [2, 2], _config())
    assert len(scores) == 1
    assert scores[0].subset == tuple(range(ds.n))


def test_enumerate_scores_reproducible_by_direct_retrain():
    ds = gen_blobs(3, 2, 2, 0.5, RNG.derive(2))
    cfg = _config()
    scores = enumerate_worst(ds, 1, [2, 2], cfg)
    assert len(scores) == 6
    for s in scores:
        idx = np.asarray(s.subset)
        theta = retrain(ds, ForgetMask(idx), [2, 2], cfg)
        assert compute_ua(theta, ds.X[idx], ds.y[idx]) == s.ua
    assert all(a.ua <= b.ua for a, b in zip(scores, scores[1:]))


def test_enumerate_duplicate_rows_score_equal():
    base = gen_blobs(3, 2, 2, 0.5, RNG.derive(3))
    X = np.vstack([base.X, base.X[2]])
    y = np.concatenate([base.y, [base.y[2]]])
    ds = Dataset(X, y, classes=2)
    scores = enumerate_worst(ds, 1, [2, 2], _config())
    by_subset = {s.subset: s.ua for s in scores}
    assert abs(by_subset[(2,)] - by_subset[(ds.n - 1,)]) <= 1e-9


def test_enumerate_guard(monkeypatch):
    ds = gen_blobs(3, 2, 2, 0.5, RNG.derive(4))
    monkeypatch.setattr(oracle_mod, "SUBSET_GUARD", 5)
    with pytest.raises(TooLarge):
        enumerate_worst(ds, 1, [2, 2], _config())
    scores = enumerate_worst(ds, 1, [2, 2], _config(), force=True)
    assert len(scores) == 6


def test_enumerate_m_validation():
    ds = gen_blobs(3, 2, 2, 0.5, RNG.derive(5))
    with pytest.raises(BudgetError):
        enumerate_worst(ds, 0, [2, 2], _config())
    with pytest.raises(BudgetError):
        enumerate_worst(ds, ds.n + 1, [2, 2], _config())


def test_ranking_csv_format(tmp_path):
    ds = gen_blobs(2, 2, 2, 0.5, RNG.derive(6))
    scores = enumerate_worst(ds, 2, [2, 2], _config())
    path = tmp_path / "ranking.csv"
    save_ranking_csv(scores, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "subset_indices,ua"
    assert len(lines) == len(scores) + 1
    first_cell = lines[1].split(",")[0]
    assert [int(v) for v in first_cell.split(";")] == list(scores[0].subset)


def test_qp_feasible_point_is_identity():
    a = np.array([0.3, 0.7, 0.5, 0.5])
    assert np.max(np.abs(qp_project_oracle(a, 2) - a)) <= 1e-12


def test_qp_symmetric_input_uniform():
    assert np.allclose(qp_project_oracle(np.full(5, 2.0), 2), 0.4, atol=1e-12)


def test_qp_guard_and_budget():
    with pytest.raises(TooLarge):
        qp_project_oracle(np.zeros(13), 2)
    with pytest.raises(BudgetError):
        qp_project_oracle(np.zeros(4), 5)


def test_qp_matches_shift_grid_scan():
    # independent check: scan the uniform shift on a fine grid
    gen = RNG.derive(7).generator()
    for _ in range(10):
        a = gen.standard_normal(4) * 1.5
        m = int(gen.integers(1, 4))
        grid = np.linspace(a.min() - 1.0, a.max(), 400001)
        sums = np.clip(a[None, :] - grid[:, None], 0.0, 1.0).sum(axis=1)
        best = grid[np.argmin(np.abs(sums - m))]
        w_grid = np.clip(a - best, 0.0, 1.0)
        assert np.max(np.abs(qp_project_oracle(a, m) - w_grid)) <= 1e-4


def test_qp_never_worse_than_bisection_projection():
    gen = RNG.derive(8).generator()
    for _ in range(25):
        n = int(gen.integers(2, 9))
        m = int(gen.integers(0, n + 1))
        a = gen.standard_normal(n) * 2.0
        w_qp = qp_project_oracle(a, m)
        w_bi = project_capped_simplex(a, m).w
        assert ((w_qp - a) ** 2).sum() <= ((w_bi - a) ** 2).sum() + 1e-9
        assert np.all(w_qp >= 0.0) and np.all(w_qp <= 1.0)
        assert abs(w_qp.sum() - m) <= 1e-8
