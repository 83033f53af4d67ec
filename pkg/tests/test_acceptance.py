"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
complete. Every tolerance is pinned here; nothing is calibrated at run
time.
"""

import json
import time

import numpy as np
import pytest
from click.testing import CliRunner

from forgeset.blo import BLOConfig, Direction, ig_probe, lower_signsgd, select, upper_gradient
from forgeset.cli import main as cli_main
from forgeset.data import ForgetMask, gen_biased, gen_blobs, subset
from forgeset.metrics import EvalReport, accuracy, avg_gap, compute_ua
from forgeset.models import init_params, loss_and_grad, params_equal
from forgeset.numcore import RngStream
from forgeset.oracle import enumerate_worst, qp_project_oracle
from forgeset.projection import project_capped_simplex
from forgeset.unlearn import Method, UnlearnConfig, retrain, train


def _report(num, label, ok, detail=""):
    line = f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}  {label}"
    if detail:
        line += f"  ({detail})"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def standard_setup():
    """Blobs task (N=400, 10% forgetting) shared by criteria 5, 6, 8, 10."""
    rng = RngStream(7)
    train_ds = gen_blobs(200, 2, 2, 0.55, rng.derive(1))
    test_ds = gen_blobs(200, 2, 2, 0.55, rng.derive(2))
    theta_o = train(train_ds, [2, 2], 300, 0.5, rng.derive(3))
    m = 40
    worst = select(train_ds, m, theta_o, BLOConfig(rng=rng.derive(4)))
    easiest = select(train_ds, m, theta_o, BLOConfig(direction=Direction.EASIEST, rng=rng.derive(4)))

    def retrain_eval(mask, seed):
        cfg = UnlearnConfig(method=Method.RETRAIN, epochs=300, lr=0.5, rng=rng.derive(5000 + seed))
        theta_u = retrain(train_ds, mask, [2, 2], cfg)
        ua = compute_ua(theta_u, train_ds.X[mask.indices], train_ds.y[mask.indices])
        ta = accuracy(theta_u, test_ds.X, test_ds.y)
        return ua, ta

    seeds = range(10)
    worst_runs = np.array([retrain_eval(worst.mask, s) for s in seeds])
    random_masks = []
    for s in seeds:
        gen = rng.derive(100 + s).generator()
        random_masks.append(ForgetMask(np.sort(gen.permutation(train_ds.n)[:m])))
    random_runs = np.array([retrain_eval(mask, s) for s, mask in zip(seeds, random_masks)])
    return dict(
        rng=rng,
        train_ds=train_ds,
        test_ds=test_ds,
        theta_o=theta_o,
        m=m,
        worst=worst,
        easiest=easiest,
        retrain_eval=retrain_eval,
        worst_runs=worst_runs,
        random_runs=random_runs,
    )


def test_criterion_01_projection_matches_qp_oracle():
    start = time.perf_counter()
    gen = RngStream(101).generator()
    worst_entry = worst_residual = 0.0
    for _ in range(500):
        n = int(gen.integers(1, 9))
        m = int(gen.integers(0, n + 1))
        a = gen.standard_normal(n) * 2.0
        got = project_capped_simplex(a, m).w
        oracle = qp_project_oracle(a, m)
        worst_entry = max(worst_entry, float(np.max(np.abs(got - oracle))))
        worst_residual = max(worst_residual, abs(float(got.sum()) - m))
    elapsed = time.perf_counter() - start
    ok = worst_entry <= 1e-6 and worst_residual <= 1e-8 and elapsed < 10.0
    _report(
        1,
        "projection equals exhaustive QP oracle on 500 cases",
        ok,
        f"max entry diff {worst_entry:.2e}, max sum residual {worst_residual:.2e}, {elapsed:.1f}s",
    )


def test_criterion_02_gradient_checks():
    start = time.perf_counter()
    gen = RngStream(102).generator()
    step = 1e-6
    ok = True

    # 50 instances: analytic model gradients vs central differences
    for _ in range(50):
        sizes = [3, 4] if gen.random() < 0.5 else [2, 5, 3]
        params = init_params(sizes, RngStream(int(gen.integers(1 << 30))))
        X = gen.standard_normal((4, sizes[0]))
        y = gen.integers(0, sizes[-1], 4)
        weights = gen.standard_normal(4)
        _, grad = loss_and_grad(params, X, y, weights)
        for li, (w, b) in enumerate(params.layers):
            for arr, ga in ((w, grad.layers[li][0]), (b, grad.layers[li][1])):
                it = np.nditer(arr, flags=["multi_index"])
                for _ in it:
                    idx = it.multi_index
                    orig = arr[idx]
                    arr[idx] = orig + step
                    hi = loss_and_grad(params, X, y, weights)[0].total
                    arr[idx] = orig - step
                    lo = loss_and_grad(params, X, y, weights)[0].total
                    arr[idx] = orig
                    fd = (hi - lo) / (2 * step)
                    ok = ok and abs(ga[idx] - fd) <= max(1e-5 * abs(fd), 1e-7)

    # 50 instances: selection-score gradient vs central differences of the
    # outer objective with the inner solution held fixed
    ds = gen_blobs(30, 2, 2, 0.6, RngStream(103))
    for _ in range(50):
        theta = init_params([2, 2], RngStream(int(gen.integers(1 << 30))))
        w = gen.random(ds.n)
        gamma = float(gen.uniform(0.0, 1e-2))
        grad = upper_gradient(w, theta, ds, gamma)
        from forgeset.models import per_sample_loss

        losses = per_sample_loss(theta, ds.X, ds.y)

        def f(vec):
            return float((vec * losses).sum() + gamma * (vec * vec).sum())

        for i in map(int, gen.integers(0, ds.n, 3)):
            hi = w.copy()
            hi[i] += step
            lo = w.copy()
            lo[i] -= step
            fd = (f(hi) - f(lo)) / (2 * step)
            ok = ok and abs(grad[i] - fd) <= max(1e-5 * abs(fd), 1e-7)

    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 30.0
    _report(2, "analytic gradients match finite differences on 100 instances", ok, f"{elapsed:.1f}s")


def test_criterion_03_sign_unrolling_insensitivity():
    start = time.perf_counter()
    ds = gen_blobs(30, 2, 2, 0.6, RngStream(104))
    hits = 0
    for k in range(100):
        gen = RngStream(104, 1000 + k).generator()
        theta = init_params([2, 2], RngStream(104, 2000 + k))
        w = gen.random(ds.n)
        coord = int(gen.integers(0, ds.n))
        hits += ig_probe(w, theta, ds, 0.01, 5, epsilon=1e-6, coord=coord)

    theta = init_params([2, 2], RngStream(104, 5))
    w = RngStream(104, 6).generator().random(ds.n)
    base = lower_signsgd(w, theta, ds, 0.01, 8)
    scaling_ok = True
    for c in np.exp(RngStream(104, 7).generator().uniform(np.log(1e-3), np.log(1e3), 50)):
        scaled = lower_signsgd(w, theta, ds, 0.01, 8, loss_scale=float(c))
        scaling_ok = scaling_ok and params_equal(base, scaled)

    elapsed = time.perf_counter() - start
    ok = hits >= 95 and scaling_ok and elapsed < 60.0
    _report(
        3,
        "inner solution insensitive to score nudges; sign steps scale-invariant",
        ok,
        f"probe true {hits}/100, bit-exact scaling {scaling_ok}, {elapsed:.1f}s",
    )


def test_criterion_04_brute_force_near_optimality():
    start = time.perf_counter()
    rng = RngStream(5)
    ds = gen_blobs(6, 2, 2, 1.1, rng.derive(1))
    theta_o = train(ds, [2, 2], 200, 0.5, rng.derive(3))
    ucfg = UnlearnConfig(method=Method.RETRAIN, epochs=120, lr=0.5, rng=rng.derive(5))
    ranking = enumerate_worst(ds, 3, [2, 2], ucfg)
    uas = np.array([s.ua for s in ranking])
    res = select(ds, 3, theta_o, BLOConfig(outer_iters=15, inner_epochs=8, rng=rng.derive(4)))
    theta_u = retrain(ds, res.mask, [2, 2], ucfg)
    ua = compute_ua(theta_u, ds.X[res.mask.indices], ds.y[res.mask.indices])
    cutoff = float(np.quantile(uas, 0.10))
    elapsed = time.perf_counter() - start
    ok = len(ranking) == 220 and ua <= cutoff + 1e-9 and elapsed < 120.0
    _report(
        4,
        "selected mask in bottom decile of the exhaustive 220-subset ranking",
        ok,
        f"selected UA {ua:.2f}, decile cutoff {cutoff:.2f}, UA range [{uas.min():.1f}, {uas.max():.1f}], {elapsed:.1f}s",
    )


def test_criterion_05_worst_case_suppresses_ua(standard_setup):
    start = time.perf_counter()
    s = standard_setup
    worst_ua, worst_ta = s["worst_runs"][:, 0], s["worst_runs"][:, 1]
    rand_ua, rand_ta = s["random_runs"][:, 0], s["random_runs"][:, 1]
    checks = dict(
        ua_small=worst_ua.mean() <= 1.0,
        ua_quarter=worst_ua.mean() <= 0.25 * rand_ua.mean(),
        ta_kept=worst_ta.mean() >= rand_ta.mean() - 1.0,
        var_reduced=worst_ua.std() <= rand_ua.std(),
    )
    elapsed = time.perf_counter() - start
    ok = all(checks.values())
    _report(
        5,
        "worst-case retrain UA near zero with reduced variance, utility kept",
        ok,
        f"worst {worst_ua.mean():.2f}±{worst_ua.std():.2f} vs random "
        f"{rand_ua.mean():.2f}±{rand_ua.std():.2f}; TA {worst_ta.mean():.2f} vs {rand_ta.mean():.2f}",
    )


def test_criterion_06_easiest_case_inversion(standard_setup):
    s = standard_setup
    easiest_ua = np.array([s["retrain_eval"](s["easiest"].mask, seed)[0] for seed in range(10)])
    rand_ua = s["random_runs"][:, 0]
    ok = easiest_ua.mean() >= 2.0 * rand_ua.mean()
    _report(
        6,
        "easiest-case retrain UA at least doubles the random baseline",
        ok,
        f"easiest {easiest_ua.mean():.2f} vs random {rand_ua.mean():.2f}",
    )


def test_criterion_07_avg_gap_arithmetic():
    zero = EvalReport(0.0, 0.0, 0.0, 0.0)
    first = avg_gap(EvalReport(0.20, 1.90, 2.54, 3.36), zero).avg_gap
    second = avg_gap(EvalReport(0.00, 0.02, 2.37, 3.08), zero).avg_gap
    ok = abs(first - 2.00) <= 1e-9 and abs(round(second, 2) - 1.37) <= 1e-9
    _report(
        7,
        "gap averaging reproduces the reference rows",
        ok,
        f"2.00 vs {first!r}; 1.37 vs {second!r} (reported {second:.2f})",
    )


def test_criterion_08_worst_complement_is_a_coreset(standard_setup):
    start = time.perf_counter()
    s = standard_setup
    rng, train_ds, test_ds = s["rng"], s["train_ds"], s["test_ds"]
    full_ta = accuracy(s["theta_o"], test_ds.X, test_ds.y)
    complement = s["worst"].mask.complement(train_ds.n)
    comp_theta = train(subset(train_ds, complement), [2, 2], 300, 0.5, rng.derive(3))
    comp_ta = accuracy(comp_theta, test_ds.X, test_ds.y)
    gen = rng.derive(400).generator()
    rand_mask = ForgetMask(np.sort(gen.permutation(train_ds.n)[: s["m"]]))
    rand_theta = train(subset(train_ds, rand_mask.complement(train_ds.n)), [2, 2], 300, 0.5, rng.derive(3))
    rand_ta = accuracy(rand_theta, test_ds.X, test_ds.y)
    elapsed = time.perf_counter() - start
    ok = abs(comp_ta - full_ta) <= 2.0 and elapsed < 120.0
    _report(
        8,
        "training on the worst-case complement keeps test accuracy within 2pp",
        ok,
        f"full {full_ta:.2f}, worst-complement {comp_ta:.2f}, random-complement {rand_ta:.2f}",
    )


def test_criterion_09_bias_composition():
    start = time.perf_counter()
    rng = RngStream(29)
    ds, groups = gen_biased(2000, 0.9, rng.derive(1))
    theta_o = train(ds, [2, 2], 300, 0.5, rng.derive(3))
    m = 200
    res = select(ds, m, theta_o, BLOConfig(rng=rng.derive(4)))
    aligned = groups.group == ds.y
    worst_share = float(np.mean(aligned[res.mask.indices]))
    random_shares = []
    for k in range(10):
        gen = rng.derive(100 + k).generator()
        random_shares.append(float(np.mean(aligned[gen.permutation(ds.n)[:m]])))
    elapsed = time.perf_counter() - start
    ok = worst_share >= 0.5 and worst_share > float(np.mean(random_shares)) and elapsed < 120.0
    _report(
        9,
        "label-aligned majority group dominates the worst-case selection",
        ok,
        f"worst share {worst_share:.3f} vs random mean {np.mean(random_shares):.3f}, {elapsed:.1f}s",
    )


def test_criterion_10_mixture_monotonicity(standard_setup):
    start = time.perf_counter()
    s = standard_setup
    train_ds, rng, m = s["train_ds"], s["rng"], s["m"]
    mask, weights = s["worst"].mask, s["worst"].weights.w
    order = mask.indices[np.argsort(-weights[mask.indices], kind="stable")]
    pool = np.setdiff1d(np.arange(train_ds.n), mask.indices)
    perms = {seed: rng.derive(300 + seed).generator().permutation(pool) for seed in range(3)}
    ua_by_p = []
    for p in (0.0, 0.25, 0.5, 0.75, 1.0):
        k = round(p * m)
        vals = [
            s["retrain_eval"](
                ForgetMask(np.sort(np.concatenate((order[:k], perms[seed][: m - k])))), seed
            )[0]
            for seed in range(3)
        ]
        ua_by_p.append(float(np.mean(vals)))
    increases = [max(0.0, b - a) for a, b in zip(ua_by_p, ua_by_p[1:])]
    elapsed = time.perf_counter() - start
    ok = (
        sum(1 for v in increases if v > 1e-9) <= 1
        and all(v <= 0.5 for v in increases)
        and elapsed < 180.0
    )
    _report(
        10,
        "retrain UA non-increasing in the worst-case fraction",
        ok,
        "UA by p: " + ", ".join(f"{v:.2f}" for v in ua_by_p) + f", {elapsed:.1f}s",
    )


def test_criterion_11_pipeline_determinism(tmp_path):
    config = {
        "seed": 7,
        "dataset": {
            "kind": "blobs",
            "n_per_class": 30,
            "classes": 2,
            "dim": 2,
            "spread": 0.55,
            "test_n_per_class": 30,
        },
        "model": {"sizes": [2, 2]},
        "pretrain": {"epochs": 150, "lr": 0.5},
        "forget": {"ratio": 0.1},
        "selection": {"outer_iters": 8, "inner_epochs": 5, "directions": ["worst", "easiest"]},
        "unlearn": [
            {"method": "retrain", "epochs": 150, "lr": 0.5},
            {"method": "ft", "epochs": 10, "lr": 0.2},
            {"method": "rl", "epochs": 10, "lr": 0.2},
            {"method": "l1_sparse", "epochs": 10, "lr": 0.2, "l1_coef": 0.001},
            {"method": "ga", "epochs": 5, "lr": 0.05},
        ],
        "eval_seeds": [0, 1, 2],
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config))
    runner = CliRunner()
    payloads = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        for verb in ("gen", "train", "select", "unlearn-eval"):
            result = runner.invoke(
                cli_main, [verb, "--config", str(cfg_path), "--out", str(out)]
            )
            assert result.exit_code == 0, f"{verb}: {result.output}"
        payloads.append(
            b"".join((out / name).read_bytes() for name in ("report.csv", "report.md", "per_seed.csv"))
        )
    ok = payloads[0] == payloads[1]
    _report(11, "repeated pipeline runs produce byte-identical reports", ok)
