"""The jit and pure-numpy kernel twins must implement the same math."""

import subprocess
import sys

import numpy as np
import pytest

from forgeset import _kernels_numba as jit_k
from forgeset import _kernels_numpy as np_k
from forgeset.numcore import RngStream


def _instance(seed, n=15, din=3, hidden=5, classes=4):
    gen = RngStream(seed).generator()
    return dict(
        W0=gen.standard_normal((din, hidden)),
        b0=gen.standard_normal(hidden),
        W1=gen.standard_normal((hidden, classes)),
        b1=gen.standard_normal(classes),
        X=gen.standard_normal((n, din)),
        y=gen.integers(0, classes, n),
        sw=gen.standard_normal(n),
    )


def _close(a, b, tol=1e-12):
    a, b = np.asarray(a), np.asarray(b)
    return np.all(np.abs(a - b) <= tol * np.maximum(1.0, np.abs(b)))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_forward_agreement(seed):
    p = _instance(seed)
    assert _close(jit_k.forward_1(p["W0"], p["b0"], p["X"]), np_k.forward_1(p["W0"], p["b0"], p["X"]))
    for relu in (True, False):
        a = jit_k.forward_2(p["W0"], p["b0"], p["W1"], p["b1"], p["X"], relu)
        b = np_k.forward_2(p["W0"], p["b0"], p["W1"], p["b1"], p["X"], relu)
        assert _close(a, b)


@pytest.mark.parametrize("seed", [3, 4])
def test_loss_grad_agreement(seed):
    p = _instance(seed)
    for last_only in (False, True):
        ra = jit_k.loss_grad_2(p["W0"], p["b0"], p["W1"], p["b1"], p["X"], p["y"], p["sw"], True, last_only)
        rb = np_k.loss_grad_2(p["W0"], p["b0"], p["W1"], p["b1"], p["X"], p["y"], p["sw"], True, last_only)
        for a, b in zip(ra, rb):
            assert _close(a, b)
    ra = jit_k.loss_grad_1(p["W1"], p["b1"], _instance(seed, din=5)["X"], p["y"], p["sw"])
    rb = np_k.loss_grad_1(p["W1"], p["b1"], _instance(seed, din=5)["X"], p["y"], p["sw"])
    for a, b in zip(ra, rb):
        assert _close(a, b)


def test_softmax_and_ce_agreement():
    p = _instance(7)
    logits = np_k.forward_2(p["W0"], p["b0"], p["W1"], p["b1"], p["X"], True)
    assert _close(jit_k.softmax_rows(logits), np_k.softmax_rows(logits))
    assert _close(jit_k.ce_per_sample(logits, p["y"]), np_k.ce_per_sample(logits, p["y"]))


def test_descent_agreement_plain_gd():
    p = _instance(9)
    sw = np.ones(p["X"].shape[0])
    args = (p["X"], p["y"], sw, 50, 0.1, 0.01, False, True, False)
    wa, ba, wa1, ba1 = p["W0"].copy(), p["b0"].copy(), p["W1"].copy(), p["b1"].copy()
    la = jit_k.descent_2(wa, ba, wa1, ba1, *args)
    wb, bb, wb1, bb1 = p["W0"].copy(), p["b0"].copy(), p["W1"].copy(), p["b1"].copy()
    lb = np_k.descent_2(wb, bb, wb1, bb1, *args)
    assert _close(la, lb, 1e-9)
    for a, b in ((wa, wb), (ba, bb), (wa1, wb1), (ba1, bb1)):
        assert _close(a, b, 1e-9)


def test_descent_agreement_sign_mode_short_run():
    # sign steps quantize the update, so well-conditioned gradients give
    # identical short trajectories across backends
    p = _instance(11)
    sw = np.ones(p["X"].shape[0])
    args = (p["X"], p["y"], sw, 5, 0.01, 0.0, True, True, False)
    wa, ba, wa1, ba1 = p["W0"].copy(), p["b0"].copy(), p["W1"].copy(), p["b1"].copy()
    jit_k.descent_2(wa, ba, wa1, ba1, *args)
    wb, bb, wb1, bb1 = p["W0"].copy(), p["b0"].copy(), p["W1"].copy(), p["b1"].copy()
    np_k.descent_2(wb, bb, wb1, bb1, *args)
    for a, b in ((wa, wb), (ba, bb), (wa1, wb1), (ba1, bb1)):
        assert np.array_equal(a, b)


def test_divergence_guard_matches():
    p = _instance(13)
    sw = np.ones(p["X"].shape[0])
    args = (p["X"], p["y"], sw, 10, 1e12, 0.0, False, True, False)
    la = jit_k.descent_2(p["W0"].copy(), p["b0"].copy(), p["W1"].copy(), p["b1"].copy(), *args)
    lb = np_k.descent_2(p["W0"].copy(), p["b0"].copy(), p["W1"].copy(), p["b1"].copy(), *args)
    assert not (np.isfinite(la) and abs(la) <= jit_k.LOSS_GUARD)
    assert not (np.isfinite(lb) and abs(lb) <= np_k.LOSS_GUARD)


@pytest.mark.parametrize("value,expected", [("numpy", "numpy"), ("numba", "numba"), ("", "numba")])
def test_env_flag_selects_backend(value, expected):
    code = "import forgeset.kernels as k; print(k.BACKEND)"
    env = {"PATH": "/usr/bin:/bin", "FORGESET_BACKEND": value}
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True
    )
    assert out.stdout.strip() == expected


def test_env_flag_rejects_unknown():
    code = "import forgeset.kernels"
    env = {"PATH": "/usr/bin:/bin", "FORGESET_BACKEND": "fortran"}
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert out.returncode != 0
