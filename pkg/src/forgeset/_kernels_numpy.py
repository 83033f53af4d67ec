"""Vectorized numpy implementations of the hot numeric kernels.

This is the fallback path used when the jit backend is disabled (env
var ``FORGESET_BACKEND=numpy``) or numba is unavailable. The jit twin
in ``_kernels_numba`` implements the same contracts; the two are only
required to agree to floating-point tolerance, not bit-for-bit.

Conventions shared by both backends:

* weights ``W`` are (fan_in, fan_out), biases ``b`` are (fan_out,),
  inputs ``X`` are (n, fan_in), all C-order float64;
* ``sw`` is a per-sample loss weight (may be negative); the scalar loss
  is ``mean_i sw[i] * ce_i`` and gradients are exact for that mean;
* descent loops mutate the parameter arrays in place and return the
  objective evaluated at the final parameters.
"""

from __future__ import annotations

import numpy as np

# Magnitude above which a training loss counts as diverged.
LOSS_GUARD = 1e6


def forward_1(W0, b0, X):
    return X @ W0 + b0


def forward_2(W0, b0, W1, b1, X, relu):
    Z = X @ W0 + b0
    H = np.maximum(Z, 0.0) if relu else Z
    return H @ W1 + b1


def softmax_rows(logits):
    shift = logits - logits.max(axis=1, keepdims=True)
    ex = np.exp(shift)
    return ex / ex.sum(axis=1, keepdims=True)


def ce_per_sample(logits, y):
    n = logits.shape[0]
    shift = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shift).sum(axis=1))
    return lse - shift[np.arange(n), y]


def _softmax_ce_backward(logits, y, sw):
    """Weighted-mean CE loss, weighted per-sample losses, and d(loss)/d(logits)."""
    n = logits.shape[0]
    shift = logits - logits.max(axis=1, keepdims=True)
    ex = np.exp(shift)
    ssum = ex.sum(axis=1, keepdims=True)
    ce = np.log(ssum[:, 0]) - shift[np.arange(n), y]
    per = sw * ce
    total = per.sum() / n
    dlogits = ex / ssum
    dlogits[np.arange(n), y] -= 1.0
    dlogits *= (sw / n)[:, None]
    return total, per, dlogits


def loss_grad_1(W0, b0, X, y, sw):
    logits = X @ W0 + b0
    total, per, d = _softmax_ce_backward(logits, y, sw)
    dW0 = X.T @ d
    db0 = d.sum(axis=0)
    return total, per, dW0, db0


def loss_grad_2(W0, b0, W1, b1, X, y, sw, relu, last_only):
    Z = X @ W0 + b0
    H = np.maximum(Z, 0.0) if relu else Z
    logits = H @ W1 + b1
    total, per, d = _softmax_ce_backward(logits, y, sw)
    dW1 = H.T @ d
    db1 = d.sum(axis=0)
    if last_only:
        dW0 = np.zeros_like(W0)
        db0 = np.zeros_like(b0)
    else:
        dH = d @ W1.T
        dZ = dH * (Z > 0.0) if relu else dH
        dW0 = X.T @ dZ
        db0 = dZ.sum(axis=0)
    return total, per, dW0, db0, dW1, db1


def _guard_ok(total):
    return np.isfinite(total) and abs(total) <= LOSS_GUARD


def descent_1(W0, b0, X, y, sw, steps, rate, l1_coef, sign_mode):
    """Full-batch descent on the weighted CE objective; returns final loss."""
    total = 0.0
    for _ in range(steps):
        total, _, dW0, db0 = loss_grad_1(W0, b0, X, y, sw)
        if not _guard_ok(total):
            return total
        if l1_coef > 0.0:
            dW0 += l1_coef * np.sign(W0)
            db0 += l1_coef * np.sign(b0)
        if sign_mode:
            W0 -= rate * np.sign(dW0)
            b0 -= rate * np.sign(db0)
        else:
            W0 -= rate * dW0
            b0 -= rate * db0
    total, _, _, _ = loss_grad_1(W0, b0, X, y, sw)
    return total


def descent_2(W0, b0, W1, b1, X, y, sw, steps, rate, l1_coef, sign_mode, relu, last_only):
    total = 0.0
    for _ in range(steps):
        total, _, dW0, db0, dW1, db1 = loss_grad_2(W0, b0, W1, b1, X, y, sw, relu, last_only)
        if not _guard_ok(total):
            return total
        if l1_coef > 0.0:
            if not last_only:
                dW0 += l1_coef * np.sign(W0)
                db0 += l1_coef * np.sign(b0)
            dW1 += l1_coef * np.sign(W1)
            db1 += l1_coef * np.sign(b1)
        if sign_mode:
            if not last_only:
                W0 -= rate * np.sign(dW0)
                b0 -= rate * np.sign(db0)
            W1 -= rate * np.sign(dW1)
            b1 -= rate * np.sign(db1)
        else:
            if not last_only:
                W0 -= rate * dW0
                b0 -= rate * db0
            W1 -= rate * dW1
            b1 -= rate * db1
    total, _, _, _, _, _ = loss_grad_2(W0, b0, W1, b1, X, y, sw, relu, last_only)
    return total
