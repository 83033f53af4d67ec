"""numba @njit implementations of the hot numeric kernels.

Same contracts as ``_kernels_numpy`` (see that module for the shared
conventions). Matrix products are written as explicit loops: the
operands here are small enough that avoiding per-call BLAS dispatch is
the whole point of this path. Results agree with the numpy twin to
floating-point tolerance; each backend is individually deterministic.
"""

from __future__ import annotations

import numpy as np
from numba import njit

LOSS_GUARD = 1e6


@njit(cache=True, nogil=True)
def _affine(W, b, X):
    n, din = X.shape
    dout = W.shape[1]
    out = np.empty((n, dout))
    for i in range(n):
        for j in range(dout):
            acc = b[j]
            for k in range(din):
                acc += X[i, k] * W[k, j]
            out[i, j] = acc
    return out


@njit(cache=True, nogil=True)
def forward_1(W0, b0, X):
    return _affine(W0, b0, X)


@njit(cache=True, nogil=True)
def forward_2(W0, b0, W1, b1, X, relu):
    Z = _affine(W0, b0, X)
    if relu:
        Z = np.maximum(Z, 0.0)
    return _affine(W1, b1, Z)


@njit(cache=True, nogil=True)
def softmax_rows(logits):
    n, c = logits.shape
    out = np.empty((n, c))
    for i in range(n):
        mx = logits[i, 0]
        for j in range(1, c):
            if logits[i, j] > mx:
                mx = logits[i, j]
        s = 0.0
        for j in range(c):
            e = np.exp(logits[i, j] - mx)
            out[i, j] = e
            s += e
        for j in range(c):
            out[i, j] /= s
    return out


@njit(cache=True, nogil=True)
def ce_per_sample(logits, y):
    n, c = logits.shape
    per = np.empty(n)
    for i in range(n):
        mx = logits[i, 0]
        for j in range(1, c):
            if logits[i, j] > mx:
                mx = logits[i, j]
        s = 0.0
        for j in range(c):
            s += np.exp(logits[i, j] - mx)
        per[i] = np.log(s) - (logits[i, y[i]] - mx)
    return per


@njit(cache=True, nogil=True)
def _softmax_ce_backward(logits, y, sw):
    n, c = logits.shape
    per = np.empty(n)
    dlogits = np.empty((n, c))
    total = 0.0
    for i in range(n):
        mx = logits[i, 0]
        for j in range(1, c):
            if logits[i, j] > mx:
                mx = logits[i, j]
        s = 0.0
        for j in range(c):
            e = np.exp(logits[i, j] - mx)
            dlogits[i, j] = e
            s += e
        ce = np.log(s) - (logits[i, y[i]] - mx)
        per[i] = sw[i] * ce
        total += per[i]
        coef = sw[i] / n
        for j in range(c):
            p = dlogits[i, j] / s
            if j == y[i]:
                p -= 1.0
            dlogits[i, j] = coef * p
    return total / n, per, dlogits


@njit(cache=True, nogil=True)
def _grad_affine(X, d):
    """dW = X.T @ d and db = column sums of d."""
    n, din = X.shape
    dout = d.shape[1]
    dW = np.zeros((din, dout))
    db = np.zeros(dout)
    for i in range(n):
        for j in range(dout):
            dij = d[i, j]
            db[j] += dij
            for k in range(din):
                dW[k, j] += X[i, k] * dij
    return dW, db


@njit(cache=True, nogil=True)
def loss_grad_1(W0, b0, X, y, sw):
    logits = _affine(W0, b0, X)
    total, per, d = _softmax_ce_backward(logits, y, sw)
    dW0, db0 = _grad_affine(X, d)
    return total, per, dW0, db0


@njit(cache=True, nogil=True)
def loss_grad_2(W0, b0, W1, b1, X, y, sw, relu, last_only):
    n = X.shape[0]
    Z = _affine(W0, b0, X)
    if relu:
        H = np.maximum(Z, 0.0)
    else:
        H = Z
    logits = _affine(W1, b1, H)
    total, per, d = _softmax_ce_backward(logits, y, sw)
    dW1, db1 = _grad_affine(H, d)
    if last_only:
        dW0 = np.zeros_like(W0)
        db0 = np.zeros_like(b0)
    else:
        hidden = W1.shape[0]
        dZ = np.empty((n, hidden))
        for i in range(n):
            for k in range(hidden):
                acc = 0.0
                for j in range(d.shape[1]):
                    acc += d[i, j] * W1[k, j]
                if relu and Z[i, k] <= 0.0:
                    acc = 0.0
                dZ[i, k] = acc
        dW0, db0 = _grad_affine(X, dZ)
    return total, per, dW0, db0, dW1, db1


@njit(cache=True, nogil=True)
def _guard_ok(total):
    return np.isfinite(total) and abs(total) <= LOSS_GUARD


@njit(cache=True, nogil=True)
def _apply_update(W, b, dW, db, rate, l1_coef, sign_mode):
    rows, cols = W.shape
    for k in range(rows):
        for j in range(cols):
            g = dW[k, j]
            if l1_coef > 0.0:
                g += l1_coef * np.sign(W[k, j])
            if sign_mode:
                W[k, j] -= rate * np.sign(g)
            else:
                W[k, j] -= rate * g
    for j in range(cols):
        g = db[j]
        if l1_coef > 0.0:
            g += l1_coef * np.sign(b[j])
        if sign_mode:
            b[j] -= rate * np.sign(g)
        else:
            b[j] -= rate * g


@njit(cache=True, nogil=True)
def descent_1(W0, b0, X, y, sw, steps, rate, l1_coef, sign_mode):
    total = 0.0
    for _ in range(steps):
        total, _, dW0, db0 = loss_grad_1(W0, b0, X, y, sw)
        if not _guard_ok(total):
            return total
        _apply_update(W0, b0, dW0, db0, rate, l1_coef, sign_mode)
    total, _, _, _ = loss_grad_1(W0, b0, X, y, sw)
    return total


@njit(cache=True, nogil=True)
def descent_2(W0, b0, W1, b1, X, y, sw, steps, rate, l1_coef, sign_mode, relu, last_only):
    total = 0.0
    for _ in range(steps):
        total, _, dW0, db0, dW1, db1 = loss_grad_2(W0, b0, W1, b1, X, y, sw, relu, last_only)
        if not _guard_ok(total):
            return total
        if not last_only:
            _apply_update(W0, b0, dW0, db0, rate, l1_coef, sign_mode)
        _apply_update(W1, b1, dW1, db1, rate, l1_coef, sign_mode)
    total, _, _, _, _, _ = loss_grad_2(W0, b0, W1, b1, X, y, sw, relu, last_only)
    return total
