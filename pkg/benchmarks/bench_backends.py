"""Benchmark the jit kernels against the pure-numpy fallback.

Times the three hot paths on the standard desk-scale workload: a single
loss+gradient evaluation, a full 300-epoch training run, and a 10-step
sign-descent unlearning pass. Run as:

    python3 benchmarks/bench_backends.py [repeats]
"""

import sys
import time

import numpy as np

from forgeset import _kernels_numba as jit_k
from forgeset import _kernels_numpy as np_k
from forgeset.data import gen_blobs
from forgeset.models import init_params
from forgeset.numcore import RngStream


def time_call(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 20
    rng = RngStream(7)
    ds = gen_blobs(200, 2, 2, 0.55, rng.derive(1))
    hidden = init_params([2, 8, 2], rng.derive(3))
    (w0, b0), (w1, b1) = hidden.layers
    sw = np.ones(ds.n)
    mu_sw = 1.0 - 2.0 * rng.derive(4).generator().random(ds.n)

    cases = {
        "loss+grad (2-layer, n=400)": lambda k: k.loss_grad_2(
            w0, b0, w1, b1, ds.X, ds.y, sw, True, False
        ),
        "train 300 epochs (2-layer)": lambda k: k.descent_2(
            w0.copy(), b0.copy(), w1.copy(), b1.copy(), ds.X, ds.y, sw, 300, 0.3, 0.0, False, True, False
        ),
        "sign descent 10 steps": lambda k: k.descent_2(
            w0.copy(), b0.copy(), w1.copy(), b1.copy(), ds.X, ds.y, mu_sw, 10, 0.01, 0.0, True, True, False
        ),
    }

    for fn in cases.values():
        fn(jit_k)  # trigger jit compilation outside the timed region

    print(f"{'case':<30} {'numba':>12} {'numpy':>12} {'speedup':>9}")
    for name, fn in cases.items():
        t_jit = time_call(lambda: fn(jit_k), repeats)
        t_np = time_call(lambda: fn(np_k), repeats)
        print(f"{name:<30} {t_jit * 1e3:>10.3f}ms {t_np * 1e3:>10.3f}ms {t_np / t_jit:>8.1f}x")


if __name__ == "__main__":
    main()
