"""Backend selection for the hot numeric kernels.

The jit path (numba) is the default. Set ``FORGESET_BACKEND=numpy`` to
force the pure-numpy fallback, or ``FORGESET_BACKEND=numba`` to require
the jit path (ImportError if numba is missing). The choice is made once
at import time; ``benchmarks/bench_backends.py`` compares the two.
"""

from __future__ import annotations

import os

BACKEND_ENV = "FORGESET_BACKEND"


def _resolve_backend() -> str:
    choice = os.environ.get(BACKEND_ENV, "auto").strip().lower()
    if choice in ("numpy", "np"):
        return "numpy"
    if choice == "numba":
        import numba  # noqa: F401  -- fail loudly if explicitly requested

        return "numba"
    if choice not in ("", "auto"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba', 'numpy', or 'auto', got {choice!r}")
    try:
        import numba  # noqa: F401

        return "numba"
    except ImportError:
        return "numpy"


BACKEND = _resolve_backend()

if BACKEND == "numba":
    from . import _kernels_numba as _impl
else:
    from . import _kernels_numpy as _impl

LOSS_GUARD = _impl.LOSS_GUARD
forward_1 = _impl.forward_1
forward_2 = _impl.forward_2
softmax_rows = _impl.softmax_rows
ce_per_sample = _impl.ce_per_sample
loss_grad_1 = _impl.loss_grad_1
loss_grad_2 = _impl.loss_grad_2
descent_1 = _impl.descent_1
descent_2 = _impl.descent_2
