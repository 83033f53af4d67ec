"""Numeric primitives: seeded RNG streams, scalar root finding, sign.

Matrices throughout the package are plain C-order float64 ``numpy``
arrays; this module provides the shared helpers the other modules build
on, plus a thin ``matmul`` wrapper so the dense-arithmetic contract has
a single documented home.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BracketError, NoConvergence, ShapeError

__all__ = ["RngStream", "bisect_root", "sign", "matmul", "as_matrix", "check_finite"]

# Multiplier used to fold a child index into a derived stream id.
_STREAM_MIX = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class RngStream:
    """Deterministic random stream keyed by (seed, stream_id).

    Backed by the counter-based Philox generator, so identical keys give
    identical draw sequences on every platform. ``stream_id`` separates
    independent experiment arms drawn from one experiment seed.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = np.array(
            [self.seed & 0xFFFFFFFFFFFFFFFF, self.stream_id & 0xFFFFFFFFFFFFFFFF],
            dtype=np.uint64,
        )
        return np.random.Generator(np.random.Philox(key=key))

    def derive(self, index: int) -> "RngStream":
        """Child stream; distinct indexes give statistically independent arms."""
        mixed = (self.stream_id * _STREAM_MIX + index + 1) & 0xFFFFFFFFFFFFFFFF
        return RngStream(self.seed, mixed)


def sign(x: float) -> float:
    """Element sign with sign(0) = 0, so a zero gradient leaves a weight untouched."""
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> float:
    """Bisection root of a monotone scalar function on [lo, hi].

    Stops on whichever triggers first: |f(mid)| <= tol or bracket width
    <= tol. Raises BracketError when f(lo) and f(hi) share a strict
    sign, NoConvergence when max_iter passes leave the bracket wider
    than tol. Deterministic: identical inputs give bit-identical output.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    if not lo <= hi:
        raise BracketError(f"empty bracket: lo={lo} > hi={hi}")

    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if abs(fmid) <= tol or (hi - lo) <= tol:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    if (hi - lo) <= tol:
        return 0.5 * (lo + hi)
    raise NoConvergence(f"bracket width {hi - lo} > tol {tol} after {max_iter} iterations")


def as_matrix(a, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce to a C-order float64 2-D array, optionally checking its shape."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D array, got ndim={m.ndim}")
    if rows is not None and m.shape[0] != rows:
        raise ShapeError(f"expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise ShapeError(f"expected {cols} cols, got {m.shape[1]}")
    return m


def check_finite(a: np.ndarray, what: str = "array") -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise ShapeError(f"{what} contains non-finite entries")
    return a


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense product of two float64 matrices (delegates to numpy)."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"inner dimensions differ: {a.shape} @ {b.shape}")
    return a @ b
