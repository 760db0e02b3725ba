"""Unnormalized Walsh-Hadamard matrix as an implicit operator.

H(i, j) = (-1)^<i, j> with the dot product of bit vectors over GF(2), in
natural (Hadamard) ordering. No normalization anywhere in this module:
H @ H.T = n * I, and the fast transform computes exactly H @ x.

The O(n log n) butterfly dispatches to a compiled Cython kernel when the
extension built, falling back to a vectorized numpy implementation.
``KERNEL`` names the active backend; set FJLT_FORCE_PY=1 in the
environment to force the fallback (used by the benchmark).
"""

from dataclasses import dataclass
from functools import lru_cache
import os

import numpy as np

if os.environ.get("FJLT_FORCE_PY"):
    from fjlt import _fwht_py as _kernel

    KERNEL = "python"
else:
    try:
        from fjlt import _fwht_cy as _kernel

        KERNEL = "cython"
    except ImportError:  # pragma: no cover - source checkout without build
        from fjlt import _fwht_py as _kernel

        KERNEL = "python"

__all__ = [
    "KERNEL",
    "RowIndexSet",
    "fwht_batch_in_place",
    "fwht_in_place",
    "hadamard_entry",
    "is_power_of_two",
    "naive_hadamard_apply",
    "subsampled_apply",
]


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def as_vector(x) -> np.ndarray:
    """Validate and return a float64 vector of power-of-two length."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {x.shape}")
    if not is_power_of_two(x.shape[0]):
        raise ValueError(f"vector length {x.shape[0]} is not a power of 2")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector contains NaN or Inf")
    return x


@dataclass(frozen=True)
class RowIndexSet:
    """k row indices into the n x n Hadamard matrix; duplicates allowed."""

    indices: np.ndarray
    n: int

    def __post_init__(self):
        idx = np.ascontiguousarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indices", idx)
        if not is_power_of_two(self.n):
            raise ValueError(f"ambient dimension {self.n} is not a power of 2")
        if idx.ndim != 1 or idx.shape[0] < 1:
            raise ValueError("need at least one row index")
        if idx.min() < 0 or idx.max() >= self.n:
            raise ValueError(f"row index out of range [0, {self.n})")

    @property
    def k(self) -> int:
        return self.indices.shape[0]


def hadamard_entry(row: int, col: int, n: int) -> int:
    """Entry H(row, col) of the unnormalized n x n Hadamard matrix: +1 or -1."""
    if not is_power_of_two(n):
        raise ValueError(f"n={n} is not a power of 2")
    if not (0 <= row < n) or not (0 <= col < n):
        raise ValueError(f"index ({row}, {col}) out of range for n={n}")
    return -1 if (row & col).bit_count() & 1 else 1


def fwht_in_place(x: np.ndarray) -> np.ndarray:
    """In-place fast Walsh-Hadamard transform: x <- H x. Returns x."""
    if not isinstance(x, np.ndarray) or x.dtype != np.float64 or x.ndim != 1:
        raise ValueError("fwht_in_place needs a 1-D float64 array")
    if not x.flags.c_contiguous:
        raise ValueError("fwht_in_place needs a contiguous array")
    if not is_power_of_two(x.shape[0]):
        raise ValueError(f"length {x.shape[0]} is not a power of 2")
    _kernel.fwht(x)
    return x


def fwht_batch_in_place(xs: np.ndarray) -> np.ndarray:
    """Transform every row of a C-contiguous (m, n) float64 array in place."""
    if not isinstance(xs, np.ndarray) or xs.dtype != np.float64 or xs.ndim != 2:
        raise ValueError("fwht_batch_in_place needs a 2-D float64 array")
    if not xs.flags.c_contiguous:
        raise ValueError("fwht_batch_in_place needs a C-contiguous array")
    if not is_power_of_two(xs.shape[1]):
        raise ValueError(f"row length {xs.shape[1]} is not a power of 2")
    if xs.shape[0] > 0:
        _kernel.fwht_batch(xs)
    return xs


@lru_cache(maxsize=16)
def _dense_hadamard(n: int) -> np.ndarray:
    # Built entry-by-entry from hadamard_entry so the oracle shares no code
    # with the butterfly. Cached: the O(n^2) construction dominates repeated
    # oracle calls at the same n.
    h = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(n):
            h[i, j] = hadamard_entry(i, j, n)
    return h


def naive_hadamard_apply(x) -> np.ndarray:
    """O(n^2) oracle for the transform: (H x)_i = sum_j H(i, j) x_j."""
    x = as_vector(x)
    return _dense_hadamard(x.shape[0]) @ x


def subsampled_apply(x, rows: RowIndexSet) -> np.ndarray:
    """Gather rows of H x: one full butterfly, then a fancy-index gather.

    Never materializes the subsampled matrix. Does not mutate x.
    """
    x = as_vector(x)
    if rows.n != x.shape[0]:
        raise ValueError(f"row set is for n={rows.n}, vector has n={x.shape[0]}")
    hx = fwht_in_place(x.copy())
    return hx[rows.indices]
