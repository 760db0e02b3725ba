"""The fast Johnson-Lindenstrauss transform y -> (1/sqrt(k)) * Phi * diag(b) * y.

Phi is k rows sampled from the unnormalized Hadamard matrix and b a uniform
sign vector. Both are reconstructed deterministically from (n, k, seed) via
numpy's PCG64 generator, which has a fixed, platform-independent stream; the
generator identity is pinned in the serialization header so stored transforms
stay reproducible.

Parameter formulas use base-2 logarithms with explicit leading constants
(c_k, c_r) since the underlying asymptotics fix only the growth rates.
"""

from dataclasses import dataclass
import math
import struct
from typing import NamedTuple, Sequence

import numpy as np

from fjlt.hadamard import (
    RowIndexSet,
    as_vector,
    fwht_batch_in_place,
    hadamard_entry,
    is_power_of_two,
    subsampled_apply,
)

__all__ = [
    "FastJLTransform",
    "TargetDimension",
    "SparsityLevel",
    "TransformParams",
    "sample_transform",
    "sparsity_level",
    "target_dimension",
]

_MAGIC = b"FJLT"
_VERSION = 1
_MODES = {"with_replacement": 0, "without_replacement": 1}
_MODE_NAMES = {v: k for k, v in _MODES.items()}


@dataclass(frozen=True)
class TransformParams:
    """Problem-level knobs: ambient n, point count, distortion, constants."""

    n: int
    num_points: int
    delta: float
    c_k: float = 1.0
    c_r: float = 1.0

    def __post_init__(self):
        if not is_power_of_two(self.n):
            raise ValueError(f"n={self.n} is not a power of 2")
        if self.num_points < 2:
            raise ValueError("need at least 2 points")
        if not (0.0 < self.delta <= 0.5):
            raise ValueError(f"delta={self.delta} outside (0, 1/2]")
        if self.c_k <= 0 or self.c_r <= 0:
            raise ValueError("leading constants must be positive")


class TargetDimension(NamedTuple):
    k: int
    clamped: bool


class SparsityLevel(NamedTuple):
    r: int
    alpha: float
    clamped: bool


def target_dimension(params: TransformParams) -> TargetDimension:
    """k = ceil(c_k * delta^-4 * log2(N) * log2(n)^4), clamped into [1, n].

    The clamped flag reports when the formula exceeded n, so experiments can
    detect the regime where the asymptotic prescription is vacuous.
    """
    raw = params.c_k * params.delta ** -4 * math.log2(params.num_points) * math.log2(params.n) ** 4
    k = math.ceil(raw)
    if k < 1:
        return TargetDimension(1, False)
    if k > params.n:
        return TargetDimension(params.n, True)
    return TargetDimension(k, False)


def sparsity_level(params: TransformParams) -> SparsityLevel:
    """r = ceil(c_r * delta^-2 * log2(N)), clamped into [1, n]; alpha = 1/sqrt(r)."""
    raw = params.c_r * params.delta ** -2 * math.log2(params.num_points)
    r = math.ceil(raw)
    clamped = False
    if r < 1:
        r = 1
    if r > params.n:
        r = params.n
        clamped = True
    return SparsityLevel(r, 1.0 / math.sqrt(r), clamped)


@dataclass(frozen=True)
class FastJLTransform:
    """Immutable sampled transform; reconstructible from (n, k, seed, mode)."""

    n: int
    k: int
    rows: RowIndexSet
    signs: np.ndarray
    seed: int
    mode: str = "with_replacement"

    def __post_init__(self):
        signs = np.ascontiguousarray(self.signs, dtype=np.float64)
        object.__setattr__(self, "signs", signs)
        if self.rows.n != self.n or signs.shape[0] != self.n:
            raise ValueError("rows/signs dimension mismatch")
        if not (1 <= self.k <= self.n) or self.rows.k != self.k:
            raise ValueError(f"k={self.k} outside [1, n={self.n}]")
        if not np.all(np.abs(signs) == 1.0):
            raise ValueError("sign pattern entries must be exactly +-1")
        if self.mode not in _MODES:
            raise ValueError(f"unknown sampling mode {self.mode!r}")

    @property
    def scale(self) -> float:
        return 1.0 / math.sqrt(self.k)

    def apply(self, y) -> np.ndarray:
        """(1/sqrt(k)) * Phi * (signs ⊙ y); O(n log n) regardless of k."""
        y = as_vector(y)
        if y.shape[0] != self.n:
            raise ValueError(f"vector has length {y.shape[0]}, transform expects {self.n}")
        return self.scale * subsampled_apply(self.signs * y, self.rows)

    def apply_batch(self, ys: Sequence) -> list[np.ndarray]:
        """Elementwise apply; output order is positional."""
        vecs = []
        for i, y in enumerate(ys):
            try:
                vecs.append(as_vector(y))
            except ValueError as exc:
                raise ValueError(f"batch element {i}: {exc}") from exc
            if vecs[-1].shape[0] != self.n:
                raise ValueError(
                    f"batch element {i} has length {vecs[-1].shape[0]}, expected {self.n}"
                )
        if not vecs:
            return []
        buf = np.ascontiguousarray(np.stack(vecs) * self.signs)
        fwht_batch_in_place(buf)
        out = self.scale * buf[:, self.rows.indices]
        return [out[i] for i in range(out.shape[0])]

    def apply_matrix(self, ys: np.ndarray) -> np.ndarray:
        """Batch apply on a (count, n) array, returning (count, k)."""
        ys = np.ascontiguousarray(ys, dtype=np.float64)
        if ys.ndim != 2 or ys.shape[1] != self.n:
            raise ValueError(f"expected shape (count, {self.n}), got {ys.shape}")
        buf = np.ascontiguousarray(ys * self.signs)
        fwht_batch_in_place(buf)
        return self.scale * buf[:, self.rows.indices]

    def dense_matrix(self, max_n: int = 4096) -> np.ndarray:
        """Materialize (1/sqrt(k)) * Phi * diag(signs) from entry evaluations.

        Oracle path only: shares nothing with the butterfly. Guarded by a
        dimension cap to bound memory.
        """
        if self.n > max_n:
            raise MemoryError(f"n={self.n} exceeds dense materialization cap {max_n}")
        m = np.empty((self.k, self.n), dtype=np.float64)
        for i, row in enumerate(self.rows.indices):
            r = int(row)
            m[i] = [hadamard_entry(r, j, self.n) for j in range(self.n)]
        return self.scale * m * self.signs

    def to_bytes(self) -> bytes:
        return struct.pack(
            "<4sHIIQB", _MAGIC, _VERSION, self.n, self.k, self.seed, _MODES[self.mode]
        )

    def save(self, path) -> None:
        with open(path, "wb") as f:
            f.write(self.to_bytes())

    @classmethod
    def from_bytes(cls, blob: bytes) -> "FastJLTransform":
        magic, version, n, k, seed, mode = struct.unpack("<4sHIIQB", blob[:23])
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {_MAGIC!r}")
        if version != _VERSION:
            raise ValueError(f"unsupported transform format version {version}")
        return sample_transform(n, k, seed, mode=_MODE_NAMES[mode])

    @classmethod
    def load(cls, path) -> "FastJLTransform":
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())


def sample_transform(
    n: int, k: int, seed: int, mode: str = "with_replacement"
) -> FastJLTransform:
    """Draw rows (uniform over [0, n), i.i.d. with replacement by default)
    and a uniform sign pattern from a PCG64 stream keyed by seed.

    Draw order is fixed (rows first, then signs) and is part of the
    reproducibility contract.
    """
    if not is_power_of_two(n):
        raise ValueError(f"n={n} is not a power of 2")
    if not (1 <= k <= n):
        raise ValueError(f"k={k} outside [1, n={n}]")
    if mode not in _MODES:
        raise ValueError(f"unknown sampling mode {mode!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    if mode == "with_replacement":
        rows = rng.integers(0, n, size=k, dtype=np.int64)
    else:
        rows = rng.choice(n, size=k, replace=False).astype(np.int64)
    signs = rng.integers(0, 2, size=n).astype(np.float64) * 2.0 - 1.0
    return FastJLTransform(
        n=n, k=k, rows=RowIndexSet(rows, n), signs=signs, seed=seed, mode=mode
    )
