"""Vector dataset storage and generation.

Binary format "FJLV": magic ``FJLV``, version u16, n u32, count u64 (all
little-endian), then count*n little-endian float64 values row-major. The
layout is fixed bit-for-bit so fixtures can be shared across independent
implementations. CSV (%.17g, lossless for float64) is offered for interop.

Side metadata (original dimension for padded sets, transform parameters for
embedded sets) lives in a ``<path>.meta`` key=value sidecar, keeping the
binary format minimal.
"""

import re
import struct

import numpy as np

from fjlt.hadamard import is_power_of_two

__all__ = [
    "generate_dataset",
    "next_power_of_two",
    "pad_dataset",
    "read_dataset",
    "read_dataset_csv",
    "read_meta",
    "write_dataset",
    "write_dataset_csv",
    "write_meta",
]

_MAGIC = b"FJLV"
_VERSION = 1
_HEADER = struct.Struct("<4sHIQ")

KINDS = ("unit-sphere", "sparse", "clustered", "near-duplicate")


def write_dataset(path, data: np.ndarray) -> None:
    data = np.ascontiguousarray(data, dtype="<f8")
    if data.ndim != 2:
        raise ValueError(f"expected a (count, n) array, got shape {data.shape}")
    count, n = data.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(_MAGIC, _VERSION, n, count))
        f.write(data.tobytes())


def read_dataset(path) -> np.ndarray:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, n, count = _HEADER.unpack_from(blob)
    if magic != _MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    payload = blob[_HEADER.size :]
    expected = count * n * 8
    if len(payload) != expected:
        raise ValueError(f"{path}: payload is {len(payload)} bytes, header implies {expected}")
    return np.frombuffer(payload, dtype="<f8").reshape(count, n).copy()


def write_dataset_csv(path, data: np.ndarray) -> None:
    data = np.ascontiguousarray(data, dtype=np.float64)
    np.savetxt(path, data, fmt="%.17g", delimiter=",")


def read_dataset_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return np.ascontiguousarray(data)


def write_meta(path, meta: dict) -> None:
    with open(path, "w") as f:
        for key, value in meta.items():
            f.write(f"{key} = {value}\n")


def read_meta(path) -> dict:
    meta = {}
    with open(path) as f:
        for line in f:
            if "=" in line:
                key, _, value = line.partition("=")
                meta[key.strip()] = value.strip()
    return meta


def next_power_of_two(n: int) -> int:
    return 1 << max(0, n - 1).bit_length() if n > 1 else 1


def pad_dataset(data: np.ndarray) -> tuple[np.ndarray, int]:
    """Zero-pad columns up to the next power of two; norms are untouched."""
    data = np.ascontiguousarray(data, dtype=np.float64)
    count, n = data.shape
    target = next_power_of_two(n)
    if target == n:
        return data, n
    out = np.zeros((count, target), dtype=np.float64)
    out[:, :n] = data
    return out, n


def parse_kind(kind: str) -> tuple[str, int | None]:
    """Accept "unit-sphere", "clustered", "near-duplicate", "sparse", "sparse(r)"."""
    m = re.fullmatch(r"sparse\((\d+)\)", kind)
    if m:
        return "sparse", int(m.group(1))
    if kind in KINDS:
        return kind, None
    raise ValueError(f"unknown dataset kind {kind!r} (choose from {', '.join(KINDS)})")


def generate_dataset(
    kind: str, n: int, count: int, seed: int, sparsity: int | None = None
) -> np.ndarray:
    """Deterministic test corpora on the unit sphere.

    sparse(r): r random nonzeros per vector. clustered: points around a few
    random centers. near-duplicate: consecutive pairs differing by a tiny
    perturbation, for pairwise-distance experiments.
    """
    base_kind, inline_r = parse_kind(kind)
    if inline_r is not None:
        sparsity = inline_r
    if not is_power_of_two(n):
        raise ValueError(f"n={n} is not a power of 2")
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))

    if base_kind == "unit-sphere":
        data = rng.standard_normal((count, n))
    elif base_kind == "sparse":
        if sparsity is None or not (1 <= sparsity <= n):
            raise ValueError("sparse kind needs a sparsity in [1, n]")
        data = np.zeros((count, n))
        for i in range(count):
            support = rng.choice(n, size=sparsity, replace=False)
            data[i, support] = rng.standard_normal(sparsity)
    elif base_kind == "clustered":
        num_clusters = min(8, count)
        centers = rng.standard_normal((num_clusters, n))
        centers /= np.linalg.norm(centers, axis=1, keepdims=True)
        labels = rng.integers(0, num_clusters, size=count)
        data = centers[labels] + 0.1 * rng.standard_normal((count, n))
    else:  # near-duplicate
        base = rng.standard_normal(((count + 1) // 2, n))
        base /= np.linalg.norm(base, axis=1, keepdims=True)
        data = np.empty((count, n))
        data[0::2] = base[: (count + 1) // 2]
        twins = base[: count // 2] + 1e-6 * rng.standard_normal((count // 2, n))
        data[1::2] = twins

    norms = np.linalg.norm(data, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return np.ascontiguousarray(data / norms)
