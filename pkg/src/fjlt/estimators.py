"""Empirical estimators for the isometry properties of subsampled Hadamard maps.

Three quantities are estimated for a fixed row sample Phi:

* the restricted-isometry constant at sparsity r (brute force over supports),
* the deviation supremum sup_{y in B2 ∩ alpha*Binf} ||D_y^2 - (1/k) D_y G D_y||
  with G = Phi^t Phi (honest lower bound: sampling + hill climbing),
* concentration statistics (median vs RMS, tail frequencies) and the
  heavy/light cross term of the embedded norm.

Gram products never materialize Phi: G(i, j) = c(i XOR j) where c is the
Hadamard transform of the row histogram, and matrix-free products use two
butterflies per application.
"""

from dataclasses import dataclass
import math
from typing import Callable, NamedTuple

import numpy as np

from fjlt.decomposition import HeavyLightSplit
from fjlt.hadamard import (
    RowIndexSet,
    as_vector,
    fwht_batch_in_place,
    fwht_in_place,
)
from fjlt.transform import FastJLTransform

__all__ = [
    "ConcentrationReport",
    "CrossTermStats",
    "DistortionReport",
    "EAlphaEstimate",
    "RipReport",
    "SpectralNormResult",
    "concentration_check",
    "cross_term_stats",
    "deviation_matrix",
    "distortion_stats",
    "estimate_e_alpha",
    "gram_vector",
    "rip_constant_bruteforce",
    "spectral_norm",
]


# ---------------------------------------------------------------------------
# spectral norm

class SpectralNormResult(NamedTuple):
    value: float
    converged: bool
    iterations: int


def _power_norm(
    matvec: Callable[[np.ndarray], np.ndarray],
    n: int,
    tol: float,
    max_iters: int,
    rng: np.random.Generator,
) -> SpectralNormResult:
    """Largest |eigenvalue| of a symmetric operator via power iteration on M^2.

    Iterating on the square avoids shift tuning for sign-indefinite matrices;
    the estimate is sqrt of the Rayleigh quotient of M^2, i.e. ||M v||.
    """
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for it in range(1, max_iters + 1):
        mv = matvec(v)
        norm_mv = np.linalg.norm(mv)
        if norm_mv == 0.0:
            return SpectralNormResult(0.0, True, it)
        w = matvec(mv)
        new = norm_mv  # ||M v|| with ||v|| = 1
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return SpectralNormResult(new, True, it)
        v = w / norm_w
        if abs(new - estimate) <= tol * max(new, 1e-300):
            return SpectralNormResult(new, True, it)
        estimate = new
    return SpectralNormResult(estimate, False, max_iters)


def spectral_norm(
    m: np.ndarray, tol: float = 1e-10, max_iters: int = 2000, seed: int = 0
) -> SpectralNormResult:
    """Spectral norm of a symmetric matrix (largest absolute eigenvalue)."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = np.max(np.abs(m)) if m.size else 0.0
    if not np.allclose(m, m.T, atol=1e-9 * max(scale, 1.0)):
        raise ValueError("matrix is not symmetric within 1e-9")
    rng = np.random.Generator(np.random.PCG64(seed))
    return _power_norm(lambda v: m @ v, m.shape[0], tol, max_iters, rng)


# ---------------------------------------------------------------------------
# Gram machinery for Phi^t Phi

def gram_vector(rows: RowIndexSet) -> np.ndarray:
    """c with (Phi^t Phi)(i, j) = c(i XOR j), via one butterfly on the row histogram.

    Follows from H(w,i) H(w,j) = H(w, i XOR j).
    """
    hist = np.bincount(rows.indices, minlength=rows.n).astype(np.float64)
    return fwht_in_place(hist)


def _phi_apply(x: np.ndarray, rows: RowIndexSet) -> np.ndarray:
    hx = x.copy()
    fwht_in_place(hx)
    return hx[rows.indices]


def _phi_t_apply(w: np.ndarray, rows: RowIndexSet) -> np.ndarray:
    s = np.zeros(rows.n)
    np.add.at(s, rows.indices, w)
    fwht_in_place(s)
    return s


def _gram_apply(u: np.ndarray, rows: RowIndexSet) -> np.ndarray:
    """(Phi^t Phi) u with two butterflies; exact, never materializes Phi."""
    return _phi_t_apply(_phi_apply(u, rows), rows)


def deviation_matrix(phi_rows: RowIndexSet, y, k: int) -> np.ndarray:
    """Dense D_y^2 - (1/k) D_y Phi^t Phi D_y.

    Direct entry formula (vectorized popcount) up to n=512, the XOR/butterfly
    identity beyond.
    """
    y = as_vector(y)
    n = phi_rows.n
    if y.shape[0] != n:
        raise ValueError(f"vector has length {y.shape[0]}, rows expect n={n}")
    if k != phi_rows.k:
        raise ValueError(f"k={k} does not match |rows|={phi_rows.k}")
    idx = np.arange(n, dtype=np.int64)
    if n <= 512:
        parities = np.bitwise_count(np.bitwise_and.outer(phi_rows.indices, idx)) & 1
        phi = 1.0 - 2.0 * parities.astype(np.float64)
        gram = phi.T @ phi
    else:
        c = gram_vector(phi_rows)
        gram = c[np.bitwise_xor.outer(idx, idx)]
    return np.outer(y, y) * (np.eye(n) - gram / k)


# ---------------------------------------------------------------------------
# restricted isometry brute force

@dataclass(frozen=True)
class RipReport:
    r: int
    delta_hat: float
    witness_support: tuple
    supports_checked: int
    exhaustive: bool


def _support_deviation(c: np.ndarray, support: np.ndarray, k: int) -> np.ndarray:
    sub = c[np.bitwise_xor.outer(support, support)] / k
    return sub - np.eye(support.shape[0])


def rip_constant_bruteforce(
    phi_rows: RowIndexSet, k: int, r: int, budget: int, seed: int = 0
) -> RipReport:
    """max over supports |T| <= r of ||id_T - (1/k) id_T Phi^t Phi id_T||.

    Enumerates all supports of size r when C(n, r) fits the budget, else
    samples the budget's worth of distinct supports uniformly (seeded) and
    marks the report non-exhaustive.
    """
    n = phi_rows.n
    if not (1 <= r <= n):
        raise ValueError(f"r={r} outside [1, {n}]")
    if k != phi_rows.k:
        raise ValueError(f"k={k} does not match |rows|={phi_rows.k}")
    if budget < 1:
        raise ValueError("budget must be positive")

    c = gram_vector(phi_rows)
    total = math.comb(n, r)
    if total <= budget:
        from itertools import combinations

        supports = combinations(range(n), r)
        exhaustive = True
    else:
        rng = np.random.Generator(np.random.PCG64(seed))
        seen = set()
        while len(seen) < budget:
            seen.add(tuple(sorted(rng.choice(n, size=r, replace=False).tolist())))
        supports = sorted(seen)
        exhaustive = False

    best = -1.0
    witness = None
    checked = 0
    for t in supports:
        support = np.asarray(t, dtype=np.int64)
        dev = _support_deviation(c, support, k)
        val = spectral_norm(dev).value
        checked += 1
        if val > best:
            best = val
            witness = t
    return RipReport(
        r=r,
        delta_hat=best,
        witness_support=tuple(witness),
        supports_checked=checked,
        exhaustive=exhaustive,
    )


# ---------------------------------------------------------------------------
# deviation supremum E_alpha

@dataclass(frozen=True)
class EAlphaEstimate:
    alpha: float
    lower_bound: float
    witness: np.ndarray
    samples: int
    ascent_iters: int


def _project_feasible(y: np.ndarray, alpha: float) -> np.ndarray:
    """Nearest-enough feasible point of B2 ∩ alpha*Binf: clip, then rescale."""
    y = np.clip(y, -alpha, alpha)
    norm = np.linalg.norm(y)
    if norm > 1.0:
        y = y / norm
    return y


def deviation_objective(
    phi_rows: RowIndexSet, k: int, y: np.ndarray
) -> tuple[float, np.ndarray]:
    """||D_y^2 - (1/k) D_y Phi^t Phi D_y|| and the extremal unit vector.

    Matrix-free and deterministic: the power-iteration start is drawn from a
    fixed stream, so re-evaluating a witness reproduces its value.
    """

    def matvec(v):
        u = y * v
        return y * (u - _gram_apply(u, phi_rows) / k)

    rng = np.random.Generator(np.random.PCG64(0x0E57))
    n = phi_rows.n
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    vec = v
    for _ in range(500):
        mv = matvec(v)
        norm_mv = np.linalg.norm(mv)
        if norm_mv == 0.0:
            return 0.0, v
        w = matvec(mv)
        norm_w = np.linalg.norm(w)
        vec = v
        if norm_w == 0.0:
            return norm_mv, v
        v = w / norm_w
        if abs(norm_mv - estimate) <= 1e-12 * max(norm_mv, 1e-300):
            return norm_mv, vec
        estimate = norm_mv
    return estimate, vec


def _gradient_ascent(
    phi_rows: RowIndexSet,
    k: int,
    alpha: float,
    y: np.ndarray,
    val: float,
    vec: np.ndarray,
    iters: int,
) -> tuple[np.ndarray, float]:
    """Projected gradient ascent on the deviation objective; improvements only."""
    step = 0.25 * alpha
    for _ in range(iters):
        u = y * vec
        au = u - _gram_apply(u, phi_rows) / k
        sign = 1.0 if float(u @ au) >= 0.0 else -1.0
        grad = 2.0 * sign * vec * au
        gnorm = np.linalg.norm(grad)
        if gnorm == 0.0:
            break
        cand = _project_feasible(y + step * grad / gnorm, alpha)
        cval, cvec = deviation_objective(phi_rows, k, cand)
        if cval > val:
            y, val, vec = cand, cval, cvec
            step *= 1.5
        else:
            step *= 0.5
    return y, val


def _flat_hill_climb(
    phi_rows: RowIndexSet,
    k: int,
    y: np.ndarray,
    val: float,
    iters: int,
    rng: np.random.Generator,
    moves_per_iter: int = 24,
) -> tuple[np.ndarray, float]:
    """Local search within the flat family: support swaps and sign flips.

    Proposals are drawn from the candidate's own stream, so the trajectory
    for a smaller iteration budget is a prefix of a larger one.
    """
    n = phi_rows.n
    support = np.flatnonzero(y)
    if support.shape[0] == 0 or support.shape[0] == n:
        return y, val
    mag = np.abs(y[support[0]])
    outside = np.setdiff1d(np.arange(n), support)
    for _ in range(iters):
        improved = False
        for _ in range(moves_per_iter):
            cand = y.copy()
            if rng.random() < 0.5 and outside.shape[0] > 0:
                src = support[rng.integers(support.shape[0])]
                dst = outside[rng.integers(outside.shape[0])]
                cand[dst] = mag * (rng.integers(0, 2) * 2.0 - 1.0)
                cand[src] = 0.0
            else:
                pos = support[rng.integers(support.shape[0])]
                cand[pos] = -cand[pos]
            cval, _ = deviation_objective(phi_rows, k, cand)
            if cval > val:
                y, val = cand, cval
                support = np.flatnonzero(y)
                outside = np.setdiff1d(np.arange(n), support)
                improved = True
        if not improved:
            break
    return y, val


def estimate_e_alpha(
    phi_rows: RowIndexSet,
    k: int,
    alpha: float,
    samples: int,
    ascent_iters: int,
    seed: int = 0,
) -> EAlphaEstimate:
    """Lower-bound the deviation supremum over B2 ∩ alpha*Binf for this Phi.

    Candidates alternate between random feasible points and flat vectors
    with ceil(1/alpha^2) coordinates of equal magnitude (extreme points of
    the feasible set). Random points are refined by projected gradient
    ascent, flat points by a hill climb over support swaps and sign flips;
    both accept only improvements. Per-candidate randomness is keyed by
    (seed, index), so growing the sample or ascent budget never lowers the
    returned bound.
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha={alpha} outside (0, 1]")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if k != phi_rows.k:
        raise ValueError(f"k={k} does not match |rows|={phi_rows.k}")

    n = phi_rows.n
    flat_support = min(n, math.ceil(1.0 / alpha**2))
    flat_mag = min(alpha, 1.0 / math.sqrt(flat_support))

    best = -1.0
    best_witness = None
    for i in range(samples):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, i))))
        if i % 2 == 0:
            y = _project_feasible(rng.standard_normal(n), alpha)
            val, vec = deviation_objective(phi_rows, k, y)
            y, val = _gradient_ascent(phi_rows, k, alpha, y, val, vec, ascent_iters)
        else:
            y = np.zeros(n)
            support = rng.choice(n, size=flat_support, replace=False)
            y[support] = flat_mag * (rng.integers(0, 2, size=flat_support) * 2.0 - 1.0)
            val, _ = deviation_objective(phi_rows, k, y)
            y, val = _flat_hill_climb(phi_rows, k, y, val, ascent_iters, rng)
        if val > best:
            best = val
            best_witness = y
    return EAlphaEstimate(
        alpha=alpha,
        lower_bound=best,
        witness=best_witness,
        samples=samples,
        ascent_iters=ascent_iters,
    )


# ---------------------------------------------------------------------------
# distortion over a point set

@dataclass(frozen=True)
class DistortionReport:
    ratios: np.ndarray
    min: float
    max: float
    mean: float
    success_fraction: float
    delta: float
    skipped: tuple


def distortion_stats(t: FastJLTransform, ys, delta: float) -> DistortionReport:
    """Per-vector ||t(y)||^2 / ||y||^2 with extremes and the within-delta rate.

    Zero vectors are skipped (ratio undefined) and their indices reported.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    mat = np.ascontiguousarray(ys, dtype=np.float64)
    if mat.ndim == 1:
        mat = mat[None, :]
    norms2 = np.einsum("ij,ij->i", mat, mat)
    keep = norms2 > 0.0
    skipped = tuple(np.flatnonzero(~keep).tolist())
    kept = mat[keep]
    if kept.shape[0] == 0:
        raise ValueError("no nonzero vectors to measure")
    emb = t.apply_matrix(kept)
    ratios = np.einsum("ij,ij->i", emb, emb) / norms2[keep]
    within = np.mean((ratios >= 1.0 - delta) & (ratios <= 1.0 + delta))
    return DistortionReport(
        ratios=ratios,
        min=float(ratios.min()),
        max=float(ratios.max()),
        mean=float(ratios.mean()),
        success_fraction=float(within),
        delta=delta,
        skipped=skipped,
    )


# ---------------------------------------------------------------------------
# cross term and concentration

class CrossTermStats(NamedTuple):
    mean: float
    std: float
    trials: int


def cross_term_stats(
    phi_rows: RowIndexSet,
    k: int,
    split: HeavyLightSplit,
    trials: int,
    seed: int = 0,
    chunk: int = 4096,
) -> CrossTermStats:
    """Monte-Carlo mean/std of Z = (1/k) b^t D_heavy Phi^t Phi D_light b.

    Z is computed per sign draw as the inner product of the two subsampled
    transforms, (Phi(heavy*b)) . (Phi(light*b)) / k.
    """
    if trials < 2:
        raise ValueError("need at least 2 trials")
    if k != phi_rows.k:
        raise ValueError(f"k={k} does not match |rows|={phi_rows.k}")
    n = phi_rows.n
    if split.heavy.shape[0] != n:
        raise ValueError("split dimension does not match rows")
    rng = np.random.Generator(np.random.PCG64(seed))
    zs = np.empty(trials)
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        b = rng.integers(0, 2, size=(m, n)).astype(np.float64) * 2.0 - 1.0
        u = np.ascontiguousarray(b * split.heavy)
        v = np.ascontiguousarray(b * split.light)
        fwht_batch_in_place(u)
        fwht_batch_in_place(v)
        u = u[:, phi_rows.indices]
        v = v[:, phi_rows.indices]
        zs[done : done + m] = np.einsum("ij,ij->i", u, v) / k
        done += m
    return CrossTermStats(mean=float(zs.mean()), std=float(zs.std(ddof=1)), trials=trials)


@dataclass(frozen=True)
class ConcentrationReport:
    median_hat: float
    rms_hat: float
    sigma_hat: float
    normalized_gap: float
    tail_freqs: tuple
    trials: int
    cross_mean: float | None = None
    cross_std: float | None = None


def operator_norm_scaled_phi_diag(
    phi_rows: RowIndexSet, k: int, y: np.ndarray
) -> float:
    """||(1/sqrt(k)) Phi D_y||, via power iteration on (1/k) D_y Phi^t Phi D_y."""

    def matvec(v):
        return y * _gram_apply(y * v, phi_rows) / k

    rng = np.random.Generator(np.random.PCG64(0x51))
    res = _power_norm(matvec, phi_rows.n, 1e-12, 1000, rng)
    return math.sqrt(res.value)


def concentration_check(
    phi_rows: RowIndexSet,
    k: int,
    light,
    trials: int,
    seed: int = 0,
    chunk: int = 4096,
) -> ConcentrationReport:
    """Sample X = ||(1/sqrt(k)) Phi D_light b|| over fresh sign vectors.

    Reports empirical median and RMS, the exact operator norm sigma of
    (1/sqrt(k)) Phi D_light, the sigma-normalized median-RMS gap, and tail
    exceedance frequencies at median + {1, 2, 3} sigma.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    if k != phi_rows.k:
        raise ValueError(f"k={k} does not match |rows|={phi_rows.k}")
    light = as_vector(light)
    n = phi_rows.n
    if light.shape[0] != n:
        raise ValueError("light vector dimension does not match rows")

    rng = np.random.Generator(np.random.PCG64(seed))
    xs = np.empty(trials)
    done = 0
    scale = 1.0 / math.sqrt(k)
    while done < trials:
        m = min(chunk, trials - done)
        b = rng.integers(0, 2, size=(m, n)).astype(np.float64) * 2.0 - 1.0
        u = np.ascontiguousarray(b * light)
        fwht_batch_in_place(u)
        xs[done : done + m] = scale * np.linalg.norm(u[:, phi_rows.indices], axis=1)
        done += m

    median = float(np.median(xs))
    rms = float(np.sqrt(np.mean(xs**2)))
    sigma = operator_norm_scaled_phi_diag(phi_rows, k, light)
    gap = 0.0 if sigma == 0.0 else abs(median - rms) / sigma
    tails = tuple(float(np.mean(xs > median + t * sigma)) for t in (1.0, 2.0, 3.0))
    return ConcentrationReport(
        median_hat=median,
        rms_hat=rms,
        sigma_hat=sigma,
        normalized_gap=gap,
        tail_freqs=tails,
        trials=trials,
    )
