"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`. Statistical criteria use
fixed seeds so the suite is deterministic.
"""

import itertools
import math
import time

import numpy as np
import pytest

from fjlt.cli import main
from fjlt.decomposition import split_heavy_light
from fjlt.estimators import (
    concentration_check,
    cross_term_stats,
    deviation_matrix,
    distortion_stats,
    estimate_e_alpha,
    rip_constant_bruteforce,
)
from fjlt.hadamard import (
    RowIndexSet,
    fwht_in_place,
    hadamard_entry,
    naive_hadamard_apply,
)
from fjlt.reports import parse_report_header
from fjlt.transform import sample_transform


def ok(num, name):
    print(f"ACCEPTANCE {num:02d} {name}: PASS")


def full_selection(n):
    return RowIndexSet(np.arange(n), n)


def median_time(fn, repeats=9):
    fn()  # warm-up
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    times.sort()
    return times[len(times) // 2]


def test_01_fwht_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    for e in range(1, 11):  # n = 2 .. 1024
        n = 2**e
        for _ in range(20):
            x = rng.standard_normal(n)
            fast = fwht_in_place(x.copy())
            slow = naive_hadamard_apply(x)
            scale = np.max(np.abs(slow)) or 1.0
            assert np.max(np.abs(fast - slow)) <= 1e-9 * scale
            twice = fwht_in_place(fast.copy())
            assert np.max(np.abs(twice - n * x)) <= 1e-9 * n * max(np.max(np.abs(x)), 1.0)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"criterion 1 took {elapsed:.1f}s"
    ok(1, f"FWHT vs O(n^2) oracle + involution, n up to 1024 ({elapsed:.1f}s)")


def test_02_transform_oracle_equivalence():
    rng = np.random.default_rng(102)
    pairs = 0
    for n in (8, 16, 32, 64, 128, 256):
        for trial in range(17):
            seed = 1000 * n + trial
            k = int(rng.integers(1, n + 1))
            t = sample_transform(n, k, seed)
            m = t.dense_matrix()
            y = rng.standard_normal(n)
            assert np.allclose(t.apply(y), m @ y, rtol=1e-9, atol=1e-12)
            # commutation Phi D_y b == Phi D_b y through the dense path
            phi = m / t.signs * math.sqrt(k)
            lhs = phi @ (np.diag(y) @ t.signs)
            rhs = phi @ (np.diag(t.signs) @ y)
            assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-12)
            pairs += 1
    assert pairs >= 100
    ok(2, f"apply == dense oracle and commutation identity over {pairs} pairs")


def test_03_unbiasedness():
    n, k, trials = 256, 32, 10**5
    rng = np.random.default_rng(103)
    y = rng.standard_normal(n)
    y /= np.linalg.norm(y)
    vals = np.empty(trials)
    for s in range(trials):
        vals[s] = np.sum(sample_transform(n, k, s).apply(y) ** 2)
    stderr = vals.std(ddof=1) / math.sqrt(trials)
    dev = abs(vals.mean() - 1.0)
    assert dev <= 4 * stderr, f"mean deviates {dev:.2e} > 4*SE {4 * stderr:.2e}"
    ok(3, f"mean ||apply(y)||^2 = {vals.mean():.5f} within 4 SE of 1 over 1e5 seeds")


def test_04_rip_identity_case():
    for n in (8, 16, 32):
        for r in range(1, n + 1):
            rep = rip_constant_bruteforce(full_selection(n), n, r, budget=50, seed=r)
            assert rep.delta_hat <= 1e-9
    ok(4, "full selection gives delta_hat = 0 for all r <= n, n in {8,16,32}")


def test_05_rip_bruteforce_vs_oracle():
    rng = np.random.default_rng(105)
    n, k = 16, 8
    rows = RowIndexSet(rng.integers(0, n, size=k), n)
    rep = rip_constant_bruteforce(rows, k, 2, budget=10**4)
    assert rep.exhaustive and rep.supports_checked == 120

    phi = np.array(
        [[hadamard_entry(int(r), j, n) for j in range(n)] for r in rows.indices], float
    )
    gram = phi.T @ phi / k
    want = max(
        np.abs(np.linalg.eigvalsh(gram[np.ix_(t, t)] - np.eye(2))).max()
        for t in itertools.combinations(range(n), 2)
    )
    assert rep.delta_hat == pytest.approx(want, abs=1e-6)

    deltas = [
        rip_constant_bruteforce(rows, k, r, budget=10**4).delta_hat for r in (1, 2, 3)
    ]
    assert deltas[0] <= deltas[1] + 1e-12 and deltas[1] <= deltas[2] + 1e-12
    ok(5, f"exhaustive RIP matches dense oracle ({want:.6f}); non-decreasing in r")


def test_06_rip_trend_in_k():
    start = time.perf_counter()
    n, r, seeds, budget = 1024, 4, 20, 300
    means = {}
    for k in (128, 512):
        vals = [
            rip_constant_bruteforce(
                sample_transform(n, k, 600 + s).rows, k, r, budget=budget, seed=s
            ).delta_hat
            for s in range(seeds)
        ]
        means[k] = float(np.mean(vals))
    ratio = means[128] / means[512]
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    assert ratio >= 1.5, f"delta_hat ratio k=128/k=512 is {ratio:.2f} < 1.5"
    ok(6, f"mean delta_hat falls by {ratio:.2f}x from k=128 to k=512 ({elapsed:.0f}s)")


def test_07_e_alpha_estimator():
    # full selection -> 0
    est0 = estimate_e_alpha(full_selection(16), 16, 0.5, samples=6, ascent_iters=2)
    assert est0.lower_bound <= 1e-12

    # exhaustive flat +-alpha family oracle at n=16, k=4, alpha=1/2
    n, k, alpha = 16, 4, 0.5
    rows = sample_transform(n, k, 707).rows
    phi = np.array(
        [[hadamard_entry(int(r), j, n) for j in range(n)] for r in rows.indices], float
    )
    gram = phi.T @ phi
    flat_max = 0.0
    for sup in itertools.combinations(range(n), 4):
        for signs in itertools.product((-1.0, 1.0), repeat=3):
            y = np.zeros(n)
            y[list(sup)] = alpha * np.array((1.0,) + signs)
            m = np.outer(y, y) * (np.eye(n) - gram / k)
            flat_max = max(flat_max, np.abs(np.linalg.eigvalsh(m)).max())

    est = estimate_e_alpha(rows, k, alpha, samples=60, ascent_iters=10, seed=0)
    assert est.lower_bound >= 0.9 * flat_max

    small = estimate_e_alpha(rows, k, alpha, samples=20, ascent_iters=10, seed=0)
    assert small.lower_bound <= est.lower_bound  # monotone in sample budget
    ok(7, f"MC bound {est.lower_bound:.4f} >= 0.9 x flat-family max {flat_max:.4f}")


def test_08_e_alpha_trend_in_k():
    n, r, seeds = 512, 16, 10
    alpha = 1.0 / math.sqrt(r)
    means = {}
    for k in (64, 128, 256):
        vals = [
            estimate_e_alpha(
                sample_transform(n, k, 800 + s).rows, k, alpha,
                samples=16, ascent_iters=4, seed=s,
            ).lower_bound
            for s in range(seeds)
        ]
        means[k] = float(np.mean(vals))
    ks = sorted(means)
    assert means[ks[0]] > means[ks[1]] > means[ks[2]]
    slope = np.polyfit(np.log2(ks), np.log2([means[k] for k in ks]), 1)[0]
    assert slope < 0.0
    ok(8, f"mean E_alpha bound decreases in k, log-log slope {slope:.2f} (reported)")


def test_09_distortion_sweep():
    start = time.perf_counter()
    n, count = 1024, 1000
    rng = np.random.default_rng(109)
    ys = rng.standard_normal((count, n))
    ys /= np.linalg.norm(ys, axis=1, keepdims=True)
    max_devs = {}
    for i, k in enumerate((64, 128, 256, 512)):
        t = sample_transform(n, k, 900 + i)
        rep = distortion_stats(t, ys, 0.5)
        max_devs[k] = max(abs(rep.max - 1.0), abs(rep.min - 1.0))
        # success fraction is 1.0 at delta = max observed deviation
        at_max = distortion_stats(t, ys, max_devs[k] + 1e-12)
        assert at_max.success_fraction == 1.0
    devs = [max_devs[k] for k in (64, 128, 256, 512)]
    assert all(a > b for a, b in zip(devs, devs[1:])), devs
    assert devs[-1] <= 0.5
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    table = ", ".join(f"k={k}: {v:.3f}" for k, v in max_devs.items())
    ok(9, f"max|ratio-1| strictly decreasing ({table}) ({elapsed:.0f}s)")


def test_10_cross_term_zero_mean():
    n, k, r, trials = 64, 16, 8, 10**5
    rng = np.random.default_rng(110)
    rows = sample_transform(n, k, 1010).rows
    for i in range(10):
        y = rng.standard_normal(n)
        y /= np.linalg.norm(y)
        split = split_heavy_light(y, r)
        st = cross_term_stats(rows, k, split, trials=trials, seed=2000 + i)
        assert abs(st.mean) <= 4 * st.std / math.sqrt(trials)
    ok(10, "|mean Z| <= 4 std/sqrt(1e5) for 10 random vectors")


def test_11_heavy_light_invariants():
    rng = np.random.default_rng(111)
    checked = 0
    for i in range(10**4):
        n = int(rng.choice([8, 32, 128]))
        r = int(rng.integers(1, n + 1))
        if i % 4 == 0:  # adversarial near-ties
            y = np.full(n, 0.3) + rng.standard_normal(n) * 1e-15
        else:
            y = rng.standard_normal(n)
        y /= np.linalg.norm(y)
        s = split_heavy_light(y, r)
        assert np.array_equal(s.heavy + s.light, y)
        assert np.array_equal(s.heavy**2 + s.light**2, y**2)
        assert not (set(np.flatnonzero(s.heavy)) & set(np.flatnonzero(s.light)))
        assert np.linalg.norm(s.light, np.inf) <= 1.0 / math.sqrt(r) + 1e-12
        checked += 1
    ok(11, f"Pythagoras, disjointness, light-tail bound: 0 violations in {checked} splits")


def test_12_median_rms_concentration():
    n, k, r, trials = 256, 32, 32, 10**4
    rng = np.random.default_rng(112)
    rows = sample_transform(n, k, 1212).rows
    worst_gap = 0.0
    worst_tail = 0.0
    for i in range(20):
        y = rng.standard_normal(n)
        y /= np.linalg.norm(y)
        light = split_heavy_light(y, r).light
        rep = concentration_check(rows, k, light, trials=trials, seed=3000 + i)
        assert rep.normalized_gap <= 3.0
        assert rep.tail_freqs[2] <= 0.05
        worst_gap = max(worst_gap, rep.normalized_gap)
        worst_tail = max(worst_tail, rep.tail_freqs[2])
    ok(12, f"worst |median-RMS|/sigma = {worst_gap:.2f} <= 3; worst 3-sigma tail {worst_tail:.3f}")


def test_13_performance():
    rng = np.random.default_rng(113)
    prev = None
    worst_ratio = 0.0
    for e in range(14, 19):
        n = 2**e
        x = rng.standard_normal(n)
        buf = np.empty_like(x)

        def run():
            np.copyto(buf, x)
            fwht_in_place(buf)

        t = median_time(run)
        if prev is not None:
            worst_ratio = max(worst_ratio, t / prev)
        prev = t
    assert worst_ratio <= 2.6, f"worst doubling ratio {worst_ratio:.2f}"

    n = 2**16
    k = n // 4
    t = sample_transform(n, k, 1313)
    y = rng.standard_normal(n)
    apply_s = median_time(lambda: t.apply(y), repeats=5)
    # dense baseline: time the k x n multiply via a repeated row block
    block = max(1, (1 << 22) // n)
    m = rng.standard_normal((block, n))
    nblocks = math.ceil(k / block)

    def dense():
        for _ in range(nblocks):
            m @ y

    dense_s = median_time(dense, repeats=5)
    speedup = dense_s / apply_s
    assert speedup >= 10.0, f"speedup {speedup:.1f} < 10"
    ok(13, f"doubling ratio <= {worst_ratio:.2f}; {speedup:.0f}x over dense at n=2^16")


def test_14_report_reproducibility(tmp_path):
    cases = [
        ["--seed", "7", "verify", "rip", "--n", "16", "--k", "8", "--r", "2",
         "--budget", "200"],
        ["--seed", "7", "verify", "ealpha", "--n", "32", "--k", "8", "--r", "4",
         "--samples", "6", "--ascent-iters", "2"],
        ["--seed", "7", "verify", "conc", "--n", "64", "--k", "16", "--r", "8",
         "--trials", "500", "--num-vectors", "2"],
    ]
    for i, args in enumerate(cases):
        out1 = tmp_path / f"a{i}.txt"
        out2 = tmp_path / f"b{i}.txt"
        assert main(["--out", str(out1)] + args) == 0
        echoed = parse_report_header(out1)["argv"].split()
        assert main(["--out", str(out2)] + echoed) == 0
        assert out1.read_bytes() == out2.read_bytes()
    ok(14, "verify reports re-run byte-identically from their echoed headers")
