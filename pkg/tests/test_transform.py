import numpy as np
import pytest

from fjlt.hadamard import RowIndexSet, hadamard_entry
from fjlt.transform import (
    FastJLTransform,
    TransformParams,
    sample_transform,
    sparsity_level,
    target_dimension,
)


class TestParams:
    def test_delta_range_enforced(self):
        TransformParams(n=8, num_points=4, delta=0.5)
        with pytest.raises(ValueError):
            TransformParams(n=8, num_points=4, delta=0.6)
        with pytest.raises(ValueError):
            TransformParams(n=8, num_points=4, delta=0.0)

    def test_n_power_of_two(self):
        with pytest.raises(ValueError):
            TransformParams(n=6, num_points=4, delta=0.5)


class TestTargetDimension:
    def test_tiny_case_clamps(self):
        k, clamped = target_dimension(TransformParams(n=2, num_points=2, delta=0.5))
        assert (k, clamped) == (2, True)

    def test_formula_exceeds_n(self):
        # 16 * 10 * 10^4 = 1.6e6, clamped to n
        k, clamped = target_dimension(TransformParams(n=1024, num_points=1024, delta=0.5))
        assert (k, clamped) == (1024, True)

    def test_small_constant_no_clamp(self):
        k, clamped = target_dimension(
            TransformParams(n=1024, num_points=1024, delta=0.5, c_k=1e-4)
        )
        assert (k, clamped) == (160, False)


class TestSparsityLevel:
    def test_direct_arithmetic(self):
        r, alpha, _ = sparsity_level(TransformParams(n=1024, num_points=1024, delta=0.5))
        assert r == 40
        assert alpha == pytest.approx(1 / np.sqrt(40))

    def test_minimal_point_set(self):
        r, _, _ = sparsity_level(TransformParams(n=1024, num_points=2, delta=0.5))
        assert r == 4

    def test_clamped_to_n(self):
        r, _, clamped = sparsity_level(TransformParams(n=1024, num_points=2**100, delta=0.1))
        assert r == 1024 and clamped  # formula gives 10000


class TestSampling:
    def test_determinism(self):
        a = sample_transform(8, 8, 12345)
        b = sample_transform(8, 8, 12345)
        assert np.array_equal(a.rows.indices, b.rows.indices)
        assert np.array_equal(a.signs, b.signs)

    def test_domain_tiny(self):
        for seed in range(20):
            t = sample_transform(2, 1, seed)
            assert t.rows.indices[0] in (0, 1)
            assert set(np.unique(t.signs)) <= {-1.0, 1.0}

    def test_row_frequencies_near_uniform(self):
        # aggregate row draws over many seeds; each count within 5 sigma of uniform
        n, k, draws = 1024, 64, 10**4
        counts = np.zeros(n)
        for seed in range(draws // 100):
            t = sample_transform(n, k, seed)
            np.add.at(counts, t.rows.indices, 1)
        total = counts.sum()
        expected = total / n
        sigma = np.sqrt(total * (1 / n) * (1 - 1 / n))
        assert np.max(np.abs(counts - expected)) <= 5 * sigma

    def test_without_replacement_mode(self):
        t = sample_transform(64, 64, 0, mode="without_replacement")
        assert len(set(t.rows.indices.tolist())) == 64

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            sample_transform(8, 9, 0)
        with pytest.raises(ValueError):
            sample_transform(8, 0, 0)


class TestApply:
    def test_zero_maps_to_zero(self):
        t = sample_transform(16, 4, 0)
        assert np.array_equal(t.apply(np.zeros(16)), np.zeros(4))

    def test_full_selection_preserves_norm(self):
        n = 64
        rng = np.random.default_rng(0)
        signs = rng.integers(0, 2, n) * 2.0 - 1.0
        t = FastJLTransform(
            n=n, k=n, rows=RowIndexSet(np.arange(n), n), signs=signs, seed=0
        )
        y = rng.standard_normal(n)
        assert np.isclose(np.linalg.norm(t.apply(y)), np.linalg.norm(y), rtol=1e-9)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(1)
        t = sample_transform(128, 16, 5)
        m = t.dense_matrix()
        for _ in range(10):
            y = rng.standard_normal(128)
            assert np.allclose(t.apply(y), m @ y, rtol=1e-9, atol=1e-12)

    def test_commutation_identity(self):
        # Phi D_y b == Phi D_b y, checked through the dense materialization
        rng = np.random.default_rng(2)
        n, k = 256, 32
        t = sample_transform(n, k, 9)
        y = rng.standard_normal(n)
        m = t.dense_matrix()  # (1/sqrt(k)) Phi D_b
        phi = m / t.signs * np.sqrt(k)  # unscaled, unsigned Phi
        lhs = phi @ (np.diag(y) @ t.signs)
        rhs = phi @ (np.diag(t.signs) @ y)
        assert np.allclose(lhs, rhs, rtol=1e-9)
        assert np.allclose(t.apply(y), phi @ (y * t.signs) / np.sqrt(k), rtol=1e-9)

    def test_dimension_mismatch(self):
        t = sample_transform(16, 4, 0)
        with pytest.raises(ValueError):
            t.apply(np.zeros(8))


class TestApplyBatch:
    def test_empty(self):
        t = sample_transform(8, 2, 0)
        assert t.apply_batch([]) == []

    def test_singleton(self):
        t = sample_transform(8, 2, 0)
        y = np.arange(8, dtype=float)
        (out,) = t.apply_batch([y])
        assert np.array_equal(out, t.apply(y))

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(3)
        t = sample_transform(32, 8, 1)
        ys = [rng.standard_normal(32) for _ in range(6)]
        perm = [4, 0, 5, 2, 1, 3]
        direct = t.apply_batch([ys[i] for i in perm])
        shuffled = [t.apply_batch(ys)[i] for i in perm]
        for a, b in zip(direct, shuffled):
            assert np.array_equal(a, b)

    def test_names_offending_index(self):
        t = sample_transform(8, 2, 0)
        with pytest.raises(ValueError, match="element 1"):
            t.apply_batch([np.zeros(8), np.zeros(4)])


class TestDenseMatrix:
    def test_tiny_explicit(self):
        t = FastJLTransform(
            n=2, k=2, rows=RowIndexSet(np.array([0, 1]), 2),
            signs=np.array([1.0, 1.0]), seed=0,
        )
        want = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
        assert np.allclose(t.dense_matrix(), want)

    def test_column_norms(self):
        # each column of the unscaled, unsigned Phi has Euclidean norm sqrt(k)
        t = sample_transform(64, 16, 3)
        phi = t.dense_matrix() / t.signs * np.sqrt(t.k)
        assert np.allclose(np.linalg.norm(phi, axis=0), np.sqrt(t.k))

    def test_cap_enforced(self):
        t = sample_transform(64, 4, 0)
        with pytest.raises(MemoryError):
            t.dense_matrix(max_n=32)


class TestUnbiasedness:
    def test_mean_squared_norm_near_one(self):
        # smaller version of the full acceptance run
        rng = np.random.default_rng(4)
        y = rng.standard_normal(64)
        y /= np.linalg.norm(y)
        vals = np.array(
            [np.sum(sample_transform(64, 8, s).apply(y) ** 2) for s in range(4000)]
        )
        stderr = vals.std(ddof=1) / np.sqrt(len(vals))
        assert abs(vals.mean() - 1.0) <= 4 * stderr


class TestSerialization:
    def test_round_trip(self, tmp_path):
        t = sample_transform(64, 16, 99, mode="without_replacement")
        path = tmp_path / "t.fjlt"
        t.save(path)
        u = FastJLTransform.load(path)
        assert (u.n, u.k, u.seed, u.mode) == (t.n, t.k, t.seed, t.mode)
        assert np.array_equal(u.rows.indices, t.rows.indices)
        assert np.array_equal(u.signs, t.signs)

    def test_bad_magic(self):
        with pytest.raises(ValueError):
            FastJLTransform.from_bytes(b"XXXX" + bytes(19))
