import numpy as np
import pytest

from xlmap import vecmath

from helpers import random_orthogonal


class TestNormalize:
    def test_two_row_example(self):
        """Worked example: (3,0),(0,4) ends at (+-sqrt2/2) after the three steps."""
        m = np.array([[3.0, 0.0], [0.0, 4.0]], dtype=np.float32)
        step1 = vecmath.length_normalize(m)
        np.testing.assert_allclose(step1, [[1, 0], [0, 1]], atol=1e-7)
        step2 = vecmath.mean_center(step1)
        np.testing.assert_allclose(step2, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-7)
        out = vecmath.normalize(m)
        r = np.sqrt(2) / 2
        np.testing.assert_allclose(out, [[r, -r], [-r, r]], atol=1e-6)

    def test_unit_norms_and_centered_intermediate(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(2, 200))
            d = int(rng.integers(2, 60))
            m = rng.standard_normal((n, d)).astype(np.float32)
            out = vecmath.normalize(m)
            np.testing.assert_allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-6)
            centered = vecmath.mean_center(vecmath.length_normalize(m))
            np.testing.assert_allclose(centered.mean(axis=0), 0.0, atol=1e-6)

    def test_input_not_modified(self):
        m = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32)
        before = m.copy()
        vecmath.normalize(m)
        np.testing.assert_array_equal(m, before)

    def test_zero_row_rejected(self):
        with pytest.raises(ValueError):
            vecmath.length_normalize(np.array([[0.0, 0.0], [1.0, 0.0]]))

    def test_single_row_degenerates(self):
        with pytest.raises(ValueError):
            vecmath.normalize(np.array([[1.0, 2.0, 3.0]]))


class TestSvd:
    def test_identity(self):
        res = vecmath.svd(np.eye(3))
        np.testing.assert_allclose(res.s, [1, 1, 1], atol=1e-12)

    def test_diagonal(self):
        res = vecmath.svd(np.diag([3.0, 2.0]))
        np.testing.assert_allclose(res.s, [3, 2], atol=1e-12)
        np.testing.assert_allclose(np.abs(res.u), np.eye(2), atol=1e-12)
        np.testing.assert_allclose(np.abs(res.vt), np.eye(2), atol=1e-12)

    def test_reconstruction_and_orthogonality(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            m = rng.standard_normal((10, 4))
            res = vecmath.svd(m)
            recon = res.u @ np.diag(res.s) @ res.vt
            rel = np.linalg.norm(recon - m) / np.linalg.norm(m)
            assert rel <= 1e-3
            np.testing.assert_allclose(res.u.T @ res.u, np.eye(4), atol=1e-4)
            np.testing.assert_allclose(res.vt @ res.vt.T, np.eye(4), atol=1e-4)
            assert np.all(np.diff(res.s) <= 0)

    def test_deterministic_signs(self):
        rng = np.random.default_rng(2)
        m = rng.standard_normal((8, 5))
        a = vecmath.svd(m)
        b = vecmath.svd(m.copy())
        np.testing.assert_array_equal(a.u, b.u)
        np.testing.assert_array_equal(a.vt, b.vt)
        # largest-magnitude component of each u column is nonnegative
        top = a.u[np.abs(a.u).argmax(axis=0), np.arange(a.u.shape[1])]
        assert np.all(top >= 0)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            vecmath.svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


class TestSimilarityBlock:
    def test_orthonormal_rows_identity(self):
        rng = np.random.default_rng(3)
        q = random_orthogonal(6, rng)
        out = vecmath.similarity_block(q, q, (0, 6))
        np.testing.assert_allclose(out, np.eye(6), atol=1e-6)

    def test_unit_rows_bounded(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal((20, 7))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        out = vecmath.similarity_block(a, a, (0, 20))
        assert out.min() >= -1 - 1e-6 and out.max() <= 1 + 1e-6

    def test_matches_naive_slice(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((5, 3)).astype(np.float32)
        b = rng.standard_normal((4, 3)).astype(np.float32)
        out = vecmath.similarity_block(a, b, (1, 3))
        naive = a.astype(np.float64) @ b.astype(np.float64).T
        np.testing.assert_allclose(out, naive[1:3], atol=1e-5)

    def test_errors(self):
        a = np.ones((3, 2), dtype=np.float32)
        b = np.ones((3, 3), dtype=np.float32)
        with pytest.raises(ValueError):
            vecmath.similarity_block(a, b, (0, 2))
        with pytest.raises(ValueError):
            vecmath.similarity_block(a, a, (2, 2))


class TestMatrixSqrt:
    def test_identity_and_diag(self):
        np.testing.assert_allclose(vecmath.matrix_sqrt_psd(np.eye(3)), np.eye(3), atol=1e-12)
        np.testing.assert_allclose(
            vecmath.matrix_sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-12)

    def test_square_recovers_input(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            a = rng.standard_normal((12, 5))
            m = a @ a.T
            r = vecmath.matrix_sqrt_psd(m)
            rel = np.linalg.norm(r @ r - m) / np.linalg.norm(m)
            assert rel <= 1e-3

    def test_asymmetric_rejected(self):
        m = np.array([[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(ValueError):
            vecmath.matrix_sqrt_psd(m)


class TestWhiten:
    def test_orthonormal_columns_noop(self):
        rng = np.random.default_rng(7)
        q = random_orthogonal(5, rng)[:, :3]
        w = vecmath.whiten_transform(np.vstack([q, np.zeros((2, 3))]))
        np.testing.assert_allclose(w, np.eye(3), atol=1e-8)

    def test_scaled_identity(self):
        m = np.diag([2.0, 2.0])
        np.testing.assert_allclose(vecmath.whiten_transform(m), np.diag([0.5, 0.5]), atol=1e-10)

    def test_whitens_gram(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            m = rng.standard_normal((40, 6))
            w = vecmath.whiten_transform(m)
            gram = (m @ w).T @ (m @ w)
            assert np.max(np.abs(gram - np.eye(6))) <= 1e-3

    def test_zero_matrix_rejected(self):
        with pytest.raises(ValueError):
            vecmath.whiten_transform(np.zeros((4, 3)))


class TestSortRows:
    def test_examples(self):
        m = np.array([[0.1, 0.9, 0.5]])
        np.testing.assert_array_equal(vecmath.sort_rows_desc(m), [[0.9, 0.5, 0.1]])
        sorted_m = np.array([[3.0, 2.0, 1.0], [9.0, 5.0, 1.0]])
        np.testing.assert_array_equal(vecmath.sort_rows_desc(sorted_m), sorted_m)

    def test_rows_are_permutations(self):
        rng = np.random.default_rng(9)
        m = rng.standard_normal((15, 10))
        out = vecmath.sort_rows_desc(m)
        for i in range(m.shape[0]):
            np.testing.assert_array_equal(np.sort(out[i]), np.sort(m[i]))
            assert np.all(np.diff(out[i]) <= 0)
