from __future__ import annotations

import numpy as np
import pytest

from svdrank.errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    InvalidParam,
    ZeroProjection,
)
from svdrank.linalg import (
    SkewSparseMatrix,
    SpectralPair,
    component_count,
    matvec,
    orthonormal_complement_in_span,
    project_onto_span,
    top2_svd,
)

from conftest import make_skew_dense, noiseless_matrix


def random_sparse(n, density, rng):
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < density
    return SkewSparseMatrix(n, iu[keep], ju[keep], rng.standard_normal(int(keep.sum())))


class TestSkewSparseMatrix:
    def test_rejects_bad_entries(self):
        with pytest.raises(InvalidParam):
            SkewSparseMatrix(3, np.array([1]), np.array([1]), np.array([1.0]))
        with pytest.raises(InvalidParam):
            SkewSparseMatrix(3, np.array([2]), np.array([1]), np.array([1.0]))
        with pytest.raises(InvalidParam):
            SkewSparseMatrix(3, np.array([0, 0]), np.array([1, 1]), np.array([1.0, 2.0]))
        with pytest.raises(InvalidParam):
            SkewSparseMatrix(3, np.array([0]), np.array([3]), np.array([1.0]))

    def test_dense_roundtrip(self, rng):
        H = random_sparse(12, 0.4, rng)
        back = SkewSparseMatrix.from_dense(H.to_dense())
        assert back.n == H.n
        assert np.array_equal(back.rows, H.rows)
        assert np.allclose(back.values, H.values)

    def test_from_dense_rejects_asymmetric(self):
        with pytest.raises(InvalidParam):
            SkewSparseMatrix.from_dense(np.ones((3, 3)))


class TestMatvec:
    def test_empty_matrix_gives_zero(self):
        H = SkewSparseMatrix(4, np.array([], dtype=int), np.array([], dtype=int), np.array([]))
        assert np.array_equal(matvec(H, np.ones(4)), np.zeros(4))

    def test_antisymmetry_two_nodes(self):
        H = SkewSparseMatrix(2, np.array([0]), np.array([1]), np.array([3.0]))
        assert np.allclose(matvec(H, np.array([1.0, 0.0])), [0.0, -3.0])

    def test_matches_dense_oracle(self, rng):
        for _ in range(10):
            H = random_sparse(15, 0.5, rng)
            x = rng.standard_normal(15)
            assert np.allclose(H.matvec(x), H.to_dense() @ x, atol=1e-12)

    def test_dimension_mismatch(self):
        H = SkewSparseMatrix(3, np.array([0]), np.array([1]), np.array([1.0]))
        with pytest.raises(DimensionMismatch):
            matvec(H, np.ones(4))

    def test_quadratic_form_vanishes(self, rng):
        # skew-symmetry forces x^T H x = 0
        for _ in range(10):
            H = random_sparse(20, 0.3, rng)
            x = rng.standard_normal(20)
            bound = 1e-10 * (x @ x) * max(H.max_abs, 1.0) * H.n
            assert abs(x @ H.matvec(x)) <= bound


class TestTop2Svd:
    def test_noiseless_singular_identity(self):
        r = np.array([1.0, 2.0, 3.0])
        pair = top2_svd(noiseless_matrix(r))
        expected = np.sqrt(6.0)
        assert pair.sigma1 == pytest.approx(expected, rel=1e-10)
        assert pair.sigma2 == pytest.approx(expected, rel=1e-10)

    def test_zero_matrix_degenerate(self):
        H = SkewSparseMatrix(4, np.array([], dtype=int), np.array([], dtype=int), np.array([]))
        with pytest.raises(DegenerateSpectrum):
            top2_svd(H)

    def test_matches_dense_svd_oracle(self, rng):
        worst_angle = 0.0
        worst_sigma = 0.0
        for _ in range(25):
            n = int(rng.integers(5, 21))
            dense = make_skew_dense(n, rng)
            H = SkewSparseMatrix.from_dense(dense)
            pair = top2_svd(H, tol=1e-12, max_iter=5000, seed=int(rng.integers(1 << 31)))
            U, S, _ = np.linalg.svd(dense)
            span = pair.basis
            angle = np.linalg.norm(U[:, :2] - span @ (span.T @ U[:, :2]), 2)
            worst_angle = max(worst_angle, angle)
            worst_sigma = max(worst_sigma,
                              abs(pair.sigma1 - S[0]) / S[0],
                              abs(pair.sigma2 - S[1]) / S[1])
        assert worst_angle < 1e-8
        assert worst_sigma < 1e-8

    def test_residual_invariant(self, rng):
        H = random_sparse(25, 0.4, rng)
        pair = top2_svd(H, tol=1e-11)
        dense = H.to_dense()
        for u, sigma in ((pair.u1, pair.sigma1), (pair.u2, pair.sigma2)):
            res = np.linalg.norm(dense.T @ (dense @ u) - sigma ** 2 * u)
            assert res <= 1e-9 * sigma ** 2

    def test_degenerate_pair_on_expected_matrix(self, rng):
        # eta p C keeps the equal top pair; sigma1 and sigma2 must agree
        r = rng.random(30)
        H = noiseless_matrix(0.4 * 0.8 * r)
        pair = top2_svd(H)
        assert pair.sigma1 == pytest.approx(pair.sigma2, rel=1e-8)


class TestProjection:
    def _basis(self, n, rng):
        Q, _ = np.linalg.qr(rng.standard_normal((n, 2)))
        return SpectralPair(u1=Q[:, 0], u2=Q[:, 1], sigma1=2.0, sigma2=1.0)

    def test_idempotent_on_span(self, rng):
        basis = self._basis(8, rng)
        assert np.allclose(project_onto_span(basis.u1, basis), basis.u1, atol=1e-12)

    def test_orthogonal_vector_maps_to_zero(self, rng):
        basis = self._basis(6, rng)
        v = rng.standard_normal(6)
        v -= project_onto_span(v, basis)
        assert np.allclose(project_onto_span(v, basis), np.zeros(6), atol=1e-12)

    def test_matches_dense_projector(self, rng):
        basis = self._basis(12, rng)
        U = basis.basis
        P = U @ U.T
        for _ in range(5):
            v = rng.standard_normal(12)
            assert np.allclose(project_onto_span(v, basis), P @ v, atol=1e-12)

    def test_dimension_mismatch(self, rng):
        basis = self._basis(5, rng)
        with pytest.raises(DimensionMismatch):
            project_onto_span(np.ones(6), basis)


class TestOrthonormalComplement:
    def test_standard_basis(self):
        e1 = np.array([1.0, 0.0, 0.0])
        e2 = np.array([0.0, 1.0, 0.0])
        basis = SpectralPair(u1=e1, u2=e2, sigma1=1.0, sigma2=1.0)
        out = orthonormal_complement_in_span(e1, basis)
        assert np.allclose(np.abs(out), e2, atol=1e-12)
        mix = (e1 + e2) / np.sqrt(2.0)
        out = orthonormal_complement_in_span(mix, basis)
        assert np.allclose(np.abs(out), np.abs((e1 - e2) / np.sqrt(2.0)), atol=1e-12)

    def test_properties_random_basis(self, rng):
        for _ in range(10):
            Q, _ = np.linalg.qr(rng.standard_normal((10, 2)))
            basis = SpectralPair(u1=Q[:, 0], u2=Q[:, 1], sigma1=3.0, sigma2=2.0)
            coeffs = rng.standard_normal(2)
            u_bar = Q @ coeffs
            out = orthonormal_complement_in_span(u_bar, basis)
            assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-10)
            assert abs(out @ u_bar) <= 1e-10
            assert np.linalg.norm(out - project_onto_span(out, basis)) <= 1e-10

    def test_zero_projection(self, rng):
        Q, _ = np.linalg.qr(rng.standard_normal((7, 2)))
        basis = SpectralPair(u1=Q[:, 0], u2=Q[:, 1], sigma1=1.0, sigma2=0.5)
        with pytest.raises(ZeroProjection):
            orthonormal_complement_in_span(np.zeros(7), basis)


def test_component_count():
    rows = np.array([0, 2])
    cols = np.array([1, 3])
    assert component_count(5, rows, cols) == 3
    assert component_count(2, np.array([0]), np.array([1])) == 1
