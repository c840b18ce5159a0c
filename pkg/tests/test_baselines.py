from __future__ import annotations

import numpy as np
import pytest

from svdrank.algorithms import ranking_from_scores, svd_rs
from svdrank.baselines import (
    CompletionConfig,
    IncidenceSystem,
    coherence,
    complete_matrix,
    least_squares_rank,
    rowsum_rank,
)
from svdrank.errors import DegenerateScores, GraphDisconnected, InvalidParam, NotConverged
from svdrank.linalg import SkewSparseMatrix
from svdrank.metrics import kendall_distance
from svdrank.model import EROParams, MeasurementSet, ScoreVector, generate_ero, generate_scores

from conftest import noiseless_matrix


def random_connected_measurements(n, p, rng, scale=1.0):
    """Spanning path plus random extra edges, with Gaussian measurements."""
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    keep[ju - iu == 1] = True  # path 0-1-...-n keeps it connected
    i, j = iu[keep], ju[keep]
    return i, j, scale * rng.standard_normal(i.size)


class TestRowsum:
    def test_noiseless_recovers_truth(self):
        r = np.array([2.0, 7.0, 4.0, 1.0])
        res = rowsum_rank(noiseless_matrix(r))
        assert np.array_equal(res.permutation, ranking_from_scores(r))

    def test_zero_matrix_identity_by_tiebreak(self):
        H = SkewSparseMatrix(4, np.array([], dtype=int), np.array([], dtype=int),
                             np.array([]))
        res = rowsum_rank(H)
        assert list(res.permutation) == [0, 1, 2, 3]
        assert np.isnan(res.tau)

    def test_matches_hand_sums(self):
        H = SkewSparseMatrix(3, np.array([0, 1]), np.array([1, 2]),
                             np.array([2.0, -3.0]))
        res = rowsum_rank(H)
        sums = np.array([2.0, -5.0, 3.0])  # row sums of the dense completion
        assert np.allclose(res.raw_scores, sums)
        assert np.allclose(res.score_estimate, sums - sums.mean())


class TestLeastSquares:
    def test_tree_exact(self):
        # path 0-1-2 with offsets fixing x = (3, 1, 2) up to shift
        sys = IncidenceSystem(np.array([0, 1]), np.array([1, 2]),
                              np.array([2.0, -1.0]))
        res = least_squares_rank(sys, 3)
        truth = np.array([3.0, 1.0, 2.0])
        assert np.allclose(res.score_estimate, truth - truth.mean(), atol=1e-9)

    def test_single_edge(self):
        sys = IncidenceSystem(np.array([0]), np.array([1]), np.array([4.0]))
        res = least_squares_rank(sys, 2)
        assert np.allclose(res.score_estimate, [2.0, -2.0], atol=1e-10)

    def test_centered_solution(self, rng):
        i, j, w = random_connected_measurements(40, 0.1, rng)
        res = least_squares_rank(IncidenceSystem(i, j, w), 40)
        assert abs(res.score_estimate.sum()) < 1e-8

    def test_matches_pseudoinverse_oracle(self, rng):
        for _ in range(5):
            n = int(rng.integers(10, 51))
            i, j, w = random_connected_measurements(n, 0.15, rng)
            res = least_squares_rank(IncidenceSystem(i, j, w), n, tol=1e-12)
            B = np.zeros((i.size, n))
            B[np.arange(i.size), i] = 1.0
            B[np.arange(i.size), j] = -1.0
            oracle = np.linalg.pinv(B) @ w
            oracle -= oracle.mean()
            assert np.linalg.norm(res.score_estimate - oracle) < 1e-6

    def test_disconnected(self):
        sys = IncidenceSystem(np.array([0]), np.array([1]), np.array([1.0]))
        with pytest.raises(GraphDisconnected):
            least_squares_rank(sys, 4)

    def test_not_converged_carries_partial(self, rng):
        i, j, w = random_connected_measurements(30, 0.3, rng)
        with pytest.raises(NotConverged) as info:
            least_squares_rank(IncidenceSystem(i, j, w), 30, tol=1e-14, max_iter=1)
        assert info.value.result is not None


class TestCompletion:
    def test_fully_observed_noiseless(self):
        scores = generate_scores("linear", 15)
        mset = generate_ero(scores, EROParams(n=15, p=1.0, eta=1.0, seed=0))
        comp = complete_matrix(mset)
        C = noiseless_matrix(scores.values).to_dense()
        assert comp.converged
        assert np.linalg.norm(comp.matrix - C) <= 1e-8 * np.linalg.norm(C)

    def test_empty_observations(self):
        mset = MeasurementSet(6, np.array([], dtype=int), np.array([], dtype=int),
                              np.array([]))
        comp = complete_matrix(mset)
        assert not comp.converged
        assert np.array_equal(comp.matrix, np.zeros((6, 6)))

    def test_partial_rank2_recovery(self):
        scores = generate_scores("linear", 60)
        mset = generate_ero(scores, EROParams(n=60, p=0.4, eta=1.0, seed=3))
        comp = complete_matrix(mset)
        C = noiseless_matrix(scores.values).to_dense()
        rel = np.linalg.norm(comp.matrix - C) / np.linalg.norm(C)
        assert rel < 1e-3
        assert comp.matrix.trace() == 0.0
        assert np.allclose(comp.matrix, -comp.matrix.T)

    def test_pipeline_preserves_noiseless_ranking(self):
        scores = generate_scores("linear", 60)
        mset = generate_ero(scores, EROParams(n=60, p=0.4, eta=1.0, seed=4))
        comp = complete_matrix(mset)
        from svdrank.model import build_H

        res = svd_rs(comp.to_sparse(), scale_from=build_H(mset))
        truth = ranking_from_scores(scores.values)
        assert kendall_distance(truth, res.permutation) == 0

    def test_size_limit(self):
        mset = MeasurementSet(5, np.array([0]), np.array([1]), np.array([1.0]))
        with pytest.raises(InvalidParam):
            complete_matrix(mset, CompletionConfig(n_limit=4))


class TestCoherence:
    def test_linear_scores_near_one(self):
        scores = generate_scores("linear", 100)
        mu = coherence(scores)
        r = scores.values
        alpha = r.mean()
        direct = max((r.max() - alpha) * np.sqrt(100) / np.linalg.norm(r - alpha), 1.0)
        assert mu == pytest.approx(direct)
        assert 1.0 <= mu <= 4.0

    def test_single_spike_is_incoherent(self):
        r = np.zeros(50)
        r[-1] = 10.0
        assert coherence(ScoreVector(r)) > 5.0

    def test_constant_scores_degenerate(self):
        with pytest.raises(DegenerateScores):
            coherence(ScoreVector(np.full(10, 2.0)))
