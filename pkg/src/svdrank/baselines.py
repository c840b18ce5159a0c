"""Row-sum and least-squares ranking baselines, plus completion preprocessing.

The least-squares ranking solves ``min ||Bx - w||^2`` where B is the
edge-vertex incidence matrix (+1 at the first endpoint, -1 at the second)
and w the measured offsets. The normal-equation matrix B^T B is the graph
Laplacian, singular exactly on the all-ones direction; conjugate gradient
started at zero stays orthogonal to it and converges to the centered
minimum-norm solution.

Matrix completion fills the unobserved entries of the rank-2 offset matrix
by accelerated proximal gradient on a nuclear-norm penalty: a momentum
extrapolation, a data-consistency step on the observed entries, then
singular-value soft-thresholding, with the diagonal pinned to zero each
iterate and the final iterate skew-symmetrized as (X - X^T) / 2. The
threshold follows a geometric schedule from a spectral-scale start down to
a small floor, which reproduces the equality-constrained behaviour on clean
data; the constrained noisy formulation (with an explicit residual radius)
is intentionally not exposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algorithms import (
    RankingResult,
    center,
    compute_ratio_entries,
    ranking_from_scores,
    recover_scale_median,
)
from .errors import (
    DegenerateScores,
    DimensionMismatch,
    EmptyRatios,
    GraphDisconnected,
    InvalidParam,
    NotConverged,
)
from .linalg import SkewSparseMatrix, component_count
from .model import MeasurementSet, ScoreVector


@dataclass(frozen=True)
class IncidenceSystem:
    """Rows (i, j, w) of the incidence system Bx = w, one per observed pair."""

    rows_i: np.ndarray
    rows_j: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        i = np.asarray(self.rows_i, dtype=np.int64)
        j = np.asarray(self.rows_j, dtype=np.int64)
        w = np.asarray(self.w, dtype=np.float64)
        if not (i.shape == j.shape == w.shape) or i.ndim != 1:
            raise DimensionMismatch("incidence arrays must be 1-d and equal length")
        if np.any(i == j):
            raise InvalidParam("incidence row with identical endpoints")
        for name, arr in (("rows_i", i), ("rows_j", j), ("w", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return int(self.rows_i.size)

    @staticmethod
    def from_matrix(H: SkewSparseMatrix) -> "IncidenceSystem":
        return IncidenceSystem(H.rows.copy(), H.cols.copy(), H.values.copy())

    @staticmethod
    def from_measurements(m: MeasurementSet) -> "IncidenceSystem":
        return IncidenceSystem(m.rows.copy(), m.cols.copy(), m.values.copy())


def _tau_or_nan(H: SkewSparseMatrix, scores: np.ndarray) -> float:
    try:
        return recover_scale_median(compute_ratio_entries(H, scores))
    except EmptyRatios:
        return math.nan


def rowsum_rank(H: SkewSparseMatrix) -> RankingResult:
    """Rank by centered row sums of the measurement matrix."""
    if H.n < 2:
        raise InvalidParam("need n >= 2")
    sums = (np.bincount(H.rows, weights=H.values, minlength=H.n)
            - np.bincount(H.cols, weights=H.values, minlength=H.n))
    scores = center(sums)
    return RankingResult(permutation=ranking_from_scores(scores),
                         score_estimate=scores, beta=1,
                         tau=_tau_or_nan(H, scores), method="rowsum",
                         raw_scores=sums)


def least_squares_rank(sys: IncidenceSystem, n: int, tol: float = 1e-10,
                       max_iter: int = 1000) -> RankingResult:
    """Centered minimum-norm least-squares scores by conjugate gradient.

    Solves the normal equations B^T B x = B^T w without forming B^T B; each
    iteration applies the graph Laplacian through the edge list. Stops at
    relative residual ``tol``; raises GraphDisconnected for a disconnected
    graph and NotConverged (carrying the partial result) past ``max_iter``.
    """
    if n < 2:
        raise InvalidParam("need n >= 2")
    if sys.rows_i.size and max(sys.rows_i.max(), sys.rows_j.max()) >= n:
        raise InvalidParam("incidence index out of range")
    lo = np.minimum(sys.rows_i, sys.rows_j)
    hi = np.maximum(sys.rows_i, sys.rows_j)
    if component_count(n, lo, hi) != 1:
        raise GraphDisconnected("incidence graph is not connected")

    i, j, w = sys.rows_i, sys.rows_j, sys.w

    def laplacian(x: np.ndarray) -> np.ndarray:
        flow = x[i] - x[j]
        return (np.bincount(i, weights=flow, minlength=n)
                - np.bincount(j, weights=flow, minlength=n))

    b = (np.bincount(i, weights=w, minlength=n)
         - np.bincount(j, weights=w, minlength=n))
    b_norm = np.linalg.norm(b)
    x = np.zeros(n)
    if b_norm == 0.0:
        scores = x
    else:
        r = b.copy()
        p = r.copy()
        rs = float(r @ r)
        converged = False
        for _ in range(max_iter):
            Ap = laplacian(p)
            alpha = rs / float(p @ Ap)
            x += alpha * p
            r -= alpha * Ap
            rs_new = float(r @ r)
            if np.sqrt(rs_new) <= tol * b_norm:
                converged = True
                break
            p = r + (rs_new / rs) * p
            rs = rs_new
        scores = x - x.mean()  # kill roundoff drift off the centered subspace
        if not converged:
            raise NotConverged("conjugate gradient did not reach tolerance",
                               result=scores,
                               residual=float(np.sqrt(rs) / b_norm),
                               iterations=max_iter)
    folded = np.where(sys.rows_i < sys.rows_j, w, -w)
    try:
        H = SkewSparseMatrix(n, lo, hi, folded)
        tau = _tau_or_nan(H, scores)
    except InvalidParam:  # repeated pair rows: skip the scale diagnostic
        tau = math.nan
    return RankingResult(permutation=ranking_from_scores(scores),
                         score_estimate=scores, beta=1,
                         tau=tau, method="least_squares",
                         raw_scores=scores)


@dataclass(frozen=True)
class CompletionConfig:
    """Knobs for the nuclear-norm completion solver.

    ``threshold`` is the initial soft-threshold; when None it defaults to
    2.5 * sqrt(n * p_hat) times the mean observed magnitude. It decays
    geometrically by ``decay`` per iteration down to ``floor`` (default
    1e-9 of the start), so late iterations approach exact data consistency;
    keep a higher floor for heavily contaminated inputs, where exact
    interpolation would chase outliers. ``target_rank_hint`` is diagnostic
    only: it does not constrain the solve.
    """

    step: float = 1.0
    threshold: float | None = None
    decay: float = 0.92
    floor: float | None = None
    max_iter: int = 500
    tol: float = 1e-6
    target_rank_hint: int = 2
    n_limit: int = 2000

    def __post_init__(self):
        if self.step <= 0 or self.max_iter < 1 or self.tol <= 0:
            raise InvalidParam("step, max_iter, tol must be positive")
        if self.threshold is not None and self.threshold <= 0:
            raise InvalidParam("threshold must be positive")
        if not 0 < self.decay <= 1:
            raise InvalidParam("decay must lie in (0, 1]")
        if self.floor is not None and self.floor <= 0:
            raise InvalidParam("floor must be positive")
        if self.target_rank_hint < 1 or self.n_limit < 2:
            raise InvalidParam("target_rank_hint and n_limit must be positive")


@dataclass(frozen=True)
class CompletionResult:
    matrix: np.ndarray
    converged: bool
    iterations: int
    rel_change: float
    effective_rank: int

    def to_sparse(self) -> SkewSparseMatrix:
        return SkewSparseMatrix.from_dense(self.matrix)


def complete_matrix(m: MeasurementSet, cfg: CompletionConfig = CompletionConfig()) -> CompletionResult:
    """Fill the unobserved offsets by soft-thresholded proximal iteration.

    Dense solver; refuses n beyond ``cfg.n_limit``. Returns the
    skew-symmetrized estimate (X - X^T) / 2 together with convergence
    diagnostics; an empty observation set yields the zero matrix flagged as
    not converged.
    """
    n = m.n
    if n > cfg.n_limit:
        raise InvalidParam(f"dense completion limited to n <= {cfg.n_limit}")
    if m.m == 0:
        return CompletionResult(matrix=np.zeros((n, n)), converged=False,
                                iterations=0, rel_change=math.inf, effective_rank=0)
    obs_i = np.concatenate([m.rows, m.cols])
    obs_j = np.concatenate([m.cols, m.rows])
    obs_v = np.concatenate([m.values, -m.values])
    p_hat = obs_i.size / (n * (n - 1))
    lam = cfg.threshold
    if lam is None:
        lam = 2.5 * np.sqrt(n * p_hat) * float(np.mean(np.abs(obs_v)))
        lam = max(lam, np.finfo(float).tiny)
    floor = cfg.floor if cfg.floor is not None else 1e-9 * lam

    X = np.zeros((n, n))
    X_prev = X
    t_momentum = 1.0
    rel = math.inf
    rank = 0
    it = 0
    for it in range(1, cfg.max_iter + 1):
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_momentum ** 2))
        Y = X + ((t_momentum - 1.0) / t_next) * (X - X_prev)
        t_momentum = t_next
        Y[obs_i, obs_j] -= cfg.step * (Y[obs_i, obs_j] - obs_v)
        np.fill_diagonal(Y, 0.0)
        U, s, Vt = np.linalg.svd(Y, full_matrices=False)
        s = np.maximum(s - lam, 0.0)
        rank = int(np.count_nonzero(s))
        X_new = (U[:, :rank] * s[:rank]) @ Vt[:rank]
        np.fill_diagonal(X_new, 0.0)
        rel = np.linalg.norm(X_new - X, "fro") / max(np.linalg.norm(X, "fro"), 1.0)
        X_prev, X = X, X_new
        if rel <= cfg.tol and lam <= floor * (1 + 1e-12):
            skew = 0.5 * (X - X.T)
            return CompletionResult(matrix=skew, converged=True, iterations=it,
                                    rel_change=float(rel), effective_rank=rank)
        lam = max(lam * cfg.decay, floor)
    skew = 0.5 * (X - X.T)
    return CompletionResult(matrix=skew, converged=False, iterations=it,
                            rel_change=float(rel), effective_rank=rank)


def coherence(r: ScoreVector) -> float:
    """Spread measure max{(M - mean) sqrt(n) / ||r - mean||_2, 1} of the scores.

    Small values mean the score deviations are delocalized, the favourable
    regime for completion from few samples.
    """
    values = r.values
    alpha = values.mean()
    dev = np.linalg.norm(values - alpha)
    if dev <= 1e-12 * (abs(values).max() + 1.0) * np.sqrt(r.n):
        raise DegenerateScores("coherence undefined for constant scores")
    return max(float((r.M - alpha) * np.sqrt(r.n) / dev), 1.0)
