"""Sparse skew-symmetric matrices and the top-2 spectral primitives.

The measurement matrix is skew-symmetric, so each unordered pair is stored
exactly once (row < col) and the mirrored entry is implied by negation.
Because H^T = -H, the Gram operator H H^T equals -H^2 and is symmetric
positive semidefinite; every singular value of a skew-symmetric matrix has
even multiplicity, so the dominant singular pair is always degenerate and
the SVD here iterates on a block of size 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    InvalidParam,
    NotConverged,
    ZeroProjection,
)


@dataclass(frozen=True)
class SkewSparseMatrix:
    """n x n skew-symmetric matrix stored as one entry per unordered pair.

    ``rows[k] < cols[k]`` holds for every stored entry; the value at
    (cols[k], rows[k]) is ``-values[k]`` and the diagonal is zero.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if self.n < 1:
            raise InvalidParam("n must be >= 1")
        if not (rows.shape == cols.shape == values.shape) or rows.ndim != 1:
            raise DimensionMismatch("rows, cols, values must be 1-d arrays of equal length")
        if rows.size:
            if rows.min() < 0 or cols.max() >= self.n:
                raise InvalidParam("entry index out of range")
            if np.any(rows >= cols):
                raise InvalidParam("entries must satisfy row < col (stored once per pair)")
            keys = rows * self.n + cols
            if np.unique(keys).size != keys.size:
                raise InvalidParam("duplicate unordered pair")
        for name, arr in (("rows", rows), ("cols", cols), ("values", values)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def num_entries(self) -> int:
        return int(self.rows.size)

    @property
    def max_abs(self) -> float:
        """Largest entry magnitude (the max-norm of the matrix)."""
        return float(np.abs(self.values).max()) if self.values.size else 0.0

    @cached_property
    def is_connected(self) -> bool:
        return component_count(self.n, self.rows, self.cols) == 1

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise DimensionMismatch(f"expected vector of length {self.n}, got {x.shape}")
        if not self.rows.size:
            return np.zeros(self.n)
        upper = self.values * x[self.cols]
        lower = self.values * x[self.rows]
        return (np.bincount(self.rows, weights=upper, minlength=self.n)
                - np.bincount(self.cols, weights=lower, minlength=self.n))

    def abs_row_sums(self) -> np.ndarray:
        """Diagonal of the absolute-degree matrix: sum_j |H_ij| per row."""
        a = np.abs(self.values)
        return (np.bincount(self.rows, weights=a, minlength=self.n)
                + np.bincount(self.cols, weights=a, minlength=self.n))

    def scaled(self, d: np.ndarray) -> "SkewSparseMatrix":
        """Return the matrix with entry (i, j) multiplied by d[i] * d[j]."""
        d = np.asarray(d, dtype=np.float64)
        if d.shape != (self.n,):
            raise DimensionMismatch("scaling vector has wrong length")
        return SkewSparseMatrix(self.n, self.rows.copy(), self.cols.copy(),
                                self.values * d[self.rows] * d[self.cols])

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n))
        dense[self.rows, self.cols] = self.values
        dense[self.cols, self.rows] = -self.values
        return dense

    @staticmethod
    def from_dense(dense: np.ndarray, atol: float = 0.0) -> "SkewSparseMatrix":
        dense = np.asarray(dense, dtype=np.float64)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise DimensionMismatch("expected a square matrix")
        if not np.allclose(dense, -dense.T, atol=1e-10 * max(1.0, np.abs(dense).max())):
            raise InvalidParam("matrix is not skew-symmetric")
        i, j = np.triu_indices(dense.shape[0], 1)
        v = dense[i, j]
        keep = np.abs(v) > atol
        return SkewSparseMatrix(dense.shape[0], i[keep], j[keep], v[keep])


@dataclass(frozen=True)
class SpectralPair:
    """Orthonormal top-2 left singular vectors with their singular values."""

    u1: np.ndarray
    u2: np.ndarray
    sigma1: float
    sigma2: float
    iterations: int = 0
    residual: float = 0.0

    def __post_init__(self):
        u1 = np.asarray(self.u1, dtype=np.float64)
        u2 = np.asarray(self.u2, dtype=np.float64)
        if u1.shape != u2.shape or u1.ndim != 1:
            raise DimensionMismatch("u1, u2 must be vectors of equal length")
        if abs(np.linalg.norm(u1) - 1.0) > 1e-10 or abs(np.linalg.norm(u2) - 1.0) > 1e-10:
            raise InvalidParam("singular vectors must have unit norm")
        if abs(float(u1 @ u2)) > 1e-10:
            raise InvalidParam("singular vectors must be orthogonal")
        if not (self.sigma1 >= self.sigma2 >= 0.0):
            raise InvalidParam("need sigma1 >= sigma2 >= 0")
        for name, arr in (("u1", u1), ("u2", u2)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def basis(self) -> np.ndarray:
        """n x 2 matrix with the two vectors as columns."""
        return np.column_stack([self.u1, self.u2])


def matvec(H: SkewSparseMatrix, x: np.ndarray) -> np.ndarray:
    """Product Hx using the antisymmetric completion of the stored entries."""
    return H.matvec(x)


def top2_svd(H: SkewSparseMatrix, tol: float = 1e-10, max_iter: int = 2000,
             seed: int = 0) -> SpectralPair:
    """Dominant singular pair of H by block subspace iteration on -H^2.

    Runs block power iteration of block size 2 on the symmetric PSD operator
    x -> -H(Hx) with QR re-orthonormalization each sweep and a Rayleigh-Ritz
    rotation before the residual test. Block size 2 is required: the top
    singular value of a skew-symmetric matrix always has multiplicity two,
    so a single power vector has no well-defined limit. Converged when the
    relative residual ||(-H^2)v - lambda v|| / lambda is at most ``tol`` for
    both block vectors.

    The starting block is seeded Gaussian, so runs are reproducible.
    Raises DegenerateSpectrum for a numerically zero matrix and NotConverged
    (carrying the partial result) when ``max_iter`` is exhausted.
    """
    if H.n < 2:
        raise InvalidParam("need n >= 2")
    if tol <= 0 or max_iter < 1:
        raise InvalidParam("tol must be positive and max_iter >= 1")
    scale = H.max_abs
    if scale == 0.0:
        raise DegenerateSpectrum("matrix has no nonzero entries")

    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((H.n, 2)))
    lam = np.zeros(2)
    V = Q
    residual = np.inf
    for sweep in range(1, max_iter + 1):
        Z = np.column_stack([-H.matvec(H.matvec(Q[:, 0])),
                             -H.matvec(H.matvec(Q[:, 1]))])
        T = Q.T @ Z
        T = 0.5 * (T + T.T)
        lam, W = np.linalg.eigh(T)
        lam, W = lam[::-1], W[:, ::-1]
        V = Q @ W
        R = Z @ W - V * lam
        floor = max(lam[1], tol * (scale * H.n) ** 2, np.finfo(float).tiny)
        residual = max(np.linalg.norm(R[:, 0]), np.linalg.norm(R[:, 1])) / floor
        if residual <= tol:
            break
        Q, _ = np.linalg.qr(Z)
    sigma = np.sqrt(np.clip(lam, 0.0, None))
    pair = SpectralPair(u1=V[:, 0], u2=V[:, 1], sigma1=float(sigma[0]),
                        sigma2=float(sigma[1]), iterations=sweep,
                        residual=float(residual))
    if pair.sigma1 <= tol * scale * H.n:
        raise DegenerateSpectrum("top singular value is numerically zero")
    if residual > tol:
        raise NotConverged(f"subspace iteration stalled at residual {residual:.3e}",
                           result=pair, residual=float(residual), iterations=sweep)
    return pair


def project_onto_span(v: np.ndarray, basis: SpectralPair) -> np.ndarray:
    """Orthogonal projection U U^T v onto span{u1, u2}."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != basis.u1.shape:
        raise DimensionMismatch("vector length does not match basis")
    U = basis.basis
    return U @ (U.T @ v)


def orthonormal_complement_in_span(u_bar: np.ndarray, basis: SpectralPair) -> np.ndarray:
    """Unit vector inside span{u1, u2} orthogonal to ``u_bar``.

    ``u_bar`` must already lie in the span (it normally is a projection onto
    it). The overall sign of the result is arbitrary; callers resolve it
    downstream. Raises ZeroProjection when ``u_bar`` is numerically zero,
    which signals that the projected direction is orthogonal to the
    recovered subspace and the spectral estimate is unusable.
    """
    u_bar = np.asarray(u_bar, dtype=np.float64)
    if u_bar.shape != basis.u1.shape:
        raise DimensionMismatch("vector length does not match basis")
    norm = np.linalg.norm(u_bar)
    if norm <= 1e-12:
        raise ZeroProjection("projection of the reference direction is numerically zero")
    a = float(basis.u1 @ u_bar)
    b = float(basis.u2 @ u_bar)
    in_span = np.hypot(a, b)
    if np.linalg.norm(u_bar - (a * basis.u1 + b * basis.u2)) > 1e-8 * norm:
        raise InvalidParam("u_bar does not lie in the spanned subspace")
    return (-b * basis.u1 + a * basis.u2) / in_span


def component_count(n: int, rows: np.ndarray, cols: np.ndarray) -> int:
    if n == 0:
        return 0
    return int(component_labels(n, rows, cols).max()) + 1


def component_labels(n: int, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Connected-component label per node for the undirected edge list."""
    ends = np.concatenate([rows, cols])
    starts = np.concatenate([cols, rows])
    order = np.argsort(starts, kind="stable")
    starts, ends = starts[order], ends[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(offsets, starts + 1, 1)
    offsets = np.cumsum(offsets)
    labels = np.full(n, -1, dtype=np.int64)
    current = 0
    for root in range(n):
        if labels[root] >= 0:
            continue
        labels[root] = current
        frontier = [root]
        while frontier:
            nxt = []
            for node in frontier:
                nbrs = ends[offsets[node]:offsets[node + 1]]
                fresh = nbrs[labels[nbrs] < 0]
                labels[fresh] = current
                nxt.extend(fresh.tolist())
            frontier = nxt
        current += 1
    return labels
