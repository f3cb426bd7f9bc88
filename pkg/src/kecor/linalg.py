"""Dense symmetric linear algebra for log-det objectives.

Provides Cholesky factorization with an explicit log-determinant, an
incremental (bordered) extension used by the greedy selector to get O(s^2)
marginal gains, and ``log det(I + c K)`` for positive semidefinite kernels.

All computation is float64.  Reductions rely on numpy's pairwise summation,
so results do not depend on how the caller batches the work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NotPositiveDefinite
from .validation import check_symmetric, check_vector

__all__ = [
    "CholeskyFactor",
    "cholesky",
    "psd_cholesky",
    "cholesky_extend",
    "logdet_eye_plus",
]


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor L with L L^T = A and its log-determinant.

    ``logdet`` is the log-determinant of the *factored* matrix A, i.e.
    ``2 * sum(log(diag(L)))``.
    """

    dim: int
    lower: np.ndarray
    logdet: float

    def solve_lower(self, rhs: np.ndarray) -> np.ndarray:
        """Solve L x = rhs (rhs may be a vector or a matrix of columns)."""
        if self.dim == 0:
            return np.zeros_like(rhs, dtype=np.float64)
        return solve_triangular(self.lower, rhs, lower=True, check_finite=False)


def cholesky(a, jitter: float = 0.0) -> CholeskyFactor:
    """Factor A + jitter*I = L L^T for a symmetric matrix A.

    Raises :class:`NotPositiveDefinite` if a pivot is not strictly positive
    after the jitter has been added.
    """
    arr = check_symmetric(a, name="A")
    if jitter < 0:
        raise ValueError("jitter must be nonnegative")
    n = arr.shape[0]
    if n == 0:
        return CholeskyFactor(0, np.zeros((0, 0)), 0.0)
    m = arr + jitter * np.eye(n) if jitter else arr
    try:
        lower = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(
            f"matrix of dim {n} is not positive definite (jitter={jitter:g})"
        ) from exc
    logdet = 2.0 * float(np.sum(np.log(np.diag(lower))))
    return CholeskyFactor(n, lower, logdet)


def psd_cholesky(a) -> CholeskyFactor:
    """Factor a nominally-PSD matrix, retrying once with a trace-scaled jitter.

    Empirical gradient Gram matrices are PSD in exact arithmetic but can lose
    definiteness in floating point; the retry adds ``1e-9 * trace(A) / dim``.
    """
    arr = check_symmetric(a, name="A")
    try:
        return cholesky(arr)
    except NotPositiveDefinite:
        n = arr.shape[0]
        jitter = 1e-9 * float(np.trace(arr)) / n
        if jitter <= 0:
            raise
        return cholesky(arr, jitter=jitter)


def cholesky_extend(factor: CholeskyFactor, col, corner: float) -> CholeskyFactor:
    """Factor of the bordered matrix [[A, col], [col^T, corner]].

    One triangular solve: with w = L^{-1} col the new row is [w^T, sqrt(s)]
    where s = corner - ||w||^2 is the Schur complement.
    """
    col = check_vector(col, name="col", length=factor.dim)
    w = factor.solve_lower(col)
    schur = float(corner) - float(w @ w)
    if schur <= 0.0:
        raise NotPositiveDefinite(
            f"Schur complement {schur:g} <= 0 when extending factor of dim {factor.dim}"
        )
    d = factor.dim
    lower = np.zeros((d + 1, d + 1))
    lower[:d, :d] = factor.lower
    lower[d, :d] = w
    new_diag = np.sqrt(schur)
    lower[d, d] = new_diag
    return CholeskyFactor(d + 1, lower, factor.logdet + 2.0 * float(np.log(new_diag)))


def logdet_eye_plus(c: float, k) -> float:
    """log det(I + c*K) for a symmetric PSD kernel matrix K and c > 0.

    Nonnegative for PSD K; values in [-1e-12, 0) caused by rounding are
    clamped to exactly 0.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    karr = check_symmetric(k, name="K")
    n = karr.shape[0]
    if n == 0:
        return 0.0
    value = cholesky(np.eye(n) + c * karr).logdet
    if -1e-12 <= value < 0.0:
        return 0.0
    return value
