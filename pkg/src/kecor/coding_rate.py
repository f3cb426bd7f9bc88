"""Coding-rate objectives and the greedy marginal-gain primitive.

The feature form is 1/2 logdet(I_d + d/(eps^2 n) ZZ^T); the kernel form
is 1/2 logdet(I_n + n/(eps^2 d) K).  The coefficients are deliberately
inverted between the two: both are implemented exactly as stated and
agree only when n = d.  Greedy growth never refactors from scratch; each
candidate is scored through one triangular solve against the current
Cholesky factor of I + cK_S.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefinite
from .kernels import GramMatrix
from .linalg import cholesky, cholesky_extend, logdet_eye_plus
from .validation import check_matrix

# Schur increments in [-_CLAMP, 0] count as exactly redundant candidates
_CLAMP = 1e-10


@dataclass(frozen=True)
class CodingRateParams:
    """Coefficient bundle c = coeff_n / (epsilon^2 * feature_dim).

    coeff_n is frozen at the target batch size for a whole selection
    round so marginal gains stay comparable across greedy steps.
    """

    epsilon: float
    feature_dim: int
    coeff_n: int

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive, got %r" % (self.epsilon,))
        if self.feature_dim < 1 or self.coeff_n < 1:
            raise ValueError("feature_dim and coeff_n must be at least 1")

    @property
    def coefficient(self):
        return self.coeff_n / (self.epsilon ** 2 * self.feature_dim)


def coding_rate_features(z, epsilon):
    """1/2 logdet(I_d + d/(eps^2 n) ZZ^T) for a d x n feature block.

    Evaluated on whichever of ZZ^T / Z^TZ is smaller; the two sides agree
    by the determinant identity det(I + AB) = det(I + BA).
    """
    z = check_matrix(z, "Z")
    d, n = z.shape
    if n < 1 or d < 1:
        raise ValueError("Z must have at least one row and one column")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive, got %r" % (epsilon,))
    alpha = d / (epsilon ** 2 * n)
    small = z @ z.T if d <= n else z.T @ z
    small = 0.5 * (small + small.T)
    return 0.5 * logdet_eye_plus(alpha, small)


def kernel_coding_rate(k, params):
    """1/2 logdet(I_n + c K) for a PSD kernel matrix."""
    mat = k.K if isinstance(k, GramMatrix) else k
    return 0.5 * logdet_eye_plus(params.coefficient, mat)


def _increment(c, k_xx, sq_norm):
    delta = c * k_xx - c * c * sq_norm
    if delta < 0.0:
        if delta < -_CLAMP:
            raise NotPositiveDefinite(
                "negative coding-rate increment %g; kernel matrix is not PSD"
                % (delta,)
            )
        delta = 0.0
    return 0.5 * np.log1p(delta)


def marginal_gain(factor, k_col, k_xx, c):
    """Coding-rate increase from adding candidate x to subset S.

    factor is the Cholesky factor of I + cK_S; k_col holds the kernel
    values between x and S (in S order) and k_xx the candidate's own
    kernel value.  One forward triangular solve evaluates
    1/2 log(1 + c k_xx - c^2 k_col^T (I + cK_S)^{-1} k_col).
    """
    if c <= 0.0:
        raise ValueError("coefficient must be positive, got %r" % (c,))
    k_col = np.asarray(k_col, dtype=np.float64).reshape(-1)
    w = factor.solve_lower(k_col)
    return float(_increment(c, float(k_xx), float(w @ w)))


def marginal_gain_batch(factor, k_cols, k_diag, c):
    """Vectorized marginal_gain over many candidates.

    k_cols is |S| x m (one column per candidate), k_diag length m.
    Returns the m per-candidate gains from one batched solve.
    """
    if c <= 0.0:
        raise ValueError("coefficient must be positive, got %r" % (c,))
    k_cols = np.asarray(k_cols, dtype=np.float64)
    k_diag = np.asarray(k_diag, dtype=np.float64).reshape(-1)
    if k_cols.ndim != 2 or k_cols.shape[1] != k_diag.shape[0]:
        raise ValueError("k_cols must be |S| x m with m matching k_diag")
    w = factor.solve_lower(k_cols)
    sq = np.einsum("ij,ij->j", w, w) if factor.dim else np.zeros_like(k_diag)
    return np.array([_increment(c, kxx, s) for kxx, s in zip(k_diag, sq)])


def grow_factor(factor, k_col, k_xx, c):
    """Extend the factor of I + cK_S to S plus one candidate."""
    k_col = np.asarray(k_col, dtype=np.float64).reshape(-1)
    return cholesky_extend(factor, c * k_col, 1.0 + c * float(k_xx))


def empty_factor():
    """Factor of the empty subset (0 x 0 identity)."""
    return cholesky(np.zeros((0, 0)))
