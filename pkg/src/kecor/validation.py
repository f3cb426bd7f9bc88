"""Input validation helpers.

All entry points funnel arrays through these so that NaN/Inf never make it
past construction and shape errors surface as :class:`DimensionMismatch`
rather than cryptic BLAS failures.  Feature matrices are stored column-major
(one sample per column) because every kernel consumes feature columns.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch


def check_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate a 2-D finite float64 array and return it column-major."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return np.asfortranarray(arr)


def check_square(a, name: str = "matrix") -> np.ndarray:
    arr = check_matrix(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    return arr


def check_symmetric(a, tol: float = 1e-10, name: str = "matrix") -> np.ndarray:
    arr = check_square(a, name)
    if arr.size and np.max(np.abs(arr - arr.T)) > tol:
        raise ValueError(f"{name} is not symmetric within {tol:g} absolute")
    return arr


def check_vector(v, name: str = "vector", length: int | None = None) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got ndim={arr.ndim}")
    if length is not None and arr.shape[0] != length:
        raise DimensionMismatch(
            f"{name} must have length {length}, got {arr.shape[0]}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_indices(idx, n: int, name: str = "indices", unique: bool = True) -> np.ndarray:
    """Validate 0-based indices into a store of ``n`` samples."""
    arr = np.asarray(idx, dtype=np.int64).ravel()
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise DimensionMismatch(f"{name} out of range for pool of size {n}")
    if unique and np.unique(arr).size != arr.size:
        raise ValueError(f"{name} contains duplicates")
    return arr
