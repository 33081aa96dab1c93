"""Dense linear-algebra kernels used by the geometry layer.

Thin wrappers around LAPACK (via numpy) that pin down the conventions the
rest of the package relies on: singular values sorted in decreasing order,
`v` returned column-major (right singular vectors as columns, not rows),
and a fixed relative threshold for deciding numeric rank.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NumericError

# Singular values at or below RANK_RTOL * sigma_max count as zero.
RANK_RTOL = 1e-10


class SvdResult(NamedTuple):
    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray


def svd(a: np.ndarray) -> SvdResult:
    """Thin SVD of a real matrix: a = u @ diag(s) @ v.T.

    u is (m, min(m, n)), v is (n, min(m, n)); both have orthonormal
    columns and s is nonincreasing.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of ndim {a.ndim}")
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"svd did not converge on {a.shape} matrix: {exc}") from exc
    return SvdResult(u, s, vt.T)


def numeric_rank(singular_values: np.ndarray) -> int:
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.count_nonzero(s > RANK_RTOL * s[0]))


def lu_determinant(a: np.ndarray) -> float:
    """Determinant of a square matrix via LU factorization (signed)."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"determinant needs a square matrix, got {a.shape}")
    return float(np.linalg.det(a))


def null_space_complement(q: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of col(q), as rows.

    q must have full column rank; for a k x (k-d) input the result is a
    d x k matrix w with orthonormal rows and w @ q = 0.
    """
    q = np.asarray(q, dtype=float)
    k, cols = q.shape
    if cols > k:
        raise ValueError(f"more columns than rows: {q.shape}")
    try:
        u, s, _ = np.linalg.svd(q, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"svd did not converge on {q.shape} matrix: {exc}") from exc
    rank = numeric_rank(s)
    if rank != cols:
        raise NumericError(
            f"input is rank deficient: numeric rank {rank} < {cols} columns"
        )
    return u[:, rank:].T.copy()
