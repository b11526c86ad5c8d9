"""Small dense linear-algebra helpers used across modules."""
from __future__ import annotations

import numpy as np
import scipy.linalg

RANK_TOL = 1e-8


def orthonormal_span(vectors, tol: float = RANK_TOL, scale: float | None = None) -> np.ndarray:
    """Orthonormal columns spanning the columns of ``vectors``.

    Singular values below ``tol`` times ``scale`` (default: the largest singular
    value) are dropped.
    """
    a = np.asarray(vectors, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.size == 0 or a.shape[1] == 0:
        return np.zeros((a.shape[0], 0))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    ref = s[0] if scale is None else scale
    if ref <= 0:
        return np.zeros((a.shape[0], 0))
    return u[:, s > tol * ref]


def null_space(a, tol: float = RANK_TOL, scale: float | None = None) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    ref = (s[0] if s.size else 0.0) if scale is None else scale
    if ref <= 0:
        return np.eye(n)
    rank = int(np.sum(s > tol * ref))
    return vt[rank:].T


def complement(basis, dim: int) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``basis`` in R^dim."""
    basis = np.asarray(basis, dtype=float).reshape(dim, -1)
    if basis.shape[1] == 0:
        return np.eye(dim)
    return null_space(basis.T, scale=1.0)


def projector(basis) -> np.ndarray:
    basis = np.asarray(basis, dtype=float)
    return basis @ basis.T


def principal_angles(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[1] == 0 or b.shape[1] == 0:
        return np.zeros(0)
    return scipy.linalg.subspace_angles(a, b)


def same_span(a, b, tol: float = 1e-6) -> bool:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[1] != b.shape[1]:
        return False
    if a.shape[1] == 0:
        return True
    return bool(np.max(principal_angles(a, b)) <= tol)


def skew_residual(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m + m.T))) if m.size else 0.0


def orthogonality_residual(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m.T @ m - np.eye(m.shape[1])))) if m.size else 0.0


def polar_orthogonal(m) -> np.ndarray:
    """Closest matrix with orthonormal columns (polar factor)."""
    u, _, vt = np.linalg.svd(m, full_matrices=False)
    return u @ vt


def group_eigenvalues(values, tol: float) -> list[list[int]]:
    """Cluster sorted eigenvalue indices whose neighbours differ by <= tol."""
    order = np.argsort(values)
    groups: list[list[int]] = []
    for idx in order:
        if groups and abs(values[idx] - values[groups[-1][-1]]) <= tol:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    return groups
