"""Dense complex linear algebra used by the rest of the package.

Everything numeric goes through here so the backend (numpy/scipy LAPACK)
can be swapped in one place. ``singular_values_extended`` is the one
escape hatch to arbitrary precision, for matrices whose condition number
is beyond what double precision can resolve.
"""
from __future__ import annotations

import mpmath
import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceFailure, RankDeficient, Singular


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def svd(m):
    """Thin SVD ``M = U diag(s) W^H`` with ``s`` descending.

    Returns ``(s, U, W)``; note ``W`` (not ``W^H``) so columns are the right
    singular vectors.
    """
    a = as_matrix(m)
    try:
        u, s, wh = sla.svd(a, full_matrices=False, lapack_driver="gesdd")
    except (np.linalg.LinAlgError, ValueError):
        try:
            u, s, wh = sla.svd(a, full_matrices=False, lapack_driver="gesvd")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise ConvergenceFailure(str(exc)) from exc
    return s, u, wh.conj().T


def singular_values(m) -> np.ndarray:
    a = as_matrix(m)
    try:
        return sla.svdvals(a)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(str(exc)) from exc


def singular_values_extended(m, dps: int = 30, max_dps: int = 480) -> np.ndarray:
    """Singular values computed in ``dps``-digit arithmetic, returned as float64.

    ``m`` is either a matrix, whose entries are taken as given, or a callable
    returning an ``mpmath.matrix`` built at the current working precision.
    The callable form matters for badly conditioned matrices: entries rounded
    to double already perturb the spectrum at the ``1e-16`` level. Precision
    doubles until the smallest singular value sits well above the working
    epsilon relative to the largest.
    """
    if not callable(m):
        a = as_matrix(m)
        m = lambda: mpmath.matrix(a.tolist())  # noqa: E731
    while True:
        with mpmath.workdps(dps):
            s = mpmath.svd_c(m(), compute_uv=False)
            vals = sorted((abs(x) for x in s), reverse=True)
            resolved = vals[0] == 0 or vals[-1] > vals[0] * mpmath.mpf(10) ** (10 - dps)
            out = np.array([float(v) for v in vals])
        if resolved or dps >= max_dps:
            return out
        dps *= 2


def eig(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError("eig needs a square matrix")
    try:
        return sla.eigvals(a)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(str(exc)) from exc


def lstsq(a, b, rcond: float = 1e-14) -> np.ndarray:
    """Least squares via a thin QR factorization; rows must be >= cols."""
    a = as_matrix(a)
    b = np.asarray(b, dtype=complex)
    rows, cols = a.shape
    if rows < cols:
        raise RankDeficient(f"{rows}x{cols} system is underdetermined")
    q, r = sla.qr(a, mode="economic")
    diag = np.abs(np.diag(r))
    if diag.size and diag.min() <= rcond * max(diag.max(), np.finfo(float).tiny):
        raise RankDeficient("triangular factor is numerically singular")
    return sla.solve_triangular(r, q.conj().T @ b)


def min_norm_lstsq(a, b, rcond: float = 1e-12) -> np.ndarray:
    """Minimum-norm least squares through the SVD; accepts rank-deficient ``a``."""
    s, u, w = svd(a)
    keep = s > rcond * (s[0] if s.size else 0.0)
    coef = (adjoint(u[:, keep]) @ np.asarray(b, dtype=complex)) / s[keep]
    return w[:, keep] @ coef


def solve(m, b) -> np.ndarray:
    a = as_matrix(m)
    try:
        return sla.solve(a, np.asarray(b, dtype=complex))
    except np.linalg.LinAlgError as exc:
        raise Singular(str(exc)) from exc


def matmul(a, b) -> np.ndarray:
    return np.asarray(a, dtype=complex) @ np.asarray(b, dtype=complex)


def adjoint(a) -> np.ndarray:
    return np.asarray(a, dtype=complex).conj().T


def two_norm(x) -> float:
    """Euclidean norm of a vector, spectral norm of a matrix."""
    x = np.asarray(x)
    if x.ndim <= 1:
        return float(np.linalg.norm(x))
    return float(singular_values(x)[0]) if x.size else 0.0
