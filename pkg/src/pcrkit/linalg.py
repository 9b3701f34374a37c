"""Dense numeric core: symmetric eigensolver, least squares, SPD inverse.

The eigensolver is a cyclic Jacobi iteration written against plain numpy
arrays.  Jacobi is slower than a blocked Householder reduction but it is
simple, unconditionally stable for symmetric input, and its behaviour is
easy to pin down bit for bit, which matters more here than speed: the
matrices this package sees are correlation matrices of at most a few
dozen indicators.

Least squares goes through a QR factorization with an explicit pivot
check so that rank deficiency surfaces as a structured error naming the
offending column instead of a silently garbage coefficient vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    AsymmetryError,
    ConvergenceError,
    NonFiniteError,
    NonSquareError,
    NotPositiveDefiniteError,
    RankDeficiencyError,
    ShapeMismatchError,
)

# Relative off-diagonal tolerance for Jacobi convergence.
JACOBI_TOL = 1e-12
# Hard cap on full sweeps; 9x9 correlation matrices need fewer than ten.
JACOBI_MAX_SWEEPS = 100
# Relative symmetry tolerance for inputs that claim to be symmetric.
SYMMETRY_TOL = 1e-9
# A diagonal entry of R below this multiple of the largest one marks the
# design matrix as rank deficient.
RANK_TOL = 1e-12
# Smallest eigenvalue an SPD matrix may have before inversion is refused.
SPD_EIGENVALUE_MIN = 1e-10


def as_checked_array(a, where: str = "matrix") -> np.ndarray:
    """Return ``a`` as a float64 array, rejecting NaN and infinity."""
    out = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(out)):
        bad = np.argwhere(~np.isfinite(out))[0]
        raise NonFiniteError(where, tuple(int(i) for i in bad))
    return out


def check_symmetric(a, tol: float = SYMMETRY_TOL, where: str = "matrix") -> np.ndarray:
    """Validate that ``a`` is a square, finite, symmetric 2-d array.

    Symmetry is relative: |a_ij - a_ji| must not exceed ``tol`` times the
    largest absolute entry.  Returns a float64 copy.
    """
    out = as_checked_array(a, where)
    if out.ndim != 2 or out.shape[0] != out.shape[1]:
        raise NonSquareError(out.shape)
    scale = np.abs(out).max() if out.size else 0.0
    gap = np.abs(out - out.T)
    worst = gap.max() if gap.size else 0.0
    if worst > tol * max(scale, 1.0):
        i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
        raise AsymmetryError(int(i), int(j), float(gap[i, j]))
    return out.copy()


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenvalues in descending order with column-aligned eigenvectors.

    ``eigenvectors[:, j]`` belongs to ``eigenvalues[j]``.  Each vector is
    unit length with its largest-magnitude entry non-negative (ties are
    broken toward the lowest index), so repeated calls on the same input
    are bit-identical.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _offdiag_norm(a: np.ndarray) -> float:
    # Computed from the strict upper triangle directly; deriving it from
    # total and diagonal norms cancels catastrophically near convergence.
    n = a.shape[0]
    upper = a[np.triu_indices(n, 1)]
    return float(np.sqrt(2.0) * np.linalg.norm(upper))


def eigen_symmetric(a, max_sweeps: int = JACOBI_MAX_SWEEPS) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Parameters
    ----------
    a : array_like
        Symmetric matrix.  Asymmetric or non-finite input raises.
    max_sweeps : int
        Cap on full cyclic sweeps before a convergence error.

    Returns
    -------
    EigenDecomposition
        Sorted descending; the sort is stable so equal eigenvalues keep
        their discovery order.

    Notes
    -----
    One sweep rotates every strict upper-triangle pair (p, q) in row
    order.  Convergence is declared when the off-diagonal Frobenius norm
    falls below ``JACOBI_TOL`` times the Frobenius norm of the input.
    For the tiny rotation angles near convergence the classic guard
    t = a_pq / (a_qq - a_pp) avoids overflow in the exact formula.
    """
    work = check_symmetric(a)
    n = work.shape[0]
    if n == 0:
        return EigenDecomposition(np.empty(0), np.empty((0, 0)))
    vectors = np.eye(n)
    frobenius = float(np.linalg.norm(work))
    if frobenius == 0.0:
        return _finish_eigen(np.zeros(n), vectors)

    sweeps = 0
    while True:
        off = _offdiag_norm(work)
        if off <= JACOBI_TOL * frobenius:
            break
        if sweeps >= max_sweeps:
            raise ConvergenceError("jacobi eigensolver", sweeps, off / frobenius)
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if apq == 0.0:
                    continue
                diff = work[q, q] - work[p, p]
                if abs(apq) < 1e-36 * abs(diff):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = 1.0 / (abs(theta) + np.hypot(1.0, theta))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rp = work[:, p].copy()
                rq = work[:, q].copy()
                work[:, p] = c * rp - s * rq
                work[:, q] = s * rp + c * rq
                rp = work[p, :].copy()
                rq = work[q, :].copy()
                work[p, :] = c * rp - s * rq
                work[q, :] = s * rp + c * rq
                work[p, q] = 0.0
                work[q, p] = 0.0
                vp = vectors[:, p].copy()
                vq = vectors[:, q].copy()
                vectors[:, p] = c * vp - s * vq
                vectors[:, q] = s * vp + c * vq
    return _finish_eigen(np.diagonal(work).copy(), vectors)


def _finish_eigen(values: np.ndarray, vectors: np.ndarray) -> EigenDecomposition:
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        pivot = int(np.argmax(np.abs(col)))
        if col[pivot] < 0.0:
            vectors[:, j] = -col
    return EigenDecomposition(values, vectors)


def solve_least_squares(design, response, names: tuple[str, ...] | None = None) -> np.ndarray:
    """Least-squares coefficients for ``design @ beta ~ response`` via QR.

    Requires at least as many rows as columns.  A numerically dependent
    column (diagonal of R below ``RANK_TOL`` times the largest) raises
    :class:`RankDeficiencyError` identifying the column, by name when
    ``names`` is supplied.
    """
    x = as_checked_array(design, "design matrix")
    y = as_checked_array(response, "response vector")
    if x.ndim != 2:
        raise ShapeMismatchError("design matrix", "(m, n)", x.shape)
    m, n = x.shape
    if y.shape != (m,):
        raise ShapeMismatchError("response vector", f"({m},)", y.shape)
    if m < n:
        raise ShapeMismatchError(
            "design matrix", "at least as many rows as columns", x.shape
        )
    q, r = np.linalg.qr(x)
    diag = np.abs(np.diagonal(r))
    scale = float(diag.max()) if n else 0.0
    if scale == 0.0 or bool(np.any(diag < RANK_TOL * scale)):
        bad = 0 if scale == 0.0 else int(np.argmax(diag < RANK_TOL * scale))
        name = names[bad] if names is not None and bad < len(names) else None
        raise RankDeficiencyError(column=bad, pivot=float(diag[bad]), name=name)
    return solve_triangular(r, q.T @ y, lower=False)


def invert_spd(a, context: str = "matrix") -> np.ndarray:
    """Inverse of a symmetric positive definite matrix.

    Goes through the Jacobi eigendecomposition so the same convergence
    and symmetry guarantees apply.  Any eigenvalue at or below
    ``SPD_EIGENVALUE_MIN`` raises :class:`NotPositiveDefiniteError`
    carrying the smallest eigenvalue.
    """
    eig = eigen_symmetric(a)
    smallest = float(eig.eigenvalues[-1]) if eig.eigenvalues.size else 0.0
    if eig.eigenvalues.size == 0 or smallest <= SPD_EIGENVALUE_MIN:
        raise NotPositiveDefiniteError(smallest, context)
    inv = (eig.eigenvectors / eig.eigenvalues) @ eig.eigenvectors.T
    return (inv + inv.T) / 2.0
