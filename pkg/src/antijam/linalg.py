"""Hermitian eigendecomposition and linear solves for small complex matrices.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The eigensolver
is a cyclic complex Jacobi method: each rotation first removes the phase of
the pivot element, then applies a real Givens rotation that annihilates it.
"""

from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ConditioningError, ConvergenceError, DimensionError, SymmetryError

MAX_SWEEPS = 100
OFF_DIAGONAL_TOL = 1e-12
HERMITIAN_TOL = 1e-8
CONDITION_FLOOR = 1e-12
DEFAULT_LOADING = 1e-10


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # columns aligned with eigenvalues
    sweeps: int


def as_complex_matrix(a, name="matrix"):
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionError(f"{name} has non-finite entries")
    return m


def _check_hermitian(h):
    n, m = h.shape
    if n != m:
        raise DimensionError(f"matrix must be square, got {n}x{m}")
    scale = np.abs(h).sum(axis=1).max() if n else 0.0
    skew = np.abs(h - h.conj().T).sum(axis=1).max() if n else 0.0
    if skew > HERMITIAN_TOL * scale:
        raise SymmetryError(f"matrix is not Hermitian (skew {skew:.3e} vs scale {scale:.3e})")


def hermitian_eig(h, max_sweeps=MAX_SWEEPS, tol=OFF_DIAGONAL_TOL):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns eigenvalues in descending order (ties keep the original diagonal
    order) with orthonormal eigenvectors as columns.  Raises
    ``ConvergenceError`` if the off-diagonal norm is still above
    ``tol * ||H||_F`` after ``max_sweeps`` sweeps.
    """
    a = as_complex_matrix(h)
    _check_hermitian(a)
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    threshold = tol * np.linalg.norm(a)

    sweeps = 0
    while True:
        off = np.linalg.norm(a[~np.eye(n, dtype=bool)])
        if off <= threshold:
            break
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi eigensolver did not converge within {max_sweeps} sweeps "
                f"(off-diagonal norm {off:.3e})"
            )
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                app = a[p, p].real
                aqq = a[q, q].real
                theta = 0.5 * np.arctan2(2.0 * r, aqq - app)
                c, s = np.cos(theta), np.sin(theta)
                # diag(1, conj(phase)) @ [[c, s], [-s, c]]
                u = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = u.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ u
                a[p, q] = a[q, p] = 0.0

    values = np.real(np.diag(a)).copy()
    order = np.argsort(-values, kind="stable")
    return EigenDecomposition(values[order], v[:, order], sweeps)


def diagonal_load(h, factor=DEFAULT_LOADING):
    """Add ``factor * trace(H)/n`` to the diagonal."""
    a = as_complex_matrix(h)
    n = a.shape[0]
    return a + (factor * np.real(np.trace(a)) / n) * np.eye(n)


def solve_hermitian(h, b):
    """Solve ``H x = b`` for Hermitian positive definite ``H``.

    Uses a Cholesky factorization; positive definiteness is checked against
    the Jacobi spectrum so near-singular systems fail loudly rather than
    returning garbage.
    """
    a = as_complex_matrix(h)
    _check_hermitian(a)
    rhs = np.asarray(b, dtype=np.complex128)
    if rhs.shape[0] != a.shape[0]:
        raise DimensionError(f"rhs length {rhs.shape[0]} does not match matrix size {a.shape[0]}")
    lam = hermitian_eig(a).eigenvalues
    if lam[0] <= 0.0 or lam[-1] <= CONDITION_FLOOR * lam[0]:
        raise ConditioningError(
            f"matrix is singular or indefinite (eigenvalue range [{lam[-1]:.3e}, {lam[0]:.3e}])"
        )
    a = 0.5 * (a + a.conj().T)
    return cho_solve(cho_factor(a, lower=True), rhs)
