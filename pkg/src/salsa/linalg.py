"""Dense symmetric linear algebra: jittered Cholesky, SPD solves, eigh.

Matrices are plain float64 ``numpy`` arrays. LAPACK (through numpy/scipy)
does the heavy lifting; this module adds the input checks, the jitter
escalation used for rank-deficient kernel matrices, and a descending
eigenvalue order.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NoConvergence, NonFinite, NotFactorizable, NotSymmetric

DEFAULT_JITTER_SCHEDULE = (0.0, 1e-10, 1e-8, 1e-6, 1e-4)
SYMMETRY_RTOL = 1e-10


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular ``L`` with ``L @ L.T == A + jitter * I``."""

    L: np.ndarray
    jitter: float = 0.0

    @property
    def n(self):
        return self.L.shape[0]

    def reconstruct(self):
        return self.L @ self.L.T


def as_matrix(A, name="matrix"):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite(f"{name} has non-finite entries")
    return A


def check_symmetric(A, rtol=SYMMETRY_RTOL, name="matrix"):
    A = as_matrix(A, name)
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if A.size and np.max(np.abs(A - A.T)) > rtol * scale:
        raise NotSymmetric(f"{name} is not symmetric within relative tolerance {rtol:g}")
    return A


def cholesky_factor(A, jitter_schedule=DEFAULT_JITTER_SCHEDULE):
    """Factor ``A + jitter * I`` for the first jitter in the schedule that works.

    Schedule entries are multiples of ``mean(diag(A))`` (a unit fallback is
    used if that mean is not positive). The first entry should be 0 so a
    well-conditioned matrix is factored exactly.

    Raises
    ------
    NotSymmetric, NonFinite
        On bad input.
    NotFactorizable
        If every entry of the schedule fails.
    """
    A = check_symmetric(A)
    n = A.shape[0]
    if n == 0:
        return CholeskyFactor(np.zeros((0, 0)), 0.0)
    scale = float(np.mean(np.diag(A)))
    if not scale > 0:
        scale = 1.0
    eye = np.eye(n)
    for multiple in jitter_schedule:
        jitter = float(multiple) * scale
        try:
            L = np.linalg.cholesky(A + jitter * eye if jitter else A)
        except np.linalg.LinAlgError:
            continue
        if np.all(np.isfinite(L)):
            return CholeskyFactor(L, jitter)
    raise NotFactorizable(
        f"Cholesky failed for every jitter in {tuple(jitter_schedule)} x {scale:.3g}"
    )


def solve_spd(factor, B):
    """Solve ``(A + jitter I) X = B`` given the factor of ``A``."""
    B = np.asarray(B, dtype=np.float64)
    if B.shape[0] != factor.n:
        raise DimensionMismatch(f"factor is {factor.n}x{factor.n} but right-hand side has {B.shape[0]} rows")
    if factor.n == 0:
        return B.copy()
    return scipy.linalg.cho_solve((factor.L, True), B, check_finite=False)


def eigen_sym(A):
    """Eigenvalues (descending) and orthonormal eigenvectors (columns) of symmetric ``A``."""
    A = check_symmetric(A)
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return w[::-1].copy(), V[:, ::-1].copy()
