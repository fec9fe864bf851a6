"""Dense complex-matrix primitives: Hermitian eigendecomposition, trace norm,
matrix exponential and density-matrix validation.

All routines operate on plain numpy arrays and are pure functions. Dimensions
stay small (the largest superoperator is 144 x 144), so everything is dense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class MatrixValidationError(ValueError):
    """An input matrix violates a structural precondition."""


class NonHermitianError(MatrixValidationError):
    pass


class TraceError(MatrixValidationError):
    pass


class NotPositiveError(MatrixValidationError):
    pass


@dataclass(frozen=True)
class Tolerances:
    """Single record of the numeric tolerances used across validation."""

    hermiticity: float = 1e-10
    trace: float = 1e-9
    psd: float = 1e-9


DEFAULT_TOL = Tolerances()


def _as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise MatrixValidationError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise MatrixValidationError("matrix contains non-finite entries")
    return m


def hermiticity_defect(m) -> float:
    """Max-norm of m - m^dagger."""
    m = np.asarray(m, dtype=complex)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def _require_hermitian(m: np.ndarray, tol: float) -> None:
    defect = hermiticity_defect(m)
    if defect > tol:
        raise NonHermitianError(
            f"matrix is not Hermitian: max |m_ij - conj(m_ji)| = {defect:.3e} > {tol:.1e}"
        )


def hermitian_eig(m, tol: float = DEFAULT_TOL.hermiticity):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvector matrix V with eigenvectors as
    columns) such that m = V diag(w) V^dagger.
    """
    m = _as_square(m)
    _require_hermitian(m, tol)
    w, v = np.linalg.eigh(m)
    return w, v


def trace_norm(m, tol: float = DEFAULT_TOL.hermiticity) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    w, _ = hermitian_eig(m, tol=tol)
    return float(np.sum(np.abs(w)))


def matrix_exponential(m) -> np.ndarray:
    """exp(m) for a square complex matrix (scaling-and-squaring Pade)."""
    m = _as_square(m)
    return scipy.linalg.expm(m)


def validate_density(rho, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity; return rho unchanged.

    Each failure raises a distinct error naming the offending magnitude.
    """
    rho = _as_square(rho)
    _require_hermitian(rho, tol.hermiticity)
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol.trace:
        raise TraceError(f"trace is {tr:.12g}, |trace - 1| = {abs(tr - 1.0):.3e} > {tol.trace:.1e}")
    w = np.linalg.eigvalsh(rho)
    if w[0] < -tol.psd:
        raise NotPositiveError(
            f"minimum eigenvalue {w[0]:.3e} below -{tol.psd:.1e}: not positive semidefinite"
        )
    return rho
