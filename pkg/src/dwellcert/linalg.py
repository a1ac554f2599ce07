"""Dense linear-algebra kernels for small matrices (d up to ~20).

Thin, contract-enforcing wrappers around LAPACK via numpy/scipy, plus a
Stein-equation feasibility oracle used as model-based ground truth in tests.
All tolerances are relative to the Frobenius norm with an absolute floor of
1e-14 so zero matrices behave sensibly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor
from scipy.linalg import lu_solve as _lu_solve_factored

from .errors import (
    DimensionError,
    NotPositiveDefiniteError,
    NumericalError,
    SingularMatrixError,
)

ABS_FLOOR = 1e-14


def _as_matrix(value, name: str) -> np.ndarray:
    m = np.asarray(value, dtype=float)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def _require_square(m: np.ndarray, name: str) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")


def _require_symmetric(m: np.ndarray, name: str) -> np.ndarray:
    """Check relative asymmetry below 1e-12 and return the symmetrized matrix."""
    scale = max(float(np.linalg.norm(m)), ABS_FLOOR)
    asym = float(np.linalg.norm(m - m.T))
    if asym > 1e-12 * scale:
        raise ValueError(
            f"{name} is not symmetric: relative asymmetry {asym / scale:.3e}"
        )
    return 0.5 * (m + m.T)


@dataclass(frozen=True)
class SymEigResult:
    """Eigendecomposition of a symmetric matrix.

    ``eigenvalues`` are sorted ascending; column k of ``eigenvectors`` is the
    unit eigenvector paired with ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eig(matrix) -> SymEigResult:
    """Full eigendecomposition of a symmetric matrix.

    The input is symmetrized as (M + M^T)/2 before factorization and must be
    symmetric to within 1e-12 relative asymmetry.  Guarantees on the output:
    eigenvalues ascending, orthonormal eigenvectors, and reconstruction
    ``M = V diag(w) V^T`` to 1e-9 * ||M||_F.
    """
    m = _as_matrix(matrix, "matrix")
    _require_square(m, "matrix")
    m = _require_symmetric(m, "matrix")
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigendecomposition failed: {exc}") from exc
    return SymEigResult(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def cholesky(matrix) -> np.ndarray:
    """Lower-triangular L with L L^T = M and strictly positive diagonal.

    Raises NotPositiveDefiniteError when any pivot is non-positive; callers
    use that failure as the positive-definiteness test.
    """
    m = _as_matrix(matrix, "matrix")
    _require_square(m, "matrix")
    m = _require_symmetric(m, "matrix")
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            "matrix is not positive definite (Cholesky pivot <= 0)"
        ) from exc


def lu_solve(matrix, rhs) -> np.ndarray:
    """Solve A x = b by LU factorization with partial pivoting.

    Raises SingularMatrixError when any pivot magnitude falls below
    1e-13 * ||A||_F.
    """
    a = _as_matrix(matrix, "A")
    _require_square(a, "A")
    b = np.asarray(rhs, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise DimensionError(
            f"right-hand side length {b.shape[0]} does not match A of shape {a.shape}"
        )
    if not np.all(np.isfinite(b)):
        raise ValueError("right-hand side contains non-finite entries")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(a, check_finite=False)
    pivot_tol = 1e-13 * max(float(np.linalg.norm(a)), ABS_FLOOR)
    if a.shape[0] and float(np.min(np.abs(np.diag(lu)))) < pivot_tol:
        raise SingularMatrixError(
            f"matrix is singular to working precision (pivot < {pivot_tol:.3e})"
        )
    return _lu_solve_factored((lu, piv), b, check_finite=False)


def min_max_singular(matrix) -> tuple[float, float]:
    """Extreme singular values of a tall matrix (rows >= cols).

    Computed as square roots of the extreme eigenvalues of M^T M; tiny
    negative eigenvalues from round-off are clamped to zero.
    """
    m = _as_matrix(matrix, "matrix")
    if m.shape[0] < m.shape[1]:
        raise DimensionError(
            f"matrix must have rows >= cols, got shape {m.shape}"
        )
    gram = m.T @ m
    eig = sym_eig(gram)
    smallest = float(np.sqrt(max(eig.eigenvalues[0], 0.0)))
    largest = float(np.sqrt(max(eig.eigenvalues[-1], 0.0)))
    return smallest, largest


def stein_feasibility_oracle(matrix, decay) -> tuple[bool, np.ndarray | None]:
    """Model-based decay test: does A admit a quadratic form contracting at ``decay``?

    Solves (A/sqrt(decay))^T P (A/sqrt(decay)) - P = -I as a d^2 x d^2 linear
    system via Kronecker vectorization and accepts iff the solution passes
    Cholesky.  When feasible, the returned P satisfies
    A^T P A - decay * P = -decay * I to 1e-8 * ||P||_F.

    This is ground truth for tests only; the data-driven path never calls it.
    """
    a = _as_matrix(matrix, "A")
    _require_square(a, "A")
    if not 0.0 < decay <= 1.0:
        raise ValueError(f"decay must lie in ]0, 1], got {decay}")
    d = a.shape[0]
    scaled = a / np.sqrt(decay)
    system = np.kron(scaled.T, scaled.T) - np.eye(d * d)
    rhs = -np.eye(d).ravel()
    try:
        solution = lu_solve(system, rhs)
    except SingularMatrixError:
        # marginal spectrum (eigenvalue product at 1): treated as infeasible
        return False, None
    p = solution.reshape(d, d)
    p = 0.5 * (p + p.T)
    try:
        cholesky(p)
    except NotPositiveDefiniteError:
        return False, None
    residual = float(np.linalg.norm(a.T @ p @ a - decay * p + decay * np.eye(d)))
    if residual > 1e-8 * max(float(np.linalg.norm(p)), ABS_FLOOR):
        return False, None
    return True, p
