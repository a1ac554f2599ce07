"""Data-based Lyapunov inequality: assembly, feasibility, verification.

Given a data matrix Psi (shape (d+1) x d) split into its first d rows X+ and
last d rows X, a quadratic form P certifies decay at rate ``decay`` iff

    F(P) := decay * X^T P X  -  X+^T P X+   is positive definite,

with P itself positive definite.  Feasibility is decided by maximizing the
balanced margin

    m(P) = min( lambda_min(P),  lambda_min(F(P)) / s ),
    s = max(1, sigma_max(Psi)^2),

over symmetric P with trace(P) = d.  The optimizer is a projected subgradient
ascent seeded with exact interior points obtained by solving the linear
matrix equation F(P) = Q for canonical right-hand sides; the seeds are built
from the data matrices alone.  Margins of any returned certificate are
recomputed from scratch, independently of the optimizer's bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DimensionError,
    NotPositiveDefiniteError,
    NumericalError,
    SingularMatrixError,
)
from .psi import PsiMatrix


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 20000
    feas_tol: float = 1e-8
    step_constant: float = 1.0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.feas_tol > 0.0:
            raise ValueError("feas_tol must be > 0")
        if not self.step_constant > 0.0:
            raise ValueError("step_constant must be > 0")


@dataclass(frozen=True)
class LmiProblem:
    """One subsystem's decay inequality at a fixed rate."""

    psi: PsiMatrix
    decay: float
    X_plus: np.ndarray
    X: np.ndarray
    scale: float

    @classmethod
    def from_psi(cls, psi: PsiMatrix, decay: float) -> "LmiProblem":
        if not 0.0 < decay < 1.0:
            raise ValueError(f"decay rate must lie in ]0, 1[, got {decay}")
        d = psi.dimension
        matrix = np.asarray(psi.matrix, dtype=float)
        if matrix.shape != (d + 1, d):
            raise DimensionError(
                f"data matrix must be (d+1) x d, got {matrix.shape}"
            )
        _, largest = linalg.min_max_singular(matrix)
        return cls(
            psi=psi,
            decay=float(decay),
            X_plus=np.ascontiguousarray(matrix[:d, :]),
            X=np.ascontiguousarray(matrix[1:, :]),
            scale=max(1.0, largest * largest),
        )

    @property
    def dimension(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class LyapunovCertificate:
    """A verified strictly feasible quadratic form, normalized to trace d.

    ``margin_pd`` is the smallest eigenvalue of P; ``margin_lmi`` the smallest
    eigenvalue of F(P) (unscaled).  ``iterations_used`` records the ascent
    iteration at which the best iterate was found.
    """

    P: np.ndarray
    decay: float
    margin_pd: float
    margin_lmi: float
    iterations_used: int

    def __post_init__(self):
        p = np.asarray(self.P, dtype=float)
        object.__setattr__(self, "P", p)
        d = p.shape[0]
        if not (self.margin_pd > 0.0 and self.margin_lmi > 0.0):
            raise ValueError(
                f"certificate margins must be strictly positive, got "
                f"pd={self.margin_pd}, lmi={self.margin_lmi}"
            )
        if abs(float(np.trace(p)) - d) > 1e-9:
            raise ValueError(
                f"certificate must be normalized to trace {d}, got {np.trace(p)}"
            )


def lmi_value(problem: LmiProblem, P) -> np.ndarray:
    """Evaluate F(P); positive definiteness of the result certifies decay."""
    p = np.asarray(P, dtype=float)
    d = problem.dimension
    if p.shape != (d, d):
        raise DimensionError(f"P must be {d} x {d}, got {p.shape}")
    value = problem.decay * (problem.X.T @ p @ problem.X) \
        - problem.X_plus.T @ p @ problem.X_plus
    return 0.5 * (value + value.T)


def verify_certificate(problem: LmiProblem, P) -> tuple[float, float]:
    """Margins (lambda_min(P), lambda_min(F(P))) for an arbitrary symmetric P.

    Accepts externally supplied matrices; no normalization is assumed.
    """
    p = np.asarray(P, dtype=float)
    d = problem.dimension
    if p.shape != (d, d):
        raise DimensionError(f"P must be {d} x {d}, got {p.shape}")
    margin_pd = float(linalg.sym_eig(p).eigenvalues[0])
    margin_lmi = float(linalg.sym_eig(lmi_value(problem, p)).eigenvalues[0])
    return margin_pd, margin_lmi


def _balanced_margin(problem: LmiProblem, p: np.ndarray) -> float:
    margin_pd, margin_lmi = verify_certificate(problem, p)
    return min(margin_pd, margin_lmi / problem.scale)


def _interior_seeds(problem: LmiProblem) -> list[np.ndarray]:
    """Exact feasible starts from the linear matrix equation F(P) = Q.

    Solves the vectorized d^2 x d^2 system for Q = I and Q = X^T X and keeps
    solutions that pass Cholesky, normalized to trace d.  Both systems are
    assembled purely from the data matrices.
    """
    X, Xp = problem.X, problem.X_plus
    d = problem.dimension
    operator = problem.decay * np.kron(X.T, X.T) - np.kron(Xp.T, Xp.T)
    seeds = []
    for rhs in (np.eye(d), X.T @ X):
        try:
            vec = linalg.lu_solve(operator, rhs.ravel())
        except SingularMatrixError:
            continue
        p = vec.reshape(d, d)
        p = 0.5 * (p + p.T)
        try:
            linalg.cholesky(p)
        except (NotPositiveDefiniteError, ValueError):
            continue
        seeds.append(p * (d / float(np.trace(p))))
    return seeds


def _ascend(X, Xp, lam, s, max_iter, c0, P0):  # pragma: no cover - jitted
    d = X.shape[0]
    P = P0.copy()
    best_m = -1e300
    best_P = P0.copy()
    best_iter = 0
    for k in range(1, max_iter + 1):
        wP, VP = np.linalg.eigh(P)
        F = lam * (X.T @ P @ X) - Xp.T @ P @ Xp
        F = 0.5 * (F + F.T)
        wF, VF = np.linalg.eigh(F)
        margin_p = wP[0]
        margin_f = wF[0] / s
        m = margin_p if margin_p < margin_f else margin_f
        if m > best_m:
            best_m = m
            best_P = P.copy()
            best_iter = k
        if margin_p <= margin_f:
            u = np.ascontiguousarray(VP[:, 0])
            g = np.outer(u, u)
        else:
            v = np.ascontiguousarray(VF[:, 0])
            xv = X @ v
            xpv = Xp @ v
            g = (lam * np.outer(xv, xv) - np.outer(xpv, xpv)) / s
        P = P + (c0 / np.sqrt(k)) * g
        P = 0.5 * (P + P.T)
        tr = 0.0
        for i in range(d):
            tr += P[i, i]
        shift = (tr - d) / d
        for i in range(d):
            P[i, i] -= shift
    return best_m, best_P, best_iter


_ASCEND_JIT = None


def _ascend_kernel():
    # jit on first use so certificate-only code paths never pay compilation
    global _ASCEND_JIT
    if _ASCEND_JIT is None:
        import numba

        _ASCEND_JIT = numba.njit(cache=True)(_ascend)
    return _ASCEND_JIT


def solve_feasibility(
    problem: LmiProblem, options: SolverOptions | None = None
) -> LyapunovCertificate | None:
    """Decide strict feasibility of the decay inequality at the problem's rate.

    Returns a certificate when a symmetric P with balanced margin above
    ``feas_tol`` is found, None otherwise (an infeasible verdict, not an
    error).  Deterministic: identical inputs yield identical certificates.
    """
    opts = options or SolverOptions()
    d = problem.dimension
    start = np.eye(d)
    start_margin = _balanced_margin(problem, start)
    for seed in _interior_seeds(problem):
        margin = _balanced_margin(problem, seed)
        if margin > start_margin:
            start, start_margin = seed, margin
    kernel = _ascend_kernel()
    best_m, best_p, best_iter = kernel(
        problem.X,
        problem.X_plus,
        problem.decay,
        problem.scale,
        opts.max_iterations,
        opts.step_constant,
        np.ascontiguousarray(start),
    )
    if not (np.isfinite(best_m) and np.all(np.isfinite(best_p))):
        raise NumericalError("feasibility ascent produced non-finite iterates")
    if best_m <= opts.feas_tol:
        return None
    p = 0.5 * (best_p + best_p.T)
    p = p - ((float(np.trace(p)) - d) / d) * np.eye(d)
    margin_pd, margin_lmi = verify_certificate(problem, p)
    return LyapunovCertificate(
        P=p,
        decay=problem.decay,
        margin_pd=margin_pd,
        margin_lmi=margin_lmi,
        iterations_used=best_iter,
    )
