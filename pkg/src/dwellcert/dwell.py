"""End-to-end dwell-time computation.

Pipeline: build one data matrix per subsystem, line-search the decay-rate
grid {h, 2h, ..., kh} (kh < 1) for the smallest rate at which every
subsystem's inequality is strictly feasible, form the pairwise growth factors
mu_ij = lambda_max(P_j P_i^{-1}), and convert the worst factor into an
integer dwell time

    tau = ceil( ln(mu) / |ln(lambda_s)| + epsilon ).

An alternative mode evaluates every feasible grid rate and returns the one
minimizing tau, since the first-feasible exit rate need not be tau-optimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import linalg
from .data import CertificateRecord, DwellTimeResult, SubsystemDataset
from .errors import AssumptionViolatedError, InfeasibleGridError
from .lmi import LmiProblem, LyapunovCertificate, SolverOptions, solve_feasibility
from .psi import PsiMatrix, find_psi


@dataclass(frozen=True)
class AlgorithmConfig:
    h: float = 0.1
    epsilon: float = 0.01
    independence_tol: float = 1e-8
    solver: SolverOptions = field(default_factory=SolverOptions)
    optimize_tau: bool = False
    h_refine: bool = False

    def __post_init__(self):
        if not 0.0 < self.h < 1.0:
            raise ValueError(f"grid step h must lie in ]0, 1[, got {self.h}")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0.0 < self.independence_tol < 1.0:
            raise ValueError(
                f"independence tolerance must lie in ]0, 1[, got "
                f"{self.independence_tol}"
            )


def rate_grid(h: float) -> list[float]:
    """Grid {h, 2h, ..., kh} with k the largest integer satisfying kh < 1.

    Values are rounded to 12 decimals so grid points are exact decimals
    (7 * 0.1 yields 0.7, not 0.7000000000000001).
    """
    grid = []
    i = 1
    while True:
        value = round(i * h, 12)
        if value >= 1.0:
            break
        grid.append(value)
        i += 1
    return grid


def line_search_lambda(
    psis: list[PsiMatrix], config: AlgorithmConfig
) -> tuple[float, list[LyapunovCertificate]]:
    """Smallest grid rate feasible for all subsystems, with its certificates.

    Grid points are evaluated ascending with an early exit at the first
    all-feasible rate.  On total infeasibility with ``h_refine`` set, the
    search retries with h/10, up to three refinements.
    """
    h = config.h
    refinements = 3 if config.h_refine else 0
    for attempt in range(refinements + 1):
        for rate in rate_grid(h):
            certificates = []
            for psi in psis:
                cert = solve_feasibility(LmiProblem.from_psi(psi, rate), config.solver)
                if cert is None:
                    break
                certificates.append(cert)
            if len(certificates) == len(psis):
                return rate, certificates
        if attempt < refinements:
            h = h / 10.0
    raise InfeasibleGridError(
        f"no grid rate below 1 is feasible for all {len(psis)} subsystems "
        f"(step h={config.h}"
        + (f", refined down to {h}" if refinements else "")
        + ")"
    )


def mu_pairwise(p_i, p_j) -> float:
    """Smallest factor c with x^T P_j x <= c * x^T P_i x for all x.

    Equals the largest eigenvalue of P_j P_i^{-1}, computed through the
    Cholesky congruence L^{-1} P_j L^{-T} (P_i = L L^T) so only a symmetric
    eigensolver is needed.  Both inputs must be symmetric positive definite.
    """
    lower = linalg.cholesky(p_i)
    linalg.cholesky(p_j)
    p_j = np.asarray(p_j, dtype=float)
    half = solve_triangular(lower, p_j, lower=True)
    congruent = solve_triangular(lower, half.T, lower=True)
    eig = linalg.sym_eig(0.5 * (congruent + congruent.T))
    return float(eig.eigenvalues[-1])


def mu_max(p_matrices) -> tuple[float, np.ndarray]:
    """All pairwise growth factors and their maximum.

    ``p_matrices`` is a sequence of symmetric positive definite matrices,
    one per subsystem in id order; entry (i, j) of the returned matrix is
    ``mu_pairwise(P_i, P_j)``.
    """
    mats = [np.asarray(p, dtype=float) for p in p_matrices]
    if not mats:
        raise ValueError("at least one matrix is required")
    n = len(mats)
    mu_matrix = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            mu_matrix[i, j] = 1.0 if i == j else mu_pairwise(mats[i], mats[j])
    return float(np.max(mu_matrix)), mu_matrix


def dwell_time(mu: float, lambda_s: float, epsilon: float) -> int:
    """Integer dwell time ceil(ln(mu)/|ln(lambda_s)| + epsilon)."""
    if not mu >= 1.0:
        raise ValueError(f"mu must be >= 1, got {mu}")
    if not 0.0 < lambda_s < 1.0:
        raise ValueError(f"lambda_s must lie in ]0, 1[, got {lambda_s}")
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    return math.ceil(math.log(mu) / abs(math.log(lambda_s)) + epsilon)


def _build_result(
    rate: float,
    certificates: list[LyapunovCertificate],
    psis: list[PsiMatrix],
    epsilon: float,
) -> DwellTimeResult:
    mu, mu_matrix = mu_max([c.P for c in certificates])
    tau = dwell_time(mu, rate, epsilon)
    records = tuple(
        CertificateRecord(
            id=i + 1,
            P=cert.P,
            margin_pd=cert.margin_pd,
            margin_lmi=cert.margin_lmi,
            t_offset=psi.t_offset,
        )
        for i, (cert, psi) in enumerate(zip(certificates, psis))
    )
    return DwellTimeResult(
        lambda_s=rate,
        epsilon=epsilon,
        mu=mu,
        tau=tau,
        mu_matrix=mu_matrix,
        certificates=records,
    )


def compute_min_dwell(
    dataset: SubsystemDataset, config: AlgorithmConfig | None = None
) -> DwellTimeResult:
    """Full pipeline from a trajectory dataset to a certified dwell time.

    With ``optimize_tau`` set, every feasible grid rate is evaluated and the
    smallest resulting tau wins (ties broken toward the smaller rate);
    otherwise the smallest feasible rate is used directly.
    """
    cfg = config or AlgorithmConfig()
    psis = []
    for sub in dataset.subsystems:
        try:
            psis.append(find_psi(sub.trace, cfg.independence_tol))
        except AssumptionViolatedError as exc:
            raise AssumptionViolatedError(
                f"subsystem {sub.id}: {exc}",
                best_ratio=exc.best_ratio,
                best_offset=exc.best_offset,
                subsystem_id=sub.id,
            ) from exc
    if not cfg.optimize_tau:
        rate, certificates = line_search_lambda(psis, cfg)
        return _build_result(rate, certificates, psis, cfg.epsilon)

    h = cfg.h
    refinements = 3 if cfg.h_refine else 0
    for attempt in range(refinements + 1):
        best: DwellTimeResult | None = None
        for rate in rate_grid(h):
            certificates = []
            for psi in psis:
                cert = solve_feasibility(LmiProblem.from_psi(psi, rate), cfg.solver)
                if cert is None:
                    break
                certificates.append(cert)
            if len(certificates) != len(psis):
                continue
            result = _build_result(rate, certificates, psis, cfg.epsilon)
            if best is None or result.tau < best.tau:
                best = result
        if best is not None:
            return best
        if attempt < refinements:
            h = h / 10.0
    raise InfeasibleGridError(
        f"no grid rate below 1 is feasible for all {len(psis)} subsystems "
        f"(step h={cfg.h})"
    )
