"""Data-driven stabilizing minimum dwell times for switched linear systems.

Computes, from finite state trajectories of the individual subsystems and
without identifying their state-space models, an integer dwell time tau such
that the switched system is globally asymptotically stable under every
switching signal that stays at least tau steps in each mode.
"""

from .data import (
    CertificateRecord,
    DwellTimeResult,
    SubsystemDataset,
    SubsystemTrace,
    Trace,
    dataset_from_traces,
    parse_dataset,
    parse_result,
    serialize_dataset,
    serialize_result,
)
from .dwell import (
    AlgorithmConfig,
    compute_min_dwell,
    dwell_time,
    line_search_lambda,
    mu_max,
    mu_pairwise,
)
from .errors import (
    AssumptionViolatedError,
    DimensionError,
    DwellCertError,
    GenerationError,
    InfeasibleGridError,
    NotPositiveDefiniteError,
    NumericalError,
    ParseError,
    SingularMatrixError,
    ValidationError,
)
from .estimator import MinDwellTime
from .lmi import (
    LmiProblem,
    LyapunovCertificate,
    SolverOptions,
    lmi_value,
    solve_feasibility,
    verify_certificate,
)
from .psi import PsiMatrix, build_psi, build_q, find_psi
from .sim import (
    MonteCarloReport,
    SubsystemModel,
    SwitchedTrajectory,
    SwitchingSignal,
    companion_from_coeffs,
    generate_dataset,
    monte_carlo_gas,
    random_dwell_signal,
    random_schur_companion,
    simulate_subsystem,
    simulate_switched,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmConfig",
    "AssumptionViolatedError",
    "CertificateRecord",
    "DimensionError",
    "DwellCertError",
    "DwellTimeResult",
    "GenerationError",
    "InfeasibleGridError",
    "LmiProblem",
    "LyapunovCertificate",
    "MinDwellTime",
    "MonteCarloReport",
    "NotPositiveDefiniteError",
    "NumericalError",
    "ParseError",
    "PsiMatrix",
    "SingularMatrixError",
    "SolverOptions",
    "SubsystemDataset",
    "SubsystemModel",
    "SubsystemTrace",
    "SwitchedTrajectory",
    "SwitchingSignal",
    "Trace",
    "ValidationError",
    "build_psi",
    "build_q",
    "companion_from_coeffs",
    "compute_min_dwell",
    "dataset_from_traces",
    "dwell_time",
    "find_psi",
    "generate_dataset",
    "line_search_lambda",
    "lmi_value",
    "monte_carlo_gas",
    "mu_max",
    "mu_pairwise",
    "parse_dataset",
    "parse_result",
    "random_dwell_signal",
    "random_schur_companion",
    "serialize_dataset",
    "serialize_result",
    "simulate_subsystem",
    "simulate_switched",
    "solve_feasibility",
    "verify_certificate",
]
