"""Scikit-learn style front end for the certification pipeline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .data import SubsystemDataset, dataset_from_traces
from .dwell import AlgorithmConfig, compute_min_dwell
from .lmi import SolverOptions


def _as_dataset(X) -> SubsystemDataset:
    if isinstance(X, SubsystemDataset):
        return X
    arr = np.asarray(X, dtype=float) if not isinstance(X, (list, tuple)) else None
    if arr is not None and arr.ndim == 3:
        return dataset_from_traces([arr[i] for i in range(arr.shape[0])])
    if isinstance(X, (list, tuple)):
        return dataset_from_traces([np.asarray(t, dtype=float) for t in X])
    raise ValueError(
        "X must be a SubsystemDataset, a sequence of (L+1, d) trace arrays, "
        "or a (N, L+1, d) array"
    )


class MinDwellTime(BaseEstimator):
    """Estimate a stabilizing minimum dwell time from subsystem trajectories.

    Fit on one state trace per subsystem; afterwards ``tau_`` holds an integer
    dwell time such that the switched system is globally asymptotically stable
    under every switching signal dwelling at least ``tau_`` steps per mode.

    Parameters mirror the pipeline configuration: ``h`` is the decay-rate grid
    step, ``epsilon`` the slack added before the ceiling, ``independence_tol``
    the data-matrix column-independence threshold, and the remaining options
    control the feasibility solver.  With ``optimize_tau`` the whole grid is
    searched for the smallest dwell time instead of exiting at the first
    feasible rate.

    Attributes after fit: ``lambda_s_`` (common decay rate), ``mu_``,
    ``mu_matrix_`` (pairwise growth factors), ``tau_``, ``certificates_``
    (per-subsystem quadratic forms with margins), ``result_`` (the full result
    record), ``n_subsystems_`` and ``dimension_``.

    >>> est = MinDwellTime(h=0.1).fit(traces)      # doctest: +SKIP
    >>> est.lambda_s_, est.tau_                    # doctest: +SKIP
    (0.7, 20)
    """

    def __init__(
        self,
        h=0.1,
        epsilon=0.01,
        independence_tol=1e-8,
        max_iterations=20000,
        feas_tol=1e-8,
        step_constant=1.0,
        optimize_tau=False,
        h_refine=False,
    ):
        self.h = h
        self.epsilon = epsilon
        self.independence_tol = independence_tol
        self.max_iterations = max_iterations
        self.feas_tol = feas_tol
        self.step_constant = step_constant
        self.optimize_tau = optimize_tau
        self.h_refine = h_refine

    def _config(self) -> AlgorithmConfig:
        return AlgorithmConfig(
            h=self.h,
            epsilon=self.epsilon,
            independence_tol=self.independence_tol,
            solver=SolverOptions(
                max_iterations=self.max_iterations,
                feas_tol=self.feas_tol,
                step_constant=self.step_constant,
            ),
            optimize_tau=self.optimize_tau,
            h_refine=self.h_refine,
        )

    def fit(self, X, y=None):
        dataset = _as_dataset(X)
        result = compute_min_dwell(dataset, self._config())
        self.n_subsystems_ = dataset.n_subsystems
        self.dimension_ = dataset.dimension
        self.lambda_s_ = result.lambda_s
        self.mu_ = result.mu
        self.mu_matrix_ = result.mu_matrix
        self.tau_ = result.tau
        self.certificates_ = result.certificates
        self.result_ = result
        return self
