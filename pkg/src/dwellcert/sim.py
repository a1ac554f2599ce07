"""Ground-truth side: companion models, switched simulation, Monte Carlo.

Everything here knows the true system matrices; nothing in the certification
path (psi/lmi/dwell) imports this module.  Models and trajectory data are
emitted as separate documents so certification provably consumes only data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import SubsystemDataset, SubsystemTrace, Trace
from .errors import GenerationError, ParseError, ValidationError
from .linalg import stein_feasibility_oracle
from .psi import find_psi

#: coefficient magnitude below which the companion matrix is declared rank-deficient
MIN_LEADING_COEFF = 1e-12

#: decay rate used as the Schur-stability test (slightly inside the unit circle)
SCHUR_TEST_RATE = 1.0 - 1e-9


@dataclass(frozen=True)
class SubsystemModel:
    """Companion-form system x(t+1) = A x(t).

    ``coefficients`` are (a_0, ..., a_{d-1}); the matrix's first row is
    (-a_{d-1}, ..., -a_1, -a_0) with an identity subdiagonal, so the
    characteristic polynomial is z^d + a_{d-1} z^{d-1} + ... + a_0.
    """

    coefficients: np.ndarray
    matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def companion_from_coeffs(coefficients) -> SubsystemModel:
    """Build the companion model; rejects |a_0| < 1e-12 (rank deficiency)."""
    coeffs = np.asarray(coefficients, dtype=float)
    if coeffs.ndim != 1 or coeffs.size < 1:
        raise ValidationError("coefficients must be a non-empty vector",
                              field="coefficients")
    if not np.all(np.isfinite(coeffs)):
        raise ValidationError("coefficients contain non-finite entries",
                              field="coefficients")
    if abs(coeffs[0]) < MIN_LEADING_COEFF:
        raise ValidationError(
            f"|a_0| = {abs(coeffs[0]):.3e} is below {MIN_LEADING_COEFF:.0e}; "
            "the companion matrix would be rank deficient",
            field="coefficients",
        )
    return SubsystemModel(coefficients=coeffs, matrix=_companion_matrix(coeffs))


def _companion_matrix(coeffs: np.ndarray) -> np.ndarray:
    d = coeffs.size
    matrix = np.zeros((d, d))
    matrix[0, :] = -coeffs[::-1]
    for i in range(1, d):
        matrix[i, i - 1] = 1.0
    return matrix


def random_schur_companion(
    dimension: int, rng: np.random.Generator, max_rejections: int = 10000
) -> SubsystemModel:
    """Rejection-sample companion coefficients uniform in [-1, 1]^d until stable.

    Stability is tested with the Stein-equation oracle at rate 1 - 1e-9,
    which avoids a nonsymmetric eigensolver and excludes marginally stable
    samples.  Deterministic given the generator state.
    """
    if dimension < 1:
        raise ValueError(f"dimension must be >= 1, got {dimension}")
    for _ in range(max_rejections):
        coeffs = rng.uniform(-1.0, 1.0, size=dimension)
        if abs(coeffs[0]) < MIN_LEADING_COEFF:
            continue
        matrix = _companion_matrix(coeffs)
        feasible, _ = stein_feasibility_oracle(matrix, SCHUR_TEST_RATE)
        if feasible:
            return SubsystemModel(coefficients=coeffs, matrix=matrix)
    raise GenerationError(
        f"no Schur-stable companion system found in {max_rejections} draws "
        f"at dimension {dimension}"
    )


def simulate_subsystem(model: SubsystemModel, x0, steps: int) -> Trace:
    """Run the exact linear recursion for ``steps`` steps (returns steps+1 states)."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.dimension,):
        raise ValidationError(
            f"initial state has shape {x0.shape}, model dimension is "
            f"{model.dimension}",
            field="x0",
        )
    states = np.empty((steps + 1, model.dimension))
    states[0] = x0
    for t in range(steps):
        states[t + 1] = model.matrix @ states[t]
    return Trace(states)


def generate_dataset(
    models: list[SubsystemModel],
    length: int,
    rng: np.random.Generator,
    tol: float,
    max_retries: int = 1000,
    initial_states=None,
) -> SubsystemDataset:
    """Simulate one trace per model, retrying initial states until usable.

    Initial states are drawn uniform in [-1, 1]^d and accepted iff the trace
    admits an independent data-matrix window at tolerance ``tol``.  Explicit
    ``initial_states`` (one vector per model) bypass the random draw but are
    still validated.
    """
    if not models:
        raise ValidationError("at least one model is required", field="models")
    dimension = models[0].dimension
    for model in models:
        if model.dimension != dimension:
            raise ValidationError("models disagree on dimension", field="models")
    if length < dimension:
        raise ValidationError(
            f"trace length {length} is below the dimension {dimension}; "
            "no data-matrix window would exist (L >= d required)",
            field="length",
        )
    subsystems = []
    for index, model in enumerate(models, start=1):
        if initial_states is not None:
            x0 = np.asarray(initial_states[index - 1], dtype=float)
            trace = simulate_subsystem(model, x0, length)
            find_psi(trace, tol)  # raises AssumptionViolatedError if unusable
            subsystems.append(SubsystemTrace(id=index, trace=trace))
            continue
        for _ in range(max_retries):
            x0 = rng.uniform(-1.0, 1.0, size=dimension)
            trace = simulate_subsystem(model, x0, length)
            try:
                find_psi(trace, tol)
            except Exception:
                continue
            subsystems.append(SubsystemTrace(id=index, trace=trace))
            break
        else:
            raise GenerationError(
                f"subsystem {index}: no initial state with independent data "
                f"columns found in {max_retries} draws (tolerance {tol:.1e})"
            )
    return SubsystemDataset(dimension=dimension, subsystems=tuple(subsystems))


@dataclass(frozen=True)
class SwitchingSignal:
    """Piecewise-constant mode schedule.

    ``switching_instants`` start at 0 and are strictly increasing;
    ``modes[m]`` is active on [instants[m], instants[m+1]) and the final mode
    runs to the horizon.  Consecutive modes differ and gaps respect the
    declared minimum dwell time.
    """

    switching_instants: tuple[int, ...]
    modes: tuple[int, ...]
    min_dwell: int

    def __post_init__(self):
        instants = tuple(int(t) for t in self.switching_instants)
        modes = tuple(int(m) for m in self.modes)
        object.__setattr__(self, "switching_instants", instants)
        object.__setattr__(self, "modes", modes)
        if not instants or instants[0] != 0:
            raise ValidationError("switching instants must start at 0",
                                  field="switching_instants")
        if len(instants) != len(modes):
            raise ValidationError("one mode per switching interval required",
                                  field="modes")
        for a, b in zip(instants, instants[1:]):
            if b - a < self.min_dwell:
                raise ValidationError(
                    f"dwell {b - a} between instants {a} and {b} is below the "
                    f"minimum {self.min_dwell}",
                    field="switching_instants",
                )
        for a, b in zip(modes, modes[1:]):
            if a == b:
                raise ValidationError("consecutive modes must differ", field="modes")

    def mode_at(self, t: int) -> int:
        index = int(np.searchsorted(self.switching_instants, t, side="right")) - 1
        return self.modes[index]


def random_dwell_signal(
    num_modes: int, tau: int, horizon: int, rng: np.random.Generator
) -> SwitchingSignal:
    """Random schedule with dwell durations uniform on {tau, ..., 2 tau}.

    The next mode is uniform over the other modes (a single mode yields a
    constant signal).  Bounded durations guarantee switches keep occurring
    over any long horizon.
    """
    if num_modes < 1:
        raise ValueError(f"num_modes must be >= 1, got {num_modes}")
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    instants = [0]
    modes = [int(rng.integers(1, num_modes + 1))]
    if num_modes == 1:
        return SwitchingSignal(tuple(instants), tuple(modes), min_dwell=tau)
    t = 0
    while True:
        t += int(rng.integers(tau, 2 * tau + 1))
        if t >= horizon:
            break
        current = modes[-1]
        offset = int(rng.integers(1, num_modes))
        nxt = current + offset
        if nxt > num_modes:
            nxt -= num_modes
        instants.append(t)
        modes.append(nxt)
    return SwitchingSignal(tuple(instants), tuple(modes), min_dwell=tau)


@dataclass(frozen=True)
class SwitchedTrajectory:
    states: np.ndarray
    norms: np.ndarray


def simulate_switched(
    models: list[SubsystemModel], signal: SwitchingSignal, x0, horizon: int
) -> SwitchedTrajectory:
    """Exact switched recursion x(t+1) = A_{mode(t)} x(t) up to the horizon."""
    dimension = models[0].dimension
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (dimension,):
        raise ValidationError(
            f"initial state has shape {x0.shape}, models have dimension "
            f"{dimension}",
            field="x0",
        )
    if max(signal.modes) > len(models):
        raise ValidationError(
            f"signal uses mode {max(signal.modes)} but only {len(models)} "
            "models were given",
            field="modes",
        )
    states = np.empty((horizon + 1, dimension))
    states[0] = x0
    for t in range(horizon):
        states[t + 1] = models[signal.mode_at(t) - 1].matrix @ states[t]
    norms = np.linalg.norm(states, axis=1)
    return SwitchedTrajectory(states=states, norms=norms)


@dataclass(frozen=True)
class MonteCarloRun:
    index: int
    passed: bool
    initial_norm: float
    final_norm: float
    norms: np.ndarray


@dataclass(frozen=True)
class MonteCarloReport:
    tau: int
    runs: int
    horizon: int
    decay_threshold: float
    passes: int
    results: tuple[MonteCarloRun, ...]

    @property
    def all_passed(self) -> bool:
        return self.passes == self.runs


def monte_carlo_gas(
    models: list[SubsystemModel],
    tau: int,
    runs: int,
    horizon: int,
    seed: int,
    decay_threshold: float = 1e-6,
) -> MonteCarloReport:
    """Repeated random-switching decay experiment.

    Each run draws a fresh initial state uniform in [-1, 1]^d and a fresh
    random dwell-constrained signal, then simulates to the horizon; the run
    passes iff ||x(horizon)|| <= decay_threshold * max(1, ||x(0)||).  Run r
    uses a generator stream derived from (seed, r), so results are identical
    regardless of execution order.
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    dimension = models[0].dimension
    results = []
    passes = 0
    for index in range(runs):
        rng = np.random.default_rng([int(seed), index])
        x0 = rng.uniform(-1.0, 1.0, size=dimension)
        signal = random_dwell_signal(len(models), tau, horizon, rng)
        trajectory = simulate_switched(models, signal, x0, horizon)
        initial_norm = float(trajectory.norms[0])
        final_norm = float(trajectory.norms[-1])
        passed = final_norm <= decay_threshold * max(1.0, initial_norm)
        passes += int(passed)
        results.append(
            MonteCarloRun(
                index=index,
                passed=passed,
                initial_norm=initial_norm,
                final_norm=final_norm,
                norms=trajectory.norms,
            )
        )
    return MonteCarloReport(
        tau=tau,
        runs=runs,
        horizon=horizon,
        decay_threshold=decay_threshold,
        passes=passes,
        results=tuple(results),
    )


# ---------------------------------------------------------------------------
# documents


def serialize_models(models: list[SubsystemModel]) -> str:
    doc = {
        "dimension": models[0].dimension,
        "models": [
            {"id": i, "coefficients": m.coefficients.tolist()}
            for i, m in enumerate(models, start=1)
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_models(text: str) -> list[SubsystemModel]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"malformed models document: {exc.msg} at line {exc.lineno} "
            f"column {exc.colno}",
            line=exc.lineno,
            column=exc.colno,
        ) from exc
    if not isinstance(doc, dict) or "models" not in doc:
        raise ValidationError("models document must contain 'models'",
                              field="models")
    dimension = doc.get("dimension")
    models = []
    for entry in doc["models"]:
        coeffs = entry.get("coefficients")
        if coeffs is None:
            raise ValidationError(
                f"model {entry.get('id')}: missing coefficients",
                subsystem_id=entry.get("id"),
                field="coefficients",
            )
        model = companion_from_coeffs(coeffs)
        if dimension is not None and model.dimension != dimension:
            raise ValidationError(
                f"model {entry.get('id')}: dimension {model.dimension} does "
                f"not match document dimension {dimension}",
                subsystem_id=entry.get("id"),
                field="coefficients",
            )
        models.append(model)
    if not models:
        raise ValidationError("models document lists no models", field="models")
    return models


def report_summary(report: MonteCarloReport) -> str:
    doc = {
        "tau": report.tau,
        "runs": report.runs,
        "horizon": report.horizon,
        "decay_threshold": report.decay_threshold,
        "passes": report.passes,
        "all_passed": report.all_passed,
        "failed_runs": [r.index for r in report.results if not r.passed],
    }
    return json.dumps(doc, indent=2) + "\n"


def norms_table(report: MonteCarloReport) -> str:
    """Comma-separated per-step norms for external plotting."""
    lines = ["run,t,norm"]
    for run in report.results:
        for t, value in enumerate(run.norms):
            lines.append(f"{run.index},{t},{float(value)!r}")
    return "\n".join(lines) + "\n"
