"""Trajectory datasets and result artifacts, with JSON (de)serialization.

The dataset document carries raw per-subsystem state traces and nothing else:
no model coefficients ever appear here, so the certification path provably
consumes only data.  Floats are emitted with Python's shortest round-trip
representation, which re-parses bit-exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class Trace:
    """One finite state trajectory x(0..L) of a single subsystem.

    ``states`` is (L+1) x d, one row per time step.  A trace must contain at
    least d+1 states (L >= d); shorter traces cannot yield a full set of
    stacked data columns and are rejected up front.
    """

    states: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2:
            raise ValidationError("trace must be a 2-D array of states", field="trace")
        if states.shape[1] < 1:
            raise ValidationError("state dimension must be >= 1", field="trace")
        if not np.all(np.isfinite(states)):
            raise ValidationError("trace contains non-finite entries", field="trace")
        if states.shape[0] < states.shape[1] + 1:
            raise ValidationError(
                f"trace has {states.shape[0]} states but dimension "
                f"{states.shape[1]} requires at least {states.shape[1] + 1} "
                "(L >= d) for the stacked data matrix to exist",
                field="trace",
            )
        object.__setattr__(self, "states", states)

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    @property
    def length(self) -> int:
        """L, the index of the last state."""
        return self.states.shape[0] - 1


@dataclass(frozen=True)
class SubsystemTrace:
    id: int
    trace: Trace


@dataclass(frozen=True)
class SubsystemDataset:
    """The full input to certification: one trace per subsystem, ids 1..N."""

    dimension: int
    subsystems: tuple[SubsystemTrace, ...]

    def __post_init__(self):
        object.__setattr__(self, "subsystems", tuple(self.subsystems))
        if self.dimension < 1:
            raise ValidationError("dataset dimension must be >= 1", field="dimension")
        if not self.subsystems:
            raise ValidationError("dataset must contain at least one subsystem",
                                  field="subsystems")
        ids = [s.id for s in self.subsystems]
        expected = list(range(1, len(ids) + 1))
        if ids != expected:
            raise ValidationError(
                f"subsystem ids must be 1..{len(ids)} with no gaps or "
                f"duplicates, got {ids}",
                field="id",
            )
        for sub in self.subsystems:
            if sub.trace.dimension != self.dimension:
                raise ValidationError(
                    f"subsystem {sub.id} has state dimension "
                    f"{sub.trace.dimension}, dataset declares {self.dimension}",
                    subsystem_id=sub.id,
                    field="trace",
                )

    @property
    def n_subsystems(self) -> int:
        return len(self.subsystems)

    def traces(self) -> list[Trace]:
        return [s.trace for s in self.subsystems]


@dataclass(frozen=True)
class CertificateRecord:
    """Per-subsystem quadratic-form certificate as stored in result documents.

    ``margin_lmi`` and ``t_offset`` are None when the certificate was supplied
    externally (no data matrix to evaluate against).
    """

    id: int
    P: np.ndarray
    margin_pd: float
    margin_lmi: float | None = None
    t_offset: int | None = None

    def __post_init__(self):
        p = np.asarray(self.P, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValidationError(
                f"certificate {self.id}: P must be square",
                subsystem_id=self.id, field="P",
            )
        if not np.all(np.isfinite(p)):
            raise ValidationError(
                f"certificate {self.id}: P contains non-finite entries",
                subsystem_id=self.id, field="P",
            )
        object.__setattr__(self, "P", p)


@dataclass(frozen=True)
class DwellTimeResult:
    """Output of the certification pipeline.

    Invariants enforced at construction: ``mu`` is the maximum entry of
    ``mu_matrix``; the diagonal of ``mu_matrix`` is 1; ``mu`` exceeds 1
    whenever there are two or more subsystems; and ``tau`` equals
    ceil(ln(mu)/|ln(lambda_s)| + epsilon).
    """

    lambda_s: float
    epsilon: float
    mu: float
    tau: int
    mu_matrix: np.ndarray
    certificates: tuple[CertificateRecord, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "certificates", tuple(self.certificates))
        if not 0.0 < self.lambda_s < 1.0:
            raise ValidationError(
                f"lambda_s must lie in ]0, 1[, got {self.lambda_s}",
                field="lambda_s",
            )
        if not self.epsilon > 0.0:
            raise ValidationError(
                f"epsilon must be > 0, got {self.epsilon}", field="epsilon"
            )
        matrix = np.asarray(self.mu_matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError("mu_matrix must be square", field="mu_matrix")
        object.__setattr__(self, "mu_matrix", matrix)
        n = matrix.shape[0]
        if np.max(np.abs(np.diag(matrix) - 1.0)) > 1e-9:
            raise ValidationError(
                "mu_matrix diagonal must equal 1 (self-comparison factor)",
                field="mu_matrix",
            )
        peak = float(np.max(matrix))
        if abs(self.mu - peak) > 1e-12 * max(abs(peak), 1.0):
            raise ValidationError(
                f"mu = {self.mu} does not equal the maximum mu_matrix entry {peak}",
                field="mu",
            )
        if n >= 2 and not self.mu > 1.0:
            raise ValidationError(
                f"mu must exceed 1 for {n} subsystems, got {self.mu}", field="mu"
            )
        expected_tau = math.ceil(
            math.log(self.mu) / abs(math.log(self.lambda_s)) + self.epsilon
        )
        if self.tau != expected_tau:
            raise ValidationError(
                f"tau = {self.tau} inconsistent with lambda_s/mu/epsilon "
                f"(expected {expected_tau})",
                field="tau",
            )
        if self.certificates:
            ids = [c.id for c in self.certificates]
            if ids != list(range(1, n + 1)):
                raise ValidationError(
                    f"certificate ids must be 1..{n}, got {ids}", field="certificates"
                )


# ---------------------------------------------------------------------------
# document encoding / decoding


def _loads(text: str) -> object:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"malformed document: {exc.msg} at line {exc.lineno} column {exc.colno}",
            line=exc.lineno,
            column=exc.colno,
        ) from exc


def _require(obj: dict, key: str, context: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ValidationError(f"{context}: missing field '{key}'", field=key)
    return obj[key]


def parse_dataset(text: str) -> SubsystemDataset:
    """Decode and validate a dataset document."""
    doc = _loads(text)
    dimension = _require(doc, "dimension", "dataset")
    if not isinstance(dimension, int) or dimension < 1:
        raise ValidationError(
            f"dataset dimension must be a positive integer, got {dimension!r}",
            field="dimension",
        )
    entries = _require(doc, "subsystems", "dataset")
    if not isinstance(entries, list) or not entries:
        raise ValidationError("dataset 'subsystems' must be a non-empty list",
                              field="subsystems")
    subsystems = []
    for pos, entry in enumerate(entries):
        sid = _require(entry, "id", f"subsystem at position {pos}")
        rows = _require(entry, "trace", f"subsystem {sid}")
        try:
            trace = Trace(np.asarray(rows, dtype=float))
        except (ValidationError, ValueError) as exc:
            raise ValidationError(
                f"subsystem {sid}: {exc}", subsystem_id=sid, field="trace"
            ) from exc
        if trace.dimension != dimension:
            raise ValidationError(
                f"subsystem {sid}: trace dimension {trace.dimension} does not "
                f"match dataset dimension {dimension}",
                subsystem_id=sid,
                field="trace",
            )
        subsystems.append(SubsystemTrace(id=sid, trace=trace))
    return SubsystemDataset(dimension=dimension, subsystems=tuple(subsystems))


def serialize_dataset(dataset: SubsystemDataset) -> str:
    doc = {
        "dimension": dataset.dimension,
        "subsystems": [
            {"id": s.id, "trace": s.trace.states.tolist()}
            for s in dataset.subsystems
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def serialize_result(result: DwellTimeResult) -> str:
    doc = {
        "lambda_s": result.lambda_s,
        "epsilon": result.epsilon,
        "mu": result.mu,
        "tau": result.tau,
        "mu_matrix": result.mu_matrix.tolist(),
        "certificates": [
            {
                "id": c.id,
                "P": c.P.tolist(),
                "margin_pd": c.margin_pd,
                "margin_lmi": c.margin_lmi,
                "T_offset": c.t_offset,
            }
            for c in result.certificates
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_result(text: str) -> DwellTimeResult:
    doc = _loads(text)
    certs = []
    for entry in doc.get("certificates", []):
        certs.append(
            CertificateRecord(
                id=_require(entry, "id", "certificate"),
                P=np.asarray(_require(entry, "P", "certificate"), dtype=float),
                margin_pd=_require(entry, "margin_pd", "certificate"),
                margin_lmi=entry.get("margin_lmi"),
                t_offset=entry.get("T_offset"),
            )
        )
    return DwellTimeResult(
        lambda_s=_require(doc, "lambda_s", "result"),
        epsilon=_require(doc, "epsilon", "result"),
        mu=_require(doc, "mu", "result"),
        tau=_require(doc, "tau", "result"),
        mu_matrix=np.asarray(_require(doc, "mu_matrix", "result"), dtype=float),
        certificates=tuple(certs),
    )


def parse_certificates(text: str) -> tuple[float, list[tuple[int, np.ndarray]]]:
    """Decode an externally supplied certificate document.

    Format: ``{"lambda_s": r, "certificates": [{"id": i, "P": [[...]]}, ...]}``.
    Returns the common decay rate and the (id, P) list ordered by id.
    """
    doc = _loads(text)
    lambda_s = _require(doc, "lambda_s", "certificates document")
    if not isinstance(lambda_s, (int, float)) or not 0.0 < float(lambda_s) < 1.0:
        raise ValidationError(
            f"lambda_s must lie in ]0, 1[, got {lambda_s!r}", field="lambda_s"
        )
    entries = _require(doc, "certificates", "certificates document")
    if not isinstance(entries, list) or not entries:
        raise ValidationError("'certificates' must be a non-empty list",
                              field="certificates")
    out = []
    for entry in entries:
        sid = _require(entry, "id", "certificate")
        p = np.asarray(_require(entry, "P", "certificate"), dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValidationError(
                f"certificate {sid}: P must be a square matrix",
                subsystem_id=sid, field="P",
            )
        if not np.all(np.isfinite(p)):
            raise ValidationError(
                f"certificate {sid}: P contains non-finite entries",
                subsystem_id=sid, field="P",
            )
        out.append((sid, p))
    ids = [sid for sid, _ in out]
    if sorted(ids) != list(range(1, len(ids) + 1)):
        raise ValidationError(
            f"certificate ids must be 1..{len(ids)} with no gaps, got {ids}",
            field="id",
        )
    out.sort(key=lambda pair: pair[0])
    dims = {p.shape[0] for _, p in out}
    if len(dims) > 1:
        raise ValidationError(
            f"certificates disagree on dimension: {sorted(dims)}", field="P"
        )
    return float(lambda_s), out


def parse_trace_csv(text: str) -> np.ndarray:
    """Decode one comma-separated trace table: one row of states per time step."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rows.append([float(cell) for cell in line.split(",")])
        except ValueError as exc:
            raise ParseError(
                f"bad numeric cell at line {lineno}: {exc}", line=lineno
            ) from exc
    if not rows:
        raise ParseError("empty trace table")
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(
                f"row {lineno} has {len(row)} cells, expected {width}", line=lineno
            )
    return np.asarray(rows, dtype=float)


def dataset_from_traces(traces: list[np.ndarray]) -> SubsystemDataset:
    """Assemble a dataset from raw per-subsystem state arrays (ids 1..N in order)."""
    if not traces:
        raise ValidationError("at least one trace is required", field="subsystems")
    dimension = int(np.asarray(traces[0]).shape[1]) if np.asarray(traces[0]).ndim == 2 else 0
    subsystems = []
    for pos, arr in enumerate(traces, start=1):
        try:
            trace = Trace(np.asarray(arr, dtype=float))
        except ValidationError as exc:
            raise ValidationError(
                f"subsystem {pos}: {exc}", subsystem_id=pos, field="trace"
            ) from exc
        subsystems.append(SubsystemTrace(id=pos, trace=trace))
    return SubsystemDataset(dimension=dimension, subsystems=tuple(subsystems))
