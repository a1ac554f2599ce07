"""Stacked data vectors and data matrices built from one trace.

For a trace x(0..L) in dimension d, the stacked vector at time t is

    q(t) = (x_1(t+1), x_1(t), ..., x_d(t)),   0 <= t <= L-1,

and the data matrix at offset T collects d consecutive stacked vectors
column-wise, shape (d+1) x d.  Certification requires the columns to be
linearly independent for some T; ``find_psi`` scans offsets ascending and
returns the first window that passes a scale-invariant independence test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Trace
from .errors import AssumptionViolatedError
from .linalg import min_max_singular

#: traces whose window norm falls below this are treated as identically zero
ZERO_NORM_FLOOR = 1e-300


@dataclass(frozen=True)
class PsiMatrix:
    """A (d+1) x d data matrix with provenance.

    ``matrix`` column c equals q(t_offset + c); ``sigma_ratio`` is the
    smallest-to-largest singular value ratio used as the independence measure.
    """

    matrix: np.ndarray
    t_offset: int
    sigma_ratio: float

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]


def build_q(trace: Trace, t: int) -> np.ndarray:
    """Stacked data vector q(t); valid for 0 <= t <= L-1."""
    if not 0 <= t <= trace.length - 1:
        raise IndexError(
            f"stacked vector needs x(t+1); t={t} outside 0..{trace.length - 1}"
        )
    out = np.empty(trace.dimension + 1)
    out[0] = trace.states[t + 1, 0]
    out[1:] = trace.states[t]
    return out


def build_psi(trace: Trace, t: int) -> np.ndarray:
    """Data matrix with columns q(t), q(t+1), ..., q(t+d-1)."""
    d = trace.dimension
    if t < 0 or t + d - 1 > trace.length - 1:
        raise IndexError(
            f"data matrix at offset {t} needs states up to x({t + d}); "
            f"trace ends at x({trace.length})"
        )
    columns = [build_q(trace, t + c) for c in range(d)]
    return np.column_stack(columns)


def find_psi(trace: Trace, tol: float) -> PsiMatrix:
    """Smallest offset T whose data matrix has independent columns.

    Independence is decided by sigma_min/sigma_max > tol, which is invariant
    to the trace's overall scale.  Offsets are scanned ascending so the
    earliest (least decayed) window wins.  Raises AssumptionViolatedError with
    the best ratio found when no window qualifies.
    """
    if not 0.0 < tol < 1.0:
        raise ValueError(f"independence tolerance must lie in ]0, 1[, got {tol}")
    d = trace.dimension
    best_ratio = -1.0
    best_offset = 0
    for offset in range(trace.length - d + 1):
        psi = build_psi(trace, offset)
        smallest, largest = min_max_singular(psi)
        ratio = 0.0 if largest < ZERO_NORM_FLOOR else smallest / largest
        if ratio > tol:
            return PsiMatrix(matrix=psi, t_offset=offset, sigma_ratio=ratio)
        if ratio > best_ratio:
            best_ratio = ratio
            best_offset = offset
    raise AssumptionViolatedError(
        f"no offset in 0..{trace.length - d} yields linearly independent "
        f"data columns (best ratio {best_ratio:.3e} at offset {best_offset}, "
        f"tolerance {tol:.3e})",
        best_ratio=best_ratio,
        best_offset=best_offset,
    )
