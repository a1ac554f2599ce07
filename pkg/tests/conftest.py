import json
from pathlib import Path

import numpy as np
import pytest

from dwellcert.data import parse_certificates, parse_dataset
from dwellcert.sim import companion_from_coeffs, parse_models

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def benchmark_dataset():
    """Five-subsystem, dimension-5 benchmark dataset (traces of length 6)."""
    return parse_dataset((DATA_DIR / "benchmark_dataset.json").read_text())


@pytest.fixture(scope="session")
def benchmark_models():
    """The ground-truth companion models behind the benchmark dataset."""
    return parse_models((DATA_DIR / "benchmark_models.json").read_text())


@pytest.fixture(scope="session")
def reference_certificates():
    """Externally computed certificates known to solve the benchmark at 0.7."""
    return parse_certificates((DATA_DIR / "reference_certificates.json").read_text())


@pytest.fixture(scope="session")
def reference_mu():
    """Frozen pairwise growth factors of the reference certificates."""
    doc = json.loads((DATA_DIR / "reference_mu.json").read_text())
    doc["mu_matrix"] = np.asarray(doc["mu_matrix"], dtype=float)
    return doc


def sample_stable_companion(rng, dimension, rho_max=1.0):
    """Rejection-sample a Schur-stable companion model.

    Stability is checked with numpy's general eigensolver, independently of
    the package's Stein-equation test, so oracle-agreement tests do not assume
    the thing they verify.  Returns (model, spectral_radius).
    """
    while True:
        coeffs = rng.uniform(-1.0, 1.0, size=dimension)
        if abs(coeffs[0]) < 1e-12:
            continue
        model = companion_from_coeffs(coeffs)
        radius = float(np.max(np.abs(np.linalg.eigvals(model.matrix))))
        if radius < rho_max:
            return model, radius
