import numpy as np
import pytest

from dwellcert.data import Trace
from dwellcert.errors import AssumptionViolatedError
from dwellcert.linalg import min_max_singular
from dwellcert.psi import build_psi, build_q, find_psi
from dwellcert.sim import companion_from_coeffs, simulate_subsystem

from conftest import sample_stable_companion

# first data matrix of the benchmark, as independently tabulated
BENCHMARK_PSI_1 = np.array([
    [-0.2250353, 0.2295586, -0.2848105, 0.0950412, -0.0147282],
    [-0.3776165, -0.2250353, 0.2295586, -0.2848105, 0.0950412],
    [0.5511093, -0.3776165, -0.2250353, 0.2295586, -0.2848105],
    [-0.9545606, 0.5511093, -0.3776165, -0.2250353, 0.2295586],
    [0.4685422, -0.9545606, 0.5511093, -0.3776165, -0.2250353],
    [0.0824293, 0.4685422, -0.9545606, 0.5511093, -0.3776165],
])


class TestBuildQ:
    def test_benchmark_first_column(self, benchmark_dataset):
        trace = benchmark_dataset.subsystems[0].trace
        expected = [-0.2250353, -0.3776165, 0.5511093, -0.9545606, 0.4685422,
                    0.0824293]
        assert np.allclose(build_q(trace, 0), expected, atol=0)

    def test_direct_readoff(self):
        trace = Trace(np.array([[1.0, 0.0], [0.5, 1.0], [0.0, 0.0]]))
        assert np.array_equal(build_q(trace, 0), [0.5, 1.0, 0.0])

    def test_upper_bound(self):
        trace = Trace(np.zeros((3, 2)))
        with pytest.raises(IndexError):
            build_q(trace, trace.length)
        with pytest.raises(IndexError):
            build_q(trace, -1)


class TestBuildPsi:
    def test_benchmark_matrix(self, benchmark_dataset):
        trace = benchmark_dataset.subsystems[0].trace
        assert np.allclose(build_psi(trace, 0), BENCHMARK_PSI_1, atol=0)

    def test_zero_trace(self):
        trace = Trace(np.zeros((4, 2)))
        assert np.array_equal(build_psi(trace, 0), np.zeros((3, 2)))

    def test_nilpotent_companion(self):
        # x(t+1) = [[0, 0], [1, 0]] x(t) from x(0) = (1, 0)
        trace = Trace(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
        assert np.array_equal(
            build_psi(trace, 0), [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
        )

    def test_insufficient_length(self):
        trace = Trace(np.zeros((3, 2)))
        with pytest.raises(IndexError):
            build_psi(trace, 1)

    def test_first_column_equals_q(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            d = int(rng.integers(1, 5))
            states = rng.standard_normal((d + 3, d))
            trace = Trace(states)
            for t in range(trace.length - d + 1):
                assert np.array_equal(build_psi(trace, t)[:, 0], build_q(trace, t))


class TestFindPsi:
    def test_benchmark_minimal_offset(self, benchmark_dataset):
        trace = benchmark_dataset.subsystems[0].trace
        psi = find_psi(trace, 1e-8)
        assert psi.t_offset == 0
        assert np.allclose(psi.matrix, BENCHMARK_PSI_1, atol=0)
        assert psi.sigma_ratio > 1e-8

    def test_zero_trace_violates_assumption(self):
        with pytest.raises(AssumptionViolatedError) as info:
            find_psi(Trace(np.zeros((5, 2))), 1e-8)
        assert info.value.best_ratio == 0.0
        assert "0.000e+00" in str(info.value)

    def test_tolerance_domain(self):
        trace = Trace(np.zeros((5, 2)))
        with pytest.raises(ValueError):
            find_psi(trace, 0.0)
        with pytest.raises(ValueError):
            find_psi(trace, 1.0)

    def test_near_degenerate_start_recovers_at_offset_one(self):
        # two well-separated real modes; starting almost along the fast
        # eigenvector makes the first window numerically dependent, and the
        # slow mode re-emerges one step later (its relative weight grows by
        # the eigenvalue ratio 0.9/0.1 per step)
        model = companion_from_coeffs([0.09, -1.0])  # eigenvalues 0.1 and 0.9
        fast = np.array([0.1, 1.0])
        slow = np.array([0.9, 1.0])
        trace = simulate_subsystem(model, fast + 1e-4 * slow, 6)
        ratios = []
        for offset in (0, 1):
            small, large = min_max_singular(build_psi(trace, offset))
            ratios.append(small / large)
        assert ratios[1] > 4 * ratios[0] > 0
        tol = float(np.sqrt(ratios[0] * ratios[1]))
        psi = find_psi(trace, tol)
        assert psi.t_offset == 1
        assert psi.sigma_ratio > tol

    def test_minimal_offset_against_exhaustive_scan(self):
        rng = np.random.default_rng(31)
        tol = 1e-6
        for _ in range(30):
            d = int(rng.integers(1, 5))
            model, _ = sample_stable_companion(rng, d)
            trace = simulate_subsystem(model, rng.uniform(-1, 1, d), d + 4)
            offsets = []
            for offset in range(trace.length - d + 1):
                small, large = min_max_singular(build_psi(trace, offset))
                ratio = 0.0 if large == 0 else small / large
                offsets.append(ratio > tol)
            if any(offsets):
                psi = find_psi(trace, tol)
                assert psi.t_offset == offsets.index(True)
            else:
                with pytest.raises(AssumptionViolatedError):
                    find_psi(trace, tol)


class TestShiftStructure:
    def test_companion_generated_windows_share_entries(self):
        rng = np.random.default_rng(53)
        for _ in range(20):
            d = int(rng.integers(2, 6))
            model, _ = sample_stable_companion(rng, d)
            trace = simulate_subsystem(model, rng.uniform(-1, 1, d), d + 3)
            for offset in range(trace.length - d + 1):
                psi = build_psi(trace, offset)
                for c in range(d - 1):
                    # both are copies of the same trace values: exact equality
                    assert np.array_equal(psi[:d, c], psi[1:, c + 1])
