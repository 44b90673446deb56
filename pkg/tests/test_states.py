import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thermobench.linalg import partial_trace_env, partial_trace_probe
from thermobench.states import (
    BlochVector,
    InvalidStateError,
    TwoQubitStateParams,
    bloch_state,
    check_density_matrix,
    constrained_state_unchecked,
    constrained_two_qubit_state,
    dr_dT,
    purification,
    r_coefficient,
    sample_constrained_state,
    stencil_min_eigenvalue,
    thermal_state,
    thermal_state_derivative,
    two_qubit_state,
)


def test_r_coefficient_values():
    assert abs(r_coefficient(1.0) - 0.880797) < 1e-6
    assert abs(r_coefficient(2.0) - 0.731059) < 1e-6
    assert abs(r_coefficient(1e6) - 0.5) < 1e-6
    # r = e^{1/T} / (e^{-1/T} + e^{1/T}) written out directly
    for T in (0.7, 1.3, 2.9):
        assert abs(r_coefficient(T) - math.exp(1 / T) / (math.exp(-1 / T) + math.exp(1 / T))) < 1e-15


def test_dr_dT_values_and_stencil():
    assert abs(dr_dT(1.0) + 0.209987) < 1e-6
    assert abs(dr_dT(2.0) + 0.098306) < 1e-6
    h = 1e-3
    for T in np.linspace(1, 2, 11):
        fd = (r_coefficient(T - 2 * h) - 8 * r_coefficient(T - h) + 8 * r_coefficient(T + h) - r_coefficient(T + 2 * h)) / (12 * h)
        assert abs(fd - dr_dT(T)) < 1e-11


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_temperature_validation(bad):
    with pytest.raises(ValueError):
        r_coefficient(bad)
    with pytest.raises(ValueError):
        thermal_state(bad)
    with pytest.raises(ValueError):
        purification(bad)


def test_thermal_state_values():
    assert np.abs(thermal_state(1.0) - np.diag([0.119203, 0.880797])).max() < 1e-6
    assert np.abs(thermal_state(2.0) - np.diag([0.268941, 0.731059])).max() < 1e-6
    assert np.abs(thermal_state(1e6) - np.eye(2) / 2).max() < 1e-5


def test_thermal_state_custom_hamiltonian_matches_default():
    sz = np.diag([1.0, -1.0])
    for T in (1.0, 1.7):
        assert np.abs(thermal_state(T, sz) - thermal_state(T)).max() < 1e-14


def test_thermal_state_stacks():
    temps = np.array([1.0, 1.5, 2.0])
    stack = thermal_state(temps)
    assert stack.shape == (3, 2, 2)
    for t, s in zip(temps, stack):
        assert np.abs(s - thermal_state(t)).max() == 0


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 1e3))
def test_ground_state_more_populated(T):
    tau = thermal_state(T)
    assert tau[1, 1].real > tau[0, 0].real


def test_thermal_derivative_matches_stencil():
    h = 1e-3
    for T in np.linspace(1, 2, 21):
        s = thermal_state(T + h * np.array([-2, -1, 1, 2]))
        fd = (s[0] - 8 * s[1] + 8 * s[2] - s[3]) / (12 * h)
        assert np.abs(fd - thermal_state_derivative(T)).max() < 1e-9


def test_bloch_state_examples():
    assert np.abs(bloch_state((0, 0, 0)) - np.eye(2) / 2).max() == 0
    assert np.abs(bloch_state((0, 0, 1)) - np.diag([1, 0])).max() == 0
    w = np.linalg.eigvalsh(bloch_state((1 / np.sqrt(2), 0, 1 / np.sqrt(2))))
    assert np.abs(w - [0, 1]).max() < 1e-15


def test_bloch_vector_rejects_long_vectors():
    with pytest.raises(InvalidStateError):
        BlochVector(1.0, 0.1, 0.0)
    BlochVector(1.0, 0.0, 0.0)


def test_purification_values():
    rho = purification(1.0)
    assert abs(np.sqrt(rho[0, 0].real) - 0.345258) < 1e-6
    assert abs(np.sqrt(rho[3, 3].real) - 0.938508) < 1e-6
    assert np.abs(rho @ rho - rho).max() < 1e-15


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 50))
def test_purification_marginals(T):
    rho = purification(T)
    assert np.abs(partial_trace_probe(rho) - thermal_state(T)).max() < 1e-12
    assert np.abs(np.linalg.eigvalsh(partial_trace_env(rho)) - np.sort(np.diag(thermal_state(T)).real)).max() < 1e-12


def test_check_density_matrix():
    check_density_matrix(np.eye(2) / 2)
    with pytest.raises(InvalidStateError):
        check_density_matrix(np.eye(2))
    with pytest.raises(InvalidStateError):
        check_density_matrix(np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(InvalidStateError):
        check_density_matrix(np.diag([1.1, -0.1]))
    rho = np.diag([1 + 5e-11, -5e-11])
    out = check_density_matrix(rho)
    assert out[1, 1] == -5e-11  # tolerated but not clamped


def test_two_qubit_params_validation():
    with pytest.raises(ValueError):
        TwoQubitStateParams((0, 0, 1.5), (0, 0, 0), ((0,) * 3,) * 3)
    with pytest.raises(ValueError):
        TwoQubitStateParams((0, 0), (0, 0, 0), ((0,) * 3,) * 3)
    p = TwoQubitStateParams.from_vector(np.arange(12) / 12)
    assert np.array_equal(p.free_vector(), np.arange(12) / 12)
    assert p.a == (0.0, 1 / 12, 2 / 12)
    assert p.c[1] == (6 / 12, 7 / 12, 8 / 12)


def test_two_qubit_state_bell():
    # singlet: a = b = 0, C = -I
    p = TwoQubitStateParams((0, 0, 0), (0, 0, 0), ((-1, 0, 0), (0, -1, 0), (0, 0, -1)))
    rho = two_qubit_state(p)
    s = np.array([0, 1, -1, 0]) / np.sqrt(2)
    assert np.abs(rho - np.outer(s, s)).max() < 1e-15


def test_constrained_state_examples():
    zero = TwoQubitStateParams.from_vector(np.zeros(12))
    rho = constrained_two_qubit_state(zero, 1.0)
    assert np.abs(rho - np.kron(np.eye(2) / 2, np.diag([0.119203, 0.880797]))).max() < 1e-6
    bad = TwoQubitStateParams.from_vector(np.array([0, 0, 1.0] + [0] * 9))
    assert np.linalg.eigvalsh(constrained_state_unchecked(bad.free_vector(), 1.0)).min() < 0
    with pytest.raises(InvalidStateError):
        constrained_two_qubit_state(bad, 1.0)


def test_constrained_state_ignores_b():
    p = TwoQubitStateParams((0, 0, 0), (0.3, 0.2, -0.9), ((0,) * 3,) * 3)
    rho = constrained_two_qubit_state(p, 1.5)
    assert np.abs(partial_trace_probe(rho) - thermal_state(1.5)).max() < 1e-12


def test_sampler_deterministic():
    a = sample_constrained_state(1234, 1.0)
    b = sample_constrained_state(1234, 1.0)
    assert a == b
    assert a != sample_constrained_state(1235, 1.0)


def test_sampler_states_valid_with_thermal_marginal():
    for seed in range(100):
        T = 1.0 + (seed % 11) / 10
        p = sample_constrained_state(seed, T)
        rho = constrained_two_qubit_state(p, T)
        assert np.abs(partial_trace_probe(rho) - thermal_state(T)).max() < 1e-12
        assert stencil_min_eigenvalue(p.free_vector(), T, 1e-3) >= -1e-10


def test_sampler_stack_is_consistent():
    p = sample_constrained_state(7, 1.3)
    temps = np.array([1.3, 1.298, 1.302])
    stack = constrained_state_unchecked(p.free_vector(), temps)
    for t, s in zip(temps, stack):
        assert np.abs(s - constrained_two_qubit_state(p, t)).max() < 1e-15
