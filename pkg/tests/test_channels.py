import math

import numpy as np
import pytest

from thermobench.channels import (
    EncodingScenario,
    encode_cptp,
    encode_ncptp1,
    encode_ncptp2,
    joint_evolved_state,
)
from thermobench.fisher import qfi, qfi_stencil, qfi_thermal_closed_form
from thermobench.linalg import partial_trace_env
from thermobench.states import (
    BlochVector,
    InvalidStateError,
    TwoQubitStateParams,
    bloch_state,
    purification,
    sample_constrained_state,
    thermal_state,
)
from thermobench.unitaries import SWAP, LocalU1Params, local_u1


def haar(rng):
    z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_cptp_identity_returns_probe():
    probe = bloch_state((0.2, -0.3, 0.5))
    assert np.abs(encode_cptp(probe, np.eye(4), 1.3) - probe).max() < 1e-15


def test_cptp_swap_returns_thermal():
    probe = BlochVector(0.0, 0.6, -0.8)
    assert np.abs(encode_cptp(probe, SWAP, 1.0) - thermal_state(1.0)).max() < 1e-15


def test_cptp_matches_explicit_kraus_form():
    # Kraus operators K_ij = sqrt(p_j) <i|U|j> on the environment index
    rng = np.random.default_rng(0)
    u = haar(rng)
    T = 1.4
    p = np.diag(thermal_state(T)).real
    probe = bloch_state((0.1, 0.4, -0.2))
    u4 = u.reshape(2, 2, 2, 2)  # (s_out, e_out, s_in, e_in)
    out = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            k = math.sqrt(p[j]) * u4[:, i, :, j]
            out += k @ probe @ k.conj().T
    assert np.abs(encode_cptp(probe, u, T) - out).max() < 1e-14


def test_cptp_rejects_bad_inputs():
    with pytest.raises(ValueError):
        encode_cptp(np.eye(2), np.eye(4), 1.0)
    with pytest.raises(ValueError):
        encode_cptp(np.eye(2) / 2, 2 * np.eye(4), 1.0)
    with pytest.raises(ValueError):
        encode_cptp(np.eye(2) / 2, np.eye(4), 0.0)


def test_ncptp1_identity_gives_thermal_probe():
    out = encode_ncptp1(LocalU1Params(0, 0, 0), np.eye(4), 1.0)
    assert np.abs(out - thermal_state(1.0)).max() < 1e-15


def test_ncptp1_accepts_matrix_u1():
    rng = np.random.default_rng(1)
    u = haar(rng)
    p = LocalU1Params(0.4, 1.2, 2.2)
    a = encode_ncptp1(p, u, 1.7)
    b = encode_ncptp1(local_u1(p), u, 1.7)
    assert np.abs(a - b).max() < 1e-15


def test_ncptp2_product_state_is_cptp():
    # a = C = 0 is (I/2) x tau, so type-II reduces to CPTP with the mixed probe
    rng = np.random.default_rng(2)
    u = haar(rng)
    zero = TwoQubitStateParams.from_vector(np.zeros(12))
    for T in (1.0, 1.5):
        assert np.abs(encode_ncptp2(zero, u, T) - encode_cptp(np.eye(2) / 2, u, T)).max() < 1e-14


def test_ncptp2_rejects_non_positive():
    bad = TwoQubitStateParams.from_vector(np.array([0, 0, 1.0] + [0] * 9))
    with pytest.raises(InvalidStateError):
        encode_ncptp2(bad, np.eye(4), 1.0)


def test_encoders_stack_over_temperature():
    rng = np.random.default_rng(3)
    u = haar(rng)
    temps = np.array([1.198, 1.2, 1.202])
    params = sample_constrained_state(5, 1.2)
    probe = bloch_state((0.3, 0, 0.1))
    u1 = LocalU1Params(0.1, 0.2, 0.3)
    for fn in (
        lambda t: encode_cptp(probe, u, t),
        lambda t: encode_ncptp1(u1, u, t),
        lambda t: encode_ncptp2(params, u, t),
    ):
        stack = fn(temps)
        for t, s in zip(temps, stack):
            assert np.abs(s - fn(t)).max() < 1e-15


def test_trace_preservation():
    rng = np.random.default_rng(4)
    for k in range(50):
        u = haar(rng)
        T = rng.uniform(1, 2)
        for out in (
            encode_cptp(bloch_state(rng.uniform(-0.5, 0.5, 3)), u, T),
            encode_ncptp1(LocalU1Params(*rng.uniform(0, 6, 3)), u, T),
            encode_ncptp2(sample_constrained_state(k, T), u, T),
        ):
            assert abs(np.trace(out) - 1) < 1e-10


def test_joint_evolved_state():
    assert np.abs(joint_evolved_state(np.eye(4), 1.0) - purification(1.0)).max() < 1e-15
    rng = np.random.default_rng(5)
    u = haar(rng)
    p = sample_constrained_state(9, 1.0)
    rho = joint_evolved_state(u, 1.0, params=p)
    rho0 = joint_evolved_state(np.eye(4), 1.0, params=p)
    assert np.abs(np.linalg.eigvalsh(rho) - np.linalg.eigvalsh(rho0)).max() < 1e-10
    assert np.abs(partial_trace_env(rho) - encode_ncptp2(p, u, 1.0)).max() < 1e-15


def test_joint_qfi_invariant_under_unitary():
    rng = np.random.default_rng(6)
    u = haar(rng)
    f0 = qfi_stencil(lambda t: joint_evolved_state(np.eye(4), t), 1.2)
    f1 = qfi_stencil(lambda t: joint_evolved_state(u, t), 1.2)
    assert abs(f0 - f1) < 1e-8
    assert abs(f0 - qfi_thermal_closed_form(1.2)) < 1e-8


def test_probe_qfi_below_joint_qfi():
    rng = np.random.default_rng(7)
    for k in range(30):
        u = haar(rng)
        p = sample_constrained_state(100 + k, 1.5)
        f_probe = qfi_stencil(lambda t: encode_ncptp2(p, u, t), 1.5)
        f_joint = qfi_stencil(lambda t: joint_evolved_state(u, t, params=p), 1.5)
        assert f_probe <= f_joint + 1e-6


def test_scenario_validation_and_encode():
    s = EncodingScenario("cptp", "general", fixed_unitary=SWAP, probe_params=BlochVector(0, 0, 1))
    assert np.abs(s.encode(1.0) - thermal_state(1.0)).max() < 1e-15
    with pytest.raises(ValueError):
        EncodingScenario("cptp", "general")
    with pytest.raises(ValueError):
        EncodingScenario("cptp", "general", probe_params=BlochVector(0, 0, 1), u1_params=LocalU1Params(0, 0, 0))
    with pytest.raises(ValueError):
        EncodingScenario("bogus", "general")
    with pytest.raises(ValueError):
        EncodingScenario("ncptp1", "other", u1_params=LocalU1Params(0, 0, 0))
    s = EncodingScenario("ncptp1", "energy-conserving", u1_params=LocalU1Params(0, 0, 0))
    with pytest.raises(ValueError):
        s.encode(1.0)
    assert np.abs(s.encode(1.0, u=np.eye(4)) - thermal_state(1.0)).max() < 1e-15
