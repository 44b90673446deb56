import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thermobench.linalg import SIGMA_X, SIGMA_Y, SIGMA_Z, commutator, exp_minus_i_hermitian, partial_trace_env
from thermobench.states import bloch_state, thermal_state
from thermobench.unitaries import (
    ANISOTROPIC_XY_MODEL,
    H_TOTAL,
    SWAP,
    XX_MODEL,
    EnergyConservingParams,
    KrausCiracParams,
    LocalU1Params,
    Su2Params,
    XyModelParams,
    energy_conserving,
    kraus_cirac,
    local_u1,
    nonlocal_core,
    su2,
    swap_like,
    xy_unitary,
)

angle = st.floats(0, 2 * math.pi)


def kc_vector(rng):
    x = []
    for _ in range(4):
        x += [rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi), rng.uniform(0, 4 * math.pi)]
    return np.array(x + list(rng.uniform(0, math.pi / 2, 3)))


def unitarity(u):
    return np.abs(u @ u.conj().T - np.eye(len(u))).max()


def test_total_hamiltonian():
    assert np.abs(H_TOTAL - np.diag([2, 0, 0, -2])).max() == 0


def test_su2_examples():
    assert np.abs(su2(Su2Params(0, 0, 0)) - np.eye(2)).max() < 1e-15
    assert np.abs(su2(Su2Params(math.pi, 0, 0)) - np.array([[0, 1], [-1, 0]])).max() < 1e-15


@settings(max_examples=100, deadline=None)
@given(st.floats(0, math.pi), angle, st.floats(0, 4 * math.pi, exclude_max=True))
def test_su2_special_unitary(theta, nu, psi):
    w = su2(Su2Params(theta, nu, psi))
    assert unitarity(w) < 1e-12
    assert abs(np.linalg.det(w) - 1) < 1e-12


@pytest.mark.parametrize("args", [(-0.1, 0, 0), (3.2, 0, 0), (0, 6.3, 0), (0, 0, 4 * math.pi)])
def test_su2_range_errors(args):
    with pytest.raises(ValueError):
        Su2Params(*args)


def test_kraus_cirac_examples():
    zero = KrausCiracParams.from_array(np.zeros(15))
    assert np.abs(kraus_cirac(zero) - np.eye(4)).max() < 1e-15
    x = np.zeros(15)
    x[12] = math.pi / 2
    assert np.abs(kraus_cirac(KrausCiracParams.from_array(x)) + 1j * np.kron(SIGMA_X, SIGMA_X)).max() < 1e-15


def test_kraus_cirac_core_matches_exponential():
    g = math.pi / 4 * sum(np.kron(p, p) for p in (SIGMA_X, SIGMA_Y, SIGMA_Z))
    x = np.zeros(15)
    x[12:] = math.pi / 4
    assert np.abs(kraus_cirac(KrausCiracParams.from_array(x)) - exp_minus_i_hermitian(g)).max() < 1e-10
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = rng.uniform(0, math.pi / 2, 3)
        g = sum(ai * np.kron(p, p) for ai, p in zip(a, (SIGMA_X, SIGMA_Y, SIGMA_Z)))
        assert np.abs(nonlocal_core(*a) - exp_minus_i_hermitian(g)).max() < 1e-10


def test_kraus_cirac_factors_commute():
    rng = np.random.default_rng(1)
    pairs = [np.kron(p, p) for p in (SIGMA_X, SIGMA_Y, SIGMA_Z)]
    for _ in range(1000):
        a = rng.uniform(0, math.pi / 2, 3)
        f = [math.cos(ai) * np.eye(4) - 1j * math.sin(ai) * pp for ai, pp in zip(a, pairs)]
        for i in range(3):
            for j in range(i + 1, 3):
                assert np.abs(commutator(f[i], f[j])).max() < 1e-12


def test_kraus_cirac_random_unitary_and_roundtrip():
    rng = np.random.default_rng(2)
    for _ in range(200):
        x = kc_vector(rng)
        p = KrausCiracParams.from_array(x)
        assert np.array_equal(p.as_array(), x)
        assert unitarity(kraus_cirac(p)) < 1e-10


def test_kraus_cirac_range_and_length_errors():
    with pytest.raises(ValueError):
        KrausCiracParams.from_array(np.zeros(14))
    x = np.zeros(15)
    x[13] = 1.6
    with pytest.raises(ValueError):
        KrausCiracParams.from_array(x)


def test_energy_conserving_identity():
    assert np.abs(energy_conserving(EnergyConservingParams(0, 0, 0, 0, 0)) - np.eye(4)).max() < 1e-15


def test_energy_conserving_explicit_form():
    # build e^{-i l1}|00><00| + e^{-i l2}|P1><P1| + e^{-i l3}|P2><P2| + e^{-i l4}|11><11| from kets
    l1, l2, l3, l4, l5 = 0.3, 1.1, 2.5, 4.0, 0.7
    k = np.eye(4)
    p1 = math.sin(l5) * k[2] + math.cos(l5) * k[1]
    p2 = math.cos(l5) * k[2] - math.sin(l5) * k[1]
    ref = sum(np.exp(-1j * l) * np.outer(v, v) for l, v in zip((l1, l2, l3, l4), (k[0], p1, p2, k[3])))
    assert np.abs(energy_conserving(EnergyConservingParams(l1, l2, l3, l4, l5)) - ref).max() < 1e-15


def test_energy_conserving_swap_point():
    # lambda5 = pi/4 with a relative phase of pi between the two block phases gives SWAP
    u = energy_conserving(EnergyConservingParams(0, 0, math.pi, 0, math.pi / 4))
    assert np.abs(u - SWAP).max() < 1e-15
    u = energy_conserving(EnergyConservingParams(1.0, 2.0, 2.0 + math.pi, 3.0, math.pi / 4))
    assert np.abs(np.abs(u) - SWAP).max() < 1e-15
    # lambda5 = pi/2 with equal block phases is diagonal, not a swap
    u = energy_conserving(EnergyConservingParams(0, 1.0, 1.0, 0, math.pi / 2))
    assert np.abs(u - np.diag(np.diag(u))).max() < 1e-15


def test_energy_conserving_commutes_random():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        u = energy_conserving(EnergyConservingParams.from_array(rng.uniform(0, 2 * math.pi, 5)))
        assert unitarity(u) < 1e-12
        assert np.abs(commutator(u, H_TOTAL)).max() < 1e-10
        s = swap_like(*rng.uniform(0, 2 * math.pi, 3))
        assert np.abs(commutator(s, H_TOTAL)).max() < 1e-12


def test_swap_like():
    assert np.array_equal(swap_like(0, 0, 0), SWAP)
    u = swap_like(0.1, 0.2, 0.3)
    assert unitarity(u) < 1e-15


def test_swap_maps_any_probe_to_thermal():
    rng = np.random.default_rng(4)
    for _ in range(100):
        v = rng.standard_normal(3)
        v *= rng.uniform() / np.linalg.norm(v)
        T = rng.uniform(1, 2)
        rho = np.kron(bloch_state(v), thermal_state(T))
        for u in (swap_like(0, 0, 0), swap_like(*rng.uniform(0, 2 * math.pi, 3))):
            out = partial_trace_env(u @ rho @ u.conj().T)
            assert np.abs(out - thermal_state(T)).max() < 1e-15


def test_local_u1():
    assert np.abs(local_u1(LocalU1Params(0, 0, 0)) - np.eye(2)).max() == 0
    a = 0.8
    assert np.abs(local_u1(LocalU1Params(1.3, 0, a)) - np.diag([np.exp(1j * a), np.exp(-1j * a)])).max() < 1e-15
    with pytest.raises(ValueError):
        LocalU1Params(0, 7.0, 0)


@settings(max_examples=100, deadline=None)
@given(angle, angle, angle)
def test_local_u1_unitary(b, g, d):
    assert unitarity(local_u1(LocalU1Params(b, g, d))) < 1e-12


def test_xy_models():
    xx = xy_unitary(XX_MODEL)
    xy = xy_unitary(ANISOTROPIC_XY_MODEL)
    assert unitarity(xx) < 1e-10 and unitarity(xy) < 1e-10
    assert np.abs(commutator(xx, H_TOTAL)).max() < 1e-10
    assert np.abs(commutator(xy, H_TOTAL)).max() > 0.01
    free = xy_unitary(XyModelParams(0, 0))
    assert np.abs(free - np.diag(np.exp(-1j * np.array([2, 0, 0, -2])))).max() < 1e-14


def test_xx_closed_form():
    # H_T + J(XX + YY) is diagonal on |00>, |11> and couples |01>, |10> with strength 2J
    j = 0.5
    u = xy_unitary(XyModelParams(j, j))
    c, s = math.cos(2 * j), math.sin(2 * j)
    ref = np.zeros((4, 4), dtype=complex)
    ref[0, 0] = np.exp(-2j)
    ref[3, 3] = np.exp(2j)
    ref[1:3, 1:3] = [[c, -1j * s], [-1j * s, c]]
    assert np.abs(u - ref).max() < 1e-12


def test_xy_rejects_nonfinite():
    with pytest.raises(ValueError):
        XyModelParams(float("nan"), 0.5)
