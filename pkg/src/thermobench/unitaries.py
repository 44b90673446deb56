"""Parametrized two-qubit unitaries.

Every builder validates its parameter ranges and raises ``ValueError`` when a
value falls outside; the optimizer is responsible for keeping its search
inside the box.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, fields

import numpy as np

from .linalg import I4, PAULIS, kron, SIGMA_X, SIGMA_Y, SIGMA_Z, exp_minus_i_hermitian

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi
HALF_PI = 0.5 * math.pi

H_TOTAL = np.kron(SIGMA_Z, np.eye(2)) + np.kron(np.eye(2), SIGMA_Z)
H_TOTAL.setflags(write=False)

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
SWAP.setflags(write=False)

_PAULI_PAIRS = tuple(np.kron(p, p) for p in PAULIS)


def total_hamiltonian() -> np.ndarray:
    """sigma_z x I + I x sigma_z."""
    return H_TOTAL.copy()


def _check_range(name: str, value: float, lo: float, hi: float, closed_hi: bool = True):
    ok = lo <= value <= hi if closed_hi else lo <= value < hi
    if not (math.isfinite(value) and ok):
        bracket = "]" if closed_hi else ")"
        raise ValueError(f"{name}={value!r} outside [{lo:g}, {hi:g}{bracket}")


class _Params:
    @classmethod
    def size(cls) -> int:
        return len(fields(cls))

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=float)

    @classmethod
    def from_array(cls, x):
        return cls(*(float(v) for v in x))


@dataclass(frozen=True)
class Su2Params(_Params):
    theta: float
    nu: float
    psi: float

    def __post_init__(self):
        _check_range("theta", self.theta, 0.0, math.pi)
        _check_range("nu", self.nu, 0.0, TWO_PI)
        _check_range("psi", self.psi, 0.0, FOUR_PI, closed_hi=False)


@dataclass(frozen=True)
class KrausCiracParams:
    w1: Su2Params
    w2: Su2Params
    w3: Su2Params
    w4: Su2Params
    alpha_x: float
    alpha_y: float
    alpha_z: float

    def __post_init__(self):
        for name in ("alpha_x", "alpha_y", "alpha_z"):
            _check_range(name, getattr(self, name), 0.0, HALF_PI)

    @classmethod
    def size(cls) -> int:
        return 15

    @classmethod
    def from_array(cls, x) -> "KrausCiracParams":
        x = [float(v) for v in x]
        if len(x) != 15:
            raise ValueError(f"Kraus-Cirac needs 15 parameters, got {len(x)}")
        ws = [Su2Params(*x[3 * k : 3 * k + 3]) for k in range(4)]
        return cls(*ws, *x[12:15])

    def as_array(self) -> np.ndarray:
        parts = [w.as_array() for w in (self.w1, self.w2, self.w3, self.w4)]
        return np.concatenate(parts + [np.array([self.alpha_x, self.alpha_y, self.alpha_z])])


@dataclass(frozen=True)
class EnergyConservingParams(_Params):
    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    lambda5: float

    def __post_init__(self):
        for f in fields(self):
            _check_range(f.name, getattr(self, f.name), 0.0, TWO_PI)


@dataclass(frozen=True)
class LocalU1Params(_Params):
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        for f in fields(self):
            _check_range(f.name, getattr(self, f.name), 0.0, TWO_PI)


@dataclass(frozen=True)
class XyModelParams(_Params):
    j_x: float
    j_y: float

    def __post_init__(self):
        if not (math.isfinite(self.j_x) and math.isfinite(self.j_y)):
            raise ValueError("couplings must be finite")


XX_MODEL = XyModelParams(0.5, 0.5)
ANISOTROPIC_XY_MODEL = XyModelParams(1.0, 0.5)


def su2(p: Su2Params) -> np.ndarray:
    c = math.cos(p.theta / 2)
    s = math.sin(p.theta / 2)
    plus = 0.5 * (p.psi + p.nu)
    minus = 0.5 * (p.psi - p.nu)
    return np.array(
        [
            [c * cmath.exp(1j * plus), s * cmath.exp(-1j * minus)],
            [-s * cmath.exp(1j * minus), c * cmath.exp(-1j * plus)],
        ]
    )


def nonlocal_core(alpha_x: float, alpha_y: float, alpha_z: float) -> np.ndarray:
    """exp(-i(ax XX + ay YY + az ZZ)) as a product of its three commuting factors."""
    u = I4
    for alpha, pp in zip((alpha_x, alpha_y, alpha_z), _PAULI_PAIRS):
        u = u @ (math.cos(alpha) * I4 - 1j * math.sin(alpha) * pp)
    return u


def kraus_cirac(p: KrausCiracParams) -> np.ndarray:
    """(W1 x W2) U_d (W3 x W4)."""
    left = kron(su2(p.w1), su2(p.w2))
    right = kron(su2(p.w3), su2(p.w4))
    return left @ nonlocal_core(p.alpha_x, p.alpha_y, p.alpha_z) @ right


def energy_conserving(p: EnergyConservingParams) -> np.ndarray:
    """Phases on |00>, |11> and on a rotated basis of the degenerate {|01>, |10>} block."""
    c = math.cos(p.lambda5)
    s = math.sin(p.lambda5)
    # |phi1> = s|10> + c|01>, |phi2> = c|10> - s|01>; block indices (|01>, |10>) = (1, 2)
    phi1 = np.array([c, s])
    phi2 = np.array([-s, c])
    block = cmath.exp(-1j * p.lambda2) * np.outer(phi1, phi1) + cmath.exp(-1j * p.lambda3) * np.outer(phi2, phi2)
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = cmath.exp(-1j * p.lambda1)
    u[3, 3] = cmath.exp(-1j * p.lambda4)
    u[1:3, 1:3] = block
    return u


def swap_like(a: float, b: float, c: float) -> np.ndarray:
    """SWAP dressed with phases e^{ia} on |00>, e^{ib} on the exchange, e^{ic} on |11>."""
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = cmath.exp(1j * a)
    u[1, 2] = u[2, 1] = cmath.exp(1j * b)
    u[3, 3] = cmath.exp(1j * c)
    return u


def local_u1(p: LocalU1Params) -> np.ndarray:
    cg = math.cos(p.gamma)
    sg = math.sin(p.gamma)
    return np.array(
        [
            [cmath.exp(1j * p.delta) * cg, cmath.exp(1j * p.beta) * sg],
            [-cmath.exp(-1j * p.beta) * sg, cmath.exp(-1j * p.delta) * cg],
        ]
    )


def xy_hamiltonian(p: XyModelParams) -> np.ndarray:
    return H_TOTAL + p.j_x * np.kron(SIGMA_X, SIGMA_X) + p.j_y * np.kron(SIGMA_Y, SIGMA_Y)


def xy_unitary(p: XyModelParams) -> np.ndarray:
    """exp[-i(H_T + J_x XX + J_y YY)]."""
    return exp_minus_i_hermitian(xy_hamiltonian(p))
