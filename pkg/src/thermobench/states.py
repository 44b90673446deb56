"""Thermal states, Bloch states, purifications and thermal-marginal two-qubit states.

Qubit ordering is probe (S) first, environment (E) second, so the 4x4 basis is
|00>, |01>, |10>, |11> with the environment as the fast index. The local
Hamiltonian is sigma_z, so |0> has energy +1 and |1> has energy -1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    HERMITIAN_TOL,
    I2,
    PAULIS,
    SIGMA_Z,
    eig_hermitian,
    hermiticity_error,
    partial_trace_probe,
)

POSITIVITY_TOL = 1e-10
TRACE_TOL = 1e-10
BLOCH_TOL = 1e-12
STENCIL_OFFSETS = (-2, -1, 1, 2)

RNG_ALGORITHM = "numpy.random.PCG64"
SAMPLER_ID = "ginibre-marginal-fix/v1"

# 12 Pauli products spanning the temperature-independent part of a
# thermal-marginal state: sigma_i x I (3), then sigma_i x sigma_j (9, row-major).
_CORRELATION_BASIS = np.array(
    [np.kron(p, I2) for p in PAULIS] + [np.kron(p, q) for p in PAULIS for q in PAULIS]
)
_ENV_BASIS = np.array([np.kron(I2, p) for p in PAULIS])
_ENV_Z = np.kron(I2, SIGMA_Z)


class InvalidStateError(ValueError):
    """A matrix that should be a density matrix is not one."""


def _check_temperature(T):
    t = np.asarray(T, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t <= 0):
        raise ValueError(f"temperature must be positive and finite, got {T!r}")
    return t


def r_coefficient(T):
    """Population r = e^{1/T}/(e^{-1/T}+e^{1/T}) of the ground level |1>."""
    t = _check_temperature(T)
    return 1.0 / (1.0 + np.exp(-2.0 / t))


def dr_dT(T):
    t = _check_temperature(T)
    e = np.exp(-2.0 / t)
    return -(2.0 / t**2) * e / (1.0 + e) ** 2


def min_eigenvalue(rho) -> float:
    return float(eig_hermitian(rho).eigenvalues[0])


def check_density_matrix(rho, tol: float = POSITIVITY_TOL) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return ``rho`` unchanged.

    Eigenvalues in [-tol, 0) are tolerated but never clamped in the returned
    matrix.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"not a square matrix: shape {rho.shape}")
    herr = hermiticity_error(rho)
    if herr > HERMITIAN_TOL:
        raise InvalidStateError(f"not Hermitian (deviation {herr:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace {tr.real:.12g} != 1")
    lmin = min_eigenvalue(rho)
    if lmin < -tol:
        raise InvalidStateError(f"negative eigenvalue {lmin:.3e}")
    return rho


def thermal_state(T, hamiltonian=None) -> np.ndarray:
    """Gibbs state exp(-H/T)/Z.

    With the default sigma_z Hamiltonian this is diag(1 - r, r) and ``T`` may
    be an array, giving a stack of shape ``(len(T), 2, 2)``. A custom
    Hamiltonian requires scalar ``T``.
    """
    if hamiltonian is None:
        r = r_coefficient(T)
        out = np.zeros(np.shape(r) + (2, 2), dtype=complex)
        out[..., 0, 0] = 1.0 - r
        out[..., 1, 1] = r
        return out
    t = float(_check_temperature(T))
    w, v = eig_hermitian(hamiltonian)
    boltz = np.exp(-(w - w[0]) / t)
    p = boltz / boltz.sum()
    return (v * p) @ v.conj().T


def thermal_state_derivative(T) -> np.ndarray:
    """Analytic d tau/dT = diag(-dr/dT, dr/dT) for the sigma_z thermal state."""
    rd = dr_dT(T)
    out = np.zeros(np.shape(rd) + (2, 2), dtype=complex)
    out[..., 0, 0] = -rd
    out[..., 1, 1] = rd
    return out


@dataclass(frozen=True)
class BlochVector:
    n_x: float
    n_y: float
    n_z: float

    def __post_init__(self):
        norm2 = self.n_x**2 + self.n_y**2 + self.n_z**2
        if not np.isfinite(norm2) or norm2 > 1.0 + BLOCH_TOL:
            raise InvalidStateError(f"Bloch vector norm^2 {norm2:.6g} exceeds 1")

    @classmethod
    def from_array(cls, v) -> "BlochVector":
        x, y, z = (float(c) for c in v)
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.n_x, self.n_y, self.n_z])


def bloch_state(v) -> np.ndarray:
    if not isinstance(v, BlochVector):
        v = BlochVector.from_array(v)
    return 0.5 * (I2 + v.n_x * PAULIS[0] + v.n_y * PAULIS[1] + v.n_z * PAULIS[2])


def purification(T) -> np.ndarray:
    """|psi><psi| with |psi> = sqrt(1-r)|00> + sqrt(r)|11> (stackable over T)."""
    r = r_coefficient(T)
    psi = np.zeros(np.shape(r) + (4,), dtype=complex)
    psi[..., 0] = np.sqrt(1.0 - r)
    psi[..., 3] = np.sqrt(r)
    return psi[..., :, None] * psi[..., None, :].conj()


@dataclass(frozen=True)
class TwoQubitStateParams:
    """Pauli-expansion coefficients of a two-qubit state.

    ``a`` is the probe Bloch vector, ``b`` the environment one and ``c`` the
    3x3 correlation matrix (row = probe Pauli). Stored as tuples so instances
    compare and hash by value.
    """

    a: tuple
    b: tuple
    c: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        c = tuple(tuple(float(x) for x in row) for row in self.c)
        if len(a) != 3 or len(b) != 3 or len(c) != 3 or any(len(row) != 3 for row in c):
            raise ValueError("a, b must have 3 components and c must be 3x3")
        flat = a + b + sum(c, ())
        if any(not np.isfinite(x) or abs(x) > 1.0 for x in flat):
            raise ValueError("all Pauli coefficients must lie in [-1, 1]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_vector(cls, x, b=(0.0, 0.0, 0.0)) -> "TwoQubitStateParams":
        """Build from the 12 free components (a, then c row-major)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (12,):
            raise ValueError(f"expected 12 components, got shape {x.shape}")
        return cls(tuple(x[:3]), tuple(b), tuple(map(tuple, x[3:].reshape(3, 3))))

    def free_vector(self) -> np.ndarray:
        return np.array(self.a + sum(self.c, ()))


def correlation_part(x) -> np.ndarray:
    """I/4 + (a.sigma x I + sum c_ij sigma_i x sigma_j)/4 for the 12 free components."""
    return (np.eye(4) + np.tensordot(np.asarray(x, dtype=float), _CORRELATION_BASIS, axes=1)) / 4.0


def two_qubit_state(params: TwoQubitStateParams) -> np.ndarray:
    """Assemble the Pauli expansion with its own ``b`` and check it is a state."""
    rho = correlation_part(params.free_vector()) + np.tensordot(params.b, _ENV_BASIS, axes=1) / 4.0
    return check_density_matrix(rho)


def constrained_state_unchecked(x, T) -> np.ndarray:
    """Thermal-marginal state for free components ``x`` without validation.

    Stackable over an array of temperatures. Only b_z = 1 - 2r(T) carries the
    temperature dependence.
    """
    bz = 1.0 - 2.0 * r_coefficient(T)
    base = correlation_part(x)
    return base + np.multiply.outer(bz, _ENV_Z) / 4.0


def constrained_two_qubit_state(params: TwoQubitStateParams, T) -> np.ndarray:
    """The two-qubit state with a, C from ``params`` and b = (0, 0, 1 - 2r(T)).

    ``params.b`` is ignored. Raises :class:`InvalidStateError` if the assembled
    matrix is not positive semidefinite (min eigenvalue below -1e-10).
    """
    T = float(_check_temperature(T))
    rho = constrained_state_unchecked(params.free_vector(), T)
    return check_density_matrix(rho)


def stencil_temperatures(T: float, h: float) -> np.ndarray:
    return T + h * np.array(STENCIL_OFFSETS, dtype=float)


def stencil_min_eigenvalue(x, T: float, h: float) -> float:
    """Smallest eigenvalue of the constrained state over T and its four stencil points."""
    temps = np.concatenate([[T], stencil_temperatures(T, h)])
    return float(np.linalg.eigvalsh(constrained_state_unchecked(x, temps)).min())


def _sqrtm_psd(m: np.ndarray, inverse: bool = False) -> np.ndarray:
    w, v = eig_hermitian(m)
    w = np.clip(w, 0.0, None)
    f = 1.0 / np.sqrt(w) if inverse else np.sqrt(w)
    return (v * f) @ v.conj().T


def _marginal_fixed_draw(rng: np.random.Generator, T: float) -> np.ndarray:
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    sigma_e = partial_trace_probe(rho)
    m = np.kron(I2, _sqrtm_psd(thermal_state(T)) @ _sqrtm_psd(sigma_e, inverse=True))
    rho = m @ rho @ m.conj().T
    return np.real(np.einsum("kij,ji->k", _CORRELATION_BASIS, rho))


def sample_constrained_state(
    seed: int, T: float, h: float = 1e-3, max_rejections: int = 10**6
) -> TwoQubitStateParams:
    """Draw a random thermal-marginal state valid at T and at T +- h, T +- 2h.

    A Hilbert-Schmidt random state (normalized G G^dagger, G complex Ginibre)
    has its environment marginal mapped onto tau_E(T) by the local positive
    map I x tau^{1/2} sigma_E^{-1/2}; the resulting (a, C) is kept if the
    constrained state is positive at every stencil temperature, otherwise
    redrawn. Deterministic in ``seed``.
    """
    T = float(_check_temperature(T))
    if T - 2 * h <= 0:
        raise ValueError("stencil reaches non-positive temperature")
    rng = np.random.Generator(np.random.PCG64(seed))
    for _ in range(max_rejections):
        x = _marginal_fixed_draw(rng, T)
        if np.all(np.abs(x) <= 1.0) and stencil_min_eigenvalue(x, T, h) >= -POSITIVITY_TOL:
            return TwoQubitStateParams.from_vector(x)
    raise RuntimeError(f"no valid state after {max_rejections} draws (seed={seed}, T={T})")
