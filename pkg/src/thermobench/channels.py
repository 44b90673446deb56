"""Temperature-encoding processes: CPTP, type-I NCPTP and type-II NCPTP.

Every encoder takes the temperature explicitly and rebuilds the T-dependent
pieces (the thermal state, the purification's Schmidt weights, or b_z) from
it, so a finite-difference stencil can call it at shifted temperatures with
everything else frozen. ``T`` may be a scalar or a 1-D array; arrays give a
stack of states along the leading axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import I2, dagger, kron, partial_trace_env, unitarity_error
from .states import (
    BlochVector,
    InvalidStateError,
    POSITIVITY_TOL,
    TwoQubitStateParams,
    bloch_state,
    check_density_matrix,
    constrained_state_unchecked,
    purification,
    thermal_state,
)
from .unitaries import LocalU1Params, local_u1

UNITARY_TOL = 1e-10

KINDS = ("cptp", "ncptp1", "ncptp2")
FAMILIES = ("general", "energy-conserving", "xx", "xy")


def _check_unitary(u, dim: int = 4) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} unitary, got shape {u.shape}")
    err = unitarity_error(u)
    if err > UNITARY_TOL:
        raise ValueError(f"matrix is not unitary (deviation {err:.3e})")
    return u


def _u1_matrix(u1) -> np.ndarray:
    if isinstance(u1, LocalU1Params):
        return local_u1(u1)
    return _check_unitary(u1, dim=2)


def product_with_thermal(rho_s: np.ndarray, T) -> np.ndarray:
    """rho_S x tau_E(T), stacked over T when T is an array."""
    return kron(rho_s, thermal_state(T))


def evolve(u: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return u @ rho @ dagger(u)


# Unchecked kernels; the optimizer calls these in its inner loop.


def cptp_joint(rho_s, u, T):
    return evolve(u, product_with_thermal(rho_s, T))


def ncptp1_joint(u1m, u, T):
    local = kron(u1m, I2)
    return evolve(u @ local, purification(T))


def ncptp2_joint(x, u, T):
    return evolve(u, constrained_state_unchecked(x, T))


def encode_cptp(probe, u, T) -> np.ndarray:
    """Tr_E[U (rho_S x tau_E(T)) U^dagger]."""
    if isinstance(probe, BlochVector):
        probe = bloch_state(probe)
    probe = check_density_matrix(probe)
    if probe.shape != (2, 2):
        raise ValueError("probe must be a qubit state")
    u = _check_unitary(u)
    return partial_trace_env(cptp_joint(probe, u, T))


def encode_ncptp1(u1, u, T) -> np.ndarray:
    """Tr_E[U (U1 x I) |psi><psi| (U1 x I)^dagger U^dagger] with |psi> the purification of tau_E(T).

    ``u1`` is a :class:`LocalU1Params` or a 2x2 unitary.
    """
    u1m = _u1_matrix(u1)
    u = _check_unitary(u)
    return partial_trace_env(ncptp1_joint(u1m, u, T))


def _checked_constrained(params: TwoQubitStateParams, T) -> np.ndarray:
    rho = constrained_state_unchecked(params.free_vector(), T)
    lmin = np.linalg.eigvalsh(rho).min()
    if lmin < -POSITIVITY_TOL:
        raise InvalidStateError(
            f"initial joint state not positive at T={np.atleast_1d(T).tolist()} (min eigenvalue {lmin:.3e})"
        )
    return rho


def encode_ncptp2(params: TwoQubitStateParams, u, T) -> np.ndarray:
    """Tr_E[U rho_SE(T) U^dagger] for the thermal-marginal state described by ``params``.

    Raises :class:`InvalidStateError` if rho_SE(T) is not positive at (any of) T.
    """
    u = _check_unitary(u)
    return partial_trace_env(evolve(u, _checked_constrained(params, T)))


def joint_evolved_state(u, T, params: Optional[TwoQubitStateParams] = None, u1=None) -> np.ndarray:
    """U rho_SE(T) U^dagger without the partial trace.

    With ``params`` the initial state is the thermal-marginal state; otherwise
    it is the purification, optionally rotated by ``u1`` on the probe.
    """
    u = _check_unitary(u)
    if params is not None:
        return evolve(u, _checked_constrained(params, T))
    u1m = np.eye(2) if u1 is None else _u1_matrix(u1)
    return ncptp1_joint(u1m, u, T)


@dataclass(frozen=True)
class EncodingScenario:
    """One encoding setup with only the fields relevant to ``kind`` populated."""

    kind: str
    unitary_family: str
    fixed_unitary: Optional[np.ndarray] = None
    probe_params: Optional[BlochVector] = None
    u1_params: Optional[LocalU1Params] = None
    state_params: Optional[TwoQubitStateParams] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown encoding kind {self.kind!r}")
        if self.unitary_family not in FAMILIES:
            raise ValueError(f"unknown unitary family {self.unitary_family!r}")
        populated = {
            "cptp": self.probe_params,
            "ncptp1": self.u1_params,
            "ncptp2": self.state_params,
        }
        for kind, value in populated.items():
            if kind == self.kind and value is None:
                raise ValueError(f"{kind} scenario needs its initial-data field")
            if kind != self.kind and value is not None:
                raise ValueError(f"{self.kind} scenario must not carry {kind} data")
        if self.fixed_unitary is not None:
            object.__setattr__(self, "fixed_unitary", _check_unitary(self.fixed_unitary))

    def encode(self, T, u=None) -> np.ndarray:
        """Encoded probe state at ``T`` using ``u`` (or the fixed unitary)."""
        u = self.fixed_unitary if u is None else u
        if u is None:
            raise ValueError("no unitary given and scenario has no fixed unitary")
        if self.kind == "cptp":
            return encode_cptp(self.probe_params, u, T)
        if self.kind == "ncptp1":
            return encode_ncptp1(self.u1_params, u, T)
        return encode_ncptp2(self.state_params, u, T)
