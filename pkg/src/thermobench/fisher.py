"""Quantum Fisher information with respect to temperature."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import eig_hermitian, hermiticity_error
from .states import STENCIL_OFFSETS, _check_temperature, dr_dT, r_coefficient

EXCLUSION_TOL = 1e-10
DERIV_HERMITIAN_TOL = 1e-8
DEFAULT_H = 1e-3

@dataclass(frozen=True)
class StencilConfig:
    h: float = DEFAULT_H

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0):
            raise ValueError(f"stencil step must be positive, got {self.h!r}")

    def temperatures(self, T: float) -> np.ndarray:
        if T - 2 * self.h <= 0:
            raise ValueError(f"stencil at T={T} with h={self.h} reaches non-positive temperature")
        return T + self.h * np.array(STENCIL_OFFSETS, dtype=float)


def stencil_combine(stack: np.ndarray, h: float) -> np.ndarray:
    """Five-point midpoint derivative from values at T-2h, T-h, T+h, T+2h (in that order)."""
    return (stack[0] - 8.0 * stack[1] + 8.0 * stack[2] - stack[3]) / (12.0 * h)


def state_derivative_stencil(
    state_fn: Callable, T: float, cfg: StencilConfig = StencilConfig(), batched: bool = False
) -> np.ndarray:
    """(1/12h)[rho(T-2h) - 8 rho(T-h) + 8 rho(T+h) - rho(T+2h)].

    With ``batched=True`` ``state_fn`` is called once with the array of four
    temperatures and must return the stacked states.
    """
    temps = cfg.temperatures(T)
    if batched:
        stack = np.asarray(state_fn(temps))
    else:
        stack = np.array([state_fn(float(t)) for t in temps])
    return stencil_combine(stack, cfg.h)


def _qfi_terms(w: np.ndarray, v: np.ndarray, deriv: np.ndarray) -> float:
    d = v.conj().T @ deriv @ v
    s = w[:, None] + w[None, :]
    keep = s > EXCLUSION_TOL
    return float(2.0 * np.sum(np.abs(d[keep]) ** 2 / s[keep]))


def qfi(state, deriv) -> float:
    """2 sum_{l_i + l_j > 0} |<l_i| d rho/dT |l_j>|^2 / (l_i + l_j).

    Eigenpairs with l_i + l_j <= 1e-10 are left out of the sum.
    """
    deriv = np.asarray(deriv, dtype=complex)
    herr = hermiticity_error(deriv)
    if herr > DERIV_HERMITIAN_TOL:
        raise ValueError(f"derivative is not Hermitian (deviation {herr:.3e})")
    deriv = 0.5 * (deriv + deriv.conj().T)
    w, v = eig_hermitian(state)
    return _qfi_terms(w, v, deriv)


def qfi_lapack(state: np.ndarray, deriv: np.ndarray) -> float:
    """Same sum as :func:`qfi` via LAPACK ``eigh`` and without input checks.

    Used inside optimizer objectives, where the Jacobi solver's per-call cost
    dominates the run time.
    """
    w, v = np.linalg.eigh(state)
    return _qfi_terms(w, v, 0.5 * (deriv + deriv.conj().T))


def qfi_stencil(state_fn: Callable, T: float, cfg: StencilConfig = StencilConfig()) -> float:
    """QFI of ``state_fn(T)`` with the five-point stencil derivative.

    ``state_fn`` must accept an array of temperatures and return stacked
    states; all five evaluations go through one call.
    """
    temps = np.concatenate([[T], cfg.temperatures(T)])
    stack = np.asarray(state_fn(temps))
    return qfi_lapack(stack[0], stencil_combine(stack[1:], cfg.h))


def qfi_thermal_closed_form(T, energies=None) -> float:
    """QFI of a thermal state, sum_i pdot_i^2 / p_i.

    Defaults to the sigma_z qubit, where it equals (dr/dT)^2 (1/r + 1/(1-r)).
    ``energies`` gives the spectrum of a general Hamiltonian.
    """
    if energies is None:
        r = float(r_coefficient(T))
        rd = float(dr_dT(T))
        return rd * rd * (1.0 / r + 1.0 / (1.0 - r))
    t = float(_check_temperature(T))
    e = np.asarray(energies, dtype=float)
    boltz = np.exp(-(e - e.min()) / t)
    p = boltz / boltz.sum()
    p_dot = p * (e - np.dot(p, e)) / t**2
    return qfi_pure_state(SpectrumDerivative(p, p_dot))


@dataclass(frozen=True)
class SpectrumDerivative:
    p: np.ndarray
    p_dot: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        p_dot = np.asarray(self.p_dot, dtype=float)
        if p.shape != p_dot.shape or p.ndim != 1:
            raise ValueError("p and p_dot must be 1-D of equal length")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
            raise ValueError("p is not a probability vector")
        if abs(p_dot.sum()) > 1e-9:
            raise ValueError(f"p_dot must sum to zero, got {p_dot.sum():.3e}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "p_dot", p_dot)


def qfi_pure_state(sd: SpectrumDerivative) -> float:
    """sum_i pdot_i^2 / p_i over entries with p_i > 1e-12.

    This is both the QFI of a purification whose Schmidt weights are ``p`` and
    the QFI of the diagonal state diag(p).
    """
    keep = sd.p > 1e-12
    if np.any(~keep & (np.abs(sd.p_dot) > 1e-12)):
        raise ValueError("zero population with non-zero derivative")
    return float(np.sum(sd.p_dot[keep] ** 2 / sd.p[keep]))


def cramer_rao_bound(f: float, n: int = 1) -> float:
    """Variance floor 1/(n F) for n independent repetitions."""
    if not f > 0:
        raise ValueError(f"Fisher information must be positive, got {f!r}")
    if n < 1:
        raise ValueError("n must be a positive integer")
    return 1.0 / (n * f)

