"""Property suites run with pinned seeds: CPTP and type-I caps, formula agreement, QFI invariances."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channels import encode_cptp, encode_ncptp1, encode_ncptp2, joint_evolved_state
from .fisher import (
    StencilConfig,
    qfi,
    qfi_pure_state,
    qfi_thermal_closed_form,
    SpectrumDerivative,
    stencil_combine,
)
from .linalg import (
    PAULIS,
    commutator,
    eig_hermitian,
    max_norm,
    partial_trace_env,
    tensor,
    unitarity_error,
)
from .optimize import OptimizationProblem, nelder_mead, optimize, scenario_problem
from .states import (
    dr_dT,
    purification,
    r_coefficient,
    sample_constrained_state,
    stencil_min_eigenvalue,
    thermal_state,
    thermal_state_derivative,
)
from .unitaries import (
    ANISOTROPIC_XY_MODEL,
    H_TOTAL,
    SWAP,
    XX_MODEL,
    EnergyConservingParams,
    KrausCiracParams,
    LocalU1Params,
    energy_conserving,
    kraus_cirac,
    xy_unitary,
)

LEVELS = ("quick", "full")
SUITE_TEMPS = (1.0, 1.5, 2.0)
SUITE_SEED = 20240101


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


@dataclass
class VerifyReport:
    level: str
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list:
        out = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail} ({c.seconds:.1f}s)" for c in self.checks]
        n_fail = sum(not c.passed for c in self.checks)
        out.append(f"{len(self.checks) - n_fail}/{len(self.checks)} checks passed")
        return out


# Random draws


def random_bloch(rng) -> np.ndarray:
    """Uniform in the unit ball."""
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v) * rng.uniform() ** (1 / 3)


def random_probe(rng) -> np.ndarray:
    v = random_bloch(rng)
    return 0.5 * (np.eye(2) + np.tensordot(v, PAULIS, axes=1))


def random_kc_params(rng) -> KrausCiracParams:
    x = []
    for _ in range(4):
        x += [rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi), rng.uniform(0, 4 * math.pi)]
    x += list(rng.uniform(0, math.pi / 2, 3))
    return KrausCiracParams.from_array(x)


def random_ec_params(rng) -> EnergyConservingParams:
    return EnergyConservingParams.from_array(rng.uniform(0, 2 * math.pi, 5))


def random_u1_params(rng) -> LocalU1Params:
    return LocalU1Params.from_array(rng.uniform(0, 2 * math.pi, 3))


def haar_unitary(rng, dim: int = 4) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


# Helpers


def _stencil_qfi(stack_fn, T, qfi_fn, cfg=StencilConfig()) -> float:
    temps = np.concatenate([[T], cfg.temperatures(T)])
    stack = stack_fn(temps)
    return qfi_fn(stack[0], stencil_combine(stack[1:], cfg.h))


def _timed(name, fn) -> CheckResult:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crashing check is a failing check
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CheckResult(name, bool(ok), detail, time.perf_counter() - t0)


def _counts(level: str) -> dict:
    if level == "quick":
        return {"cptp": 100, "type1": 100, "mono": 100, "unitary": 100, "add": 100, "eig": 100}
    return {"cptp": 1000, "type1": 1000, "mono": 500, "unitary": 500, "add": 100, "eig": 500}


# Suites


def _cptp_cap(n, qfi_fn):
    rng = np.random.Generator(np.random.PCG64(SUITE_SEED + 1))
    worst = -math.inf
    for T in SUITE_TEMPS:
        ref = qfi_thermal_closed_form(T)
        for k in range(n):
            probe = random_probe(rng)
            # draw 0 is the saturating SWAP encoding
            u = SWAP if k == 0 else kraus_cirac(random_kc_params(rng))
            f = _stencil_qfi(lambda t: encode_cptp(probe, u, t), T, qfi_fn)
            worst = max(worst, f - ref)
    return worst <= 1e-5, f"max(F - F_thermal) = {worst:.3e} over {3 * n} draws"


def _type1_cap(n, qfi_fn):
    rng = np.random.Generator(np.random.PCG64(SUITE_SEED + 2))
    worst = -math.inf
    for T in SUITE_TEMPS:
        ref = qfi_thermal_closed_form(T)
        for k in range(n):
            u1 = random_u1_params(rng)
            u = SWAP if k == 0 else kraus_cirac(random_kc_params(rng))
            f = _stencil_qfi(lambda t: encode_ncptp1(u1, u, t), T, qfi_fn)
            worst = max(worst, f - ref)
    pur = max(abs(_stencil_qfi(purification, T, qfi_fn) - qfi_thermal_closed_form(T)) for T in SUITE_TEMPS)
    ok = worst <= 1e-5 and pur <= 1e-8
    return ok, f"max(F - F_thermal) = {worst:.3e} over {3 * n} draws; purification |dF| = {pur:.1e}"


def _formula_agreement(qfi_fn):
    worst = 0.0
    for T in np.round(np.linspace(1.0, 2.0, 101), 10):
        closed = qfi_thermal_closed_form(T)
        analytic = qfi_fn(thermal_state(T), thermal_state_derivative(T))
        stencil = _stencil_qfi(thermal_state, T, qfi_fn)
        pure = qfi_pure_state(SpectrumDerivative(np.array([1 - r_coefficient(T), r_coefficient(T)]),
                                                 np.array([-dr_dT(T), dr_dT(T)])))
        for v in (analytic, stencil, pure):
            worst = max(worst, abs(v - closed) / closed)
    return worst <= 1e-6, f"max relative deviation {worst:.2e} over 101 temperatures"


def _nonnegative(n, qfi_fn):
    rng = np.random.Generator(np.random.PCG64(SUITE_SEED + 3))
    lo = math.inf
    zero_ok = True
    for _ in range(n):
        rho = joint_evolved_state(haar_unitary(rng), 1.0 + rng.uniform())
        h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        lo = min(lo, qfi_fn(rho, h + h.conj().T))
        zero_ok &= qfi_fn(rho, np.zeros((4, 4))) == 0.0
    return lo >= 0 and zero_ok, f"min F = {lo:.3e}; F(deriv=0) == 0: {zero_ok}"


def _exclusion_inactive():
    lam = min(
        min(float(eig_hermitian(thermal_state(T)).eigenvalues[0]) for T in np.linspace(1, 2, 101)),
        1.0,
    )
    return lam > 0.01, f"smallest thermal eigenvalue on [1, 2]: {lam:.4f}"


def _trace_preservation(n):
    rng = np.random.Generator(np.random.PCG64(SUITE_SEED + 4))
    worst = 0.0
    for _ in range(n):
        T = rng.uniform(1.0, 2.0)
        u = haar_unitary(rng)
        outs = [
            encode_cptp(random_probe(rng), u, T),
            encode_ncptp1(random_u1_params(rng), u, T),
            encode_ncptp2(sample_constrained_state(int(rng.integers(2**62)), T), u, T),
        ]
        worst = max(worst, max(abs(np.trace(o) - 1) for o in outs))
    return worst <= 1e-10, f"max |Tr - 1| = {worst:.1e}"


def _monotonicity(n, qfi_fn):
    rng = np.random.Generator(np.random.PCG64(SUITE_SEED + 5))
    worst = -math.inf
    for k in range(n):
        T = float(rng.choice(SUITE_TEMPS))
        u = haar_unitary(rng)
        kind = k % 3
        if kind == 0:
            probe = random_probe(rng)
            joint = lambda t: u @ tensor_stack(probe, t) @ u.conj().T
        elif kind == 1:
            u1 = random_u1_params(rng)
            joint = lambda t: joint_evolved_state(u, t, u1=u1)
        else:
            params = sample_constrained_state(int(rng.integers(2**62)), T)
            joint = lambda t: joint_evolved_state(u, t, params=params)
        f_probe = _stencil_qfi(lambda t: partial_trace_env(joint(t)), T, qfi_fn)
        f_joint = _stencil_qfi(joint, T, qfi_fn)
        worst = max(worst, f_probe - f_joint)
    return worst <= 1e-6, f"max(F_probe - F_joint) = {worst:.3e} over {n} draws"


def tensor_stack(probe, temps):
    return np.array([tensor(probe, thermal_state(t)) for t in np.atleast_1d(temps)])


def _unitary_invariance(n, qfi_fn):
    rng = np.random.Generator(np.random.PCG64(SUITE_SEED + 6))
    worst = 0.0
    for k in range(n):
        T = float(rng.choice(SUITE_TEMPS))
        u = haar_unitary(rng)
        if k % 2:
            params = sample_constrained_state(int(rng.integers(2**62)), T)
            f0 = _stencil_qfi(lambda t: joint_evolved_state(np.eye(4), t, params=params), T, qfi_fn)
            f1 = _stencil_qfi(lambda t: joint_evolved_state(u, t, params=params), T, qfi_fn)
        else:
            f0 = _stencil_qfi(purification, T, qfi_fn)
            f1 = _stencil_qfi(lambda t: joint_evolved_state(u, t), T, qfi_fn)
        worst = max(worst, abs(f1 - f0))
    return worst <= 1e-8, f"max |F(U rho U+) - F(rho)| = {worst:.1e} over {n} draws"


def _additivity(n, qfi_fn):
    rng = np.random.Generator(np.random.PCG64(SUITE_SEED + 7))
    worst = 0.0
    for _ in range(n):
        T = float(rng.choice(SUITE_TEMPS))
        probe = random_probe(rng)
        f = _stencil_qfi(lambda t: tensor_stack(probe, t), T, qfi_fn)
        worst = max(worst, abs(f - qfi_thermal_closed_form(T)))
    return worst <= 1e-8, f"max |F(rho_S x tau) - F(tau)| = {worst:.1e} over {n} draws"


def _eigensolver(n):
    rng = np.random.Generator(np.random.PCG64(SUITE_SEED + 8))
    res = orth = 0.0
    for k in range(n):
        d = 2 if k % 2 else 4
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        a = a + a.conj().T
        w, v = eig_hermitian(a)
        res = max(res, max_norm(a @ v - v * w))
        orth = max(orth, max_norm(v.conj().T @ v - np.eye(d)))
    return res <= 1e-10 and orth <= 1e-10, f"max residual {res:.1e}, orthonormality {orth:.1e}"


def _unitary_families(n):
    rng = np.random.Generator(np.random.PCG64(SUITE_SEED + 9))
    kc = max(unitarity_error(kraus_cirac(random_kc_params(rng))) for _ in range(n))
    ec = max(max_norm(commutator(energy_conserving(random_ec_params(rng)), H_TOTAL)) for _ in range(n))
    xx = max_norm(commutator(xy_unitary(XX_MODEL), H_TOTAL))
    xy = max_norm(commutator(xy_unitary(ANISOTROPIC_XY_MODEL), H_TOTAL))
    ok = kc <= 1e-10 and ec <= 1e-10 and xx <= 1e-10 and xy > 0.01
    return ok, f"KC unitarity {kc:.1e}; [U_EC, H_T] {ec:.1e}; [U_XX, H_T] {xx:.1e}; [U_XY, H_T] {xy:.3f}"


def _sampler(n):
    worst = math.inf
    for k in range(n):
        T = 1.0 + (k % 11) / 10
        x = sample_constrained_state(SUITE_SEED + k, T).free_vector()
        worst = min(worst, stencil_min_eigenvalue(x, T, 1e-3))
    return worst >= -1e-10, f"min stencil eigenvalue over {n} samples: {worst:.3e}"


def _optimizer(level):
    lo, hi = np.zeros(3), np.ones(3)
    quad = OptimizationProblem(lo, hi, lambda x: -float(np.sum((x - 0.3) ** 2)))
    r = optimize(quad, 20, 1, 2000)
    ok_quad = r.best_value >= -1e-10
    run = nelder_mead(quad.objective, np.array([0.9, 0.1, 0.5]), lo, hi, 2000)
    mono = bool(np.all(np.diff(run.incumbents) >= 0))
    p = scenario_problem("cptp", "energy-conserving", 1.0)
    a = optimize(p, 3, 7, 500)
    b = optimize(p, 3, 7, 500)
    repro = a.best_value == b.best_value and np.array_equal(a.best_params, b.best_params)
    cap = qfi_thermal_closed_form(1.0) * (1 + 1e-4)
    capped = a.best_value <= cap
    p1 = scenario_problem("ncptp1", "energy-conserving", 1.0)
    capped &= optimize(p1, 3, 7, 500).best_value <= cap
    ok = ok_quad and mono and repro and capped
    return ok, f"quadratic {r.best_value:.1e}; incumbents monotone {mono}; reproducible {repro}; capped {capped}"


def verify_suite(level: str = "quick", qfi_fn: Callable = qfi) -> VerifyReport:
    """Run every property suite; ``quick`` uses 100 draws, ``full`` the complete counts.

    ``qfi_fn`` replaces the QFI used by the QFI-based suites (for mutation checks).
    """
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    n = _counts(level)
    report = VerifyReport(level)
    suites = [
        ("eigensolver", lambda: _eigensolver(n["eig"])),
        ("unitary families", lambda: _unitary_families(n["eig"])),
        ("state sampler positivity", lambda: _sampler(n["eig"] // 5)),
        ("QFI formula agreement", lambda: _formula_agreement(qfi_fn)),
        ("QFI non-negativity", lambda: _nonnegative(n["eig"], qfi_fn)),
        ("exclusion threshold inactive", _exclusion_inactive),
        ("trace preservation", lambda: _trace_preservation(n["eig"] // 5)),
        ("CPTP cap", lambda: _cptp_cap(n["cptp"], qfi_fn)),
        ("type-I cap", lambda: _type1_cap(n["type1"], qfi_fn)),
        ("monotonicity under partial trace", lambda: _monotonicity(n["mono"], qfi_fn)),
        ("unitary invariance", lambda: _unitary_invariance(n["unitary"], qfi_fn)),
        ("additivity", lambda: _additivity(n["add"], qfi_fn)),
        ("optimizer", lambda: _optimizer(level)),
    ]
    for name, fn in suites:
        report.checks.append(_timed(name, fn))
    return report
