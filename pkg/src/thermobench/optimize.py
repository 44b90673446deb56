"""Box-constrained multistart Nelder-Mead maximization and the QFI objectives it runs on."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .channels import evolve
from .fisher import DEFAULT_H, StencilConfig, qfi_lapack, stencil_combine
from .linalg import I2, kron, partial_trace_env
from .states import (
    POSITIVITY_TOL,
    TwoQubitStateParams,
    _check_temperature,
    bloch_state,
    constrained_state_unchecked,
    purification,
    thermal_state,
)
from .unitaries import (
    ANISOTROPIC_XY_MODEL,
    FOUR_PI,
    HALF_PI,
    TWO_PI,
    XX_MODEL,
    EnergyConservingParams,
    KrausCiracParams,
    LocalU1Params,
    energy_conserving,
    kraus_cirac,
    local_u1,
    xy_unitary,
)

REFLECT = 1.0
EXPAND = 2.0
CONTRACT = 0.5
SHRINK = 0.5
INITIAL_STEP = 0.05
XTOL = 1e-9
DEFAULT_PENALTY = 1e4

OPTIMIZER_ID = "nelder-mead/multistart/box-clamp"

SCENARIO_KINDS = ("cptp", "ncptp1", "ncptp2", "ncptp2-bound")


@dataclass
class OptimizationProblem:
    lower: np.ndarray
    upper: np.ndarray
    objective: Callable[[np.ndarray], float]
    penalty: float = 0.0
    decode: Optional[Callable[[np.ndarray], dict]] = None
    name: str = ""

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ValueError("lower and upper bounds must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise ValueError("bounds must be finite")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def dimension(self) -> int:
        return self.lower.size

    def clamp(self, x) -> np.ndarray:
        return np.minimum(np.maximum(np.asarray(x, dtype=float), self.lower), self.upper)


@dataclass
class OptimizationResult:
    best_value: float
    best_params: np.ndarray
    restarts_used: int
    evaluations: int
    converged: bool
    restart_values: list = field(default_factory=list)


@dataclass
class _LocalRun:
    x: np.ndarray
    value: float
    evaluations: int
    converged: bool
    incumbents: list


def nelder_mead(
    f: Callable[[np.ndarray], float],
    x0,
    lower,
    upper,
    max_evals: int,
    xtol: float = XTOL,
) -> _LocalRun:
    """Maximize ``f`` over the box [lower, upper] from ``x0``.

    Trial points are clamped onto the box before evaluation, so every
    simplex vertex is feasible. Stops when the largest coordinate distance
    from the best vertex drops below ``xtol`` or after ``max_evals`` calls.
    ``incumbents`` records the best value after each iteration.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = lower.size
    evals = 0

    def g(x):
        nonlocal evals
        evals += 1
        v = f(x)
        return -v if math.isfinite(v) else math.inf

    x0 = np.clip(np.asarray(x0, dtype=float), lower, upper)
    if n == 0:
        val = -g(x0)
        return _LocalRun(x0, val, evals, True, [val])

    step = INITIAL_STEP * (upper - lower)
    pts = [x0]
    for i in range(n):
        x = x0.copy()
        if x[i] + step[i] <= upper[i]:
            x[i] += step[i]
        else:
            x[i] -= step[i]
        pts.append(x)
    sim = np.array(pts)
    vals = np.empty(n + 1)
    for i in range(n + 1):
        if evals >= max_evals:
            vals[i:] = math.inf
            break
        vals[i] = g(sim[i])

    incumbents = []
    converged = False
    while True:
        order = np.argsort(vals, kind="stable")
        sim = sim[order]
        vals = vals[order]
        incumbents.append(-vals[0])
        if np.max(np.abs(sim[1:] - sim[0])) < xtol:
            converged = True
            break
        if evals >= max_evals:
            break
        centroid = sim[:-1].mean(axis=0)
        xr = np.clip(centroid + REFLECT * (centroid - sim[-1]), lower, upper)
        fr = g(xr)
        if fr < vals[0]:
            if evals >= max_evals:
                sim[-1], vals[-1] = xr, fr
                continue
            xe = np.clip(centroid + EXPAND * (xr - centroid), lower, upper)
            fe = g(xe)
            if fe < fr:
                sim[-1], vals[-1] = xe, fe
            else:
                sim[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-2]:
            sim[-1], vals[-1] = xr, fr
            continue
        if evals >= max_evals:
            if fr < vals[-1]:
                sim[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-1]:
            xc = np.clip(centroid + CONTRACT * (xr - centroid), lower, upper)
            fc = g(xc)
            if fc <= fr:
                sim[-1], vals[-1] = xc, fc
                continue
        else:
            xc = np.clip(centroid + CONTRACT * (sim[-1] - centroid), lower, upper)
            fc = g(xc)
            if fc < vals[-1]:
                sim[-1], vals[-1] = xc, fc
                continue
        for i in range(1, n + 1):
            if evals >= max_evals:
                break
            sim[i] = sim[0] + SHRINK * (sim[i] - sim[0])
            vals[i] = g(sim[i])

    best = int(np.argmin(vals))
    return _LocalRun(sim[best].copy(), float(-vals[best]), evals, converged, incumbents)


def optimize(
    problem: OptimizationProblem,
    restarts: int,
    seed: int,
    budget: int,
    initial_points: Optional[Sequence] = None,
) -> OptimizationResult:
    """Best of ``restarts`` Nelder-Mead runs, each capped at ``budget`` evaluations.

    Start points are drawn uniformly in the box from a PCG64 stream seeded by
    ``seed``; rows of ``initial_points`` replace the first draws. The winner
    is the highest value, ties going to the lower restart index.
    """
    if restarts < 1 or budget < 1:
        raise ValueError("restarts and budget must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    starts = rng.uniform(problem.lower, problem.upper, size=(restarts, problem.dimension))
    if initial_points is not None:
        pts = np.asarray(initial_points, dtype=float).reshape(-1, problem.dimension)
        k = min(len(pts), restarts)
        starts[:k] = problem.clamp(pts[:k])

    best: Optional[_LocalRun] = None
    total = 0
    values = []
    for i in range(restarts):
        run = nelder_mead(problem.objective, starts[i], problem.lower, problem.upper, budget)
        total += run.evaluations
        values.append(run.value)
        if best is None or run.value > best.value:
            best = run
    return OptimizationResult(best.value, best.x, restarts, total, best.converged, values)


# Parameter layouts


def _kc_bounds():
    below_4pi = np.nextafter(FOUR_PI, 0.0)
    lo = np.zeros(15)
    hi = np.array([math.pi, TWO_PI, below_4pi] * 4 + [HALF_PI] * 3)
    return lo, hi


def _ec_bounds():
    return np.zeros(5), np.full(5, TWO_PI)


_FAMILY_BOUNDS = {"general": _kc_bounds, "energy-conserving": _ec_bounds}
_FIXED_MODELS = {"xx": XX_MODEL, "xy": ANISOTROPIC_XY_MODEL}


def unitary_from_vector(family: str, x) -> np.ndarray:
    if family == "general":
        return kraus_cirac(KrausCiracParams.from_array(x))
    if family == "energy-conserving":
        return energy_conserving(EnergyConservingParams.from_array(x))
    raise ValueError(f"family {family!r} has no free unitary parameters")


def fixed_unitary(family: str) -> np.ndarray:
    if family not in _FIXED_MODELS:
        raise ValueError(f"family {family!r} is not a fixed-unitary model")
    return xy_unitary(_FIXED_MODELS[family])


def project_bloch(v) -> np.ndarray:
    """Radially project onto the unit ball."""
    v = np.asarray(v, dtype=float)
    norm = math.sqrt(float(v @ v))
    return v / norm if norm > 1.0 else v


def _unitary_part(family: str):
    """Bounds and a decoder for the unitary parameters of ``family``."""
    if family in _FAMILY_BOUNDS:
        lo, hi = _FAMILY_BOUNDS[family]()
        return lo, hi, lambda x: unitary_from_vector(family, x)
    if family in _FIXED_MODELS:
        u = fixed_unitary(family)
        return np.zeros(0), np.zeros(0), lambda x: u
    raise ValueError(f"unknown unitary family {family!r}")


def _probe_qfi(joint_stack, h) -> float:
    stack = partial_trace_env(joint_stack)
    return qfi_lapack(stack[0], stencil_combine(stack[1:], h))


def _joint_temps(T: float, cfg: StencilConfig) -> np.ndarray:
    return np.concatenate([[T], cfg.temperatures(T)])


def scenario_problem(
    kind: str,
    family: Optional[str],
    T: float,
    state_params: Optional[TwoQubitStateParams] = None,
    h: float = DEFAULT_H,
    penalty: float = DEFAULT_PENALTY,
) -> OptimizationProblem:
    """The maximization problem for one (encoding, unitary family, temperature).

    Layouts (unitary parameters always first):

    * ``cptp``: unitary + Bloch vector in [-1, 1]^3, projected onto the ball.
    * ``ncptp1``: unitary + (beta, gamma, delta) of the probe rotation U1.
    * ``ncptp2``: with ``state_params`` fixed, the unitary only; for the
      fixed-unitary families (xx, xy) the 12 state components are searched
      instead, under the positivity penalty.
    * ``ncptp2-bound``: the 12 state components, maximizing the QFI of the
      joint state itself; ``family`` is ignored.
    """
    T = float(_check_temperature(T))
    cfg = StencilConfig(h)
    temps = _joint_temps(T, cfg)

    if kind == "ncptp2-bound":
        return _state_problem(temps, h, penalty, None, name=f"ncptp2-bound@T={T:g}")
    if kind not in SCENARIO_KINDS:
        raise ValueError(f"unknown scenario kind {kind!r}")
    if family is None:
        raise ValueError(f"{kind} needs a unitary family")
    u_lo, u_hi, build_u = _unitary_part(family)
    nu = u_lo.size
    name = f"{kind}/{family}@T={T:g}"

    if kind == "cptp":
        lo = np.concatenate([u_lo, -np.ones(3)])
        hi = np.concatenate([u_hi, np.ones(3)])

        tau_stack = thermal_state(temps)

        def objective(x):
            u = build_u(x[:nu])
            rho_s = bloch_state(project_bloch(x[nu:]))
            return _probe_qfi(evolve(u, kron(rho_s, tau_stack)), h)

        def decode(x):
            return {"unitary": build_u(x[:nu]), "bloch": project_bloch(x[nu:])}

        return OptimizationProblem(lo, hi, objective, 0.0, decode, name)

    if kind == "ncptp1":
        lo = np.concatenate([u_lo, np.zeros(3)])
        hi = np.concatenate([u_hi, np.full(3, TWO_PI)])

        psi_stack = purification(temps)

        def objective(x):
            u = build_u(x[:nu])
            u1 = local_u1(LocalU1Params.from_array(x[nu:]))
            return _probe_qfi(evolve(u @ kron(u1, I2), psi_stack), h)

        def decode(x):
            return {"unitary": build_u(x[:nu]), "u1": LocalU1Params.from_array(x[nu:])}

        return OptimizationProblem(lo, hi, objective, 0.0, decode, name)

    # ncptp2
    if nu == 0:
        return _state_problem(temps, h, penalty, build_u(None), name=name)
    if state_params is None:
        raise ValueError("ncptp2 with a free unitary needs fixed state_params")
    x_state = state_params.free_vector()
    rho_stack = constrained_state_unchecked(x_state, temps)
    lmin = float(np.linalg.eigvalsh(rho_stack).min())
    if lmin < -POSITIVITY_TOL:
        raise ValueError(f"state not positive at every stencil temperature (min eigenvalue {lmin:.3e})")

    def objective(x):
        return _probe_qfi(evolve(build_u(x), rho_stack), h)

    def decode(x):
        return {"unitary": build_u(x), "state": state_params}

    return OptimizationProblem(u_lo, u_hi, objective, 0.0, decode, name)


def _state_problem(temps, h, penalty, u, name) -> OptimizationProblem:
    # Search over the 12 temperature-independent components. With u=None the
    # objective is the joint-state QFI (the type-II upper bound); otherwise
    # the probe QFI after the fixed unitary u.
    lo = -np.ones(12)
    hi = np.ones(12)

    def objective(x):
        stack = constrained_state_unchecked(x, temps)
        lmin = float(np.linalg.eigvalsh(stack).min())
        if lmin < -POSITIVITY_TOL:
            return -penalty * abs(lmin)
        if u is None:
            return qfi_lapack(stack[0], stencil_combine(stack[1:], h))
        return _probe_qfi(evolve(u, stack), h)

    def decode(x):
        out = {"state": TwoQubitStateParams.from_vector(x)}
        if u is not None:
            out["unitary"] = u
        return out

    return OptimizationProblem(lo, hi, objective, penalty, decode, name)


# SWAP (up to a global phase) in each free family; used as a start point for
# type-II searches, where it reproduces the thermal QFI exactly.
_SWAP_POINTS = {
    "general": np.array([0.0] * 12 + [math.pi / 4] * 3),
    "energy-conserving": np.array([0.0, 0.0, math.pi, 0.0, math.pi / 4]),
}


def swap_start(family: str) -> np.ndarray:
    if family not in _SWAP_POINTS:
        raise ValueError(f"family {family!r} has no free unitary parameters")
    return _SWAP_POINTS[family].copy()
