"""Temperature sweeps over encoding scenarios, and their CSV/JSON serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .fisher import DEFAULT_H, cramer_rao_bound, qfi_thermal_closed_form
from .optimize import (
    CONTRACT,
    EXPAND,
    INITIAL_STEP,
    OPTIMIZER_ID,
    REFLECT,
    SHRINK,
    XTOL,
    optimize,
    scenario_problem,
    swap_start,
)
from .states import (
    POSITIVITY_TOL,
    RNG_ALGORITHM,
    SAMPLER_ID,
    sample_constrained_state,
    stencil_min_eigenvalue,
)

SCENARIOS = ("cptp", "ncptp1", "ncptp2")
UNITARY_FAMILIES = ("general", "energy-conserving", "xx", "xy")
FIXED_FAMILIES = ("xx", "xy")

CLOUD = "ncptp2"
BOUND = "ncptp2-bound"
BOUND_RUN = "ncptp2-bound-run"

COLUMNS = (
    "temperature",
    "scenario",
    "unitary_family",
    "state_index",
    "optimal_qfi",
    "thermal_qfi_reference",
    "cramer_rao_bound",
    "seed",
    "restarts",
    "evaluations",
)

SIG_DIGITS = 12
CAP_SLACK = 1e-4
REEVAL_TOL = 1e-10

# Stable integer codes feeding the seed derivation; never reorder.
_SEED_CODES = {"cptp": 1, "ncptp1": 2, "ncptp2-state": 3, "ncptp2-opt": 4, "ncptp2-bound": 5}
_FAMILY_CODES = {"general": 1, "energy-conserving": 2, "xx": 3, "xy": 4}


class SweepError(RuntimeError):
    """A sweep record failed one of its invariants."""


class ConfigError(ValueError):
    pass


def _round(x: float) -> float:
    return float(f"{x:.{SIG_DIGITS}g}")


@dataclass(frozen=True)
class SweepConfig:
    t_min: float = 1.0
    t_max: float = 2.0
    t_step: float = 0.01
    scenarios: tuple = SCENARIOS
    unitary_family: str = "general"
    n_states: int = 100
    n_bound_runs: int = 10
    master_seed: int = 0
    h: float = DEFAULT_H
    restarts: int = 50
    budget: int = 5000
    cloud_restarts: int = 4
    cloud_budget: int = 1000
    bound_restarts: int = 4
    bound_budget: int = 5000
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        for name in ("t_min", "t_max", "t_step", "h"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a positive finite number, got {v!r}")
        if self.t_min > self.t_max:
            raise ConfigError("t_min exceeds t_max")
        if self.t_min - 2 * self.h <= 0:
            raise ConfigError("t_min - 2h must be positive")
        if not self.scenarios:
            raise ConfigError("no scenarios selected")
        for s in self.scenarios:
            if s not in SCENARIOS:
                raise ConfigError(f"unknown scenario {s!r}; choose from {', '.join(SCENARIOS)}")
        if self.unitary_family not in UNITARY_FAMILIES:
            raise ConfigError(f"unknown unitary family {self.unitary_family!r}")
        for name in ("n_states", "n_bound_runs"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        for name in ("restarts", "budget", "cloud_restarts", "cloud_budget", "bound_restarts", "bound_budget", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")

    def temperatures(self) -> np.ndarray:
        n = int(math.floor((self.t_max - self.t_min) / self.t_step + 1e-9)) + 1
        return np.round(self.t_min + self.t_step * np.arange(n), 10)

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)


@dataclass(frozen=True)
class SweepRecord:
    temperature: float
    scenario: str
    unitary_family: str
    state_index: Optional[int]
    optimal_qfi: float
    thermal_qfi_reference: float
    cramer_rao_bound: float
    seed: int
    restarts: int
    evaluations: int


def derive_seed(master_seed: int, purpose: str, family: str, index: int = 0) -> int:
    """Independent 63-bit seed per work item; the temperature is deliberately not an input."""
    ss = np.random.SeedSequence([master_seed, _SEED_CODES[purpose], _FAMILY_CODES[family], index])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def _make_record(T, scenario, family, index, value, seed, restarts, evals) -> SweepRecord:
    ref = qfi_thermal_closed_form(T)
    return SweepRecord(
        temperature=_round(T),
        scenario=scenario,
        unitary_family=family,
        state_index=index,
        optimal_qfi=_round(value),
        thermal_qfi_reference=_round(ref),
        cramer_rao_bound=_round(cramer_rao_bound(value)) if value > 0 else math.inf,
        seed=seed,
        restarts=restarts,
        evaluations=evals,
    )


def _check_reeval(problem, result, T, scenario, seed):
    again = problem.objective(result.best_params)
    if abs(again - result.best_value) > REEVAL_TOL:
        raise SweepError(f"T={T} scenario={scenario} seed={seed}: best value not reproducible")


# Work items. Each returns a list of records and is a top-level function so it
# can be shipped to a process pool.


def _run_capped(cfg: SweepConfig, T: float, kind: str) -> list:
    seed = derive_seed(cfg.master_seed, kind, cfg.unitary_family)
    problem = scenario_problem(kind, cfg.unitary_family, T, h=cfg.h)
    res = optimize(problem, cfg.restarts, seed, cfg.budget)
    _check_reeval(problem, res, T, kind, seed)
    cap = qfi_thermal_closed_form(T) * (1 + CAP_SLACK)
    if res.best_value > cap:
        raise SweepError(f"T={T} scenario={kind} seed={seed}: optimum {res.best_value} exceeds thermal cap {cap}")
    return [_make_record(T, kind, cfg.unitary_family, None, res.best_value, seed, res.restarts_used, res.evaluations)]


def _run_cloud_member(cfg: SweepConfig, T: float, index: int) -> list:
    family = cfg.unitary_family
    state_seed = derive_seed(cfg.master_seed, "ncptp2-state", family, index)
    opt_seed = derive_seed(cfg.master_seed, "ncptp2-opt", family, index)
    state = sample_constrained_state(state_seed, T, cfg.h)
    if family in FIXED_FAMILIES:
        # No unitary parameters: search the state, starting from the sample.
        problem = scenario_problem(CLOUD, family, T, h=cfg.h)
        start = [state.free_vector()]
    else:
        problem = scenario_problem(CLOUD, family, T, state_params=state, h=cfg.h)
        start = [swap_start(family)]
    res = optimize(problem, cfg.cloud_restarts, opt_seed, cfg.cloud_budget, initial_points=start)
    _check_reeval(problem, res, T, CLOUD, state_seed)
    if family in FIXED_FAMILIES:
        _check_state(res.best_params, T, cfg.h, CLOUD, state_seed)
    return [_make_record(T, CLOUD, family, index, res.best_value, state_seed, res.restarts_used, res.evaluations)]


def _check_state(x, T, h, scenario, seed):
    lmin = stencil_min_eigenvalue(x, T, h)
    if lmin < -POSITIVITY_TOL:
        raise SweepError(f"T={T} scenario={scenario} seed={seed}: optimum state not positive (min eigenvalue {lmin:.3e})")


def _run_bound(cfg: SweepConfig, T: float, run: int) -> list:
    seed = derive_seed(cfg.master_seed, "ncptp2-bound", cfg.unitary_family, run)
    start = sample_constrained_state(seed, T, cfg.h).free_vector()
    problem = scenario_problem(BOUND, None, T, h=cfg.h)
    res = optimize(problem, cfg.bound_restarts, seed, cfg.bound_budget, initial_points=[start])
    _check_reeval(problem, res, T, BOUND, seed)
    _check_state(res.best_params, T, cfg.h, BOUND, seed)
    return [_make_record(T, BOUND_RUN, cfg.unitary_family, run, res.best_value, seed, res.restarts_used, res.evaluations)]


def _dispatch(item) -> list:
    cfg, T, what, index = item
    try:
        if what == "capped":
            return _run_capped(cfg, T, index)
        if what == "cloud":
            return _run_cloud_member(cfg, T, index)
        return _run_bound(cfg, T, index)
    except SweepError:
        raise
    except Exception as exc:  # re-raise with the work item named
        raise SweepError(f"T={T} {what}[{index}] failed: {exc}") from exc


def _work_items(cfg: SweepConfig) -> list:
    items = []
    for T in cfg.temperatures():
        T = float(T)
        for s in cfg.scenarios:
            if s == CLOUD:
                items += [(cfg, T, "cloud", i) for i in range(cfg.n_states)]
                items += [(cfg, T, "bound", r) for r in range(cfg.n_bound_runs)]
            else:
                items.append((cfg, T, "capped", s))
    return items


def _averaged_bounds(records: Sequence[SweepRecord], cfg: SweepConfig) -> list:
    out = []
    runs = {}
    for r in records:
        if r.scenario == BOUND_RUN:
            runs.setdefault(r.temperature, []).append(r)
    for T, rs in runs.items():
        rs = sorted(rs, key=lambda r: r.state_index)
        mean = math.fsum(r.optimal_qfi for r in rs) / len(rs)
        out.append(
            _make_record(
                T, BOUND, cfg.unitary_family, None, mean, cfg.master_seed,
                sum(r.restarts for r in rs), sum(r.evaluations for r in rs),
            )
        )
    return out


def sort_key(r: SweepRecord):
    return (r.temperature, r.scenario, -1 if r.state_index is None else r.state_index)


def run_sweep(cfg: SweepConfig) -> list:
    """All records for ``cfg``, sorted by (temperature, scenario, state_index).

    ``ncptp2`` contributes ``n_states`` cloud records per temperature (one
    sampled state each, unitary optimized per state), ``n_bound_runs``
    ``ncptp2-bound-run`` records and their mean as ``ncptp2-bound``.
    """
    items = _work_items(cfg)
    if cfg.workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_dispatch, items))
    else:
        chunks = [_dispatch(it) for it in items]
    records = [r for chunk in chunks for r in chunk]
    records += _averaged_bounds(records, cfg)
    return sorted(records, key=sort_key)


def metadata(cfg: SweepConfig) -> dict:
    return {
        "config": asdict(cfg),
        "temperatures": len(cfg.temperatures()),
        "optimizer": {
            "id": OPTIMIZER_ID,
            "reflect": REFLECT,
            "expand": EXPAND,
            "contract": CONTRACT,
            "shrink": SHRINK,
            "initial_step_fraction": INITIAL_STEP,
            "xtol": XTOL,
        },
        "rng": RNG_ALGORITHM,
        "state_sampler": SAMPLER_ID,
        "ncptp2_unitary": "optimized per sampled state, started from SWAP",
        "ncptp2_fixed_models": "state components optimized per member, started from the sampled state",
        "ncptp2_bound": "mean of ncptp2-bound-run records",
    }


# Serialization


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    return str(v)


def records_to_csv(records: Sequence[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in sorted(records, key=sort_key):
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def _record_dict(r: SweepRecord) -> dict:
    d = asdict(r)
    for k, v in d.items():
        if isinstance(v, float):
            d[k] = float(_fmt(v))
    return d


def records_to_json(records: Sequence[SweepRecord], meta: Optional[dict] = None) -> str:
    doc = {"metadata": meta or {}, "records": [_record_dict(r) for r in sorted(records, key=sort_key)]}
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def emit_results(records, fmt: str, path, meta: Optional[dict] = None) -> None:
    """Write ``records`` as CSV or JSON. CSV gets ``<path>.meta.json`` alongside when ``meta`` is given."""
    path = Path(path)
    if fmt == "csv":
        text = records_to_csv(records)
    elif fmt == "json":
        text = records_to_json(records, meta)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    path.write_text(text)
    if fmt == "csv" and meta is not None:
        Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")


_PARSERS = {
    "temperature": float,
    "scenario": str,
    "unitary_family": str,
    "state_index": lambda s: None if s == "" else int(s),
    "optimal_qfi": float,
    "thermal_qfi_reference": float,
    "cramer_rao_bound": float,
    "seed": int,
    "restarts": int,
    "evaluations": int,
}


def parse_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise ValueError("missing or unexpected CSV header")
    return [SweepRecord(**{c: _PARSERS[c](v) for c, v in zip(COLUMNS, row)}) for row in rows[1:]]


def parse_json(text: str) -> list:
    return [SweepRecord(**d) for d in json.loads(text)["records"]]
