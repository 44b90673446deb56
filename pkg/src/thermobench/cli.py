"""Command-line entry point: ``thermobench {sweep,verify,qfi,thermal}``.

Exit codes: 0 success, 1 configuration error, 2 verification or invariant failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .fisher import cramer_rao_bound, qfi_thermal_closed_form
from .optimize import optimize, scenario_problem, swap_start
from .states import sample_constrained_state
from .sweep import (
    FIXED_FAMILIES,
    SCENARIOS,
    UNITARY_FAMILIES,
    ConfigError,
    SweepConfig,
    SweepError,
    emit_results,
    metadata,
    records_to_csv,
    records_to_json,
    run_sweep,
)
from .verify import LEVELS, verify_suite

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VERIFY = 2

COARSE_STEP = 0.1

# CLI flag -> SweepConfig field
_SWEEP_FLAGS = {
    "t_min": "t_min",
    "t_max": "t_max",
    "t_step": "t_step",
    "unitary_family": "unitary_family",
    "states": "n_states",
    "bound_runs": "n_bound_runs",
    "seed": "master_seed",
    "h": "h",
    "restarts": "restarts",
    "budget": "budget",
    "cloud_restarts": "cloud_restarts",
    "cloud_budget": "cloud_budget",
    "bound_restarts": "bound_restarts",
    "bound_budget": "bound_budget",
    "workers": "workers",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _scenario_list(text: str) -> tuple:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="thermobench", description="QFI thermometry sweeps and checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sweep", help="temperature sweep over encoding scenarios")
    s.add_argument("--config", help="JSON file whose keys mirror SweepConfig fields")
    s.add_argument("--scenario", type=_scenario_list, help=f"comma-separated subset of {','.join(SCENARIOS)}")
    s.add_argument("--unitary-family", choices=UNITARY_FAMILIES)
    s.add_argument("--t-min", type=float)
    s.add_argument("--t-max", type=float)
    s.add_argument("--t-step", type=float)
    s.add_argument("--coarse", action="store_true", help=f"use a temperature step of {COARSE_STEP}")
    s.add_argument("--states", type=int, help="type-II cloud size per temperature")
    s.add_argument("--bound-runs", type=int, help="independent runs averaged into the type-II bound")
    s.add_argument("--seed", type=int, help="master seed")
    s.add_argument("--restarts", type=int)
    s.add_argument("--budget", type=int, help="evaluations per restart")
    s.add_argument("--cloud-restarts", type=int)
    s.add_argument("--cloud-budget", type=int)
    s.add_argument("--bound-restarts", type=int)
    s.add_argument("--bound-budget", type=int)
    s.add_argument("--h", type=float, help="stencil step")
    s.add_argument("--workers", type=int)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out", help="output path (default: stdout)")

    v = sub.add_parser("verify", help="run the property suites")
    v.add_argument("--level", choices=LEVELS, default="quick")

    q = sub.add_parser("qfi", help="optimal QFI at a single temperature")
    q.add_argument("--scenario", choices=SCENARIOS + ("ncptp2-bound",), required=True)
    q.add_argument("--unitary-family", choices=UNITARY_FAMILIES, default="general")
    q.add_argument("--t", type=float, required=True, dest="temperature")
    q.add_argument("--seed", type=int, default=0, help="optimizer seed (and state seed for ncptp2)")
    q.add_argument("--restarts", type=int, default=10)
    q.add_argument("--budget", type=int, default=2000)
    q.add_argument("--h", type=float, default=1e-3)

    t = sub.add_parser("thermal", help="thermal-state QFI reference curve")
    t.add_argument("--t-min", type=float, default=1.0)
    t.add_argument("--t-max", type=float, default=2.0)
    t.add_argument("--t-step", type=float, default=0.01)
    t.add_argument("--format", choices=("csv", "json"), default="csv")
    t.add_argument("--out")
    return p


def config_from_args(args) -> SweepConfig:
    base = {}
    if args.config:
        try:
            with open(args.config) as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
    cfg = SweepConfig.from_dict(base)
    overrides = {field: getattr(args, flag) for flag, field in _SWEEP_FLAGS.items() if getattr(args, flag) is not None}
    if args.scenario is not None:
        overrides["scenarios"] = args.scenario
    if args.coarse:
        overrides["t_step"] = COARSE_STEP
    try:
        return replace(cfg, **overrides)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _write(text: str, out) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_sweep(args) -> int:
    cfg = config_from_args(args)
    records = run_sweep(cfg)
    meta = metadata(cfg)
    if args.out:
        emit_results(records, args.format, args.out, meta)
    elif args.format == "csv":
        _write(records_to_csv(records), None)
    else:
        _write(records_to_json(records, meta), None)
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = verify_suite(args.level)
    print("\n".join(report.lines()))
    return EXIT_OK if report.passed else EXIT_VERIFY


def _cmd_qfi(args) -> int:
    T = args.temperature
    if not (np.isfinite(T) and T - 2 * args.h > 0):
        raise ConfigError("temperature must exceed 2h")
    kind, family = args.scenario, args.unitary_family
    start = None
    if kind == "ncptp2":
        state = sample_constrained_state(args.seed, T, args.h)
        if family in FIXED_FAMILIES:
            problem = scenario_problem(kind, family, T, h=args.h)
            start = [state.free_vector()]
        else:
            problem = scenario_problem(kind, family, T, state_params=state, h=args.h)
            start = [swap_start(family)]
    else:
        problem = scenario_problem(kind, family, T, h=args.h)
    res = optimize(problem, args.restarts, args.seed, args.budget, initial_points=start)
    ref = qfi_thermal_closed_form(T)
    out = {
        "temperature": T,
        "scenario": kind,
        "unitary_family": family,
        "optimal_qfi": res.best_value,
        "thermal_qfi_reference": ref,
        "ratio": res.best_value / ref,
        "cramer_rao_bound": cramer_rao_bound(res.best_value) if res.best_value > 0 else None,
        "seed": args.seed,
        "restarts": res.restarts_used,
        "evaluations": res.evaluations,
        "best_params": [float(x) for x in res.best_params],
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def _cmd_thermal(args) -> int:
    cfg = SweepConfig(t_min=args.t_min, t_max=args.t_max, t_step=args.t_step)
    rows = [(float(T), qfi_thermal_closed_form(T)) for T in cfg.temperatures()]
    if args.format == "csv":
        lines = ["temperature,thermal_qfi,cramer_rao_bound"]
        lines += [f"{T:.12g},{f:.12g},{1 / f:.12g}" for T, f in rows]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(
            [{"temperature": T, "thermal_qfi": float(f"{f:.12g}"), "cramer_rao_bound": float(f"{1 / f:.12g}")} for T, f in rows],
            indent=2,
        ) + "\n"
    _write(text, args.out)
    return EXIT_OK


_COMMANDS = {"sweep": _cmd_sweep, "verify": _cmd_verify, "qfi": _cmd_qfi, "thermal": _cmd_thermal}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SweepError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
