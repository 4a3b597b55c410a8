"""Command-line interface: arena file in, JSON document out.

Exit codes: 0 success, 1 verification failed, 2 input error, 3 budget exceeded.
Machine output goes to stdout only; ``--pretty`` adds a human summary on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Any, Sequence

from . import __version__
from .algebra import RationalFunction
from .arena import ArenaError, Arena, StrategyProfile, load, parse_rational, to_document
from .blackwell import (
    ParametrizationError,
    blackwell_search_exact,
    blackwell_search_hybrid,
    derive_system,
    limit_check,
    parametrization_for,
)
from .blackwell import DEFAULT_BUDGET as BLACKWELL_BUDGET
from .discounted import (
    ConvergenceError,
    constant_discounts,
    eval_profile_discounted,
    improvement_gap,
    solve_discounted,
    star_transform,
)
from .priority_mp import DEFAULT_BUDGET as PMP_BUDGET
from .priority_mp import BudgetExceeded, InvariantViolation, eval_profile_pmp, solve_pmp_bruteforce
from .sim import SimConfig, estimate_discounted, estimate_pmp

OK, VERIFY_FAILED, INPUT_ERROR, BUDGET = 0, 1, 2, 3


class InputError(Exception):
    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message, "argv")


def jsonable(x: Any) -> Any:
    """Exact rationals as ``"p/q"``, rational functions as reduced text, floats to 12 significant digits."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, RationalFunction):
        return x.to_text()
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, StrategyProfile):
        return x.to_json()
    raise TypeError(f"cannot serialise {type(x).__name__}")


# -- argument helpers --------------------------------------------------------------------


def _rational_arg(text: str, flag: str) -> Fraction:
    try:
        return parse_rational(text, flag)
    except ArenaError as exc:
        raise InputError(exc.message, flag) from None


def _profile_arg(arena: Arena, text: str) -> StrategyProfile:
    """Accept ``{"state": "label", ...}`` or ``{"max": {...}, "min": {...}}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed profile JSON: {exc.msg}", f"--profile column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise InputError("profile must be a JSON object", "--profile")
    if set(doc) <= {"max", "min"} and all(isinstance(v, dict) for v in doc.values()):
        flat = {**doc.get("max", {}), **doc.get("min", {})}
    else:
        flat = doc
    try:
        return arena.profile(flat)
    except ArenaError as exc:
        raise InputError(exc.message, exc.location) from None


def _discounts(arena: Arena, t: Fraction | None) -> dict[str, Fraction]:
    if t is None:
        return constant_discounts(arena)
    return parametrization_for(arena).at(t)


def _budget(args, default: int) -> int:
    return args.budget if args.budget is not None else default


# -- subcommands ---------------------------------------------------------------------------


def cmd_validate(arena: Arena, args) -> tuple[int, dict]:
    payload = {
        "valid": True,
        "state_count": len(arena),
        "states": [{"id": s.id, "controller": s.controller, "actions": list(s.labels)} for s in arena.states],
        "profile_count": arena.profile_count(),
        "has_priority_system": all(s.weight is not None and s.priority is not None for s in arena.states),
        "has_discounts": arena.has_discounts(),
    }
    return OK, payload


def cmd_solve_discounted(arena: Arena, args) -> tuple[int, dict]:
    t = None if args.lambda_from_file else _rational_arg(args.t, "--t")
    discounts = _discounts(arena, t)
    res = solve_discounted(arena, discounts, args.tolerance, args.max_iter)
    exact = eval_profile_discounted(arena, discounts, res.profile)
    gap = improvement_gap(arena, discounts, res.profile, exact)
    lmax = max(discounts.values())
    deviation_bound = float(gap / (1 - lmax))
    iterate_error = max(abs(float(exact[s]) - res.values[s]) for s in arena.ids)
    verified = deviation_bound <= 2 * args.tolerance and iterate_error <= args.tolerance + deviation_bound
    payload = {
        "discounts": discounts,
        "values": res.values,
        "profile": res.profile,
        "iterations": res.iterations,
        "residual": res.residual,
        "exact_profile_values": exact,
        "improvement_gap": gap,
        "deviation_bound": deviation_bound,
        "iterate_error": iterate_error,
        "verified": verified,
    }
    return (OK if verified else VERIFY_FAILED), payload


def cmd_eval_profile(arena: Arena, args) -> tuple[int, dict]:
    profile = _profile_arg(arena, args.profile)
    if args.payoff == "pmp":
        values = eval_profile_pmp(arena, profile, arena.priority_system())
        return OK, {"payoff": "pmp", "profile": profile, "values": values}
    if args.t is not None:
        discounts: Any = _discounts(arena, _rational_arg(args.t, "--t"))
    elif arena.has_discounts() and all(s.discount.is_constant() for s in arena.states):
        discounts = constant_discounts(arena)
    else:
        # symbolic value functions of t
        discounts = parametrization_for(arena)
    values = eval_profile_discounted(arena, discounts, profile)
    return OK, {"payoff": "discounted", "profile": profile, "values": values}


def cmd_solve_pmp(arena: Arena, args) -> tuple[int, dict]:
    res = solve_pmp_bruteforce(arena, arena.priority_system(), _budget(args, PMP_BUDGET))
    payload = {
        "values": res.values,
        "profile": res.profile,
        "optimal_max_choices": res.optimal_max_choices(arena),
        "optimal_min_choices": res.optimal_min_choices(arena),
        "saddle_profile_count": len(res.saddle_profiles),
        "verified": True,
    }
    return OK, payload


def cmd_blackwell(arena: Arena, args) -> tuple[int, dict]:
    param = parametrization_for(arena)
    budget = _budget(args, BLACKWELL_BUDGET)
    if args.mode == "exact":
        res = blackwell_search_exact(arena, param, budget)
    else:
        res = blackwell_search_hybrid(arena, param, budget=budget)
    payload = {"parametrization": param.to_json(), **res.to_json()}
    return (OK if res.verified else VERIFY_FAILED), payload


def cmd_derive_priorities(arena: Arena, args) -> tuple[int, dict]:
    param = parametrization_for(arena)
    system = derive_system(param)
    payload = {
        "parametrization": param.to_json(),
        "weight": dict(system.weight),
        "priority": dict(system.priority),
    }
    return OK, payload


def cmd_star_transform(arena: Arena, args) -> tuple[int, dict]:
    t = None if args.t is None else _rational_arg(args.t, "--t")
    return OK, to_document(star_transform(arena, _discounts(arena, t)))


def cmd_simulate(arena: Arena, args) -> tuple[int, dict]:
    profile = _profile_arg(arena, args.profile)
    if args.initial not in arena.index:
        raise InputError(f"unknown state {args.initial!r}", "--initial")
    try:
        config = SimConfig(args.seed, args.samples, args.horizon, args.estimator)
    except ValueError as exc:
        raise InputError(str(exc), "argv") from None
    if args.estimator == "discounted":
        t = None if args.t is None else _rational_arg(args.t, "--t")
        discounts = _discounts(arena, t)
        est = estimate_discounted(arena, discounts, profile, args.initial, config)
        exact = eval_profile_discounted(arena, discounts, profile)[args.initial]
    else:
        system = arena.priority_system()
        est = estimate_pmp(arena, system, profile, args.initial, config)
        exact = eval_profile_pmp(arena, profile, system)[args.initial]
    payload = {
        "estimator": args.estimator,
        "seed": args.seed,
        "initial": args.initial,
        "profile": profile,
        **est.to_json(),
        "exact": exact,
    }
    return OK, payload


def cmd_limit_check(arena: Arena, args) -> tuple[int, dict]:
    param = parametrization_for(arena)
    report = limit_check(arena, param, kmin=args.kmin, kmax=args.kmax, budget=_budget(args, BLACKWELL_BUDGET))
    return (OK if report.ok else VERIFY_FAILED), report.to_json()


COMMANDS = {
    "validate": cmd_validate,
    "solve-discounted": cmd_solve_discounted,
    "eval-profile": cmd_eval_profile,
    "solve-pmp": cmd_solve_pmp,
    "blackwell": cmd_blackwell,
    "derive-priorities": cmd_derive_priorities,
    "star-transform": cmd_star_transform,
    "simulate": cmd_simulate,
    "limit-check": cmd_limit_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("file", help="arena JSON document")
    common.add_argument("--pretty", action="store_true", help="human-readable summary on stderr")
    common.add_argument("--budget", type=int, default=None, help="maximum number of profiles to enumerate")

    parser = _Parser(prog="pmpg", description="Priority mean-payoff and multi-discounted stochastic games.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("validate", parents=[common], help="check an arena document")

    p = sub.add_parser("solve-discounted", parents=[common], help="value iteration at constant discounts")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--t", help="evaluate the parametrization at this rational t")
    src.add_argument("--lambda-from-file", action="store_true", help="use the constant discounts in the file")
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=1_000_000)

    p = sub.add_parser("eval-profile", parents=[common], help="exact value of one profile")
    p.add_argument("--profile", required=True, help='JSON, e.g. {"sMax": "right", "sMin": "left"}')
    p.add_argument("--payoff", choices=("discounted", "pmp"), required=True)
    p.add_argument("--t", help="rational t; omit for value functions of t")

    sub.add_parser("solve-pmp", parents=[common], help="brute-force priority mean-payoff solver")

    p = sub.add_parser("blackwell", parents=[common], help="Blackwell-optimal profile with certificate")
    p.add_argument("--mode", choices=("exact", "hybrid"), default="exact")

    sub.add_parser("derive-priorities", parents=[common], help="weights and priorities of a parametrization")

    p = sub.add_parser("star-transform", parents=[common], help="stopping-game arena at constant discounts")
    p.add_argument("--t", help="rational t; omit to use constant discounts from the file")

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo estimate for one profile")
    p.add_argument("--estimator", choices=("discounted", "pmp"), default="discounted")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--horizon", type=int, default=10_000)
    p.add_argument("--profile", required=True)
    p.add_argument("--initial", required=True)
    p.add_argument("--t", help="rational t for the discounted estimator")

    p = sub.add_parser("limit-check", parents=[common], help="discounted-to-priority limit report")
    p.add_argument("--kmin", type=int, default=4)
    p.add_argument("--kmax", type=int, default=20)
    return parser


def _summary(command: str, code: int, payload: dict) -> str:
    status = {OK: "ok", VERIFY_FAILED: "VERIFICATION FAILED", INPUT_ERROR: "input error", BUDGET: "budget exceeded"}[code]
    lines = [f"{command}: {status}"]
    for key in ("values", "profile", "value_functions", "mean", "std_error", "weight", "priority", "error"):
        if key in payload:
            lines.append(f"  {key}: {json.dumps(payload[key])}")
    return "\n".join(lines)


def run(argv: Sequence[str] | None = None) -> tuple[int, dict]:
    """Parse ``argv`` and execute; returns ``(exit code, JSON payload)``."""
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        arena = load(args.file)
        code, payload = COMMANDS[command](arena, args)
    except InputError as exc:
        return INPUT_ERROR, {"error": str(exc), "location": exc.location}
    except ArenaError as exc:
        return INPUT_ERROR, {"error": exc.message, "location": exc.location}
    except OSError as exc:
        return INPUT_ERROR, {"error": exc.strerror or str(exc), "location": str(exc.filename or "")}
    except BudgetExceeded as exc:
        return BUDGET, {"error": str(exc)}
    except (ConvergenceError, InvariantViolation) as exc:
        return VERIFY_FAILED, {"error": str(exc)}
    except (ParametrizationError, ValueError, KeyError) as exc:
        return INPUT_ERROR, {"error": str(exc), "location": command or ""}
    return code, jsonable(payload)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if any(a in ("-h", "--help", "--version") for a in argv):
        # argparse prints help and version itself
        build_parser().parse_args(argv)
    code, payload = run(argv)
    print(json.dumps(payload, indent=2, ensure_ascii=False))
    if code != OK and "error" in payload:
        loc = payload.get("location")
        print(f"pmpg: {loc + ': ' if loc else ''}{payload['error']}", file=sys.stderr)
    if "--pretty" in argv:
        print(_summary(argv[0] if argv else "pmpg", code, payload), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
