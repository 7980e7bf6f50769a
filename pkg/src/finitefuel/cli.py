"""Command-line front end.

Every flag can also be supplied through an environment variable named after
it, ``--c-max`` as ``FINITEFUEL_C_MAX`` and so on; explicit flags win.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import List, Optional

import numpy as np

from . import boundary as bd
from . import io as fio
from .errors import FiniteFuelError, RegimeError
from .model import ModelParams, derive_constants
from .oracle import minorant_oracle, psor_oracle
from .simulate import SimConfig, simulate_policy
from .value import value_profile
from .verify import VerifyConfig, auto_c_list, format_table, run_suite

ENV_PREFIX = "FINITEFUEL_"


def _c_max(text: str):
    if text == "auto":
        return text
    return float(text)


def _c_list(text: str):
    if text == "auto":
        return text
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --c-list {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, required=True, help="discount rate")
    common.add_argument("--delta", type=float, required=True, help="terminal cost weight")
    common.add_argument("--lambda", dest="lam", type=float, required=True,
                        help="running cost weight")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--threads", type=int, default=1)

    ap = argparse.ArgumentParser(prog="finitefuel",
                                 description="Moving free boundaries for a finite-fuel "
                                             "control problem with discretionary stopping.")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    sub.add_parser("constants", parents=[common], help="f0, lambda thresholds, regime")

    b = sub.add_parser("boundaries", parents=[common], help="table of F, G, A, B, G' over c")
    b.add_argument("--c-max", type=_c_max, default="auto", help="float or 'auto' (0.95 c0)")
    b.add_argument("--c-steps", type=int, default=64)

    v = sub.add_parser("value", parents=[common], help="value profile at one fuel level")
    v.add_argument("--c", type=float, required=True)
    v.add_argument("--x-min", type=float, default=0.0)
    v.add_argument("--x-max", type=float, default=None, help="default f0 + c + 2")
    v.add_argument("--x-steps", type=int, default=401)

    ve = sub.add_parser("verify", parents=[common], help="run the verification suite")
    ve.add_argument("--c-list", type=_c_list, default="auto")
    ve.add_argument("--tol-scale", type=float, default=1.0)

    o = sub.add_parser("oracle", parents=[common], help="brute-force reference solutions")
    o.add_argument("--kind", choices=("minorant", "psor"), required=True)
    o.add_argument("--c", type=float, required=True)
    o.add_argument("--n", type=int, default=None,
                   help="grid size (default 1e6 samples / 40001 nodes)")

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo cost of the policy")
    s.add_argument("--x0", type=float, default=None, help="default (F + G)/2")
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--paths", type=int, default=10**6)
    s.add_argument("--dt", type=float, default=1e-4)
    s.add_argument("--horizon", type=float, default=None, help="default 10/alpha")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--antithetic", action="store_true")
    return ap


def _apply_env(ap: argparse.ArgumentParser, environ) -> None:
    """Use FINITEFUEL_* variables as defaults for matching flags."""
    parsers = [ap]
    for action in ap._actions:
        if isinstance(action, argparse._SubParsersAction):
            parsers.extend(action.choices.values())
    for p in parsers[1:]:
        for action in p._actions:
            if not action.option_strings or action.dest == "help":
                continue
            flag = max(action.option_strings, key=len)
            key = ENV_PREFIX + flag.lstrip("-").replace("-", "_").upper()
            if key not in environ:
                continue
            raw = environ[key]
            if isinstance(action, argparse._StoreTrueAction):
                action.default = raw.lower() in ("1", "true", "yes", "on")
            else:
                action.default = action.type(raw) if action.type else raw
            action.required = False


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run(args) -> int:
    if args.threads < 1:
        raise SystemExit("--threads must be at least 1")
    p = ModelParams(args.alpha, args.delta, args.lam)
    fmt = args.format
    cmd = args.subcommand

    if cmd == "constants":
        d = derive_constants(p)
        _emit(fio.constants_csv(p, d) if fmt == "csv" else fio.to_json(fio.constants_dict(p, d)),
              args.out)
        return 0

    if cmd == "boundaries":
        bd.require_new_regime(p)
        c2 = bd.find_c2(p)
        c0 = bd.find_c0(p, c2=c2).value
        if args.c_max == "auto" and not math.isfinite(c0):
            raise SystemExit("c0 not found below the scan ceiling; pass --c-max explicitly")
        c_max = 0.95 * c0 if args.c_max == "auto" else args.c_max
        if args.c_steps < 1 or not c_max > 0:
            raise SystemExit("--c-steps must be >= 1 and --c-max positive")
        grid = np.linspace(c_max / args.c_steps, c_max, args.c_steps)
        table = bd.boundary_table(grid, p, c0=c0, c2=c2.value)
        _emit(fio.boundary_json(table) if fmt == "json" else fio.boundary_csv(table), args.out)
        return 0

    if cmd == "value":
        bp = bd.solve_boundary(args.c, p)
        d = derive_constants(p)
        x_max = d.f0 + args.c + 2.0 if args.x_max is None else args.x_max
        xs = np.linspace(args.x_min, x_max, args.x_steps)
        prof = value_profile(bp, p, xs)
        _emit(fio.value_json(prof) if fmt == "json" else fio.value_csv(prof), args.out)
        return 0

    if cmd == "verify":
        bd.require_new_regime(p)
        c0 = bd.find_c0(p).value
        c_list = auto_c_list(c0) if args.c_list == "auto" else args.c_list
        reports = run_suite(p, c_list, VerifyConfig(tol_scale=args.tol_scale), c0=c0)
        table = format_table(reports) + "\n"
        if fmt is None:
            _emit(table, args.out)
        else:
            text = fio.report_json(reports) if fmt == "json" else fio.report_csv(reports)
            if args.out:
                _emit(text, args.out)
                sys.stdout.write(table)
            else:
                sys.stdout.write(text)
        return 0 if all(r.passed for r in reports) else 1

    if cmd == "oracle":
        if args.kind == "minorant":
            res = minorant_oracle(args.c, p, n_points=args.n or 10**6)
            _emit(fio.minorant_json(res) if fmt == "json" else fio.minorant_csv(res), args.out)
        else:
            res = psor_oracle(args.c, p, n_nodes=args.n or 40001)
            _emit(fio.psor_json(res) if fmt == "json" else fio.psor_csv(res), args.out)
        return 0

    if cmd == "simulate":
        bp = bd.solve_boundary(args.c, p)
        x0 = 0.5 * (bp.F + bp.G) if args.x0 is None else args.x0
        horizon = 10.0 / p.alpha if args.horizon is None else args.horizon
        cfg = SimConfig(args.paths, args.dt, horizon, args.seed, args.antithetic, x0, args.c)
        res = simulate_policy(cfg, bp, p, threads=args.threads)
        _emit(fio.sim_csv(res) if fmt == "csv" else fio.sim_json(res), args.out)
        return 0

    raise AssertionError(cmd)


def main(argv: Optional[List[str]] = None, environ=None) -> int:
    ap = build_parser()
    _apply_env(ap, os.environ if environ is None else environ)
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _run(args)
    except RegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FiniteFuelError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        # option values argparse cannot check on its own
        print(f"usage error: {exc.code}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
