"""Command-line front end.

Exit codes: 0 ok, 1 verification failure, 2 domain escape or point outside
the domain, 3 violated solution constraint, 64 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import sys
import warnings

import numpy as np

from . import acceptance
from . import closed_form as cf
from .errors import (
    ConstraintViolation,
    DimensionMismatch,
    DomainEscape,
    InvalidParams,
    OutOfDomain,
)
from .integrate import IntegratorConfig, drift_json, drift_of, integrate, read_trajectory_csv, write_trajectory_csv
from .invariants import default_track, observable_from_id
from .model import State, validate_params
from .profiles import FIGURES, figure_profiles, profile

EXIT_OK, EXIT_FAIL, EXIT_DOMAIN, EXIT_CONSTRAINT, EXIT_USAGE = 0, 1, 2, 3, 64
RESIDUAL_GATE = 1e-9
REPLAY_TOL = 1e-10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(s) for s in text.split(",")], dtype=float)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ids(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


@contextlib.contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _params_from(args, dim_hint=None):
    dim = args.dim if args.dim is not None else dim_hint
    if args.lam is None or args.alpha is None or dim is None:
        raise UsageError("--lambda, --alpha and --dim are required")
    return validate_params(args.lam, args.alpha, dim)


def _fmt(v) -> str:
    return "%.17g" % v


# --------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    if (args.p is None) == (args.v is None):
        raise UsageError("give exactly one of --p or --v")
    if args.x is None:
        raise UsageError("--x is required")
    second = args.p if args.p is not None else args.v
    params = _params_from(args, len(args.x))
    if len(args.x) != params.dim or len(second) != params.dim:
        raise UsageError(f"--x and --p/--v need {params.dim} components")
    state = State(args.x, second, "momentum" if args.p is not None else "velocity")
    config = IntegratorConfig((args.t0, args.t1), rtol=args.rtol, atol=args.atol, max_step=args.max_step)
    track = _ids(args.track) if args.track else default_track(params)
    t_eval = np.linspace(args.t0, args.t1, args.samples) if args.samples else None
    traj = integrate(params, state, config, track, t_eval)
    with _open_out(args.out) as fh:
        write_trajectory_csv(traj, fh)
    report = drift_json(traj)
    if args.drift:
        with open(args.drift, "w", encoding="utf-8") as fh:
            fh.write(report + "\n")
    else:
        sys.stderr.write(report + "\n")
    return EXIT_OK


def _solution_from_args(args):
    if args.A is None:
        raise UsageError("--A is required")
    dim = len(args.A)
    if args.regime == "linear":
        if args.B is None:
            raise UsageError("linear solutions need --B")
        alpha = args.alpha if args.alpha is not None else cf.border_alpha(args.lam, args.A, args.B)
        params = validate_params(args.lam, alpha, args.dim or dim)
        return params, cf.linear_solution(params, args.A, args.B)
    phi = args.phi if args.phi is not None else np.zeros(dim)
    params = _params_from(args, dim)
    if args.regime == "trig":
        return params, cf.trig_solution(params, args.A, phi)
    return params, cf.hyper_solution(params, args.A, phi)


def cmd_analytic(args) -> int:
    if args.lam is None:
        raise UsageError("--lambda is required")
    params, sol = _solution_from_args(args)
    if args.t1 is not None:
        t1 = args.t1
    else:
        t1 = cf.period(sol) if sol.kind.is_trig else 1.0
    ts = np.linspace(0.0, t1, args.samples)
    x, v, a = cf.evaluate(sol, ts)
    res = cf.residual(params, sol, ts) / max(1.0, float(np.max(np.abs(a))))
    if res > RESIDUAL_GATE:
        raise ConstraintViolation(f"equation of motion residual {res:.3g} exceeds {RESIDUAL_GATE:g}")
    info = sol.to_dict()
    info.update(
        {
            "params": params.to_dict(),
            "energy": cf.solution_energy(params, sol),
            "residual": res,
            "constraint_residual": cf.constraint_residual(params, sol),
        }
    )
    if sol.kind.is_trig:
        info["period"] = cf.period(sol)
    if params.lam > 0.0:
        info["threshold_energy"] = params.threshold_energy
    text = json.dumps(info, indent=2, sort_keys=True)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.out:
        n = params.dim
        with _open_out(args.out) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"] + [f"x{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)])
            for k, t in enumerate(ts):
                w.writerow([_fmt(t), *map(_fmt, x[k]), *map(_fmt, v[k])])
    return EXIT_OK


def _write_rows(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["coord", "value"])
    for c, val in rows:
        w.writerow([_fmt(c), _fmt(val)])


def cmd_profile(args) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.figure:
            if not args.outdir:
                raise UsageError("--figure needs --outdir")
            import os

            os.makedirs(args.outdir, exist_ok=True)
            for name, rows in figure_profiles(args.figure, args.points).items():
                with open(os.path.join(args.outdir, name + ".csv"), "w", newline="", encoding="utf-8") as fh:
                    _write_rows(rows, fh)
        else:
            if args.kind is None:
                raise UsageError("give --kind or --figure")
            if args.kind == "curved":
                if args.kappa is None:
                    raise UsageError("curved profiles need --kappa")
                parameter, strength = args.kappa, args.omega0
            else:
                if args.lam is None:
                    raise UsageError(f"{args.kind} profiles need --lambda")
                parameter, strength = args.lam, 1.0 if args.alpha is None else args.alpha
            coords = None
            if args.min is not None or args.max is not None:
                if args.min is None or args.max is None:
                    raise UsageError("give both --min and --max")
                coords = np.linspace(args.min, args.max, args.points)
            rows = profile(args.kind, parameter, strength, coords, args.points)
            with _open_out(args.out) as fh:
                _write_rows(rows, fh)
    for w in caught:
        sys.stderr.write(f"warning: {w.message}\n")
    return EXIT_OK


def replay_claims(params, path: str, drift_bound: float) -> list[acceptance.Claim]:
    """Recompute every invariant column of a trajectory CSV and bound the H drift."""
    with open(path, newline="", encoding="utf-8") as fh:
        traj = read_trajectory_csv(params, fh)
    worst = 0.0
    for ident, vals in traj.track.items():
        obs = observable_from_id(params, ident)
        fresh = np.array([obs(x, p) for x, p in zip(traj.x, traj.p)])
        worst = max(worst, float(np.max(np.abs(fresh - vals) / np.maximum(1.0, np.abs(fresh)))))
    h = observable_from_id(params, "H")
    energies = [h(x, p) for x, p in zip(traj.x, traj.p)]
    return [
        acceptance.claim("R1", "replayed invariant columns vs recomputation", worst, "<=", REPLAY_TOL),
        acceptance.claim("R2", "replayed energy drift", drift_of(energies), "<=", drift_bound),
    ]


def cmd_verify(args) -> int:
    if args.cases is not None and args.cases < 1:
        raise UsageError("--cases must be positive")
    only = set(_ids(args.only)) if args.only else None
    if only is not None and not only <= set(acceptance.CHECKS):
        raise UsageError(f"unknown check ids {sorted(only - set(acceptance.CHECKS))}")
    claims = []
    if args.replay:
        params = _params_from(args)
        claims += replay_claims(params, args.replay, args.drift_bound)
        if only is None:
            only = set()
    claims += acceptance.run_all(args.seed, args.cases, only)
    text = acceptance.report_json(claims, args.seed, args.cases)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    for c in claims:
        sys.stderr.write(c.line() + "\n")
    return EXIT_OK if all(c.passed for c in claims) else EXIT_FAIL


# --------------------------------------------------------------------------


def _common(p):
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--dim", type=int)
    p.add_argument("--config", help="JSON file whose keys mirror the long flags; flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quasiharmonic", description="lambda-deformed nonlinear oscillator toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="integrate and write a trajectory CSV plus a drift report")
    _common(s)
    s.add_argument("--x", type=_vector)
    s.add_argument("--p", type=_vector)
    s.add_argument("--v", type=_vector)
    s.add_argument("--t0", type=float, default=0.0)
    s.add_argument("--t1", type=float, required=False)
    s.add_argument("--rtol", type=float, default=1e-10)
    s.add_argument("--atol", type=float, default=1e-12)
    s.add_argument("--max-step", dest="max_step", type=float, default=math.inf)
    s.add_argument("--samples", type=int, help="uniform output grid instead of the adaptive steps")
    s.add_argument("--track", help="comma-separated invariant ids (default: H and the fundamental set)")
    s.add_argument("--out", default="-", help="trajectory CSV path ('-' for stdout)")
    s.add_argument("--drift", help="drift report JSON path (default: stderr)")
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("analytic", help="build and validate a closed-form solution")
    _common(a)
    a.add_argument("--regime", choices=["trig", "hyper", "linear"], required=False)
    a.add_argument("--A", type=_vector)
    a.add_argument("--phi", type=_vector)
    a.add_argument("--B", type=_vector)
    a.add_argument("--t1", type=float)
    a.add_argument("--samples", type=int, default=201)
    a.add_argument("--json", help="solution JSON path (default: stdout)")
    a.add_argument("--out", help="sampled trajectory CSV path")
    a.set_defaults(func=cmd_analytic)

    pr = sub.add_parser("profile", help="tabulate potential profiles")
    _common(pr)
    pr.add_argument("--kind", choices=["v1d", "v2d-radial", "curved"])
    pr.add_argument("--figure", choices=sorted(FIGURES))
    pr.add_argument("--kappa", type=float)
    pr.add_argument("--omega0", type=float, default=1.0)
    pr.add_argument("--min", type=float)
    pr.add_argument("--max", type=float)
    pr.add_argument("--points", type=int, default=1001)
    pr.add_argument("--out", default="-")
    pr.add_argument("--outdir")
    pr.set_defaults(func=cmd_profile)

    v = sub.add_parser("verify", help="run the property suite and report each claim")
    _common(v)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--cases", type=int, help="cap on random cases per check")
    v.add_argument("--only", help="comma-separated check numbers")
    v.add_argument("--replay", help="trajectory CSV written by simulate")
    v.add_argument("--drift-bound", dest="drift_bound", type=float, default=1e-8)
    v.add_argument("--report", help="report JSON path (default: stdout)")
    v.set_defaults(func=cmd_verify)
    return parser


_CONFIG_KEYS = {"lambda": "lam"}


def _apply_config(args, parser) -> None:
    """Fill flags left at their defaults from a JSON config file."""
    if not getattr(args, "config", None):
        return
    with open(args.config, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    for key, value in data.items():
        dest = _CONFIG_KEYS.get(key, key.replace("-", "_"))
        if not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, dest) != sub.get_default(dest):
            continue
        if isinstance(value, list):
            value = np.asarray(value, dtype=float)
        setattr(args, dest, value)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, parser)
        if args.command == "simulate" and args.t1 is None:
            raise UsageError("--t1 is required")
        if args.command == "analytic" and args.regime is None:
            raise UsageError("--regime is required")
        return args.func(args)
    except (UsageError, InvalidParams, DimensionMismatch, OSError, json.JSONDecodeError) as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"quasiharmonic: error: {exc}\n")
        return EXIT_USAGE
    except (DomainEscape, OutOfDomain) as exc:
        extra = f" (last valid time {exc.last_time!r})" if isinstance(exc, DomainEscape) else ""
        sys.stderr.write(f"{type(exc).__name__}: {exc}{extra}\n")
        return EXIT_DOMAIN
    except ConstraintViolation as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_CONSTRAINT


if __name__ == "__main__":
    sys.exit(main())
