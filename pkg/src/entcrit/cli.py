"""Command-line front end.

    entcrit compute  --family '{"kind":"werner","p":0.5}'
    entcrit sweep    --family '{"kind":"horodecki","a":0.5}' --range p=0,1,11 --out h.csv
    entcrit validate --quick
    entcrit bell-sim --family '{"kind":"bell","which":"phi+"}' --shots 100000 --out sim.csv

Exit codes: 0 success, 1 a validation property failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bell_analyzer as ba
from . import measures
from .config import UsageError, ValidationError
from .gamma_sup import OptimizerConfig, gamma_sup
from .phase_povm import gamma_closed_form
from .states import load_descriptor, state_from_descriptor
from .validate import run_validation

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2

MEASURES = ("gamma", "gamma_sup", "concurrence", "negativity", "ppt", "visibility")
SWEEP_DEFAULT = ("gamma", "gamma_sup", "concurrence")
FAMILY_PARAMS = {"horodecki": ("a", "p"), "werner": ("p",),
                 "bell_diagonal": ("l1", "l2", "l3", "l4")}


class InputError(Exception):
    """Anything wrong with user input; maps to exit code 2."""


# --- helpers ---------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _config(args) -> OptimizerConfig:
    restarts = args.restarts if args.restarts is not None else (4 if args.quick else 8)
    kw = {"restarts": restarts, "seed": args.seed, "verify": args.oracle}
    if args.tolerance is not None:
        kw["refine_tolerance"] = args.tolerance
    return OptimizerConfig(**kw)


def _load_state(args):
    if (args.state is None) == (args.family is None):
        raise InputError("give exactly one of --state PATH or --family JSON")
    if args.state is not None:
        try:
            with open(args.state) as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read state file: {exc}") from None
        return load_descriptor(text)
    return load_descriptor(args.family)


def _measures(text, default):
    names = tuple(default) if text is None else tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [n for n in names if n not in MEASURES]
    if bad or not names:
        raise InputError(f"unknown measures {bad}; choose from {', '.join(MEASURES)}")
    return names


def _evaluate(rho, names, cfg):
    out = {}
    for name in names:
        if name == "gamma":
            out[name] = gamma_closed_form(rho)
        elif name == "gamma_sup":
            res = gamma_sup(rho, cfg)
            out[name] = res.value
            out["_gamma_sup_result"] = res
        elif name == "concurrence":
            out[name] = measures.concurrence_mixed(rho)
        elif name == "negativity":
            out[name] = measures.negativity(rho)
        elif name == "ppt":
            out[name] = measures.is_ppt(rho)
        elif name == "visibility":
            out[name] = ba.visibility(rho, "++")
    return out


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from None


# --- commands ----------------------------------------------------------------

def cmd_compute(args) -> int:
    cfg = _config(args)
    rho = _load_state(args)
    vals = _evaluate(rho, _measures(args.measures, MEASURES), cfg)
    res = vals.pop("_gamma_sup_result", None)
    if res is not None:
        vals["optimizer"] = res.to_json()
    _emit(json.dumps(vals, indent=2) + "\n", args.out)
    return EXIT_OK


def _parse_range(text):
    try:
        name, bounds = text.split("=", 1)
        start, stop, steps = bounds.split(",")
        start, stop, steps = float(start), float(stop), int(steps)
    except ValueError:
        raise InputError(f"--range expects name=start,stop,steps, got {text!r}") from None
    if steps < 1:
        raise InputError("--range steps must be >= 1")
    vals = np.linspace(start, stop, steps) if steps > 1 else np.array([start])
    return name.strip(), [float(v) for v in vals]


def sweep_points(family: dict, ranges: list):
    """Grid points of a sweep, lexicographic in the swept parameter names.

    ``family`` is a descriptor holding the kind and fixed parameters; each
    range adds a swept parameter. For ``bell_diagonal`` the weights are
    ``l1..l4`` and at most one may be left out: it is set to one minus the rest.
    Returns (column names, list of parameter dicts).
    """
    kind = family.get("kind")
    if kind not in FAMILY_PARAMS:
        raise InputError(f"sweep family must be one of {sorted(FAMILY_PARAMS)}, got {kind!r}")
    allowed = FAMILY_PARAMS[kind]
    fixed = {k: float(v) for k, v in family.items() if k != "kind"}
    swept = dict(ranges)
    for k in list(fixed) + list(swept):
        if k not in allowed:
            raise InputError(f"{kind} has no parameter {k!r}")
    if set(fixed) & set(swept):
        raise InputError(f"parameters both fixed and swept: {sorted(set(fixed) & set(swept))}")
    missing = [k for k in allowed if k not in fixed and k not in swept]
    if kind == "bell_diagonal":
        if len(missing) > 1:
            raise InputError(f"bell_diagonal: at most one weight may be implied, missing {missing}")
    elif missing:
        raise InputError(f"{kind}: no value for {missing}")
    names = sorted(swept)
    points = []
    for combo in itertools.product(*(swept[n] for n in names)):
        p = dict(fixed, **dict(zip(names, combo)))
        for k in missing:
            p[k] = 1.0 - sum(p[j] for j in allowed if j != k)
        points.append(p)
    return [k for k in allowed], points


def _descriptor(kind, p):
    if kind == "bell_diagonal":
        return {"kind": kind, "lambdas": [p["l1"], p["l2"], p["l3"], p["l4"]]}
    return dict(p, kind=kind)


def cmd_sweep(args) -> int:
    cfg = _config(args)
    if args.family is None:
        raise InputError("sweep needs --family with at least the 'kind' field")
    try:
        family = json.loads(args.family)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed --family JSON: {exc}") from None
    if not isinstance(family, dict):
        raise InputError("--family must be a JSON object")
    if args.jobs < 1:
        raise InputError("--jobs must be at least 1")
    ranges = [_parse_range(r) for r in args.range or []]
    names = _measures(args.measures, SWEEP_DEFAULT)
    params, points = sweep_points(family, ranges)
    # build every state first so a bad grid point fails before any output
    states = [state_from_descriptor(_descriptor(family["kind"], p)) for p in points]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(params) + list(names))
    # map() yields in submission order, so the CSV does not depend on scheduling
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(lambda rho: _evaluate(rho, names, cfg), states))
    for p, vals in zip(points, results):
        w.writerow([_fmt(p[k]) for k in params] + [_fmt(vals[n]) for n in names])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    level = "oracle" if args.oracle else ("quick" if args.quick else "default")
    cfg = _config(args) if args.restarts is not None or args.tolerance is not None else None
    results = run_validation(level, seed=args.seed, cfg=cfg,
                             progress=lambda r: print(r.line(), flush=True))
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} properties passed ({level})")
    if args.out is not None:
        _emit(json.dumps({"level": level, "properties": [r.to_json() for r in results]},
                         indent=2) + "\n", args.out)
    return EXIT_FAILED if failed else EXIT_OK


def cmd_bell_sim(args) -> int:
    cfg = _config(args)
    rho = _load_state(args)
    rows = []
    res = ba.protocol_gamma_sup(rho, cfg, shots=args.shots, seed=args.seed,
                                phase_grid=args.phase_grid, record=rows)
    if args.out is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(ba.CSV_COLUMNS)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        _emit(buf.getvalue(), args.out)
    print(json.dumps(res.to_json(), indent=2))
    return EXIT_OK


# --- parser -----------------------------------------------------------------------

def _common():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--seed", type=int, default=0, help="RNG seed (unsigned 64-bit)")
    g.add_argument("--restarts", type=int, default=None,
                   help="optimizer restarts (default 8, or 4 with --quick)")
    g.add_argument("--tolerance", type=float, default=None,
                   help="line-search interval width of the optimizer (default 1e-9)")
    g.add_argument("--oracle", action="store_true",
                   help="cross-check gamma_sup against the brute-force grid")
    g.add_argument("--quick", action="store_true", help="smaller samples and fewer restarts")
    g.add_argument("--out", default=None, help="output file (default: standard output)")
    g.add_argument("--state", default=None, help="path to a JSON state descriptor")
    g.add_argument("--family", default=None, help="inline JSON state descriptor")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="entcrit", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common], help="measures of one state as JSON")
    p.add_argument("--measures", default=None, help=f"comma list from {','.join(MEASURES)}")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("sweep", parents=[common], help="measures over a family grid as CSV")
    p.add_argument("--range", action="append", metavar="NAME=START,STOP,STEPS",
                   help="swept parameter; repeat for a product grid")
    p.add_argument("--measures", default=None,
                   help=f"comma list (default {','.join(SWEEP_DEFAULT)})")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="worker threads for grid points (default: CPU count)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", parents=[common], help="run the property suites")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bell-sim", parents=[common], help="simulate the Bell-analyzer protocol")
    p.add_argument("--shots", type=int, default=100_000, help="copies per setting and phase")
    p.add_argument("--phase-grid", type=int, default=ba.MIN_PHASE_GRID,
                   help="inner phase settings per outer setting")
    p.set_defaults(func=cmd_bell_sim)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, UsageError, ValidationError) as exc:
        print(f"entcrit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
