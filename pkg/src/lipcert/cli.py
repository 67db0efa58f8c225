"""Command-line front end.

    lipcert certify  --problem P.json --criterion selection --modulus 1
    lipcert extend   --problem P.json --modulus 1 --kind infconv --kind supaffine --points X.csv
    lipcert envelope --problem P.json --lambda 0.5 --lambda 0.25 --points X.csv [--modulus 1]
    lipcert oracle   lipschitz|subgrad|inf --problem P.json [...]

Exit codes: 0 certified (or success), 1 refuted, 2 domain error, 3 malformed input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import certify as C
from . import extend as X
from . import moreau as M
from . import oracle as O
from .convexfn import ConvexFunction
from .errors import LipcertError, ParseError
from .geometry import Norm, Polyhedron

SCHEMA = "lipcert/1"
CRITERIA = ["selection", "calmness", "normal-inclusion", "normal-intersection", "boundary",
            "local-boundary", "supinf", "asymptotic"]


# -- problem files ------------------------------------------------------------------------

def _require(obj, key, kind, where):
    if key not in obj:
        raise ParseError(f"missing field '{key}' in {where}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise ParseError(f"field '{key}' in {where} has the wrong type")
    return val


def _numbers(seq, where, length=None):
    if not isinstance(seq, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                            for v in seq):
        raise ParseError(f"{where} must be a list of numbers")
    if length is not None and len(seq) != length:
        raise ParseError(f"{where} must have {length} entries")
    return [float(v) for v in seq]


def polyhedron_from_dict(obj, dim: int, where: str = "polyhedron") -> Polyhedron:
    if not isinstance(obj, dict):
        raise ParseError(f"{where} must be an object")
    if "lower" in obj or "upper" in obj:
        lo = _numbers(_require(obj, "lower", list, where), f"{where}.lower", dim)
        hi = _numbers(_require(obj, "upper", list, where), f"{where}.upper", dim)
        return Polyhedron.box(lo, hi)
    hs = obj.get("halfspaces", [])
    eq = obj.get("equalities", [])
    if not isinstance(hs, list) or not isinstance(eq, list):
        raise ParseError(f"{where}.halfspaces and .equalities must be lists")
    rows = []
    for k, h in enumerate(hs):
        if not isinstance(h, dict):
            raise ParseError(f"{where}.halfspaces[{k}] must be an object")
        rows.append((_numbers(_require(h, "normal", list, where), f"{where}.halfspaces[{k}].normal", dim),
                     float(_require(h, "offset", (int, float), where))))
    eqs = []
    for k, h in enumerate(eq):
        eqs.append((_numbers(_require(h, "normal", list, where), f"{where}.equalities[{k}].normal", dim),
                    float(_require(h, "offset", (int, float), where))))
    return Polyhedron.from_halfspaces(rows, dim, eqs)


def polyhedron_to_dict(P: Polyhedron) -> dict:
    # adding 0.0 turns negative zeros into plain zeros
    out = {"halfspaces": [{"normal": (P.A[j] + 0.0).tolist(), "offset": float(P.b[j]) + 0.0}
                          for j in range(P.n_ineq)]}
    if P.E.shape[0]:
        out["equalities"] = [{"normal": (P.E[j] + 0.0).tolist(), "offset": float(P.e[j]) + 0.0}
                             for j in range(P.E.shape[0])]
    return out


def problem_from_dict(obj) -> ConvexFunction:
    if not isinstance(obj, dict):
        raise ParseError("problem file must hold a JSON object")
    if obj.get("schema") != SCHEMA:
        raise ParseError(f"schema must be '{SCHEMA}', got {obj.get('schema')!r}")
    dim = _require(obj, "dimension", int, "problem")
    if dim < 1:
        raise ParseError("dimension must be at least 1")
    norm_text = obj.get("norm", "euclidean")
    try:
        norm = Norm(norm_text)
    except ValueError:
        raise ParseError(f"unknown norm {norm_text!r}") from None
    fn = _require(obj, "function", dict, "problem")
    pieces = _require(fn, "affine_pieces", list, "function")
    if not pieces:
        raise ParseError("function.affine_pieces must not be empty")
    slopes, intercepts = [], []
    for k, p in enumerate(pieces):
        if not isinstance(p, dict):
            raise ParseError(f"affine_pieces[{k}] must be an object")
        slopes.append(_numbers(_require(p, "slope", list, f"affine_pieces[{k}]"), f"affine_pieces[{k}].slope", dim))
        icpt = _require(p, "intercept", (int, float), f"affine_pieces[{k}]")
        intercepts.append(float(icpt))
    Q = fn.get("quadratic")
    if Q is not None:
        if not isinstance(Q, list) or len(Q) != dim:
            raise ParseError("function.quadratic must be a dim x dim matrix")
        Q = [_numbers(row, "function.quadratic row", dim) for row in Q]
    domain = polyhedron_from_dict(fn.get("domain", {}), dim, "function.domain")
    try:
        return ConvexFunction(slopes, intercepts, domain, Q, norm, name=str(obj.get("name", "")))
    except LipcertError:
        raise
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def problem_to_dict(f: ConvexFunction) -> dict:
    fn = {
        "affine_pieces": [{"slope": (f.slopes[i] + 0.0).tolist(), "intercept": float(f.intercepts[i]) + 0.0}
                          for i in range(f.n_pieces)],
        "domain": polyhedron_to_dict(f.domain),
    }
    if f.Q is not None:
        fn["quadratic"] = (f.Q + 0.0).tolist()
    out = {"schema": SCHEMA, "dimension": f.dim, "norm": f.norm.value, "function": fn}
    if f.name:
        out["name"] = f.name
    return out


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from None


def load_problem(path: str) -> ConvexFunction:
    return problem_from_dict(_read_json(path))


def read_points(path: str, dim: int) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), 1):
        if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
            continue
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-numeric entry") from None
        if len(vals) != dim or not all(math.isfinite(v) for v in vals):
            raise ParseError(f"{path}:{lineno}: expected {dim} finite numbers")
        rows.append(vals)
    return np.array(rows, dtype=float).reshape(-1, dim)


def _vector(text: str, dim: int, flag: str) -> np.ndarray:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ParseError(f"{flag} expects comma-separated numbers") from None
    if len(vals) != dim:
        raise ParseError(f"{flag} expects {dim} numbers")
    return np.array(vals)


# -- output ----------------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "+inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_report(report: dict) -> str:
    # json writes floats with repr, the shortest string that round-trips exactly
    return json.dumps(_jsonable(report), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _emit(report: dict, args) -> None:
    text = dump_report(report)
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _command_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",) and v is not None}


# -- subcommands ----------------------------------------------------------------------------------

def _region(args, f) -> C.Region:
    if args.region == "ball":
        if args.center is None or args.radius is None:
            raise ParseError("--region ball needs --center and --radius")
        return C.Region.ball(_vector(args.center, f.dim, "--center"), args.radius)
    return C.Region.full_domain()


def cmd_certify(args) -> tuple[dict, int]:
    f = load_problem(args.problem)
    ell = args.modulus
    crit = args.criterion
    values = {}
    S = polyhedron_from_dict(_read_json(args.set), f.dim, "--set") if args.set else None
    needs_set = crit in ("boundary", "local-boundary", "supinf")
    if needs_set and S is None:
        raise ParseError(f"criterion {crit} needs --set")
    if crit == "selection":
        cert = C.check_selection(f, _region(args, f), ell)
    elif crit == "normal-inclusion":
        cert = C.check_normal_inclusion(f, _region(args, f), ell)
    elif crit == "normal-intersection":
        cert = C.check_normal_intersection(f, _region(args, f), ell)
    elif crit == "calmness":
        if args.center is None or args.radius is None:
            raise ParseError("calmness needs --center and --radius")
        cert = C.check_calmness(f, _vector(args.center, f.dim, "--center"), ell, args.radius)
    elif crit == "boundary":
        cert = C.certify_on_bounded_open(f, S, ell)
    elif crit == "local-boundary":
        if args.radius is None:
            raise ParseError("local-boundary needs --radius")
        cert = C.check_local_boundary_lipschitz(f, S, ell, args.radius)
    elif crit == "supinf":
        res = C.sup_inf_bound(f, S, ell)
        cert = res.certificate
        values = {"sup": res.sup, "inf": res.inf, "diameter": res.diameter, "bound_holds": res.bound_holds}
    else:
        radii = [float(r) for r in (args.radii or "1,2,4,8").split(",")]
        cert = C.asymptotic_criterion(f, ell, radii)
    ok = cert.certified and values.get("bound_holds", True)
    return {"certificates": [cert.to_dict()], "values": values}, (0 if ok else 1)


def _query_points(args, dim) -> np.ndarray:
    pts = []
    if args.points:
        pts.append(read_points(args.points, dim))
    for a in args.at or []:
        pts.append(_vector(a, dim, "--at").reshape(1, -1))
    if not pts:
        raise ParseError("give query points with --points or --at")
    return np.vstack(pts)


def _max_ratio(P: np.ndarray, vals: np.ndarray, norm: Norm) -> float:
    best = 0.0
    for i in range(len(P)):
        d = norm(P[i + 1:] - P[i])
        ok = d > 0
        if np.any(ok):
            best = max(best, float(np.max(np.abs(vals[i + 1:] - vals[i])[ok] / d[ok])))
    return best


def cmd_extend(args) -> tuple[dict, int]:
    f = load_problem(args.problem)
    P = _query_points(args, f.dim)
    kinds = [X.ExtensionKind.parse(k) for k in (args.kind or ["supaffine"])]
    cols = {}
    for kind in kinds:
        spec = X.ExtensionSpec(f, args.modulus, kind)
        cols[kind.value] = np.array([X.evaluate_extension(spec, p) for p in P])
    fvals = f.evaluate_many(P)
    table = [{"x": p.tolist(), "f": fv, **{k: float(v[i]) for k, v in cols.items()}}
             for i, (p, fv) in enumerate(zip(P, fvals))]
    summary = {k: {"max_pairwise_ratio": _max_ratio(P, v, f.norm)} for k, v in cols.items()}
    if "infconv" in cols and "supaffine" in cols:
        summary["supaffine_le_infconv"] = bool(np.all(cols["supaffine"] <= cols["infconv"] + X.TOL_EXT))
    if args.csv:
        header = [f"x{i + 1}" for i in range(f.dim)] + ["f"] + list(cols)
        _write_csv(args.csv, header, [list(p) + [fv] + [cols[k][i] for k in cols]
                                      for i, (p, fv) in enumerate(zip(P, fvals))])
    return {"values": {"table": table, "summary": summary}}, 0


def cmd_envelope(args) -> tuple[dict, int]:
    f = load_problem(args.problem)
    P = _query_points(args, f.dim)
    lams = args.lam or [1.0]
    rows = []
    for lam in lams:
        for p in P:
            rows.append(M.envelope(f, lam, p))
    certs = []
    code = 0
    if args.modulus is not None:
        for lam in lams:
            for cert in (M.envelope_bounds_check(f, lam, args.modulus),
                         M.envelope_lipschitz_check(f, lam, args.modulus, n_pairs=args.pairs)):
                certs.append(cert.to_dict())
                if not cert.certified:
                    code = 1
    if args.csv:
        n = f.dim
        header = ([f"x{i + 1}" for i in range(n)] + ["lambda", "value"]
                  + [f"grad{i + 1}" for i in range(n)] + [f"prox{i + 1}" for i in range(n)])
        _write_csv(args.csv, header, [list(r.x) + [r.lam, r.value] + list(r.gradient) + list(r.prox)
                                      for r in rows])
    return {"values": {"table": [r.to_dict() for r in rows]}, "certificates": certs}, code


def _grid(args, f, center=None) -> O.GridSpec:
    if args.lower or args.upper:
        if not (args.lower and args.upper):
            raise ParseError("--lower and --upper go together")
        return O.GridSpec(tuple(_vector(args.lower, f.dim, "--lower")),
                          tuple(_vector(args.upper, f.dim, "--upper")), args.grid_res)
    if center is not None:
        return O.GridSpec(tuple(center - 3.0), tuple(center + 3.0), args.grid_res)
    box = O.domain_box(f)
    return O.GridSpec(box.lower, box.upper, args.grid_res)


def cmd_oracle(args) -> tuple[dict, int]:
    f = load_problem(args.problem)
    if args.oracle_command == "lipschitz":
        est = O.grid_lipschitz_estimate(f, _grid(args, f))
        return {"oracle": {"lipschitz_estimate": est}}, 0
    if args.oracle_command == "subgrad":
        if args.at is None or args.g is None:
            raise ParseError("subgrad needs --at and --g")
        x = _vector(args.at[0], f.dim, "--at")
        g = _vector(args.g, f.dim, "--g")
        grid = _grid(args, f) if (args.lower or args.upper) else None
        ok = O.fd_subgradient_check(f, x, g, grid)
        return {"oracle": {"subgradient_inequality": ok}}, (0 if ok else 1)
    if args.at is None:
        raise ParseError("inf needs --at")
    x = _vector(args.at[0], f.dim, "--at")
    if args.infconv:
        if args.modulus is None:
            raise ParseError("--infconv needs --modulus")
        obj = O.infconv_objective(f, args.modulus, x)
        grid = _grid(args, f)
    else:
        lam = (args.lam or [1.0])[0]
        obj = O.prox_objective(f, lam, x)
        grid = _grid(args, f, center=x)
    arg, val = O.grid_inf(obj, grid, vectorized=True)
    return {"oracle": {"argmin": arg.tolist(), "value": val}}, 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lipcert", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--problem", required=True, help="problem JSON file (schema lipcert/1)")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--no-timing", action="store_true", help="omit timing for byte-stable output")

    p = sub.add_parser("certify", help="run a Lipschitz criterion")
    common(p)
    p.add_argument("--criterion", required=True, choices=CRITERIA)
    p.add_argument("--modulus", type=float, required=True)
    p.add_argument("--region", choices=["full", "ball"], default="full")
    p.add_argument("--center", help="comma-separated point (ball region, calmness)")
    p.add_argument("--radius", type=float)
    p.add_argument("--radii", help="comma-separated radii for the asymptotic criterion")
    p.add_argument("--set", help="polyhedron JSON for set-based criteria")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("extend", help="evaluate Lipschitz extensions")
    common(p)
    p.add_argument("--modulus", type=float, required=True)
    p.add_argument("--kind", action="append", choices=["infconv", "supaffine", "supaffine-boundary"])
    p.add_argument("--points", help="CSV of query points")
    p.add_argument("--at", action="append", help="single comma-separated query point (repeatable)")
    p.add_argument("--csv", help="write a CSV table here")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("envelope", help="Moreau envelope values and checks")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float, action="append")
    p.add_argument("--points")
    p.add_argument("--at", action="append")
    p.add_argument("--modulus", type=float)
    p.add_argument("--pairs", type=int, default=1000)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("oracle", help="brute-force reference values")
    common(p)
    p.add_argument("oracle_command", choices=["lipschitz", "subgrad", "inf"])
    p.add_argument("--at", action="append")
    p.add_argument("--g")
    p.add_argument("--prox", action="store_true")
    p.add_argument("--infconv", action="store_true")
    p.add_argument("--lambda", dest="lam", type=float, action="append")
    p.add_argument("--modulus", type=float)
    p.add_argument("--lower")
    p.add_argument("--upper")
    p.add_argument("--grid-res", type=int)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 3 if exc.code else 0
    t0 = time.perf_counter()
    report = {"schema": SCHEMA, "command": {"name": args.command, **_command_echo(args)},
              "certificates": [], "values": {}, "oracle": {}}
    try:
        body, code = args.func(args)
    except LipcertError as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = exc.exit_code
        sys.stderr.write(f"lipcert: {type(exc).__name__}: {exc}\n")
    else:
        report.update(body)
    if not args.no_timing:
        report["timing"] = {"seconds": time.perf_counter() - t0}
    _emit(report, args)
    return code


__all__ = ["main", "build_parser", "load_problem", "problem_from_dict", "problem_to_dict",
           "polyhedron_from_dict", "polyhedron_to_dict", "read_points", "dump_report", "SCHEMA"]
