"""Command line front end.

Numbers are printed with 12 significant digits, CSV output always starts
with a header row, and failures are reported as one JSON object on stderr
with a distinct exit status per error kind.  SLICECALC_THREADS caps the
worker threads used for per-point evaluation; results are collected in
input order, so output does not depend on it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .algebra import (AlgebraSpec, ComplexStructure, SlicePoint, algebra, matrix_to_json, point_from_element,
                      random_unit_imaginary, structure_from_json, unit_structure)
from .branches import CUTS, example_phi, psi_phi, psi_phi_function
from .calculus import taylor_coefficients, taylor_eval
from .checks import run_checks
from .errors import InvalidInputError, InvariantFailure, SliceCalcError
from .extension import SliceOpenTuple, extend, hyper_sigma_polydisc
from .paths import SliceFunctionData
from .regions import region_from_json
from .representation import kernel_membership, mp_residuals, represent, slice_inverse
from .topology import (SIGMA_VARIANTS, metrizability_witness, sigma_ball_contains, sigma_distance,
                       tau_sigma_witness)

SIG = 12


# ---------------------------------------------------------------------------
# formatting


def fmt(v) -> str:
    v = float(v)
    if v == 0.0:
        return "0"
    return format(v, f".{SIG}g")


def _round(obj):
    if isinstance(obj, float):
        return float(fmt(obj)) if np.isfinite(obj) else str(obj)
    if isinstance(obj, (np.floating,)):
        return _round(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    return json.dumps(_round(obj)) + "\n"


def dump_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def threads() -> int:
    try:
        return max(1, int(os.environ.get("SLICECALC_THREADS", "1")))
    except ValueError:
        raise InvalidInputError("SLICECALC_THREADS must be an integer") from None


def pmap(fn, items):
    items = list(items)
    n = threads()
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# parsing


_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]\d+)?"


def parse_element(text: str, spec: AlgebraSpec) -> np.ndarray:
    """Algebra element from text such as ``1+2i-0.5k``, ``2*e3`` or a JSON
    coordinate list.  Exponents need an explicit sign (``1e-3``) so that
    ``2e1`` reads as 2 times e1."""
    text = text.strip()
    if text.startswith("["):
        try:
            v = np.asarray(json.loads(text), float)
        except (ValueError, TypeError):
            raise InvalidInputError(f"cannot parse element {text!r}") from None
        if v.shape != (spec.dim,):
            raise InvalidInputError(f"element needs {spec.dim} coordinates")
        return v
    labels = sorted((l for l in spec.labels if l != "1"), key=len, reverse=True)
    lab = "|".join(re.escape(l) for l in labels) if labels else "(?!)"
    term = re.compile(rf"\s*([+-]?)\s*({_NUM})?\s*\*?\s*({lab})?\s*")
    out = np.zeros(spec.dim)
    pos, seen = 0, False
    s = text.replace(" ", "")
    if not s:
        raise InvalidInputError("empty element")
    while pos < len(s):
        m = term.match(s, pos)
        if not m or m.end() == pos or (m.group(2) is None and m.group(3) is None):
            raise InvalidInputError(f"cannot parse element {text!r}")
        if seen and not m.group(1):
            raise InvalidInputError(f"missing sign between terms in {text!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) is not None else 1.0
        idx = spec.labels.index(m.group(3)) if m.group(3) else spec.unit
        if spec.labels[0] != "1" and not m.group(3):
            raise InvalidInputError("this algebra has no unit; give coordinates as a JSON list")
        out[idx] += sign * coef
        pos, seen = m.end(), True
    return out


def parse_point(text: str, spec: AlgebraSpec, default: ComplexStructure | None = None) -> SlicePoint:
    """A point of the cone: one element, or d comma-separated elements on a
    common slice, or a JSON list of coordinate lists."""
    text = text.strip()
    if text.startswith("[["):
        rows = np.asarray(json.loads(text), float)
        return point_from_element(rows, spec, default)
    if text.startswith("["):
        return point_from_element(parse_element(text, spec), spec, default)
    parts = [parse_element(p, spec) for p in text.split(",")]
    return point_from_element(np.array(parts), spec, default)


def parse_structure(text: str, spec: AlgebraSpec) -> ComplexStructure:
    text = text.strip()
    if text.startswith("{"):
        return structure_from_json(json.loads(text))
    return unit_structure(parse_element(text, spec), spec)


def parse_structures(text: str, spec: AlgebraSpec) -> list[ComplexStructure]:
    text = text.strip()
    if text.startswith("@"):
        data = _load_json(text[1:])
        return [structure_from_json(o) if isinstance(o, dict) else parse_structure(str(o), spec) for o in data]
    return [parse_structure(t, spec) for t in text.split(";") if t.strip()]


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc.msg}") from None


def parse_values(text: str, spec: AlgebraSpec, k: int) -> np.ndarray:
    text = text.strip()
    if text.startswith("@"):
        data = _load_json(text[1:])
        v = np.asarray(data, float)
    elif text.startswith("["):
        v = np.asarray(json.loads(text), float)
    else:
        v = np.array([parse_element(t, spec) for t in text.split(";")])
    if v.shape != (k, spec.dim):
        raise InvalidInputError(f"expected {k} values of {spec.dim} coordinates")
    return v


def parse_function(text: str, spec: AlgebraSpec, J: ComplexStructure | None = None) -> SliceFunctionData:
    """``psi`` (the glued square-root branch for J = j), ``poly:{json}`` with
    a map from exponent (``"3"`` or ``"2,1"``) to element, or ``@file``."""
    text = text.strip()
    if text.startswith("@"):
        return function_from_json(_load_json(text[1:]), spec)
    if text == "psi":
        if spec.name != "quaternion":
            raise InvalidInputError("psi is defined on quaternions")
        J = J or unit_structure(spec.element("j"), spec)
        return psi_phi_function(J, example_phi(J))
    if text.startswith("poly:"):
        try:
            obj = json.loads(text[5:])
        except json.JSONDecodeError:
            raise InvalidInputError("poly: expects a JSON object") from None
        return function_from_json({"polynomial": obj}, spec)
    raise InvalidInputError(f"unknown function {text!r}")


def function_from_json(obj: dict, spec: AlgebraSpec) -> SliceFunctionData:
    if "polynomial" in obj:
        coeffs = {}
        for key, val in obj["polynomial"].items():
            alpha = tuple(int(a) for a in str(key).split(","))
            coeffs[alpha] = parse_element(val, spec) if isinstance(val, str) else np.asarray(val, float)
        center = obj.get("center")
        return SliceFunctionData.polynomial(coeffs, spec.dim, center)
    raise InvalidInputError("function JSON needs a 'polynomial' entry")


# ---------------------------------------------------------------------------
# subcommands


def _spec(args) -> AlgebraSpec:
    return algebra(args.algebra)


def cmd_sigma_dist(args):
    spec = _spec(args)
    p, q = parse_point(args.p, spec), parse_point(args.q, spec)
    d = sigma_distance(p, q, args.variant)
    if args.format == "json":
        return dump_json({"p": args.p, "q": args.q, "variant": args.variant, "sigma_distance": d})
    if args.format == "csv":
        return dump_csv(["p", "q", "variant", "sigma_distance"], [[args.p, args.q, args.variant, d]])
    return fmt(d) + "\n"


def _tau_probes(spec: AlgebraSpec, I: ComplexStructure, k: int, base: float, rng):
    """Units J_m with dist(J_m, C_I) = base^-m, tilted from I towards a
    fixed unit orthogonal to 1 and I."""
    u = I.mat @ spec.one()
    v = random_unit_imaginary(spec, rng)
    v = v - (v @ u) * u
    v[spec.unit] = 0.0
    v /= np.linalg.norm(v)
    probes = []
    for m in range(1, k + 1):
        t = base ** (-m)
        probes.append(unit_structure(np.sqrt(1 - t * t) * u + t * v, spec))
    return probes


def cmd_witness(args):
    spec = _spec(args)
    rng = np.random.default_rng(args.seed)
    if args.kind == "metrizability":
        structs = []
        while len(structs) < args.k:
            T = unit_structure(random_unit_imaginary(spec, rng), spec)
            if all(not T.same_slice(S) for S in structs):
                structs.append(T)
            elif spec.dim <= 2:
                raise InvalidInputError("this algebra has a single slice")
        rep = metrizability_witness(structs, args.threshold)
    else:
        if spec.dim <= 2:
            raise InvalidInputError("this algebra has a single slice")
        I = parse_structure(args.structure, spec) if args.structure else unit_structure(spec.basis(1), spec)
        probes = _tau_probes(spec, I, args.k, args.base, rng)
        rep = tau_sigma_witness(I, probes, args.threshold)
    # parameter: k for metrizability, dist(J_k, C_I) for tau-sigma
    rows = [list(r) for r in rep.rows()]
    header = ["probe_index", "parameter", "distance"]
    if args.format == "json":
        return dump_json({"kind": args.kind, "threshold": args.threshold, "verdict": rep.verdict,
                          "rows": [dict(zip(header, r)) for r in rows]})
    return dump_csv(header, rows)


def cmd_zeta_inverse(args):
    spec = _spec(args)
    J = parse_structures(args.structures, spec)
    S = slice_inverse(J)
    res = mp_residuals(S.conjugated(), S.zeta_plus @ np.linalg.inv(S.d_block))
    return dump_json({"k": len(J), "distinct_up_to_sign": S.structures.distinct_up_to_sign,
                      "kernel_dim": S.kernel_dim, "slice_solution": S.is_slice_solution,
                      "zeta": matrix_to_json(S.zeta), "zeta_plus": matrix_to_json(S.zeta_plus),
                      "mp_residuals": list(res)})


def cmd_represent(args):
    spec = _spec(args)
    J = parse_structures(args.structures, spec)
    I = parse_structure(args.target, spec)
    vals = parse_values(args.values, spec, len(J))
    inside = kernel_membership(I, J)
    value = represent(vals, J, I)
    return dump_json({"target_in_kernel_cone": inside, "value": value})


def _points_from_json(data, spec):
    pts = []
    for item in data:
        if isinstance(item, str):
            pts.append(parse_point(item, spec))
        elif isinstance(item, dict):
            I = parse_structure(item["I"], spec) if isinstance(item["I"], str) else structure_from_json(item["I"])
            pts.append(SlicePoint(item["x"], item["y"], I))
        else:
            raise InvalidInputError("points must be strings or {x, y, I} objects")
    return pts


def cmd_extend(args):
    spec_json = _load_json(args.spec)
    spec = algebra(spec_json.get("algebra", args.algebra))
    J = [parse_structure(s, spec) if isinstance(s, str) else structure_from_json(s)
         for s in spec_json["structures"]]
    regions = tuple(region_from_json(r) for r in spec_json["regions"])
    f = function_from_json(spec_json["function"], spec)
    U = SliceOpenTuple(tuple(J), regions)
    ft = extend(f, U, resolution=int(spec_json.get("resolution", 201)))
    points = _points_from_json(_load_json(args.eval), spec)

    def one(p):
        try:
            return {"status": "ok", "value": ft.evaluate(p)}
        except SliceCalcError as exc:
            return {"status": exc.code, "value": None}

    results = pmap(one, points)
    sets = ft.meta["derived_sets"]
    return dump_json({"slice_solution": sets.slice_solution,
                      "results": [{"x": p.x, "y": p.y, "unit": p.I.mat @ _one(spec), **r}
                                  for p, r in zip(points, results)]})


def cmd_polydisc(args):
    spec = _spec(args)
    q = parse_point(args.center, spec)
    J = parse_structures(args.structures, spec) if args.structures else [q.I]
    hs = hyper_sigma_polydisc(q, args.radius, J)
    if args.probe:
        points = _points_from_json(_load_json(args.probe), spec)
    else:
        rng = np.random.default_rng(args.seed)
        points = []
        # probes in a box twice the polydisc, on random slices
        span = 2.0 * args.radius
        ymax = np.abs(q.y) + span
        for _ in range(args.count):
            I = unit_structure(random_unit_imaginary(spec, rng), spec)
            points.append(SlicePoint(q.x + rng.uniform(-span, span, q.d), rng.uniform(-ymax, ymax), I))

    def one(p):
        ball = sigma_ball_contains(q, float(np.max(args.radius)), p, args.variant) if q.d == 1 else ""
        return hs.contains(p), ball

    flags = pmap(one, points)
    header = ["index"] + [f"q{l}_{c}" for l in range(q.d) for c in range(spec.dim)] + ["hyper_sigma", "sigma_ball"]
    rows = []
    for k, (p, (h, b)) in enumerate(zip(points, flags)):
        coords = [float(v) for l in range(q.d) for v in p.operator(l) @ _one(spec)]
        rows.append([k] + coords + [int(h), "" if b == "" else int(b)])
    return dump_csv(header, rows)


def _one(spec):
    if spec.labels[0] == "1":
        return spec.one()
    e = np.zeros(spec.dim)
    e[0] = 1.0
    return e


def cmd_psi_phi(args):
    spec = _spec(args)
    J = parse_structure(args.J, spec)
    I = parse_structure(args.structure, spec)
    phi = example_phi(J) if args.phi == "example" else float(args.phi)
    start = complex(args.start_re, args.start_im)
    direction = complex(args.dir_re, args.dir_im)
    ts = np.linspace(0.0, args.length, args.n)

    def one(t):
        z = start + t * direction
        p = SlicePoint([z.real], [z.imag], I)
        try:
            return "ok", psi_phi(p, J, phi, args.cut, args.tilde)
        except SliceCalcError as exc:
            return exc.code, np.full(spec.dim, np.nan)

    res = pmap(one, ts)
    header = ["t", "x", "y", "status"] + [f"v{c}" for c in range(spec.dim)]
    rows = []
    for t, (status, v) in zip(ts, res):
        z = start + t * direction
        rows.append([float(t), z.real, z.imag, status] + [float(c) if np.isfinite(c) else "" for c in v])
    return dump_csv(header, rows)


def _series(args, spec):
    f = parse_function(args.function, spec)
    q0 = parse_point(args.center, spec)
    return taylor_coefficients(f, q0, args.order, args.rho, args.nodes), f


def cmd_taylor(args):
    spec = _spec(args)
    T, _ = _series(args, spec)
    if args.format == "csv":
        rows = [[" ".join(map(str, a))] + list(map(float, v)) + [T.errors[a]]
                for a, v in sorted(T.coefficients.items(), key=lambda kv: (sum(kv[0]), kv[0]))]
        return dump_csv(["alpha"] + [f"c{c}" for c in range(spec.dim)] + ["quadrature_error"], rows)
    return dump_json(T.to_json())


def cmd_taylor_eval(args):
    spec = _spec(args)
    T, f = _series(args, spec)
    q = parse_point(args.point, spec)
    if args.sweep:
        exact = f(q)
        rows = []
        for N in range(0, args.order + 1):
            tv = taylor_eval(T, q, N)
            rows.append([N] + list(map(float, tv.value)) + [tv.tail, float(np.linalg.norm(tv.value - exact))])
        return dump_csv(["order"] + [f"v{c}" for c in range(spec.dim)] + ["tail", "error"], rows)
    tv = taylor_eval(T, q)
    return dump_json({"order": args.order, "value": tv.value, "tail_estimate": tv.tail})


def cmd_check(args):
    results = run_checks(args.algebra, args.seed)
    rows = [[r.name, "pass" if r.passed else "FAIL", r.value, r.threshold] for r in results]
    text = dump_csv(["check", "status", "value", "threshold"], rows)
    failed = [r.name for r in results if not r.passed]
    if failed:
        emit(text, args.out)
        raise InvariantFailure("failed: " + ", ".join(failed))
    return text


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidInputError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--algebra", default="quaternion")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None, help="reserved tolerance override")
    common.add_argument("--out", default=None, help="write output to this path")
    common.add_argument("--format", choices=["json", "csv", "text"], default=None)

    p = _Parser(prog="slicecalc", description="Slice analysis on weak slice cones.")
    p.add_argument("--version", action="version", version=f"slicecalc {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sigma-dist", parents=[common], help="sigma-distance of two points")
    s.add_argument("--p", required=True)
    s.add_argument("--q", required=True)
    s.add_argument("--variant", choices=SIGMA_VARIANTS, default="gentili-stoppato")
    s.set_defaults(fn=cmd_sigma_dist, default_format="text")

    s = sub.add_parser("witness", parents=[common], help="topology counterexample witnesses")
    s.add_argument("kind", choices=["tau-sigma", "metrizability"])
    s.add_argument("--k", type=int, default=6)
    s.add_argument("--base", type=float, default=4.0, help="tau-sigma: dist(J_k, C_I) = base^-k")
    s.add_argument("--structure", default=None, help="tau-sigma: the unit I")
    s.add_argument("--threshold", type=float, default=1e-3)
    s.set_defaults(fn=cmd_witness, default_format="csv")

    s = sub.add_parser("zeta-inverse", parents=[common], help="zeta(J) and its slice inverse")
    s.add_argument("--structures", required=True, help="units separated by ';' or @file.json")
    s.set_defaults(fn=cmd_zeta_inverse, default_format="json")

    s = sub.add_parser("represent", parents=[common], help="representation formula")
    s.add_argument("--structures", required=True)
    s.add_argument("--values", required=True, help="one element per structure, ';'-separated, JSON or @file")
    s.add_argument("--target", required=True)
    s.set_defaults(fn=cmd_represent, default_format="json")

    s = sub.add_parser("extend", parents=[common], help="extend slice-wise data and evaluate")
    s.add_argument("--spec", required=True)
    s.add_argument("--eval", required=True)
    s.set_defaults(fn=cmd_extend, default_format="json")

    s = sub.add_parser("polydisc", parents=[common], help="hyper-sigma-polydisc membership table")
    s.add_argument("--center", required=True)
    s.add_argument("--radius", type=float, required=True)
    s.add_argument("--structures", default=None)
    s.add_argument("--probe", default=None, help="JSON file of points; random probes otherwise")
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--variant", choices=SIGMA_VARIANTS, default="gentili-stoppato")
    s.set_defaults(fn=cmd_polydisc, default_format="csv")

    s = sub.add_parser("psi-phi", parents=[common], help="glued square-root branch along a ray")
    s.add_argument("--J", default="j")
    s.add_argument("--structure", required=True, help="the slice I of the ray")
    s.add_argument("--phi", default="example", help="'example' or a constant s in [0, 1]")
    s.add_argument("--cut", choices=sorted(CUTS), default="ray")
    s.add_argument("--tilde", action="store_true", help="admit the cut on the slice of -J")
    s.add_argument("--start-re", type=float, default=0.0)
    s.add_argument("--start-im", type=float, default=0.0)
    s.add_argument("--dir-re", type=float, default=1.0)
    s.add_argument("--dir-im", type=float, default=0.0)
    s.add_argument("--length", type=float, default=1.0)
    s.add_argument("--n", type=int, default=11)
    s.set_defaults(fn=cmd_psi_phi, default_format="csv")

    for name, fn, fmt_default in (("taylor", cmd_taylor, "json"), ("taylor-eval", cmd_taylor_eval, "json")):
        s = sub.add_parser(name, parents=[common], help="Taylor coefficients" if name == "taylor"
                           else "evaluate a Taylor series with a tail estimate")
        s.add_argument("--function", required=True, help="psi, poly:{json} or @file.json")
        s.add_argument("--center", required=True)
        s.add_argument("--order", type=int, required=True)
        s.add_argument("--rho", type=float, default=None)
        s.add_argument("--nodes", type=int, default=64)
        if name == "taylor-eval":
            s.add_argument("--point", required=True)
            s.add_argument("--sweep", action="store_true", help="CSV of partial sums for every order")
        s.set_defaults(fn=fn, default_format=fmt_default)

    s = sub.add_parser("check", parents=[common], help="run the invariant suite")
    s.set_defaults(fn=cmd_check, default_format="csv")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.format is None:
            args.format = args.default_format
        if getattr(args, "sweep", False):
            args.format = "csv"
        text = args.fn(args)
        emit(text, args.out)
        return 0
    except SliceCalcError as exc:
        sys.stderr.write(json.dumps({"error": exc.code, "message": str(exc), "exit_status": exc.exit_status}) + "\n")
        return exc.exit_status
    except (KeyError, TypeError, ValueError) as exc:
        err = InvalidInputError(f"malformed input: {exc}")
        sys.stderr.write(json.dumps({"error": err.code, "message": str(err), "exit_status": err.exit_status}) + "\n")
        return err.exit_status


if __name__ == "__main__":
    sys.exit(main())
