"""Command-line front end.

Subcommands: validate, eval, wigner, fbi, husimi, project, wignerfun,
propagate, bench, selftest.  Parameter files are JSON with re/im split
matrices; outputs are CSV with '#'-prefixed metadata lines and round-trip
float precision, so identical inputs give byte-identical files.

Exit codes: 0 success, 1 validation or usage error, 2 numerical error,
3 I/O or schema error.  HAGKIT_WORKERS (positive integer) sets the worker
count for batch point evaluation; results are gathered by index, so the
output never depends on it.
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import approximation as ap
from . import dynamics as dyn
from . import phasespace as psp
from . import quadrature as quad
from .indices import CoefficientVector, IndexSet
from .params import ParameterSet, ValidationError, validate
from .wavepackets import gaussian_eval, wavepacket_eval

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class SchemaError(Exception):
    pass


# ---------------------------------------------------------------- files

def load_params(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read parameter file {path}: {exc}") from exc
    try:
        eps = float(raw["epsilon"])
        q = np.asarray(raw["q"], dtype=float)
        p = np.asarray(raw["p"], dtype=float)
        Q = np.asarray(raw["Q"]["re"], dtype=float) + 1j * np.asarray(raw["Q"]["im"], dtype=float)
        P = np.asarray(raw["P"]["re"], dtype=float) + 1j * np.asarray(raw["P"]["im"], dtype=float)
        return ParameterSet(eps, q, p, Q, P)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed parameter file {path}: {exc}") from exc


def params_to_dict(params):
    return {
        "epsilon": params.epsilon,
        "q": [repr(float(v)) for v in params.q],
        "p": [repr(float(v)) for v in params.p],
        "Q": {
            "re": [[repr(float(v)) for v in row] for row in params.Q.real],
            "im": [[repr(float(v)) for v in row] for row in params.Q.imag],
        },
        "P": {
            "re": [[repr(float(v)) for v in row] for row in params.P.real],
            "im": [[repr(float(v)) for v in row] for row in params.P.imag],
        },
    }


def params_hash(params):
    blob = json.dumps(params_to_dict(params), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def parse_index(text, d):
    try:
        k = tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad multi-index {text!r}") from exc
    if len(k) != d or any(v < 0 for v in k):
        raise UsageError(f"multi-index {text!r} must have {d} nonnegative entries")
    return k


def parse_grid(text, d):
    """Per-axis 'min:max:count' triples, comma separated; row-major expansion."""
    axes = []
    parts = text.split(",")
    if len(parts) != d:
        raise UsageError(f"grid needs {d} axes, got {len(parts)}")
    for part in parts:
        bits = part.split(":")
        if len(bits) != 3:
            raise UsageError(f"bad grid axis {part!r}, want min:max:count")
        lo, hi, cnt = float(bits[0]), float(bits[1]), int(bits[2])
        if not lo < hi or cnt < 2:
            raise UsageError(f"bad grid axis {part!r}: need min < max and count >= 2")
        axes.append(np.linspace(lo, hi, cnt))
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def load_points(path, ncols):
    try:
        pts = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise SchemaError(f"cannot read points file {path}: {exc}") from exc
    if pts.shape[1] != ncols:
        raise SchemaError(f"points file {path} has {pts.shape[1]} columns, expected {ncols}")
    return pts


def resolve_points(args, ncols):
    if getattr(args, "grid", None):
        return parse_grid(args.grid, ncols)
    if getattr(args, "points", None):
        return load_points(args.points, ncols)
    raise UsageError("provide either --grid or --points")


def write_csv(path, metadata, header, columns):
    rows = np.column_stack(columns)
    lines = [f"# {m}" for m in metadata]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(f"{v:.17g}" for v in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def worker_count():
    raw = os.environ.get("HAGKIT_WORKERS", "")
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"HAGKIT_WORKERS must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise UsageError("HAGKIT_WORKERS must be a positive integer")
    return n


def chunked_map(fn, pts):
    """Apply fn to point chunks, preserving order regardless of worker count."""
    n = worker_count()
    if n == 1 or len(pts) < 2 * n:
        return np.asarray(fn(pts))
    chunks = np.array_split(pts, n)
    with ThreadPoolExecutor(max_workers=n) as pool:
        results = list(pool.map(fn, chunks))
    return np.concatenate(results)


def check_finite(values, what):
    values = np.atleast_1d(values)
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise FloatingPointError(f"{what}: non-finite value at point index {idx}")


# ---------------------------------------------------------------- commands

def cmd_validate(args):
    params = load_params(args.params)
    report = validate(params, args.tol)
    print(f"parameter file {args.params} (d={params.d}, epsilon={params.epsilon:g})")
    print(report)
    return EXIT_OK if report.passed else EXIT_USAGE


def require_params(args):
    params = load_params(args.params)
    report = validate(params, args.tol)
    if not report.passed:
        raise ValidationError(f"parameters in {args.params} fail validation:\n{report}")
    return params


def cmd_eval(args):
    params = require_params(args)
    k = parse_index(args.k, params.d)
    pts = resolve_points(args, params.d)
    vals = chunked_map(lambda chunk: wavepacket_eval(params, k, chunk), pts)
    check_finite(vals, "eval")
    write_csv(
        args.out,
        [f"command: eval k={args.k}", f"params_hash: {params_hash(params)}"],
        [f"x{i}" for i in range(params.d)] + ["re", "im"],
        [pts[:, i] for i in range(params.d)] + [vals.real, vals.imag],
    )
    return EXIT_OK


def _phase_space_values(params, args, kind):
    d = params.d
    pts = resolve_points(args, 2 * d)
    method = args.method
    if method == "quadrature" and d > 2:
        raise UsageError("quadrature method is restricted to d <= 2")
    if kind == "wigner":
        k = parse_index(args.k, d)
        l = parse_index(args.l, d)
        if method == "closed":
            fn = lambda chunk: psp.wigner_closed(params, k, l, chunk)
        elif method == "recurrence":
            box = IndexSet.box(tuple(map(max, zip(k, l))))

            def fn(chunk):
                return np.atleast_1d(psp.wigner_table(params, box, chunk)[(k, l)])

        elif method == "quadrature":
            spec = quad.QuadratureSpec(nodes_per_axis=args.quad_nodes, radius=9.0)
            width = 2 * (9.0 * math.sqrt(params.epsilon) + float(np.max(np.abs(pts))) )

            def fn(chunk):
                return quad.wigner_quadrature(
                    quad.wavepacket_fn(params, k), quad.wavepacket_fn(params, l),
                    params.epsilon, chunk, spec, y_halfwidth=width,
                )

        else:
            raise UsageError(f"unknown wigner method {method!r}")
        vals = chunked_map(fn, pts)
    else:
        k = parse_index(args.k, d)
        if method == "closed":
            fn = lambda chunk: psp.fbi_closed(params, k, chunk)
        elif method == "quadrature":
            spec = quad.QuadratureSpec(nodes_per_axis=args.quad_nodes, radius=9.0)

            def fn(chunk):
                return np.array(
                    [quad.fbi_quadrature(quad.wavepacket_fn(params, k),
                                         params.epsilon, pt, spec,
                                         center=0.5 * (pt[:d] + params.q),
                                         scale=9.0 * math.sqrt(params.epsilon))
                     for pt in chunk]
                )

        else:
            raise UsageError(f"unknown {kind} method {method!r}")
        vals = chunked_map(fn, pts)
        if kind == "husimi":
            vals = np.abs(vals) ** 2
    check_finite(vals, kind)
    return pts, vals


def cmd_wigner(args):
    params = require_params(args)
    pts, vals = _phase_space_values(params, args, "wigner")
    d = params.d
    header = [f"x{i}" for i in range(d)] + [f"xi{i}" for i in range(d)] + ["re", "im"]
    vals = np.asarray(vals, dtype=complex)
    write_csv(
        args.out,
        [f"command: wigner k={args.k} l={args.l} method={args.method}",
         f"params_hash: {params_hash(params)}"],
        header,
        [pts[:, i] for i in range(2 * d)] + [vals.real, vals.imag],
    )
    return EXIT_OK


def cmd_fbi(args):
    params = require_params(args)
    pts, vals = _phase_space_values(params, args, "fbi")
    d = params.d
    vals = np.asarray(vals, dtype=complex)
    write_csv(
        args.out,
        [f"command: fbi k={args.k} method={args.method}",
         f"params_hash: {params_hash(params)}"],
        [f"x{i}" for i in range(d)] + [f"xi{i}" for i in range(d)] + ["re", "im"],
        [pts[:, i] for i in range(2 * d)] + [vals.real, vals.imag],
    )
    return EXIT_OK


def cmd_husimi(args):
    params = require_params(args)
    pts, vals = _phase_space_values(params, args, "husimi")
    d = params.d
    write_csv(
        args.out,
        [f"command: husimi k={args.k} method={args.method}",
         f"params_hash: {params_hash(params)}"],
        [f"x{i}" for i in range(d)] + [f"xi{i}" for i in range(d)] + ["value"],
        [pts[:, i] for i in range(2 * d)] + [np.asarray(vals, dtype=float)],
    )
    return EXIT_OK


def parse_builtin_function(text, params):
    """builtin:<name>:field=v1,v2;field=v3  or a samples CSV path."""
    if not text.startswith("builtin:"):
        return samples_function(text, params.d)
    bits = text.split(":", 2)
    name = bits[1] if len(bits) > 1 else ""
    fields = {}
    if len(bits) > 2 and bits[2]:
        for item in bits[2].split(";"):
            key, _, val = item.partition("=")
            if not val:
                raise UsageError(f"bad function field {item!r}")
            fields[key.strip()] = [float(v) for v in val.split(",")]
    d = params.d
    if name == "shifted-gaussian":
        q0 = np.asarray(fields.get("q0", [0.0] * d), dtype=float)
        p0 = np.asarray(fields.get("p0", [0.0] * d), dtype=float)
        sigma = float(fields.get("sigma", [1.0])[0])
        if q0.shape != (d,) or p0.shape != (d,):
            raise UsageError("shifted-gaussian q0/p0 must match the dimension")
        shifted = ParameterSet(
            params.epsilon, q0, p0, sigma * np.eye(d), (1j / sigma) * np.eye(d)
        )
        return lambda x: gaussian_eval(shifted, x)
    if name == "hermite-product":
        kf = fields.get("k")
        if kf is None or len(kf) != d:
            raise UsageError("hermite-product needs k= with one entry per axis")
        k = tuple(int(v) for v in kf)
        return lambda x: wavepacket_eval(params, k, x)
    raise UsageError(f"unknown builtin function {name!r}")


def samples_function(path, d):
    if d != 1:
        raise UsageError("sample files are supported in dimension 1 only")
    data = load_points(path, 3)
    from scipy.interpolate import CubicSpline

    order = np.argsort(data[:, 0])
    xs = data[order, 0]
    vals = data[order, 1] + 1j * data[order, 2]
    spline_re = CubicSpline(xs, vals.real)
    spline_im = CubicSpline(xs, vals.imag)

    def psi(x):
        x = np.asarray(x, dtype=float).reshape(-1)
        out = spline_re(x) + 1j * spline_im(x)
        out[(x < xs[0]) | (x > xs[-1])] = 0.0
        return out

    return psi


def cmd_project(args):
    params = require_params(args)
    psi = parse_builtin_function(args.function, params)
    iset = ap.hyperbolic_set(params.d, args.K)
    spec = ap.default_projection_spec(params.epsilon, nodes=args.quad_nodes)
    coeffs = ap.project(psi, params, iset, spec)
    report = ap.error_report(psi, coeffs, params, spec)
    payload = {
        "params": params_to_dict(params),
        "params_hash": params_hash(params),
        "K": args.K,
        "indices": [list(k) for k in iset],
        "coeffs_re": [repr(float(v)) for v in coeffs.coeffs.real],
        "coeffs_im": [repr(float(v)) for v in coeffs.coeffs.imag],
        "bessel_defect": repr(report.bessel_defect),
        "l2_residual": repr(report.l2_residual),
    }
    text = json.dumps(payload, indent=1, sort_keys=True) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(
        f"projected onto {len(iset)} modes (K={args.K}); "
        f"l2 residual {report.l2_residual:.3e}, bessel defect {report.bessel_defect:.3e}",
        file=sys.stderr,
    )
    return EXIT_OK


def load_coeffs(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read coefficient file {path}: {exc}") from exc
    try:
        pd = raw["params"]
        params = ParameterSet(
            float(pd["epsilon"]),
            np.asarray(pd["q"], dtype=float),
            np.asarray(pd["p"], dtype=float),
            np.asarray(pd["Q"]["re"], dtype=float) + 1j * np.asarray(pd["Q"]["im"], dtype=float),
            np.asarray(pd["P"]["re"], dtype=float) + 1j * np.asarray(pd["P"]["im"], dtype=float),
        )
        stored_hash = raw["params_hash"]
        iset = IndexSet([tuple(k) for k in raw["indices"]])
        coeffs = np.asarray(raw["coeffs_re"], dtype=float) + 1j * np.asarray(
            raw["coeffs_im"], dtype=float
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed coefficient file {path}: {exc}") from exc
    if params_hash(params) != stored_hash:
        raise ValidationError(
            f"coefficient file {path} is stale: embedded parameter hash "
            f"{stored_hash} does not match the parameters"
        )
    return params, CoefficientVector(iset, coeffs)


def cmd_wignerfun(args):
    params, coeffs = load_coeffs(args.coeffs)
    pts = resolve_points(args, 2 * params.d)
    vals = chunked_map(
        lambda chunk: np.atleast_1d(psp.wigner_superposition(params, coeffs, chunk)), pts
    )
    check_finite(vals, "wignerfun")
    d = params.d
    write_csv(
        args.out,
        [f"command: wignerfun coeffs={os.path.basename(args.coeffs)}",
         f"params_hash: {params_hash(params)}"],
        [f"x{i}" for i in range(d)] + [f"xi{i}" for i in range(d)] + ["value"],
        [pts[:, i] for i in range(2 * d)] + [np.asarray(vals, dtype=float)],
    )
    return EXIT_OK


def resolve_potential(text, d):
    if text == "harmonic":
        return dyn.harmonic_potential(d)
    if text == "quartic":
        return dyn.quartic_potential(d)
    try:
        with open(text) as fh:
            raw = json.load(fh)
        return dyn.QuadraticPotential(
            np.asarray(raw["H"], dtype=float),
            np.asarray(raw.get("g", np.zeros(d)), dtype=float),
            float(raw.get("v0", 0.0)),
        )
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"cannot read potential {text!r}: {exc}") from exc


def cmd_propagate(args):
    params = require_params(args)
    potential = resolve_potential(args.potential, params.d)
    state0 = dyn.initial_state(params)
    try:
        states = dyn.propagate(state0, potential, args.T, args.dt)
    except RuntimeError as exc:
        print(f"propagation aborted: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    meta = [
        f"command: propagate potential={args.potential} T={args.T:g} dt={args.dt:g}",
        f"params_hash: {params_hash(params)}",
    ]
    if args.out is None:
        raise UsageError("propagate needs --out for the trajectory CSV")
    dyn.write_trajectory_csv(states, args.out, metadata=meta)
    final = states[-1]
    print(
        f"propagated to t={final.t:g}; symplectic residual {final.invariant_residual():.3e}"
    )
    return EXIT_OK


def cmd_bench(args):
    rng = np.random.default_rng(args.seed)
    d = args.d
    if d > 2 and "quadrature" in args.method_list:
        raise UsageError("quadrature benchmarking is restricted to d <= 2")
    from .params import hermite_params

    params = hermite_params(d=d)
    iset = ap.hyperbolic_set(d, args.K)
    raw = rng.standard_normal(len(iset)) + 1j * rng.standard_normal(len(iset))
    coeffs = CoefficientVector(iset, raw / np.linalg.norm(raw))
    pts = np.column_stack(
        [rng.uniform(-1.5, 1.5, args.npoints) for _ in range(2 * d)]
    )
    methods = args.method_list.split(",")
    results = {}
    timings = {}
    for method in methods:
        t0 = time.perf_counter()
        if method in ("recurrence", "closed"):
            vals = psp.wigner_superposition(params, coeffs, pts, method=method)
        elif method == "quadrature":
            psi = lambda x: ap.reconstruct(coeffs, params, x)
            spec = quad.QuadratureSpec(nodes_per_axis=args.quad_nodes, radius=9.0)
            deg_reach = math.sqrt(2.0 * iset.max_degree() + 1.0)
            width = 2 * (math.sqrt(params.epsilon) * (6.0 + deg_reach) + 1.5)
            vals = np.empty(len(pts))
            chunk = max(1, 200_000 // spec.nodes_per_axis**d)
            for lo in range(0, len(pts), chunk):
                part = pts[lo : lo + chunk]
                vals[lo : lo + chunk] = quad.wigner_quadrature(
                    psi, psi, params.epsilon, part, spec, y_halfwidth=width
                ).real
        else:
            raise UsageError(f"unknown bench method {method!r}")
        timings[method] = time.perf_counter() - t0
        results[method] = np.asarray(vals, dtype=float)
    print(f"# bench d={d} K={args.K} modes={len(iset)} npoints={args.npoints} seed={args.seed}")
    print(f"{'method':<12} {'seconds':>10} {'max|dev vs ' + methods[0] + '|':>22}")
    base = results[methods[0]]
    deviations = {}
    for method in methods:
        dev = float(np.max(np.abs(results[method] - base)))
        deviations[method] = dev
        print(f"{method:<12} {timings[method]:>10.3f} {dev:>22.3e}")
    if len(methods) > 1:
        ratio = timings[methods[-1]] / max(timings[methods[0]], 1e-12)
        print(f"# wall-time ratio {methods[-1]}/{methods[0]} = {ratio:.1f}")
    worst = max(deviations.values())
    if not np.isfinite(worst):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_selftest(args):
    from .acceptance import run_all

    ok = run_all(criteria=args.criteria)
    return EXIT_OK if ok else EXIT_USAGE


# ---------------------------------------------------------------- parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="hagkit",
        description="Hagedorn wavepacket toolkit: evaluation, phase-space transforms, "
        "projection, propagation, benchmarking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("params", help="parameter JSON file")
        p.add_argument("--tol", type=float, default=1e-10, help="validation tolerance")

    p = sub.add_parser("validate", help="validate a parameter file")
    add_common(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("eval", help="evaluate a wavepacket on points or a grid")
    add_common(p)
    p.add_argument("--k", required=True, help="multi-index, comma separated")
    p.add_argument("--grid", help="per-axis min:max:count, comma separated")
    p.add_argument("--points", help="CSV of evaluation points")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(fn=cmd_eval)

    for name, help_text in (
        ("wigner", "cross Wigner transform"),
        ("fbi", "FBI transform"),
        ("husimi", "Husimi transform"),
    ):
        p = sub.add_parser(name, help=help_text)
        add_common(p)
        p.add_argument("--k", required=True)
        if name == "wigner":
            p.add_argument("--l", required=True)
            p.add_argument(
                "--method", default="closed", choices=["closed", "recurrence", "quadrature"]
            )
        else:
            p.add_argument("--method", default="closed", choices=["closed", "quadrature"])
        p.add_argument("--grid", help="per-axis min:max:count over (x, xi)")
        p.add_argument("--points", help="CSV of phase-space points (x..., xi...)")
        p.add_argument("--quad-nodes", type=int, default=240)
        p.add_argument("--out")
        p.set_defaults(fn={"wigner": cmd_wigner, "fbi": cmd_fbi, "husimi": cmd_husimi}[name])

    p = sub.add_parser("project", help="project a function onto a hyperbolic basis")
    add_common(p)
    p.add_argument(
        "--function",
        required=True,
        help="builtin:shifted-gaussian:q0=..;p0=..;sigma=.. | builtin:hermite-product:k=.. | samples.csv",
    )
    p.add_argument("--K", type=int, required=True, help="hyperbolic cutoff")
    p.add_argument("--quad-nodes", type=int, default=160)
    p.add_argument("--out", help="coefficient JSON (default stdout)")
    p.set_defaults(fn=cmd_project)

    p = sub.add_parser("wignerfun", help="Wigner function of projected coefficients")
    p.add_argument("--coeffs", required=True, help="coefficient JSON from 'project'")
    p.add_argument("--grid")
    p.add_argument("--points")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_wignerfun)

    p = sub.add_parser("propagate", help="propagate parameters through a potential")
    add_common(p)
    p.add_argument("--potential", required=True, help="harmonic | quartic | file.json")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--out", required=False, help="trajectory CSV")
    p.set_defaults(fn=cmd_propagate)

    p = sub.add_parser("bench", help="recurrence vs quadrature Wigner benchmark")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--K", type=int, default=20)
    p.add_argument("--npoints", type=int, default=10_000)
    p.add_argument("--method-list", default="recurrence,quadrature")
    p.add_argument("--quad-nodes", type=int, default=400)
    p.add_argument("--seed", type=int, default=2024)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.add_argument("--criteria", default=None, help="comma-separated criterion numbers")
    p.set_defaults(fn=cmd_selftest)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (UsageError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FloatingPointError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SchemaError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
