"""Batch front-end: envelope / insert / separate / distance / verify / demo.

Every subcommand computes its artifacts as a map of file name to text,
copies its inputs alongside them, and writes everything atomically plus
a manifest. ``verify`` re-runs the computation from the copied inputs
and byte-compares against what is on disk, then validates every report
against the JSON schemas shipped with the package; identical inputs must
reproduce identical bytes.

Exit codes: 0 success; 2 malformed input, failed precondition or unknown
demo; 3 modulation failure; 4 invariant violation found by verify;
5 resolution or level-selection failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys

import numpy as np

from . import fileio
from .envelope import check_coercive, envelope_lp_oracle, lower_convex_envelope, tol_env_abs
from .errors import (
    CoverError,
    DomainError,
    EstimationError,
    InputError,
    LevelError,
    ModulationError,
    PreconditionError,
    RangeError,
    RankError,
    ResolutionError,
)
from .field import Ball, Box, ScalarField, gradient_all, refine_shape, sample
from .insertion import InsertionOptions, insert_c11
from .regularity import ModulusSpec, estimate_c1omega, estimate_semiconcavity
from .separation import ClosedMask, distance_field, midline_separate, separate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_MODULATION = 3
EXIT_INVARIANT = 4
EXIT_RESOLUTION = 5

_INPUT_ERRORS = (InputError, PreconditionError, DomainError, RangeError, RankError,
                 EstimationError, CoverError, json.JSONDecodeError, KeyError, OSError)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def _dumps(obj):
    return json.dumps(_jsonable(obj), sort_keys=True, indent=1) + "\n"


def _schema(name):
    path = os.path.join(os.path.dirname(__file__), "schemas", name)
    with open(path) as fh:
        return json.load(fh)


def validate_report(report, kind):
    import jsonschema

    jsonschema.validate(_jsonable(report), _schema(f"{kind}_report.schema.json"))


# -- envelope ------------------------------------------------------------------

def run_envelope(field, tol_env=None, emit_plot_data=False):
    """Compute envelope artifacts for one field; returns {filename: text}."""
    res = lower_convex_envelope(field)
    coer = check_coercive(field)
    tol = tol_env if tol_env is not None else tol_env_abs(field)

    minorant = float(np.where(field.mask, res.envelope.values - field.values, -np.inf).max())
    from .envelope import min_symmetric_second_difference

    convexity = min_symmetric_second_difference(res.envelope)
    report = {
        "kind": "envelope",
        "contact_fraction": res.contact_fraction(),
        "coercivity": coer.to_json(),
        "facet_count": len(res.facets),
        "minorant_violation": max(0.0, minorant),
        "min_second_difference": convexity,
        "tol_env": tol,
        "valid_samples": field.valid_count(),
    }
    validate_report(report, "envelope")

    env_obj = fileio.field_to_json(res.envelope)
    env_obj["contact_mask"] = res.contact_mask.ravel().astype(int).tolist()
    env_obj["facets"] = [[list(map(float, lvec)), float(c)] for lvec, c in res.facets]

    files = {
        "input.json": _dumps(fileio.field_to_json(field)),
        "envelope.json": _dumps(env_obj),
        "report.json": _dumps(report),
    }
    if emit_plot_data:
        pts = field.points()
        keep = field.mask.ravel()
        header = {1: "y,f,fstar", 2: "x,y,f,fstar"}.get(field.dim, None)
        if header:
            lines = [header]
            for p, v, e, ok in zip(pts, field.values.ravel(), res.envelope.values.ravel(), keep):
                if ok:
                    coords = ",".join(repr(float(c)) for c in p)
                    lines.append(f"{coords},{float(v)!r},{float(e)!r}")
            files["plot.csv"] = "\n".join(lines) + "\n"
        files["witnesses.csv"] = _witness_csv(field)
    return files


def _witness_csv(field, max_queries=12):
    """LP witnesses at evenly spaced valid samples."""
    pts = field.points()[field.mask.ravel()]
    step = max(1, len(pts) // max_queries)
    lines = ["query_point;support_points;weights;value"]
    for p in pts[::step][:max_queries]:
        value, combo = envelope_lp_oracle(field, p)
        q = " ".join(repr(float(c)) for c in p)
        s = " ".join(",".join(repr(float(c)) for c in sp) for sp in combo.points)
        w = " ".join(repr(float(w)) for w in combo.weights)
        lines.append(f"{q};{s};{w};{value!r}")
    return "\n".join(lines) + "\n"


# -- insert --------------------------------------------------------------------

def run_insert(f, g, tol_ins=None):
    opts = InsertionOptions()
    if tol_ins is not None:
        opts.tol_ins = tol_ins
    res = insert_c11(f, g, options=opts)
    report = {"kind": "insert", "tol_ins": opts.tol_ins}
    report.update(res.to_json())
    validate_report(report, "insert")
    return {
        "f.json": _dumps(fileio.field_to_json(f)),
        "g.json": _dumps(fileio.field_to_json(g)),
        "h.json": _dumps(fileio.field_to_json(res.h)),
        "report.json": _dumps(report),
    }


# -- distance ------------------------------------------------------------------

def run_distance(mask_obj, metric):
    domain, shape, arr = mask_obj
    cm = ClosedMask(domain, shape, arr)
    df = distance_field(cm, metric)
    grad, _ = gradient_all(df.field)
    mags = np.linalg.norm(np.nan_to_num(grad), axis=-1)
    off_source = df.field.mask & ~cm.mask
    hist, edges = np.histogram(mags[off_source], bins=10, range=(0.0, 2.0))
    report = {
        "kind": "distance",
        "metric_kind": metric,
        "source_count": cm.count(),
        "max_distance": float(df.values[df.field.mask].max()),
        "gradient_histogram": hist.tolist(),
        "gradient_bin_edges": edges.tolist(),
        "eikonal_median": float(np.median(mags[off_source])) if off_source.any() else None,
    }
    validate_report(report, "distance")
    return {
        "mask.json": _dumps(fileio.mask_to_json(domain, shape, arr)),
        "distance.json": _dumps(fileio.field_to_json(df.field)),
        "report.json": _dumps(report),
    }


# -- separate ------------------------------------------------------------------

def _segments_csv(result, dim):
    if dim == 1:
        lines = ["y"] + [repr(float(p[0])) for p in result.crossings]
    else:
        lines = ["x0,y0,x1,y1"]
        for p0, p1 in result.segments:
            lines.append(",".join(repr(float(c)) for c in (*p0, *p1)))
    return "\n".join(lines) + "\n"


def run_separate(mask_a, mask_b=None, radius=None, rho=None):
    domain, shape, arr_a = mask_a
    A = ClosedMask(domain, shape, arr_a)
    if mask_b is not None:
        B = ClosedMask(domain, shape, mask_b[2])
        res = midline_separate(A, B)
    else:
        if radius is None or rho is None:
            raise InputError("separate needs either --set-b or both --radius and --rho")
        res = separate(A, radius, rho)
    report = {"kind": "separate"}
    report.update(res.to_json())
    validate_report(report, "separate")
    files = {
        "set_a.json": _dumps(fileio.mask_to_json(domain, shape, arr_a)),
        "sigma.json": _dumps(fileio.mask_to_json(domain, shape, res.sigma.mask)),
        "boundary.csv": _segments_csv(res, A.dim),
        "h.json": _dumps(fileio.field_to_json(res.h_field)),
        "report.json": _dumps(report),
    }
    if mask_b is not None:
        files["set_b.json"] = _dumps(fileio.mask_to_json(domain, shape, mask_b[2]))
    if A.dim <= 2:
        files["sigma.pgm"] = fileio.mask_to_pgm(res.sigma.mask)
    return files


# -- demos -----------------------------------------------------------------------

def _demo_counterexample(grid, seed):
    """The square counterexample: concave but not coercive, kinked envelope."""
    base = grid or (41, 41)
    dom = Box([0.0, 0.0], [1.0, 1.0])
    lin = ModulusSpec.linear(1.0)
    rows = []
    for factor in (1, 2, 4):
        shape = refine_shape(base, factor)
        f = sample(dom, shape, lambda x, y: 1.0 - np.abs(x - y))
        res = lower_convex_envelope(f)
        coer = check_coercive(f)
        est = estimate_c1omega(res.envelope, lin)
        jump = _cross_line_jump(res.envelope)
        rows.append({
            "shape": list(shape),
            "c1omega_estimate": est.constant,
            "coercive": coer.coercive,
            "gradient_jump_norm": jump,
        })
    ratios = [rows[i + 1]["c1omega_estimate"] / rows[i]["c1omega_estimate"] for i in range(2)]
    report = {
        "kind": "demo",
        "name": "counterexample",
        "seed": seed,
        "rows": rows,
        "c1omega_growth_ratios": ratios,
        "expected_jump": float(2.0 * np.sqrt(2.0)),
        "summary": "envelope of the square counterexample stays kinked under refinement",
    }
    f = sample(dom, refine_shape(base, 2), lambda x, y: 1.0 - np.abs(x - y))
    res = lower_convex_envelope(f)
    env_obj = fileio.field_to_json(res.envelope)
    summary = [
        "demo: counterexample (non-coercive concave field on the unit square)",
        f"c1omega estimates per refinement: {[r['c1omega_estimate'] for r in rows]}",
        f"growth ratios: {ratios} (a C^1,1 envelope would stay bounded)",
        f"gradient jump across the kink line: {rows[-1]['gradient_jump_norm']:.6f}"
        f" (expected 2*sqrt(2) = {2 * np.sqrt(2):.6f})",
        f"coercivity flags: {[r['coercive'] for r in rows]}",
    ]
    return report, {"envelope.json": _dumps(env_obj)}, summary


def _cross_line_jump(env_field):
    """Gradient jump norm across {x + y = 1}, measured a few cells away."""
    xs, ys = env_field.axes()
    n0 = env_field.shape[0]
    i = int(0.25 * n0)
    x = xs[i]
    j_line = int(np.argmin(np.abs(ys - (1.0 - x))))
    step = 3
    from .field import gradient_fd

    g_lo = gradient_fd(env_field, (i, j_line - step))
    g_hi = gradient_fd(env_field, (i, j_line + step))
    return float(np.linalg.norm(g_hi - g_lo))


def _demo_eikonal(grid, seed):
    base = grid or (81, 81)
    dom = Box([-1.0, -1.0], [1.0, 1.0])
    A = ClosedMask.from_predicate(dom, base, lambda x, y: (np.hypot(x, y) < 1e-9) | (np.hypot(x - 0.5, y - 0.3) < 1e-9))
    df = distance_field(A)
    grad, _ = gradient_all(df.field)
    mags = np.linalg.norm(np.nan_to_num(grad), axis=-1)
    off = df.field.mask & (df.values > 2 * float(np.max(df.field.spacing)))
    hist, edges = np.histogram(mags[off], bins=20, range=(0.0, 2.0))
    report = {
        "kind": "demo",
        "name": "eikonal",
        "seed": seed,
        "gradient_histogram": hist.tolist(),
        "gradient_bin_edges": edges.tolist(),
        "median_gradient": float(np.median(mags[off])),
        "summary": "distance-field gradients concentrate at magnitude 1",
    }
    summary = [
        "demo: eikonal (gradient magnitude of a two-point distance field)",
        f"median gradient magnitude off the sources: {report['median_gradient']:.6f}",
        f"histogram over [0,2]: {hist.tolist()}",
    ]
    return report, {"distance.json": _dumps(fileio.field_to_json(df.field))}, summary


def _demo_holder(grid, seed, modulus=None):
    """EXPLORATORY: insertion under a Hoelder modulus (open question, no pass/fail).

    f = -|y|^(1+alpha) is semi-convex and g = +|y|^(1+alpha) semi-concave
    for the modulus t^alpha but not for any linear one; the pipeline's
    quadratic modulation has no reason to control them uniformly, so the
    report tracks how K and the measured C^{1,omega_alpha} constant of h
    behave under refinement.
    """
    mod = modulus if modulus is not None and modulus.kind == "holder" else ModulusSpec.holder(0.5)
    alpha = mod.alpha
    base = grid or (161,)
    if len(base) != 1:
        raise InputError("the holder demo is one-dimensional; pass --grid N")
    dom = Ball([0.0], 1.0)
    rows = []
    for factor in (1, 2, 4):
        shape = refine_shape(base, factor)
        g = sample(dom, shape, lambda y: np.abs(y) ** (1 + alpha))
        f = sample(dom, shape, lambda y: -np.abs(y) ** (1 + alpha))
        res = insert_c11(f, g)
        est = estimate_c1omega(res.h, mod)
        rows.append({
            "shape": list(shape),
            "K": res.K,
            "escalations": res.escalations,
            "c1omega_alpha_estimate": est.constant,
            "sandwich_violation": res.sandwich_violation,
        })
    report = {
        "kind": "demo",
        "name": "holder",
        "seed": seed,
        "exploratory": True,
        "alpha": alpha,
        "rows": rows,
        "summary": "exploratory Hoelder-modulus insertion; no pass/fail semantics",
    }
    summary = [
        f"demo: holder (EXPLORATORY, alpha={alpha}); whether a C^(1,omega) insertion",
        "exists for Hoelder moduli is open; this only reports measured constants.",
        f"K per refinement: {[r['K'] for r in rows]}",
        f"measured C^(1,t^{alpha}) constants of h: {[r['c1omega_alpha_estimate'] for r in rows]}",
    ]
    return report, {}, summary


DEMOS = {"counterexample": _demo_counterexample, "eikonal": _demo_eikonal, "holder": _demo_holder}


def run_demo(name, grid=None, seed=0, modulus=None):
    if name not in DEMOS:
        raise InputError(f"unknown demo {name!r}; available: {sorted(DEMOS)}")
    if name == "holder":
        report, extra, summary = _demo_holder(grid, seed, modulus)
    else:
        report, extra, summary = DEMOS[name](grid, seed)
    validate_report(report, "demo")
    files = dict(extra)
    files["report.json"] = _dumps(report)
    files["summary.txt"] = "\n".join(summary) + "\n"
    checksums = {name_: hashlib.sha256(text.encode()).hexdigest() for name_, text in sorted(files.items())}
    files["checksums.json"] = _dumps({"kind": "checksums", "sha256": checksums})
    return files


# -- output plumbing -------------------------------------------------------------

def write_outputs(out_dir, files, manifest_args):
    os.makedirs(out_dir, exist_ok=True)
    for name, text in sorted(files.items()):
        fileio.atomic_write_text(os.path.join(out_dir, name), text)
    manifest = {"kind": manifest_args["kind"], "args": manifest_args, "files": sorted(files)}
    fileio.atomic_write_text(os.path.join(out_dir, "manifest.json"), _dumps(manifest))


def _recompute(out_dir, manifest):
    args = manifest["args"]
    kind = args["kind"]
    if kind == "envelope":
        field = fileio.load_field(os.path.join(out_dir, "input.json"))
        return run_envelope(field, args.get("tol_env"), args.get("emit_plot_data", False))
    if kind == "insert":
        f = fileio.load_field(os.path.join(out_dir, "f.json"))
        g = fileio.load_field(os.path.join(out_dir, "g.json"))
        return run_insert(f, g, args.get("tol_ins"))
    if kind == "distance":
        mask = fileio.load_mask_json(os.path.join(out_dir, "mask.json"))
        return run_distance(mask, args.get("metric", "euclidean"))
    if kind == "separate":
        mask_a = fileio.load_mask_json(os.path.join(out_dir, "set_a.json"))
        mask_b = None
        if "set_b.json" in manifest["files"]:
            mask_b = fileio.load_mask_json(os.path.join(out_dir, "set_b.json"))
        return run_separate(mask_a, mask_b, args.get("radius"), args.get("rho"))
    if kind == "demo":
        grid = tuple(args["grid"]) if args.get("grid") else None
        modulus = ModulusSpec.from_json(args["modulus"]) if args.get("modulus") else None
        return run_demo(args["name"], grid, args.get("seed", 0), modulus)
    raise InputError(f"manifest kind {kind!r} is not verifiable")


def cmd_verify(out_dir):
    """Re-run from the copied inputs and byte-compare every artifact."""
    with open(os.path.join(out_dir, "manifest.json")) as fh:
        manifest = json.load(fh)
    fresh = _recompute(out_dir, manifest)
    failures = []
    for name in manifest["files"]:
        path = os.path.join(out_dir, name)
        if not os.path.exists(path):
            failures.append(f"{name}: missing")
            continue
        if name not in fresh:
            failures.append(f"{name}: not reproduced")
            continue
        if open(path).read() != fresh[name]:
            failures.append(f"{name}: content differs from recomputation")
    for name in manifest["files"]:
        if name == "report.json":
            with open(os.path.join(out_dir, name)) as fh:
                report = json.load(fh)
            kind = report.get("kind")
            try:
                validate_report(report, kind)
            except Exception as exc:  # jsonschema.ValidationError and friends
                failures.append(f"{name}: schema validation failed: {exc}")
    if failures:
        for f in failures:
            print(f"FAIL {f}", file=sys.stderr)
        return EXIT_INVARIANT
    print(f"verify: {len(manifest['files'])} artifacts reproduced byte-identically")
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------

def _parse_grid(text):
    try:
        return tuple(int(p) for p in text.lower().split("x"))
    except ValueError:
        raise InputError(f"cannot parse grid spec {text!r}; expected N or NxM or NxMxK")


def _parse_modulus(text):
    kind, _, val = text.partition(":")
    if kind == "linear":
        return ModulusSpec.linear(float(val or 1.0))
    if kind == "holder":
        return ModulusSpec.holder(float(val or 0.5))
    raise InputError(f"cannot parse modulus {text!r}; expected linear:k or holder:a")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="smooth-insert",
        description="Convex envelopes, C^{1,1} insertion and distance-field separation on grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out-dir", required=True)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("envelope", help="lower convex envelope of a field file")
    p.add_argument("--input", required=True)
    p.add_argument("--tol-env", type=float, default=None)
    p.add_argument("--emit-plot-data", action="store_true")
    common(p)

    p = sub.add_parser("insert", help="insert a C^{1,1} field between two field files")
    p.add_argument("--input", required=True, help="lower field f (semi-convex)")
    p.add_argument("--input-b", required=True, help="upper field g (semi-concave)")
    p.add_argument("--tol-ins", type=float, default=None)
    common(p)

    p = sub.add_parser("separate", help="separating domain from mask files")
    p.add_argument("--set-a", required=True)
    p.add_argument("--set-b", default=None)
    p.add_argument("--radius", type=float, default=None, help="tube radius a")
    p.add_argument("--rho", type=float, default=None)
    common(p)

    p = sub.add_parser("distance", help="distance field to a mask file")
    p.add_argument("--input", required=True)
    p.add_argument("--metric", choices=["euclidean", "grid-length"], default="euclidean")
    common(p)

    p = sub.add_parser("verify", help="recompute an output directory and byte-compare")
    p.add_argument("--dir", required=True)

    p = sub.add_parser("demo", help="named demo scenarios")
    p.add_argument("name")
    p.add_argument("--grid", default=None)
    p.add_argument("--modulus", default=None)
    common(p)
    return parser


def main(argv=None):
    level = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("SMOOTH_INSERT_LOG", "quiet"), logging.WARNING
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if args.command == "envelope":
            field = fileio.load_field(args.input)
            files = run_envelope(field, args.tol_env, args.emit_plot_data)
            write_outputs(args.out_dir, files, {
                "kind": "envelope", "tol_env": args.tol_env,
                "emit_plot_data": args.emit_plot_data, "seed": args.seed,
            })
        elif args.command == "insert":
            f = fileio.load_field(args.input)
            g = fileio.load_field(args.input_b)
            files = run_insert(f, g, args.tol_ins)
            write_outputs(args.out_dir, files, {
                "kind": "insert", "tol_ins": args.tol_ins, "seed": args.seed,
            })
        elif args.command == "separate":
            mask_a = fileio.load_mask_json(args.set_a)
            mask_b = fileio.load_mask_json(args.set_b) if args.set_b else None
            files = run_separate(mask_a, mask_b, args.radius, args.rho)
            write_outputs(args.out_dir, files, {
                "kind": "separate", "radius": args.radius, "rho": args.rho, "seed": args.seed,
            })
        elif args.command == "distance":
            mask = fileio.load_mask_json(args.input)
            files = run_distance(mask, args.metric)
            write_outputs(args.out_dir, files, {
                "kind": "distance", "metric": args.metric, "seed": args.seed,
            })
        elif args.command == "verify":
            return cmd_verify(args.dir)
        elif args.command == "demo":
            grid = _parse_grid(args.grid) if args.grid else None
            modulus = _parse_modulus(args.modulus) if args.modulus else None
            files = run_demo(args.name, grid, args.seed, modulus)
            write_outputs(args.out_dir, files, {
                "kind": "demo", "name": args.name,
                "grid": list(grid) if grid else None,
                "modulus": modulus.to_json() if modulus else None,
                "seed": args.seed,
            })
        else:  # pragma: no cover
            parser.error(f"unknown command {args.command}")
    except ModulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODULATION
    except (ResolutionError, LevelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
