"""Command-line front end.

Every subcommand reads JSON (or plain coordinates), writes JSON or CSV to
stdout or ``--out``, and exits with

    0  pass / VALID / HOLDS (INCONCLUSIVE pencils also exit 0)
    1  refutation / INVALID / VIOLATION / EXTERIOR point
    2  input error (malformed JSON, bad shapes, unmet preconditions)
    3  numerical failure (non-convergence, uncertified triangularization)
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import interplay, op_theory, variety, vn_check
from .errors import (BoundaryRegimeError, CommutationError, ConvergenceError, GammaLabError,
                     HypothesesNotMet, IsometryDefectError, JointSpectrumError, NotPSDError)
from .gamma_geom import GammaPoint, Label, classify_point, desymmetrize, symmetrize
from .joint_spectrum import MatrixTuple, joint_eigs

EXIT_OK, EXIT_REFUTED, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class InputError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps(obj):
    return json.dumps(_jsonable(obj), sort_keys=True, indent=1) + "\n"


def _emit(args, text):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: "
                         f"{exc.msg}") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _complex(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise InputError(f"not a complex number: {text!r}") from exc


def _grid(args):
    try:
        r, a = (int(v) for v in args.grid.split(","))
        return variety.GridSpec(r, a, include_boundary=not args.no_boundary)
    except ValueError as exc:
        raise InputError(f"--grid expects R,A with positive integers, got {args.grid!r}") from exc


def _point(args):
    if args.json:
        return GammaPoint.from_json(_load_json(args.json))
    if len(args.coords) < 2:
        raise InputError("need at least two coordinates (s_1, ..., s_{n-1}, p)")
    return GammaPoint.from_coords([_complex(c) for c in args.coords])


def emit_plot_data(sample, path=None):
    """Wide CSV of sampled fibers for external plotting.

    Columns are ``re_p, im_p, branch, re_s1, im_s1, ..., class`` in grid
    order, then branch order.
    """
    rows = [(rec, b) for rec in sample.records for b in range(len(rec.fiber))]
    if not rows:
        raise ValueError("sample is empty; nothing to plot")
    m = sample.pencil.n - 1
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["re_p", "im_p", "branch"]
    for i in range(m):
        header += [f"re_s{i + 1}", f"im_s{i + 1}"]
    w.writerow(header + ["class"])
    for rec, b in rows:
        row = [repr(rec.p.real), repr(rec.p.imag), b]
        for v in rec.fiber[b]:
            row += [repr(float(v.real)), repr(float(v.imag))]
        w.writerow(row + [rec.classes[b].label.value])
    text = buf.getvalue()
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _polydisc_csv(sample):
    n = sample.pencil.n
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["re_p", "im_p", "branch"]
    header += [c for i in range(n - 1) for c in (f"re_s{i + 1}", f"im_s{i + 1}")]
    header += ["class", "det_residual"]
    header += [c for i in range(n) for c in (f"re_z{i + 1}", f"im_z{i + 1}")]
    w.writerow(header + ["max_modulus", "roundtrip_residual"])
    for rec in sample.records:
        for b, (s, cls, det) in enumerate(zip(rec.fiber, rec.classes, rec.det_residuals)):
            pd = variety.polydisc_points(GammaPoint(n, tuple(s), rec.p), cls.label)
            row = [repr(rec.p.real), repr(rec.p.imag), b]
            row += [repr(float(x)) for v in s for x in (v.real, v.imag)]
            row += [cls.label.value, repr(float(det))]
            row += [repr(float(x)) for v in pd.z for x in (v.real, v.imag)]
            w.writerow(row + [repr(pd.max_modulus), repr(pd.residual)])
    return buf.getvalue()


def verify_sample(obj):
    """Recompute determinant residuals of an exported sample; returns (ok, worst ratio)."""
    pf = variety.PencilFamily.from_json(obj["pencil"])
    tol = pf.det_tolerance()
    worst = 0.0
    for rec in obj["records"]:
        p = complex(*rec["p"])
        pts = [[complex(*v) for v in s] for s in rec["fiber"]]
        arr = np.array(pts) if pts else np.zeros((0, pf.n - 1))
        limit = tol * (variety.COLLISION_RELAX
                       if variety._has_collision(arr, 1.0 + np.abs(arr).max(initial=0.0))
                       else 1.0)
        for s in pts:
            worst = max(worst, float(np.max(np.abs(pf.f_values(s, p)))) / limit)
    return worst <= 1.0, worst


# subcommands ---------------------------------------------------------------

def cmd_point(args):
    x = _point(args)
    pc = classify_point(x, args.tol)
    print(pc.label.value)
    _emit_extra(args, {"point": x.to_json(), "label": pc.label, "margin": pc.margin,
                       "conditioning": pc.conditioning})
    return EXIT_REFUTED if pc.label == Label.EXTERIOR else EXIT_OK


def _emit_extra(args, obj):
    if args.out:
        _emit(args, dumps(obj))


def cmd_sym(args):
    z = [_complex(c) for c in args.coords]
    if len(z) < 2:
        raise InputError("need at least two coordinates")
    _emit(args, dumps(symmetrize(z).to_json()))
    return EXIT_OK


def cmd_desym(args):
    x = _point(args)
    _emit(args, dumps({"roots": desymmetrize(x)}))
    return EXIT_OK


def cmd_jspec(args):
    t = MatrixTuple.from_json(_load_json(args.input))
    try:
        js = joint_eigs(t, seed=args.seed)
    except CommutationError as exc:
        raise InputError(str(exc)) from exc
    _emit(args, dumps({"points": js.points, "residuals": js.residuals, "method": js.method}))
    return EXIT_OK


def _pencil(path):
    return variety.PencilFamily.from_json(_load_json(path))


def cmd_pencil_check(args):
    rep = variety.validate_pencil(_pencil(args.input), _grid(args), args.tol, args.seed)
    print(rep.verdict.value)
    if rep.witness:
        print(f"witness z={rep.witness['z']} point={rep.witness['point']}")
    _emit_extra(args, rep.to_json())
    return EXIT_REFUTED if rep.verdict == variety.Verdict.INVALID else EXIT_OK


def cmd_pencil_sample(args):
    if args.verify:
        ok, worst = verify_sample(_load_json(args.verify))
        print(f"{'PASS' if ok else 'FAIL'} worst residual/tolerance {worst:.3e}")
        return EXIT_OK if ok else EXIT_REFUTED
    if not args.input:
        raise InputError("pencil-sample needs a pencil file (or --verify)")
    sample = variety.sample_variety(_pencil(args.input), _grid(args), args.seed, args.tol,
                                    override=args.override_hypotheses)
    if args.plot_data:
        emit_plot_data(sample, args.plot_data)
    if args.format == "csv":
        _emit(args, _polydisc_csv(sample) if args.polydisc else sample.to_csv())
    else:
        obj = sample.to_json()
        if args.polydisc:
            for rec, out in zip(sample.records, obj["records"]):
                pts = [variety.polydisc_points(GammaPoint(sample.pencil.n, tuple(s), rec.p),
                                               c.label)
                       for s, c in zip(rec.fiber, rec.classes)]
                out["polydisc"] = [[[float(v.real), float(v.imag)] for v in q.z] for q in pts]
                out["max_modulus"] = [q.max_modulus for q in pts]
        _emit(args, dumps(obj))
    return EXIT_OK


def _tuple(path):
    return op_theory.OperatorTuple.from_json(_load_json(path))


def cmd_fo(args):
    fo = op_theory.fo_tuple(_tuple(args.input))
    _emit(args, dumps({"A": fo.A, "residuals": fo.residuals, "rank": fo.rank,
                       "omega_report": fo.omega_report}))
    ok = all(o["max"] <= o["bound"] + 1e-6 for o in fo.omega_report)
    return EXIT_OK if ok else EXIT_REFUTED


def cmd_classify(args):
    res = op_theory.classify_tuple(_tuple(args.input), trials=args.trials,
                                   max_degree=args.degree, seed=args.seed)
    print(res.label.value)
    _emit_extra(args, {"label": res.label, "witness": res.witness})
    return EXIT_REFUTED if res.label == op_theory.TupleLabel.REFUTED else EXIT_OK


def cmd_model(args):
    m = op_theory.build_model(_pencil(args.input), args.K)
    check = op_theory.isometry_relations_check(m)
    _emit(args, dumps({"n": m.n, "d": m.d, "K": m.K, "T": m.T, "V": m.V,
                       "isometry_relations": check}))
    return EXIT_OK


def cmd_compress(args):
    m = op_theory.build_model(_pencil(args.input), args.K)
    t = op_theory.compress_model(m, args.k_prime)
    _emit(args, dumps(t.to_json()))
    return EXIT_OK


def cmd_vn(args):
    t = _tuple(args.input)
    pf = _pencil(args.pencil) if args.pencil else None
    rep = vn_check.vn_experiment(t, pf, trials=args.trials, max_degree=args.degree,
                                 block_order=args.block, grid=_grid(args), tol=args.tol_vn,
                                 seed=args.seed, override=args.override_hypotheses)
    print(("EXPLORATORY " if rep.exploratory else "")
          + ("HOLDS" if rep.holds else "VIOLATION") + f" min margin {rep.min_margin:.3e}")
    _emit(args, rep.to_csv() if args.format == "csv" else dumps(rep.to_json()))
    return EXIT_OK if rep.holds else EXIT_REFUTED


def cmd_push32(args):
    res = interplay.pushforward_variety(_pencil(args.input), _grid(args), args.seed,
                                        override=args.override_hypotheses)
    _emit(args, dumps({"A": res.A, "omega": res.omega, "omega_below_one": res.omega < 1.0,
                       "verdict": res.validity.verdict, "max_image_mismatch":
                       res.max_image_mismatch, "images_checked": res.images_checked}))
    ok = res.omega < 1.0 and res.validity.verdict != variety.Verdict.INVALID
    return EXIT_OK if ok else EXIT_REFUTED


def cmd_counterexample(args):
    _emit(args, dumps(interplay.counterexample_demo()))
    return EXIT_OK


def cmd_separate(args):
    pf = _pencil(args.input)
    x = _point(args)
    res = variety.separating_poly(pf, x, args.tol_sep)
    if res.on_variety:
        print("on-variety")
    else:
        print(f"index {res.index} value {res.value}")
    _emit_extra(args, {"on_variety": res.on_variety, "index": res.index, "value": res.value})
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="classification tolerance")
    common.add_argument("--grid", default="24,64", help="radii,angles of the p-grid")
    common.add_argument("--no-boundary", action="store_true",
                        help="leave the unit circle out of the grid")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--degree", type=int, default=3)
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--override-hypotheses", action="store_true",
                        help="run anyway when preconditions fail; output is exploratory")

    ap = argparse.ArgumentParser(prog="gammalab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, helptext):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.set_defaults(func=fn)
        return p

    for name, fn, h in [("point", cmd_point, "classify a point"),
                        ("desym", cmd_desym, "roots of the symmetrized point")]:
        p = add(name, fn, h)
        p.add_argument("coords", nargs="*", help="s_1 ... s_{n-1} p (e.g. 1+2j)")
        p.add_argument("--json", help="point JSON file instead of coordinates")
    p = add("sym", cmd_sym, "symmetrize a point of C^n")
    p.add_argument("coords", nargs="+")
    add("jspec", cmd_jspec, "joint spectrum of a commuting tuple").add_argument("input")
    add("pencil-check", cmd_pencil_check, "validate a pencil family").add_argument("input")
    p = add("pencil-sample", cmd_pencil_sample, "sample a distinguished variety")
    p.add_argument("input", nargs="?")
    p.add_argument("--polydisc", action="store_true", help="add polydisc preimages")
    p.add_argument("--verify", help="re-check det residuals of an exported JSON sample")
    p.add_argument("--plot-data", help="also write plotting CSV here")
    add("fo", cmd_fo, "fundamental operator tuple").add_argument("input")
    add("classify", cmd_classify, "classify an operator tuple").add_argument("input")
    for name, fn, h in [("model", cmd_model, "truncated Toeplitz model"),
                        ("compress", cmd_compress, "compression of the model")]:
        p = add(name, fn, h)
        p.add_argument("input")
        p.add_argument("--K", type=int, default=8)
        if name == "compress":
            p.add_argument("--k-prime", type=int, default=4)
    p = add("vn", cmd_vn, "von Neumann inequality experiment")
    p.add_argument("input")
    p.add_argument("--pencil", help="pencil family JSON; default uses the tuple's own data")
    p.add_argument("--block", type=int, default=1, help="coefficient block order")
    p.add_argument("--tol-vn", type=float, default=1e-6)
    add("push32", cmd_push32, "push a three-variable variety to two").add_argument("input")
    add("counterexample", cmd_counterexample, "the converse-failure witness")
    p = add("separate", cmd_separate, "separating defining polynomial")
    p.add_argument("input")
    p.add_argument("coords", nargs="*")
    p.add_argument("--json", help="point JSON file instead of coordinates")
    p.add_argument("--tol-sep", type=float, default=1e-8)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError, KeyError, TypeError, HypothesesNotMet,
            CommutationError, BoundaryRegimeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, JointSpectrumError, NotPSDError, IsometryDefectError,
            GammaLabError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
