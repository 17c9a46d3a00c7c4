"""Command-line entry point: ``grassgeo {verify,geodesic,convexity,replay}``.

Exit codes: 0 pass, 1 verification failure, 2 domain rejection
(NotGeneric, NotConvex), 3 infeasible or inconclusive, 64 usage error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import geodesics, hyperconvex, verify
from .errors import GeometryError, InfeasibleGram, NotGeneric
from .exterior import max_dense_n
from .geometry import DEFAULT_STEP
from .serialize import ParseError, decode_gram, decode_point, decode_space, decode_tangent, dumps, encode, load_json

EXIT_OK, EXIT_FAIL, EXIT_REJECT, EXIT_INFEASIBLE, EXIT_USAGE = 0, 1, 2, 3, 64

GEODESIC_TOL = {"geodesic_nabla": 1e-6, "geodesic_speed": 1e-8, "lift_norm": 1e-9,
                "lift_orthogonality": 1e-9, "lift_acceleration": 1e-8, "spine_orthogonality": 1e-9}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _tol_arg(text):
    if "=" in text:
        name, _, value = text.partition("=")
        name = name.strip()
    else:
        name, value = "*", text
    try:
        v = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid tolerance {text!r}") from None
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"tolerance must be nonnegative, got {text!r}")
    return name, v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _seed(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="master seed (default 0)")
    common.add_argument("--tol", type=_tol_arg, action="append", default=[], metavar="[NAME=]VALUE",
                        help="tolerance override; a bare value applies to every check")
    common.add_argument("--json-out", type=Path, metavar="PATH", help="write the JSON report here")
    common.add_argument("--quiet", action="store_true", help="suppress the human-readable summary")

    parser = _Parser(prog="grassgeo", description="Numerical geometry of nondegenerate grassmannians.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", parents=[common], help="run seeded verification suites")
    v.add_argument("--suite", default="all", choices=verify.SUITES + ("all",))
    v.add_argument("--trials", type=int, default=10)
    v.add_argument("--field", default="both", choices=verify.FIELDS)
    v.add_argument("--n-min", type=int, default=2)
    v.add_argument("--n-max", type=int, default=6)
    v.add_argument("--k-max", type=int, default=3)
    v.add_argument("--samples", type=_positive_int, default=hyperconvex.DEFAULT_SAMPLES,
                   help="Monte Carlo samples per face pair in the brackets suite")
    v.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")
    v.add_argument("--keep-instances", action="store_true", help="embed every instance, not only failures")

    g = sub.add_parser("geodesic", parents=[common], help="closed-form geodesic through a point")
    g.add_argument("point", type=Path, help="JSON with field, J and p (and optionally tau)")
    g.add_argument("--space", type=Path, help="JSON with field and J when the point file has only a matrix")
    g.add_argument("tangent", type=Path, nargs="?", help="JSON with tau (defaults to the point file)")
    g.add_argument("--smax", type=float, default=1.0, help="sample s in [-smax, smax]")
    g.add_argument("--samples", type=_positive_int, default=33)
    g.add_argument("--step", type=float, default=DEFAULT_STEP, help="finite-difference step")

    c = sub.add_parser("convexity", parents=[common], help="convexity criterion for a Gram matrix")
    c.add_argument("gram", type=Path, help='JSON {"gram": [[...]]}')
    c.add_argument("--oracle", action="store_true", help="cross-check with the Monte Carlo oracle")
    c.add_argument("--samples", type=_positive_int, default=hyperconvex.DEFAULT_SAMPLES)
    c.add_argument("--report", type=Path, metavar="PATH", help="alias of --json-out")

    r = sub.add_parser("replay", parents=[common], help="re-run stored records")
    r.add_argument("record", type=Path, help="a record or a full verify report")
    return parser


def _emit(report, args, lines):
    text = dumps(report)
    out = args.json_out or getattr(args, "report", None)
    if out is not None:
        out.write_text(text)
    if not args.quiet:
        print("\n".join(lines))
    return text


def _tol_dict(args):
    return dict(args.tol)


# -- verify ------------------------------------------------------------------


def cmd_verify(args, argv):
    cfg = verify.SuiteConfig(seed=args.seed, trials=args.trials, tol=_tol_dict(args), field=args.field,
                             n_min=args.n_min, n_max=args.n_max, k_max=args.k_max, samples=args.samples,
                             jobs=args.jobs, keep_instances=args.keep_instances)
    try:
        cfg.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = verify.run_suite(args.suite, cfg, command=argv)
    worst = {}
    for rec in report["records"]:
        key = rec["name"]
        entry = worst.setdefault(key, [0.0, rec["tolerance"], 0, 0, rec["anchor"]])
        if rec["residual"] is not None:
            entry[0] = max(entry[0], rec["residual"])
        entry[2] += 1
        entry[3] += not rec["pass"]
    lines = [f"{'check':26s} {'max residual':>12s} {'tol':>8s}  fail/total  property"]
    for key, (res, tol, total, bad, anchor) in worst.items():
        tol_s = "-" if tol is None else f"{tol:.0e}"
        lines.append(f"{key:26s} {res:12.3e} {tol_s:>8s}  {bad:4d}/{total:<5d}  {anchor}")
    s = report["summary"]
    lines.append(f"{'PASS' if report['pass'] else 'FAIL'}: {s['records'] - s['failed']}/{s['records']} records "
                 f"in {report['timing']['seconds']} s")
    _emit(report, args, lines)
    return EXIT_OK if report["pass"] else EXIT_FAIL


# -- geodesic ----------------------------------------------------------------


def cmd_geodesic(args, argv):
    doc = load_json(args.point)
    space = decode_space(load_json(args.space), str(args.space)) if args.space is not None else None
    point = decode_point(doc, str(args.point), space)
    if point.n > max_dense_n():
        raise UsageError(f"n = {point.n} exceeds GRASSGEO_MAX_N = {max_dense_n()}")
    tdoc, where = (doc, str(args.point)) if args.tangent is None else (load_json(args.tangent), str(args.tangent))
    t = decode_tangent(tdoc, point, where)
    if not (np.isfinite(args.smax) and args.smax >= 0):
        raise UsageError("--smax must be a nonnegative number")
    tol = dict(GEODESIC_TOL)
    for name, value in args.tol:
        if name == "*":
            tol = dict.fromkeys(tol, value)
        elif name in tol:
            tol[name] = value
        else:
            raise UsageError(f"unknown tolerance name {name!r}; choose from {', '.join(tol)}")
    curve = geodesics.geodesic(t)
    s_values = np.linspace(-args.smax, args.smax, args.samples) if args.samples > 1 else np.array([0.0])
    r = geodesics.geodesic_verify(curve, s_values, args.step)
    residuals = {"geodesic_nabla": r.nabla_residual, "geodesic_speed": r.speed_residual,
                 "lift_norm": r.lift_norm_residual, "lift_orthogonality": r.lift_orthogonality_residual,
                 "lift_acceleration": r.acceleration_residual,
                 "spine_orthogonality": r.spine_orthogonality_residual}
    records = [{"name": k, "anchor": verify.METRICS[k][0], "residual": v, "tolerance": tol[k], "pass": v <= tol[k]}
               for k, v in residuals.items()]
    spines = []
    for sp in curve.spines:
        entry = {"lambda": sp.lam, "class": sp.kind.value, "speed": sp.speed, "sign": sp.sign,
                 "p": encode(sp.p), "v": encode(sp.v)}
        if sp.kind is geodesics.SpineClass.EUCLIDEAN:
            entry["lift"] = "p + s v"
            entry["note"] = "speed along a euclidean spine is not an intrinsic length"
        spines.append(entry)
    ok = all(rec["pass"] for rec in records)
    report = {"command": argv, "spines": spines, "records": records, "worst_s": r.worst_s,
              "samples": [{"s": float(s), "p": encode(curve.lift(s))} for s in s_values], "pass": ok}
    lines = [f"{'lambda':>12s}  {'class':10s} {'speed':>10s}"]
    lines += [f"{sp['lambda']:12.5g}  {sp['class']:10s} {sp['speed']:10.5g}" for sp in spines]
    lines += [f"{rec['name']:20s} {rec['residual']:.3e} (tol {rec['tolerance']:.0e})" for rec in records]
    lines.append("PASS" if ok else f"FAIL (worst s = {r.worst_s})")
    _emit(report, args, lines)
    return EXIT_OK if ok else EXIT_FAIL


# -- convexity ---------------------------------------------------------------


def cmd_convexity(args, argv):
    doc = load_json(args.gram)
    U = decode_gram(doc, str(args.gram))
    if len(U) < 3:
        raise ParseError(f"{args.gram}: need at least 3 faces, got {len(U)}")
    tol = hyperconvex.DEFAULT_TOL
    for name, value in args.tol:
        if name not in ("*", "band"):
            raise UsageError(f"unknown tolerance name {name!r}; the convexity command takes a bare value")
        tol = value
    report = hyperconvex.convexity_check(U, tol)
    code = {hyperconvex.Verdict.CONVEX: EXIT_OK, hyperconvex.Verdict.NOT_CONVEX: EXIT_REJECT,
            hyperconvex.Verdict.INFEASIBLE: EXIT_INFEASIBLE}[report.verdict]
    lines = []
    if args.oracle:
        try:
            P = hyperconvex.realize_gram(U)
        except InfeasibleGram as exc:
            report.verdict = hyperconvex.Verdict.INFEASIBLE
            report.oracle = {"error": str(exc)}
            code = EXIT_INFEASIBLE
        else:
            oracle = hyperconvex.oracle_report(P, args.samples, args.seed)
            agree = disagree = inconclusive = 0
            for key, res in oracle.items():
                i, j = map(int, key.split(","))
                rec = hyperconvex.nonadjacent_condition(U, i, j, tol)
                res["criterion"] = rec.status.value
                if res["verdict"] == "Inconclusive":
                    inconclusive += 1
                elif rec.passed == (res["verdict"] == "ProbablyDisjoint"):
                    agree += 1
                else:
                    disagree += 1
            report.oracle = {"samples": args.samples, "seed": args.seed, "agree": agree, "disagree": disagree,
                             "inconclusive": inconclusive, "pairs": oracle}
            lines.append(f"oracle: {agree} agree, {disagree} disagree, {inconclusive} inconclusive")
            if disagree:
                code = EXIT_FAIL
            elif inconclusive and code == EXIT_OK:
                code = EXIT_INFEASIBLE
    out = report.to_dict()
    out = {"command": argv, "tol": tol, **out}
    lines = [f"verdict: {report.verdict.value}"] + [
        f"  {w.condition} at {tuple(w.indices)}: {w.status.value} ({w.reason})" for w in report.witnesses
    ] + lines
    _emit(out, args, lines)
    return code


# -- replay ------------------------------------------------------------------


def cmd_replay(args, argv):
    doc = load_json(args.record)
    records = doc.get("records") if isinstance(doc, dict) and "records" in doc else [doc]
    if not isinstance(records, list):
        raise ParseError(f"{args.record}: field 'records' must be a list")
    runnable = [r for r in records if isinstance(r, dict) and "instance" in r]
    if not runnable:
        raise ParseError(f"{args.record}: no record with an embedded instance")
    results = []
    for rec in runnable:
        try:
            results.append(verify.replay_record(rec))
        except (KeyError, ValueError) as exc:
            raise ParseError(f"{args.record}: cannot replay record: {exc}") from None
    ok = all(r["reproduced"] for r in results)
    lines = [f"{r['name']:26s} trial {r['trial']}: residual {r['residual']:.6e} "
             f"{'reproduced' if r['reproduced'] else 'DIFFERS'}" for r in results]
    _emit({"command": argv, "results": results, "pass": ok}, args, lines)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"verify": cmd_verify, "geodesic": cmd_geodesic, "convexity": cmd_convexity, "replay": cmd_replay}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, argv)
    except UsageError as exc:
        print(f"grassgeo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"grassgeo: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotGeneric as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_REJECT
    except InfeasibleGram as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except GeometryError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REJECT
    except ValueError as exc:
        print(f"grassgeo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
