"""Command-line surface: parse crystal spec files, run analyses, and emit
deterministic JSON or text reports.

Exit codes: 0 success; 1 bad input (parse errors, bad flags or parameters);
2 precision problems (exhausted or singular at precision); 3 failed
verification checks.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import families
from .crystal import (
    FCrystal,
    crystal_new,
    default_horizon,
    required_precision,
)
from .dvr_linalg import WMatrix, elementary_divisor_valuations
from .errors import (
    BadFlags,
    BadParameters,
    CheckFailed,
    FCrystalError,
    ParseError,
    PrecisionExhausted,
    SingularAtPrecision,
)
from .level_torsion import (
    isomorphism_number,
    pdiv_bound,
    quasi_special_bound,
    theorem12_bound,
)
from .verify import require_all_pass, run_suite
from .witt import context_create

_BOOTSTRAP_N = 16
_MAX_RETRIES = 8

FAMILY_KINDS = ("permutational", "cyclic", "k3-isoclinic",
                "k3-nonisoclinic", "rank2", "supersingular")


def _frac_str(x):
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 \
        else str(x.numerator)


def _parse_int(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ParseError(f"{what} must be an integer, got {value!r}")
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"{what} is not an integer: {value!r}") from None


def load_spec(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ParseError("spec file must be a JSON object")
    for key in ("p", "m", "rank"):
        if key not in data:
            raise ParseError(f"spec file is missing {key!r}")
    if ("matrix" in data) == ("family" in data):
        raise ParseError("spec file needs exactly one of matrix / family")
    return data


def _entry_coeffs(entry, m, what):
    if isinstance(entry, list):
        if len(entry) > m:
            raise ParseError(f"{what} has more than m={m} coefficients")
        return [_parse_int(c, what) for c in entry]
    return [_parse_int(entry, what)]


def build_crystal(spec, ctx) -> FCrystal:
    rank = _parse_int(spec["rank"], "rank")
    summands = spec.get("summands")
    if summands is not None:
        summands = [_parse_int(s, "summand size") for s in summands]
        if sum(summands) != rank:
            raise ParseError("summand sizes must add up to the rank")
    if "matrix" in spec:
        matrix = spec["matrix"]
        if len(matrix) != rank or any(len(row) != rank for row in matrix):
            raise ParseError(f"matrix must be {rank}x{rank}")
        rows = [[_entry_coeffs(e, ctx.m, f"matrix[{i}][{j}]")
                 for j, e in enumerate(row)]
                for i, row in enumerate(matrix)]
        return crystal_new(ctx, WMatrix.from_rows(ctx, rows),
                           summands=summands)
    crystal = build_family(spec["family"], ctx)
    if crystal.r != rank:
        raise ParseError(
            f"family produces rank {crystal.r}, spec declares {rank}")
    return crystal


def build_family(fam, ctx) -> FCrystal:
    if not isinstance(fam, dict) or "kind" not in fam:
        raise ParseError("family must be an object with a kind")
    kind = fam["kind"]
    params = fam.get("params", {})
    seed = _parse_int(fam.get("seed", 0), "seed")
    if kind in ("permutational", "cyclic"):
        e = tuple(_parse_int(x, "e") for x in params.get("e", ()))
        if not e:
            raise ParseError("permutational family needs an e vector")
        if kind == "cyclic":
            pi = families.full_cycle(len(e))
        else:
            pi = tuple(_parse_int(x, "pi") for x in params.get("pi", ()))
            if not pi:
                raise ParseError("permutational family needs pi")
        return families.make_permutational(ctx, families.PermSpec(pi, e))
    if kind == "k3-isoclinic":
        return families.make_k3_isoclinic(
            ctx, _parse_int(params.get("r"), "r"))
    if kind == "k3-nonisoclinic":
        return families.make_k3_nonisoclinic(
            ctx, _parse_int(params.get("r1"), "r1"),
            _parse_int(params.get("mid", 0), "mid"),
            _parse_int(params.get("r2"), "r2"))
    if kind == "rank2":
        return families.make_rank2(
            ctx, _parse_int(params.get("l1"), "l1"),
            _parse_int(params.get("l2"), "l2"), seed)
    if kind == "supersingular":
        return families.make_supersingular_like(
            ctx, _parse_int(params.get("d"), "d"),
            _parse_int(params.get("e"), "e"))
    raise ParseError(f"unknown family kind {kind!r}; "
                     f"choose from {', '.join(FAMILY_KINDS)}")


def resolve_crystal(spec, q_max=None, precision=None):
    """Build the crystal at a precision sufficient for the analysis,
    growing the context until the requirement stabilizes."""
    p = _parse_int(spec["p"], "p")
    m = _parse_int(spec["m"], "m")
    spec_precision = spec.get("precision")
    if spec_precision is not None:
        spec_precision = _parse_int(spec_precision, "precision")
    if precision is None:
        precision = spec_precision
    n = precision if precision is not None else _BOOTSTRAP_N
    for _ in range(_MAX_RETRIES):
        ctx = context_create(p, m, n)
        try:
            crystal = build_crystal(spec, ctx)
            hodge = crystal.hodge_slopes()
            e_max = max(hodge[-1], 1)
            horizon = q_max if q_max is not None \
                else default_horizon(crystal.r, hodge[-1])
            needed = required_precision(max(horizon, m * crystal.r), e_max)
            if n >= needed:
                return crystal, horizon, n
            if precision is not None:
                raise PrecisionExhausted(
                    f"requested precision {precision} is below the required "
                    f"{needed} for this analysis", needed=needed)
        except PrecisionExhausted as exc:
            if precision is not None:
                raise
            needed = exc.needed if exc.needed else 2 * n
            n = max(needed, n + 1)
            continue
        n = needed
    raise PrecisionExhausted(
        f"precision requirement did not stabilize after {_MAX_RETRIES} "
        "attempts", needed=n)


# ---------------------------------------------------------------------------
# report rendering

def _poly_points(verts):
    return [[x, _frac_str(y)] for x, y in verts]


def build_report(spec, crystal, report, n, q_max):
    sd = report.slope_data
    out = {
        "schema": 1,
        "input": {
            "p": crystal.ctx.p,
            "m": crystal.ctx.m,
            "rank": crystal.r,
            "precision": n,
            "modulus": list(crystal.ctx.modulus),
            "q_max": q_max,
            "summands": list(crystal.summands) if crystal.summands else None,
            "family": spec.get("family"),
        },
        "slopes": {
            "hodge": list(sd.hodge),
            "hodge_numbers": {str(k): v
                              for k, v in sorted(sd.hodge_numbers.items())},
            "newton": [_frac_str(s) for s in sd.newton],
            "isoclinic": sd.isoclinic,
            "lambda": _frac_str(sd.lam) if sd.lam is not None else None,
            "ordinary": sd.ordinary,
            "hodge_polygon": _poly_points(sd.hodge_polygon()),
            "newton_polygon": _poly_points(sd.newton_polygon()),
        },
        "bounds": dict(sorted(report.bounds.items())),
        "n": {"status": report.n_status, "value": report.n_value},
    }
    if report.ell is not None:
        cert = report.ell.certificate
        out["level_torsion"] = {
            "lower": report.ell.lower,
            "upper": report.ell.upper,
            "exact": report.ell.exact,
            "certificate": {"kind": cert.kind, "param": cert.param},
            "trace": [{"q": t.q, "alpha": t.alpha, "beta": t.beta,
                       "delta": t.delta} for t in report.ell.trace],
        }
    else:
        out["level_torsion"] = None
    return out


def render_json(data):
    return json.dumps(data, sort_keys=True, indent=2)


def render_table(data):
    lines = []
    inp = data["input"]
    lines.append(f"input: p={inp['p']} m={inp['m']} rank={inp['rank']} "
                 f"precision={inp['precision']} q_max={inp['q_max']}")
    if inp["summands"]:
        lines.append(f"summands: {inp['summands']}")
    sl = data["slopes"]
    lines.append(f"hodge slopes:  {sl['hodge']}")
    lines.append(f"newton slopes: [{', '.join(sl['newton'])}]")
    lines.append(f"isoclinic: {sl['isoclinic']}"
                 + (f"  lambda: {sl['lambda']}" if sl["lambda"] else "")
                 + f"  ordinary: {sl['ordinary']}")
    lines.append("hodge polygon:  "
                 + " ".join(f"({x},{y})" for x, y in sl["hodge_polygon"]))
    lines.append("newton polygon: "
                 + " ".join(f"({x},{y})" for x, y in sl["newton_polygon"]))
    lt = data["level_torsion"]
    if lt is not None:
        cert = lt["certificate"]
        cname = cert["kind"] + (f"({cert['param']})"
                                if cert["param"] is not None else "")
        if lt["exact"]:
            lines.append(f"level torsion: {lt['lower']}  [{cname}]")
        else:
            lines.append(f"level torsion: in [{lt['lower']}, {lt['upper']}]"
                         f"  [{cname}]")
        if lt["trace"]:
            lines.append("  q   alpha  beta  delta")
            for t in lt["trace"]:
                lines.append(f"  {t['q']:<3} {t['alpha']:<6} {t['beta']:<5} "
                             f"{t['delta']}")
    for name, value in data["bounds"].items():
        lines.append(f"bound {name}: {value}")
    nsec = data["n"]
    lines.append(f"n: {nsec['value']}  ({nsec['status']})")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# subcommands

def cmd_analyze(args):
    spec = load_spec(args.spec)
    crystal, horizon, n = resolve_crystal(spec, q_max=args.q_max,
                                          precision=args.precision)
    report = isomorphism_number(crystal, q_max=horizon)
    data = build_report(spec, crystal, report, n, horizon)
    if args.format == "json":
        print(render_json(data))
    else:
        print(render_table(data))
    return 0


def cmd_bound(args):
    rows = []
    if args.hodge is not None:
        try:
            hodge = tuple(int(x) for x in args.hodge.split(","))
        except ValueError:
            raise BadFlags(f"--hodge must be comma-separated integers, "
                           f"got {args.hodge!r}") from None
        if list(hodge) != sorted(hodge):
            raise BadFlags("--hodge must be sorted nondecreasing")
        from .crystal import SlopeData
        if args.lam is not None:
            try:
                lam = Fraction(args.lam)
            except (ValueError, ZeroDivisionError):
                raise BadFlags(f"--lambda is not a rational: {args.lam!r}") \
                    from None
            if not hodge[0] <= lam <= hodge[-1]:
                raise BadFlags("--lambda must lie between the extreme "
                               "Hodge slopes")
            sd = SlopeData.from_parts(hodge, [lam] * len(hodge))
            rows.append(("theorem12", theorem12_bound(sd)))
        else:
            sd = SlopeData.from_parts(
                hodge, [Fraction(sum(hodge), len(hodge))] * len(hodge))
        rows.append(("quasi_special", quasi_special_bound(sd)))
        if set(hodge) == {0, 1}:
            c = sum(1 for x in hodge if x == 0)
            d = sum(1 for x in hodge if x == 1)
            rows.append(("pdiv", pdiv_bound(c, d)))
        rows.append(("permutational",
                     families.permutational_closed_bound(hodge)))
    elif args.c is not None or args.d is not None:
        if args.c is None or args.d is None:
            raise BadFlags("--c and --d must be given together")
        rows.append(("pdiv", pdiv_bound(args.c, args.d)))
    else:
        raise BadFlags("give either --hodge (with optional --lambda) "
                       "or --c/--d")
    if args.format == "json":
        print(render_json(dict(rows)))
    else:
        for name, value in rows:
            print(f"{name}: {value}")
    return 0


def _family_spec(args):
    params = {}
    kind = args.kind
    if kind in ("permutational", "cyclic"):
        if args.e is None:
            raise BadParameters(f"{kind} needs --e")
        params["e"] = [int(x) for x in args.e.split(",")]
        if kind == "permutational":
            if args.pi is None:
                raise BadParameters("permutational needs --pi")
            params["pi"] = [int(x) for x in args.pi.split(",")]
    elif kind == "k3-isoclinic":
        if args.r is None:
            raise BadParameters("k3-isoclinic needs --r")
        params["r"] = args.r
    elif kind == "k3-nonisoclinic":
        if args.r1 is None or args.r2 is None:
            raise BadParameters("k3-nonisoclinic needs --r1 and --r2")
        params.update(r1=args.r1, mid=args.mid, r2=args.r2)
    elif kind == "rank2":
        if args.l1 is None or args.l2 is None:
            raise BadParameters("rank2 needs --l1 and --l2")
        params.update(l1=args.l1, l2=args.l2)
    elif kind == "supersingular":
        if args.d is None or args.e is None:
            raise BadParameters("supersingular needs --d and --e")
        params.update(d=args.d, e=int(args.e))
    return {"kind": kind, "params": params, "seed": args.seed}


def cmd_make_family(args):
    fam = _family_spec(args)
    ctx = context_create(args.p, args.m, _BOOTSTRAP_N)
    crystal = build_family(fam, ctx)   # validates parameters, fixes the rank
    spec = {
        "p": args.p,
        "m": args.m,
        "rank": crystal.r,
        "family": fam,
    }
    if crystal.summands:
        spec["summands"] = list(crystal.summands)
    text = render_json(spec)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_verify(args):
    results = run_suite(args.subset)
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        line = f"[{status}] {r.label}"
        if not r.ok and r.detail:
            line += f" -- {r.detail}"
        print(line)
    passed = sum(r.ok for r in results)
    print(f"{passed}/{len(results)} checks passed")
    require_all_pass(results)
    return 0


def cmd_smith(args):
    if args.matrix:
        try:
            matrix = json.loads(args.matrix)
        except json.JSONDecodeError as exc:
            raise ParseError(f"--matrix is not valid JSON: {exc}") from None
        if args.p is None:
            raise BadFlags("inline --matrix needs --p")
        rank = len(matrix)
        spec = {"p": args.p, "m": args.m, "rank": rank, "matrix": matrix}
    else:
        if not args.spec:
            raise BadFlags("give a spec file or --matrix")
        spec = load_spec(args.spec)
    crystal, _, _ = resolve_crystal(spec, q_max=1, precision=args.precision)
    divisors = elementary_divisor_valuations(crystal.A)
    print(",".join(str(v) for v in divisors))
    return 0


# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="fcrystal",
        description="Exact invariants of F-crystals over the Witt vectors: "
                    "slopes, level torsion, isomorphism numbers, and "
                    "closed-form bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    ap = sub.add_parser("analyze", help="full report for a crystal spec file")
    ap.add_argument("spec", help="path to a JSON crystal spec")
    ap.add_argument("--q-max", type=int, default=None,
                    help="scan horizon (default: 4*rank*(e_max+1))")
    ap.add_argument("--precision", type=int, default=None,
                    help="working precision; must cover the analysis")
    ap.add_argument("--format", choices=("json", "table"), default="json")
    ap.set_defaults(func=cmd_analyze)

    bp = sub.add_parser("bound", help="closed-form bounds from slope data")
    bp.add_argument("--hodge", help="comma-separated sorted Hodge slopes")
    bp.add_argument("--lambda", dest="lam",
                    help="Newton slope as a/b (isoclinic bound)")
    bp.add_argument("--c", type=int, help="codimension (with --d)")
    bp.add_argument("--d", type=int, help="dimension (with --c)")
    bp.add_argument("--format", choices=("json", "table"), default="table")
    bp.set_defaults(func=cmd_bound)

    mp = sub.add_parser("make-family", help="write a reusable family spec")
    mp.add_argument("kind", choices=FAMILY_KINDS)
    mp.add_argument("--p", type=int, required=True)
    mp.add_argument("--m", type=int, default=1)
    mp.add_argument("--e", help="exponents (comma-separated) or single e")
    mp.add_argument("--pi", help="permutation images, 0-based, "
                                 "comma-separated")
    mp.add_argument("--r", type=int, help="rank for k3-isoclinic")
    mp.add_argument("--r1", type=int)
    mp.add_argument("--mid", type=int, default=0)
    mp.add_argument("--r2", type=int)
    mp.add_argument("--l1", type=int)
    mp.add_argument("--l2", type=int)
    mp.add_argument("--d", type=int)
    mp.add_argument("--seed", type=int, default=0)
    mp.add_argument("-o", "--output", help="spec file path (default stdout)")
    mp.set_defaults(func=cmd_make_family)

    for name in ("verify", "verify-paper"):
        vp = sub.add_parser(name, help="run the self-verification suites")
        vp.add_argument("--subset", default="all",
                        choices=("all", "k3", "rank2", "quasi-special",
                                 "bounds"))
        vp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("smith", help="elementary divisor valuations")
    sp.add_argument("spec", nargs="?", help="path to a JSON crystal spec")
    sp.add_argument("--matrix", help="inline JSON matrix")
    sp.add_argument("--p", type=int)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--precision", type=int, default=None)
    sp.set_defaults(func=cmd_smith)
    return parser


def main(argv=None):
    # determinism contract: results do not depend on the thread cap, so the
    # sequential path honors any FCRYSTAL_THREADS value
    os.environ.get("FCRYSTAL_THREADS")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (ParseError, BadFlags, BadParameters) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PrecisionExhausted as exc:
        msg = f"precision exhausted: {exc}"
        if exc.needed:
            msg += f" (needed: {exc.needed})"
        print(msg, file=sys.stderr)
        return 2
    except SingularAtPrecision as exc:
        print(f"singular at precision: {exc}", file=sys.stderr)
        return 2
    except CheckFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        for failure in exc.failures:
            print(f"  {failure}", file=sys.stderr)
        return 3
    except FCrystalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
