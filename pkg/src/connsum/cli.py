"""Command line: ``connsum eval|fuzz|qme-check|cross-check``.

Exit codes: 0 success, 1 a checked property fails, 2 usage error,
3 parse error (reported with line and column), 4 evaluation or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction

from .expr import Context, EvalError, ParseError, evaluate, format_value, is_zero_value, value_kind
from .space import DgSymplecticSpace, SpaceValidationError, qme_space, random_space

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PARSE, EXIT_INPUT = 0, 1, 2, 3, 4
SPACE_ENV = "CONNSUM_SPACE"


class InputError(Exception):
    """Unreadable or invalid input files."""


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def dumps(data: dict) -> str:
    """Deterministic JSON: sorted keys, scalars as ``"p/q"`` strings."""
    return json.dumps(_jsonable(data), sort_keys=True, indent=1)


def load_space(path):
    path = path or os.environ.get(SPACE_ENV)
    if not path:
        return None
    try:
        return DgSymplecticSpace.load(path)
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise InputError(f"cannot load space {path}: {e}") from e


def _cutoff(text) -> Fraction:
    try:
        w = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid cutoff {text!r}")
    if w <= 0 or (2 * w).denominator != 1:
        raise argparse.ArgumentTypeError("the cutoff is a positive half-integer")
    return w


# -- series files ----------------------------------------------------------------

def series_expression(data: dict) -> str:
    """The expression text of a ``fun-series/1`` document (orbit-sum coefficients)."""
    if data.get("schema") != "fun-series/1":
        raise InputError("expected a fun-series/1 document")
    parts = []
    for comp in data.get("components", []):
        q = int(comp.get("q", 0))
        for t in comp["terms"]:
            c = Fraction(t["coeff"])
            if t["p_gen"] == "1":
                parts.append(f"({c})")
                continue
            kq = f"k^{q}*" if q else ""
            parts.append(f"({c})*{kq}orb({t['p_gen']} @ {t['q_monomial']})")
    return " + ".join(parts) or "0"


def load_action(path, ctx: Context):
    """An action: a ``fun-series/1`` JSON document or a text expression."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", e.lineno, e.colno) from e
        text = series_expression(data)
    value = evaluate(text, ctx)
    if value_kind(value) == "series":
        value = value.value
    return value


# -- commands ----------------------------------------------------------------------

def cmd_eval(args) -> tuple[int, dict, str]:
    ctx = Context(space=load_space(args.space), cutoff=args.cutoff)
    value = evaluate(args.expr, ctx)
    zero = is_zero_value(value)
    text = format_value(value)
    out = {"schema": "eval-result/1", "expr": args.expr, "kind": value_kind(value),
           "value": text, "is_zero": zero, "cutoff": ctx.cutoff}
    if value_kind(value) in ("fun", "series"):
        elem = value.value if value_kind(value) == "series" else value
        out["series"] = ctx.fx(elem.fun).to_json(elem)
    code = EXIT_FAIL if args.assert_zero and not zero else EXIT_OK
    return code, out, text


def _fuzz_operad(args):
    from .endo import EndoOperad
    from .surfaces import QC, QO
    if args.operad == "qc":
        return QC
    if args.operad == "qo":
        return QO
    space = load_space(args.space)
    if space is None:
        space = random_space(random.Random(f"{args.seed}:endo-space"), with_diff=True)
    return EndoOperad(space)


def cmd_fuzz(args) -> tuple[int, dict, str]:
    from .fuzz import exhaustive, fuzz
    op = _fuzz_operad(args)
    if args.exhaustive:
        if args.operad == "endo":
            raise InputError("exhaustive enumeration is for the surface operads")
        rep = exhaustive(op, args.axioms, max_legs=args.max_legs or 5, max_genus=args.max_genus or 2)
    else:
        rep = fuzz(op, args.axioms, args.seed, args.cases, max_legs=args.max_legs or 6,
                   max_genus=args.max_genus or 3, jobs=args.jobs)
    lines = [f"{rep['operad']} {rep['suite']} ({rep['mode']}): {sum(rep['checked'].values())} checks, "
             f"{len(rep['failures'])} failures"]
    for f in rep["failures"][:10]:
        lines.append(f"  {f['axiom']}: {f['repro']}")
    return (EXIT_OK if rep["passed"] else EXIT_FAIL), rep, "\n".join(lines)


def cmd_qme(args) -> tuple[int, dict, str]:
    from .qme import qme_check, qme_samples
    from .surfaces import QC, QO
    P = QO if args.operad == "qo" else QC
    if args.action:
        ctx = Context(space=load_space(args.space), cutoff=args.cutoff)
        S = load_action(args.action, ctx)
        if value_kind(S) == "scalar" and is_zero_value(S):
            S = ctx.ofun(ctx.fun(P)).zero()
        elif value_kind(S) != "fun":
            raise InputError("the action must be an element of Fun")
        res = qme_check(S.fun, S, args.cutoff)
        ok = res["residual_zero"] and res["exp_zero"] and res["agree"] and res["identity"]
        out = {"schema": "qme-check/1", "operads": [S.fun.P.name, S.fun.Q.name], **res, "solution": ok}
        text = (f"QME at cutoff {args.cutoff}: {'solution' if ok else 'not a solution'} "
                f"(residual zero: {res['residual_zero']}, exponential zero: {res['exp_zero']})")
        return (EXIT_OK if ok else EXIT_FAIL), out, text
    from .endo import EndoOperad
    from .fun import Fun
    space = load_space(args.space) or qme_space()
    fun = Fun(P, EndoOperad(space))
    rows = []
    for label, S, expected in qme_samples(fun, args.seed, args.samples, args.cutoff):
        res = qme_check(fun, S, args.cutoff)
        verdict = res["residual_zero"] and res["exp_zero"]
        rows.append({"label": label, "expected_solution": expected, "solution": verdict,
                     **res, "correct": res["agree"] and res["identity"] and verdict == expected})
    ok = all(r["correct"] for r in rows)
    out = {"schema": "qme-samples/1", "seed": args.seed, "cutoff": args.cutoff,
           "space": space.to_json(), "samples": rows, "passed": ok}
    text = f"{sum(r['correct'] for r in rows)}/{len(rows)} samples classified correctly"
    return (EXIT_OK if ok else EXIT_FAIL), out, text


def cmd_cross(args) -> tuple[int, dict, str]:
    from .checks import cross_check, rank_check
    space = load_space(args.space)
    rep = cross_check(args.map, args.seed, args.cases, spaces=[space] if space else None)
    rank = rank_check(args.map, space)
    rep["rank"] = rank
    ok = rep["passed"] and rank["injective"]
    text = (f"{args.map}: {args.cases} cases, {len(rep['failures'])} failures; "
            f"injective on the invariant basis: {rank['injective']}")
    for f in rep["failures"][:10]:
        text += f"\n  {f['operation']}: {f['repro']}"
    return (EXIT_OK if ok else EXIT_FAIL), rep, text


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="connsum", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="print a JSON document")
        sp.add_argument("--space", help=f"space file (default: ${SPACE_ENV})")

    e = sub.add_parser("eval", help="evaluate an expression")
    e.add_argument("expr")
    e.add_argument("--cutoff", type=_cutoff, default=Fraction(8))
    e.add_argument("--assert-zero", action="store_true", help="exit 1 unless the value is zero")
    common(e)
    e.set_defaults(run=cmd_eval)

    f = sub.add_parser("fuzz", help="check the operad axioms on seeded random inputs")
    f.add_argument("--operad", choices=["qc", "qo", "endo"], required=True)
    f.add_argument("--axioms", choices=["mo", "cs"], required=True)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--cases", type=int, default=100)
    f.add_argument("--exhaustive", action="store_true")
    f.add_argument("--max-legs", type=int)
    f.add_argument("--max-genus", type=int)
    f.add_argument("--jobs", type=int, default=1)
    common(f)
    f.set_defaults(run=cmd_fuzz)

    q = sub.add_parser("qme-check", help="check the quantum master equation")
    q.add_argument("--action", help="action file (fun-series/1 JSON or an expression)")
    q.add_argument("--cutoff", type=_cutoff, default=Fraction(8))
    q.add_argument("--operad", choices=["qc", "qo"], default="qc")
    q.add_argument("--samples", type=int, default=20, help="sample count without --action")
    q.add_argument("--seed", type=int, default=0)
    common(q)
    q.set_defaults(run=cmd_qme)

    c = sub.add_parser("cross-check", help="compare with the sym or cyc model")
    c.add_argument("map", choices=["psi", "theta"])
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--cases", type=int, default=100)
    common(c)
    c.set_defaults(run=cmd_cross)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code, data, text = args.run(args)
    except ParseError as e:
        return _error(args, "parse-error", e, EXIT_PARSE)
    except (EvalError, InputError, SpaceValidationError, ValueError) as e:
        return _error(args, "input-error", e, EXIT_INPUT)
    print(dumps(data) if args.json else text)
    return code


def _error(args, kind, e, code) -> int:
    data = {"schema": "error/1", "error": kind, "message": str(e)}
    if getattr(e, "line", None) is not None:
        data["line"], data["column"] = e.line, e.col
    if args.json:
        print(dumps(data))
    else:
        print(f"{kind}: {e}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
