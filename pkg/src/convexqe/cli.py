"""Command-line front end.

Exit codes: 0 success, 1 domain error (e.g. a nonvaluational cut was given
to the eliminator), 2 usage or syntax errors.  JSON output is stable-keyed,
and identical configuration plus seed yields byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Optional

from .classifier import (canonicalize_cut, classify, normalize_monotone,
                         check_pluslike)
from .cutqe import (SkolemDefinition, build_structure, qe_star, skolemize)
from .doagqe import QeOptions
from .errors import ConvexQEError, FormulaSyntaxError
from .fuzz import FuzzConfig, run_fuzz
from .models import (ModelDescriptor, Point, eval_formula, load_model)
from .parser import parse_formula, parse_term
from .piecewise import binary_from_json, fn_from_json, unary_to_json
from .skolemlab import choice_violation, obstruction_find, verify_skolem
from .syntax import print_formula
from .piecewise import UnaryPiecewiseLinear

FIXTURES_ENV = "CONVEXQE_FIXTURES"


def fixtures_dir() -> str:
    env = os.environ.get(FIXTURES_ENV)
    if env:
        return env
    return os.path.join(os.path.dirname(__file__), "fixtures")


def resolve_model_path(path: str) -> str:
    if os.path.exists(path):
        return path
    candidate = os.path.join(fixtures_dir(), path)
    if os.path.exists(candidate):
        return candidate
    raise ConvexQEError(f"model file not found: {path}")


def _emit(args, payload: dict, human: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(human)


def _qe_options(args) -> QeOptions:
    return QeOptions(dnf_budget=args.budget_dnf, depth_budget=args.budget_depth,
                     inject_bug=getattr(args, "inject_bug", False))


def _load_fn(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return fn_from_json(json.load(fh))


def _load_assignment(text: str, m: ModelDescriptor) -> dict:
    data = json.loads(text)
    out = {}
    for var, coords in data.items():
        out[var] = Point(tuple(Fraction(c) for c in coords))
    return out


def _sk_to_json(sk: SkolemDefinition) -> list:
    return [{"guard": print_formula(g), "witness": str(w)} for g, w in sk.cases]


def _sk_from_json(data, target: str) -> SkolemDefinition:
    cases = tuple((parse_formula(c["guard"]), parse_term(c["witness"]))
                  for c in data)
    return SkolemDefinition(target, cases)


def cmd_parse(args) -> int:
    f = parse_formula(args.formula)
    text = print_formula(f)
    _emit(args, {"formula": text}, text)
    return 0


def cmd_eliminate(args) -> int:
    m = load_model(resolve_model_path(args.model))
    f = parse_formula(args.formula)
    out = qe_star(f, build_structure(m), _qe_options(args))
    text = print_formula(out)
    _emit(args, {"input": args.formula, "quantifier_free": text}, text)
    return 0


def cmd_classify(args) -> int:
    m = load_model(resolve_model_path(args.model))
    report = classify(m).to_json(m)
    canon = None
    if report["cut_kind"] != "rational" and report["epsilon_witness"] is not None:
        canon = canonicalize_cut(m).describe()
    report["canonical"] = canon
    human = (f"cut_kind: {report['cut_kind']}\n"
             f"stabilizer_level: {report['stabilizer_level']}\n"
             f"epsilon_witness: {report['epsilon_witness']}\n"
             f"uniquely_realizable: {report['uniquely_realizable']}")
    _emit(args, report, human)
    return 0


def cmd_skolemize(args) -> int:
    m = load_model(resolve_model_path(args.model))
    f = parse_formula(args.formula)
    sk = skolemize(f, args.target, build_structure(m), _qe_options(args))
    payload = _sk_to_json(sk)
    human = "\n".join(f"if {c['guard']}  ->  {args.target} := {c['witness']}"
                      for c in payload) or "(unsatisfiable everywhere)"
    _emit(args, {"target": args.target, "cases": payload}, human)
    return 0


def cmd_verify_skolem(args) -> int:
    m = load_model(resolve_model_path(args.model))
    phi = parse_formula(args.phi)
    with open(args.sk, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "cases" in data:
        data = data["cases"]
    sk = _sk_from_json(data, args.target)
    rep = verify_skolem(m, phi, sk, samples=args.samples, seed=args.seed)
    _emit(args, rep.to_json(),
          f"{'PASS' if rep.passed else 'FAIL'} "
          f"({rep.applicable}/{rep.samples} applicable samples)")
    return 0 if rep.passed else 1


def cmd_obstruct(args) -> int:
    m = load_model(resolve_model_path(args.model))
    fn = _load_fn(args.fn)
    if not isinstance(fn, UnaryPiecewiseLinear):
        raise ConvexQEError("obstruction search needs a unary function")
    w = obstruction_find(m, fn)
    _emit(args, w.to_json(),
          f"witness {w.point} violates: {w.violation}")
    return 0


def cmd_choice_demo(args) -> int:
    m = load_model(resolve_model_path(args.model))
    if args.fn:
        cand = _load_fn(args.fn)
    else:
        cand = UnaryPiecewiseLinear.affine(1, 0)
    v = choice_violation(m, cand, seed=args.seed)
    _emit(args, v.to_json(), f"{v.kind}: {v.detail}")
    return 0


def cmd_normalize_monotone(args) -> int:
    fn = _load_fn(args.fn)
    if not isinstance(fn, UnaryPiecewiseLinear):
        raise ConvexQEError("normalization needs a unary function")
    h = normalize_monotone(fn)
    _emit(args, unary_to_json(h), json.dumps(unary_to_json(h), sort_keys=True))
    return 0


def cmd_check_pluslike(args) -> int:
    with open(args.fn, "r", encoding="utf-8") as fh:
        fn = binary_from_json(json.load(fh))
    rep = check_pluslike(fn)
    payload = {"pluslike": rep.pluslike, "reason": rep.reason,
               "witness": repr(rep.witness) if rep.witness else None}
    _emit(args, payload, "pluslike" if rep.pluslike else f"violation: {rep.reason}")
    return 0


def cmd_eval(args) -> int:
    m = load_model(resolve_model_path(args.model))
    f = parse_formula(args.formula)
    asgn = _load_assignment(args.assign, m) if args.assign else {}
    val = eval_formula(m, f, asgn, precision_budget=args.precision)
    _emit(args, {"value": val}, "true" if val else "false")
    return 0


def cmd_fuzz(args) -> int:
    m = load_model(resolve_model_path(args.model))
    config = FuzzConfig(formulas=args.count, assignments=args.assignments,
                        seed=args.seed, depth=args.depth,
                        dnf_budget=args.budget_dnf,
                        depth_budget=args.budget_depth,
                        inject_bug=args.inject_bug)
    report = run_fuzz(m, config)
    if args.format == "json":
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        print(f"checked {report['checked_formulas']} formulas, "
              f"{report['total_assignments']} assignments, "
              f"{report['discrepancy_count']} discrepancies")
        for d in report["discrepancies"][:5]:
            print(f"  mismatch: {d['minimized']} at {d['assignment']}")
    return 0 if report["discrepancy_count"] == 0 else 1


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="convexqe",
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--format", choices=("human", "json"), default="human")
    ap.add_argument("--precision", type=int, default=4096,
                    help="interval refinement bit budget")
    ap.add_argument("--budget-dnf", type=int, default=50_000)
    ap.add_argument("--budget-depth", type=int, default=64)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="echo the canonical printing")
    p.add_argument("formula")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eliminate", help="quantifier-free equivalent")
    p.add_argument("--model", required=True)
    p.add_argument("formula")
    p.set_defaults(func=cmd_eliminate)

    p = sub.add_parser("classify", help="cut classification report")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("skolemize", help="guarded witness definition")
    p.add_argument("--model", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("formula")
    p.set_defaults(func=cmd_skolemize)

    p = sub.add_parser("verify-skolem", help="sampled witness verification")
    p.add_argument("--model", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--target", default="y")
    p.add_argument("--sk", required=True, help="JSON guard/witness list")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify_skolem)

    p = sub.add_parser("obstruct", help="witness against increasing-in-U maps")
    p.add_argument("--model", required=True)
    p.add_argument("--fn", required=True)
    p.set_defaults(func=cmd_obstruct)

    p = sub.add_parser("choice-demo", help="definable-choice failure")
    p.add_argument("--model", required=True)
    p.add_argument("--fn")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_choice_demo)

    p = sub.add_parser("normalize-monotone", help="reflection cascade")
    p.add_argument("--fn", required=True)
    p.set_defaults(func=cmd_normalize_monotone)

    p = sub.add_parser("check-pluslike", help="continuity and monotonicity")
    p.add_argument("--fn", required=True)
    p.set_defaults(func=cmd_check_pluslike)

    p = sub.add_parser("eval", help="evaluate a quantifier-free formula")
    p.add_argument("--model", required=True)
    p.add_argument("--assign", help='JSON object, e.g. {"x": ["1", "0"]}')
    p.add_argument("formula")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fuzz", help="differential elimination fuzzing")
    p.add_argument("--model", required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--assignments", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--inject-bug", action="store_true",
                   help="self-test: negate one elimination rule")
    p.set_defaults(func=cmd_fuzz)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_arg_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FormulaSyntaxError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return 2
    except ConvexQEError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
