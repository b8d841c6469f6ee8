"""Differential fuzzing: random formulas, elimination vs the coordinate
oracle on sampled assignments, with shrinking of any counterexample.

Reports are plain dictionaries with deterministic content for a fixed seed,
so serialized reports are byte-identical across runs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from .cutqe import CutStructure, build_structure, qe_star
from .doagqe import QeOptions
from .errors import BudgetExceededError, ConvexQEError
from .models import (CompiledFormula, IntCompiledFormula, ModelDescriptor,
                     Point, model_to_json)
from .normalform import DEFAULT_DNF_BUDGET
from .oracle import IntOracleEval, oracle_compile
from .syntax import (And, AtomKind, Exists, Forall, Formula, Not, Or, Term,
                     atom, free_vars, imem, is_quantifier_free, print_formula,
                     subformulas, umem, TRUE, FALSE, TrueF, FalseF)

COEFF_POOL = [Fraction(1), Fraction(-1), Fraction(2), Fraction(-2),
              Fraction(3), Fraction(-3), Fraction(1, 2), Fraction(-1, 2)]
CONST_POOL = [Fraction(-2), Fraction(-1), Fraction(1), Fraction(2),
              Fraction(1, 2)]
VALUE_POOL = [Fraction(0), Fraction(0), Fraction(1), Fraction(-1),
              Fraction(2), Fraction(-2), Fraction(1, 2), Fraction(3),
              Fraction(-3), Fraction(7, 2)]
VAR_POOL = ("x", "y", "z")
SAMPLE_DENOM = 6  # common denominator of every sampled coordinate


@dataclass
class FuzzConfig:
    formulas: int = 100
    assignments: int = 100
    seed: int = 0
    depth: int = 3
    quantifier_depth: int = 2
    dnf_budget: int = DEFAULT_DNF_BUDGET
    depth_budget: int = 64
    inject_bug: bool = False

    def to_json(self) -> dict:
        return {"formulas": self.formulas, "assignments": self.assignments,
                "seed": self.seed, "depth": self.depth,
                "quantifier_depth": self.quantifier_depth,
                "dnf_budget": self.dnf_budget,
                "depth_budget": self.depth_budget,
                "inject_bug": self.inject_bug}


def gen_term(rng: random.Random, vars: list[str]) -> Term:
    t = Term.var(rng.choice(vars)).scale(rng.choice(COEFF_POOL))
    if rng.random() < 0.5:
        t = t + Term.var(rng.choice(vars)).scale(rng.choice(COEFF_POOL))
    r = rng.random()
    if r < 0.2:
        t = t + Term.const(rng.choice(CONST_POOL))
    elif r < 0.3:
        t = t + Term.ein(rng.choice([1, -1]))
    elif r < 0.4:
        t = t + Term.eout(rng.choice([1, -1]))
    return t


def gen_atom(rng: random.Random, vars: list[str]) -> Formula:
    t = gen_term(rng, vars)
    r = rng.random()
    if r < 0.3:
        return atom(AtomKind.LT, t)
    if r < 0.4:
        return atom(AtomKind.LE, t)
    if r < 0.5:
        return atom(AtomKind.EQ, t)
    if r < 0.55:
        return atom(AtomKind.NEQ, t)
    if r < 0.85:
        return umem(t)
    return imem(t)


def gen_formula(rng: random.Random, vars: list[str], depth: int,
                qdepth: int) -> Formula:
    r = rng.random()
    if depth <= 0 or r < 0.3:
        return gen_atom(rng, vars)
    if r < 0.45 and qdepth > 0:
        v = rng.choice(VAR_POOL)
        body_vars = vars if v in vars else vars + [v]
        body = gen_formula(rng, body_vars, depth - 1, qdepth - 1)
        return (Exists if rng.random() < 0.6 else Forall)(v, body)
    if r < 0.6:
        return Not(gen_formula(rng, vars, depth - 1, qdepth))
    cls = And if r < 0.8 else Or
    return cls(gen_formula(rng, vars, depth - 1, qdepth),
               gen_formula(rng, vars, depth - 1, qdepth))


def gen_point(rng: random.Random, m: ModelDescriptor,
              extra: tuple[Fraction, ...] = ()) -> Point:
    pool = VALUE_POOL + list(extra)
    return Point(tuple(rng.choice(pool) for _ in range(m.dim)))


def gen_int_point(rng: random.Random, m: ModelDescriptor,
                  pool: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(rng.choice(pool) for _ in range(m.dim))


def int_sample_pool(m: ModelDescriptor) -> tuple[int, ...]:
    pool = [int(v * SAMPLE_DENOM) for v in VALUE_POOL]
    pool += [int(v * SAMPLE_DENOM) for v in _model_pool(m)
             if (v * SAMPLE_DENOM).denominator == 1]
    return tuple(pool)


def _model_pool(m: ModelDescriptor) -> tuple[Fraction, ...]:
    from .models import DownwardCut
    if isinstance(m.u_interp, DownwardCut):
        return tuple(e for e in m.u_interp.threshold if isinstance(e, Fraction))
    return ()


def _shrink(m: ModelDescriptor, st: CutStructure, f: Formula, asgn,
            options: QeOptions) -> Formula:
    """Greedy shrink: replace subformulas by constants while the
    elimination/oracle disagreement persists at the same assignment."""

    def disagrees(g: Formula) -> bool:
        try:
            out = qe_star(g, st, options)
            fv = tuple(sorted(free_vars(g)))
            lhs = CompiledFormula(m, out, fv).eval(asgn)
            rhs = oracle_compile(m, g).eval(asgn)
            return lhs != rhs
        except ConvexQEError:
            return False

    def replace(g: Formula, target: Formula, repl: Formula) -> Formula:
        if g is target:
            return repl
        from .syntax import Implies
        if isinstance(g, Not):
            return Not(replace(g.sub, target, repl))
        if isinstance(g, (And, Or, Implies)):
            return type(g)(replace(g.lhs, target, repl),
                           replace(g.rhs, target, repl))
        if isinstance(g, (Exists, Forall)):
            return type(g)(g.var, replace(g.body, target, repl))
        return g

    current = f
    changed = True
    while changed:
        changed = False
        for sub in subformulas(current):
            if sub is current or isinstance(sub, (TrueF, FalseF)):
                continue
            for repl in (TRUE, FALSE):
                cand = replace(current, sub, repl)
                if free_vars(cand) - set(asgn) :
                    continue
                if disagrees(cand):
                    current = cand
                    changed = True
                    break
            if changed:
                break
    return current


def run_fuzz(m: ModelDescriptor, config: FuzzConfig) -> dict:
    rng = random.Random(config.seed)
    st = build_structure(m)
    options = QeOptions(dnf_budget=config.dnf_budget,
                        depth_budget=config.depth_budget,
                        inject_bug=config.inject_bug)
    pool = int_sample_pool(m)
    discrepancies = []
    budget_skips = 0
    checked = 0
    total_assignments = 0
    for _ in range(config.formulas):
        f = gen_formula(rng, list(VAR_POOL[:2]), config.depth,
                        config.quantifier_depth)
        fv = tuple(sorted(free_vars(f)))
        try:
            out = qe_star(f, st, options)
            comp = IntCompiledFormula(m, out, SAMPLE_DENOM)
            orc = IntOracleEval(oracle_compile(m, f), SAMPLE_DENOM)
        except BudgetExceededError:
            budget_skips += 1
            continue
        checked += 1
        assert is_quantifier_free(out)
        for _ in range(config.assignments):
            ints = {v: gen_int_point(rng, m, pool) for v in fv}
            total_assignments += 1
            got = comp.eval(ints)
            expected = orc.eval(ints)
            if got != expected:
                asgn = {v: Point(tuple(Fraction(c, SAMPLE_DENOM) for c in p))
                        for v, p in ints.items()}
                small = _shrink(m, st, f, asgn, options)
                discrepancies.append({
                    "formula": print_formula(f),
                    "minimized": print_formula(small),
                    "assignment": {v: [str(c) for c in p.coords]
                                   for v, p in sorted(asgn.items())},
                    "qe_output": print_formula(out),
                    "expected": expected,
                    "got": got,
                })
                break
    return {"config": config.to_json(),
            "model": model_to_json(m),
            "checked_formulas": checked,
            "budget_skips": budget_skips,
            "total_assignments": total_assignments,
            "discrepancy_count": len(discrepancies),
            "discrepancies": discrepancies}
