"""Constructive counterexamples: Skolem-definition verification, witness
obstruction over nonvaluational cuts, and definable-choice failures.

Candidate functions are continuous piecewise-linear with exact rational
data, which is exactly the definable function class of the fixture models
at this scale; every returned certificate re-verifies by direct evaluation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

from .classifier import classify, stabilizer, IRRATIONAL_NONVALUATIONAL
from .cutarith import cut_info, points_below_cut
from .cutqe import CutStructure, SkolemDefinition, build_structure, qe_star
from .errors import (PreconditionViolatedError, SearchExhaustedError)
from .models import (CompiledFormula, IntCompiledFormula, ModelDescriptor,
                     Point, i_member, term_value, u_member)
from .piecewise import UnaryPiecewiseLinear
from .syntax import Exists, Formula, free_vars, is_quantifier_free

F0 = Fraction(0)
F1 = Fraction(1)

SAMPLE_POOL = [F0, F0, F1, Fraction(-1), Fraction(2), Fraction(-2),
               Fraction(1, 2), Fraction(-1, 2), Fraction(3), Fraction(-3),
               Fraction(7, 2), Fraction(1, 3)]


def sample_point(rng: random.Random, m: ModelDescriptor,
                 extra: tuple[Fraction, ...] = ()) -> Point:
    pool = SAMPLE_POOL + list(extra)
    return Point(tuple(rng.choice(pool) for _ in range(m.dim)))


def model_sample_pool(m: ModelDescriptor) -> tuple[Fraction, ...]:
    """Rational threshold entries, so sampling probes the cut's edges."""
    from .models import DownwardCut
    if isinstance(m.u_interp, DownwardCut):
        return tuple(e for e in m.u_interp.threshold if isinstance(e, Fraction))
    return ()


# ---------------------------------------------------------------------------
# Skolem verification


@dataclass(frozen=True)
class VerifyReport:
    passed: bool
    samples: int
    applicable: int  # samples where the existential held
    seed: int
    failure: Optional[dict] = None

    def to_json(self) -> dict:
        return {"passed": self.passed, "samples": self.samples,
                "applicable": self.applicable, "seed": self.seed,
                "failure": self.failure}


SAMPLE_DENOM = 6


def verify_skolem(m: ModelDescriptor, phi: Formula, sk: SkolemDefinition,
                  samples: int = 500, seed: int = 0,
                  st: Optional[CutStructure] = None) -> VerifyReport:
    """Sample parameter tuples; wherever the eliminated existential holds,
    some guard must fire and its witness must satisfy phi."""
    st = st or build_structure(m)
    params = sorted(free_vars(phi) - {sk.target})
    existential = qe_star(Exists(sk.target, phi), st)
    ex_eval = IntCompiledFormula(m, existential, SAMPLE_DENOM)
    guard_evals = [IntCompiledFormula(m, guard, SAMPLE_DENOM)
                   for guard, _ in sk.cases]
    if is_quantifier_free(phi):
        phi_eval = CompiledFormula(m, phi, tuple(params) + (sk.target,))
        def check(asgn):
            return phi_eval.eval(asgn)
    else:
        from .oracle import oracle_truth
        def check(asgn):
            return oracle_truth(m, phi, asgn)
    rng = random.Random(seed)
    pool = [int(v * SAMPLE_DENOM) for v in SAMPLE_POOL]
    pool += [int(v * SAMPLE_DENOM) for v in model_sample_pool(m)
             if (v * SAMPLE_DENOM).denominator == 1]
    applicable = 0
    for i in range(samples):
        ints = {v: tuple(rng.choice(pool) for _ in range(m.dim))
                for v in params}
        if not ex_eval.eval(ints):
            continue
        applicable += 1
        asgn = {v: Point(tuple(Fraction(c, SAMPLE_DENOM) for c in p))
                for v, p in ints.items()}
        w: Optional[Point] = None
        for g_eval, (_, term) in zip(guard_evals, sk.cases):
            if g_eval.eval(ints):
                w = term_value(m, term, asgn)
                break
        if w is None:
            return VerifyReport(False, samples, applicable, seed, failure={
                "kind": "no-guard-fired", "sample_index": i,
                "assignment": {v: [str(c) for c in p.coords]
                               for v, p in asgn.items()}})
        asgn2 = dict(asgn)
        asgn2[sk.target] = w
        if not check(asgn2):
            return VerifyReport(False, samples, applicable, seed, failure={
                "kind": "witness-fails", "sample_index": i,
                "assignment": {v: [str(c) for c in p.coords]
                               for v, p in asgn.items()},
                "witness": [str(c) for c in w.coords]})
    return VerifyReport(True, samples, applicable, seed)


# ---------------------------------------------------------------------------
# Skolem obstruction over nonvaluational cuts


@dataclass(frozen=True)
class ObstructionWitness:
    point: Point
    violation: str  # "not-increasing" | "escapes-u"
    certificate: dict

    def to_json(self) -> dict:
        return {"point": [str(c) for c in self.point.coords],
                "violation": self.violation,
                "certificate": self.certificate}


def _final_cut_piece(m: ModelDescriptor, f: UnaryPiecewiseLinear) -> int:
    """Index of the affine piece meeting the cut from below."""
    count = 0
    for b in f.breakpoints:
        if u_member(m, m.unit.scale(b)):
            count += 1
        else:
            break
    return count


def obstruction_find(m: ModelDescriptor,
                     f: UnaryPiecewiseLinear) -> ObstructionWitness:
    """A verified a in U with f(a) <= a or f(a) outside U.

    On the final piece q*x + c the gap f(x) - x is affine with rational
    data; its limit at the cut cannot vanish unless the piece is the
    identity, so the sign of the limit decides which violation is achieved
    and interval refinement locates a concrete rational witness.
    """
    report = classify(m)
    if report.cut_kind != IRRATIONAL_NONVALUATIONAL:
        raise PreconditionViolatedError(
            "obstruction search needs a nonvaluational cut")
    f.require_continuous()
    idx = _final_cut_piece(m, f)
    piece = f.pieces[idx]
    q, c = piece.slope, term_value(m, piece.const, {})
    lo_pt = m.unit.scale(f.breakpoints[idx - 1]) if idx > 0 else None

    def in_region(a: Point) -> bool:
        return lo_pt is None or lo_pt.lex_lt(a)

    cert: dict = {"piece_index": idx, "slope": str(q),
                  "intercept": [str(x) for x in c.coords]}
    if q == 1 and c.is_zero():
        for a in points_below_cut(m):
            if in_region(a) and u_member(m, a):
                cert["gap"] = "identically zero on the final piece"
                return ObstructionWitness(a, "not-increasing", cert)
        raise SearchExhaustedError("no cut point inside the final piece")

    lam_sign = _gap_limit_sign(m, q, c)
    cert["gap_limit_sign"] = lam_sign
    if lam_sign < 0:
        for a in points_below_cut(m):
            if in_region(a) and u_member(m, a):
                fa = a.scale(q) + c
                if not a.lex_lt(fa):  # f(a) <= a
                    cert["comparison"] = {"f(a)": [str(x) for x in fa.coords],
                                          "a": [str(x) for x in a.coords]}
                    return ObstructionWitness(a, "not-increasing", cert)
        raise SearchExhaustedError("negative gap limit but no witness found")
    for a in points_below_cut(m):
        if in_region(a) and u_member(m, a):
            fa = a.scale(q) + c
            if not u_member(m, fa):
                cert["comparison"] = {"f(a)": [str(x) for x in fa.coords],
                                      "above": "threshold"}
                cert["oracle_interval"] = _interval_snapshot(m)
                return ObstructionWitness(a, "escapes-u", cert)
    raise SearchExhaustedError("positive gap limit but no witness found")


def _gap_limit_sign(m: ModelDescriptor, q: Fraction, c: Point) -> int:
    """Sign of (q-1)*g + c at the cut g = sup U (never zero with rational
    data unless q = 1 and c = 0)."""
    if q == 1:
        return c.lex_sign()
    z = c.scale(F1 / (1 - q))
    inside = u_member(m, z)
    # (q-1)*g + c > 0  <=>  g > z for q > 1, g < z for q < 1
    if q > 1:
        return 1 if inside else -1
    return -1 if inside else 1


def _interval_snapshot(m: ModelDescriptor) -> Optional[list[str]]:
    from .cutarith import cut_info, deciding_oracle
    info = cut_info(m)
    if info.kind != "oracle":
        return None
    lo, hi = deciding_oracle(m).refine(16)
    return [str(lo), str(hi)]


# ---------------------------------------------------------------------------
# definable-choice failure


@dataclass(frozen=True)
class ChoiceViolation:
    kind: str  # "skolem-condition" | "fiber-pair"
    points: tuple[Point, ...]
    values: tuple[Optional[Point], ...]
    detail: str

    def to_json(self) -> dict:
        return {"kind": self.kind,
                "points": [[str(c) for c in p.coords] for p in self.points],
                "values": [None if v is None else [str(c) for c in v.coords]
                           for v in self.values],
                "detail": self.detail}


Candidate = Union[UnaryPiecewiseLinear, SkolemDefinition]


def _candidate_fn(m: ModelDescriptor, cand: Candidate) -> Callable[[Point], Optional[Point]]:
    if isinstance(cand, UnaryPiecewiseLinear):
        return lambda a: cand.eval(m, a)
    param_vars = sorted({v for guard, w in cand.cases
                         for v in (free_vars(guard) | w.vars())} - {cand.target})
    if len(param_vars) > 1:
        raise PreconditionViolatedError("candidate must be unary")
    var = param_vars[0] if param_vars else "x"
    return lambda a: cand.witness_for(m, {var: a})


def choice_violation(m: ModelDescriptor, cand: Candidate,
                     seed: int = 0) -> ChoiceViolation:
    """For the fiber relation 'same coset of I', exhibit either an input
    with no valid output or a same-fiber pair mapped to different values."""
    k = stabilizer(m)
    if k >= m.dim:
        raise PreconditionViolatedError("the stabilizer must be nontrivial")
    fn = _candidate_fn(m, cand)
    rng = random.Random(seed)
    delta = Point.unit(m.dim, m.dim - 1)  # a nonzero stabilizer element
    ladder: list[Point] = [Point.zero(m.dim), m.unit, -m.unit, m.e_in,
                           m.unit.scale(2), -m.unit.scale(2), m.e_out]
    if isinstance(cand, UnaryPiecewiseLinear):
        for b in cand.breakpoints:
            ladder.extend([m.unit.scale(b) - m.unit, m.unit.scale(b) + m.unit,
                           m.unit.scale(b)])
    for _ in range(40):
        ladder.append(sample_point(rng, m, model_sample_pool(m)))

    for a in ladder:
        w = fn(a)
        if w is None or not i_member(m, w - a):
            return ChoiceViolation(
                "skolem-condition", (a,), (w,),
                "no output in the input's stabilizer coset")
    for a in ladder:
        w = fn(a)
        for scale in (F1, Fraction(1, 2), Fraction(4)):
            a2 = a + delta.scale(scale)
            w2 = fn(a2)
            if w2 is None or not i_member(m, w2 - a2):
                return ChoiceViolation(
                    "skolem-condition", (a2,), (w2,),
                    "no output in the input's stabilizer coset")
            if w2 != w:
                return ChoiceViolation(
                    "fiber-pair", (a, a2), (w, w2),
                    "inputs share a stabilizer coset but outputs differ")
    raise SearchExhaustedError("no choice violation found in the search budget")
