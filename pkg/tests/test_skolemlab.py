import random
from fractions import Fraction

import pytest

from convexqe.cutqe import SkolemDefinition, build_structure, skolemize
from convexqe.errors import PreconditionViolatedError
from convexqe.models import i_member, u_member
from convexqe.parser import parse_formula, parse_term
from convexqe.piecewise import UnaryPiecewiseLinear
from convexqe.skolemlab import (choice_violation, obstruction_find,
                                verify_skolem)
from convexqe.syntax import TRUE, Term


class TestVerifySkolem:
    def test_synthesized_definition_passes(self, m_sub2):
        phi = parse_formula("x < y & U(y)")
        sk = skolemize(phi, "y", build_structure(m_sub2))
        rep = verify_skolem(m_sub2, phi, sk, samples=500, seed=1)
        assert rep.passed and rep.applicable > 100

    def test_reflexive_witness_fails(self, m_sub2):
        sk = SkolemDefinition("y", ((TRUE, Term.var("x")),))
        rep = verify_skolem(m_sub2, parse_formula("x < y"), sk,
                            samples=100, seed=2)
        assert not rep.passed
        assert rep.failure["kind"] == "witness-fails"

    def test_empty_definition_vacuously_correct(self, m_sub2):
        sk = SkolemDefinition("y", ())
        rep = verify_skolem(m_sub2, parse_formula("y < y"), sk,
                            samples=100, seed=3)
        assert rep.passed and rep.applicable == 0

    def test_missing_guard_reported(self, m_sub2):
        # guard covers only one side of the parameter space
        sk = SkolemDefinition("y", ((parse_formula("x < 0"),
                                     parse_term("x + 1")),))
        rep = verify_skolem(m_sub2, parse_formula("x < y"), sk,
                            samples=200, seed=4)
        assert not rep.passed
        assert rep.failure["kind"] == "no-guard-fired"


class TestObstruction:
    def test_slow_growth_is_not_increasing(self, m_pi):
        f = UnaryPiecewiseLinear.affine(Fraction(1, 2), Fraction(3, 2))
        w = obstruction_find(m_pi, f)
        assert w.violation == "not-increasing"
        a = w.point
        assert u_member(m_pi, a) and not a.lex_lt(f.eval(m_pi, a))

    def test_translation_escapes(self, m_pi):
        f = UnaryPiecewiseLinear.affine(1, 1)
        w = obstruction_find(m_pi, f)
        assert w.violation == "escapes-u"
        a = w.point
        assert u_member(m_pi, a) and not u_member(m_pi, f.eval(m_pi, a))

    def test_half_plus_two_escapes(self, m_pi):
        f = UnaryPiecewiseLinear.affine(Fraction(1, 2), 2)
        w = obstruction_find(m_pi, f)
        assert w.violation == "escapes-u"
        a = w.point
        assert u_member(m_pi, a) and not u_member(m_pi, f.eval(m_pi, a))

    def test_identity_in_final_piece(self, m_pi):
        f = UnaryPiecewiseLinear.of([0], [(2, 0), (1, 0)])
        w = obstruction_find(m_pi, f)
        assert w.violation == "not-increasing"

    def test_multicoordinate_nonvaluational(self, m_11pi):
        f = UnaryPiecewiseLinear.affine(1, Fraction(1, 100))
        w = obstruction_find(m_11pi, f)
        a = w.point
        fa = f.eval(m_11pi, a)
        assert u_member(m_11pi, a)
        assert (not a.lex_lt(fa)) or (not u_member(m_11pi, fa))

    def test_valuational_model_rejected(self, m_1inf):
        with pytest.raises(PreconditionViolatedError):
            obstruction_find(m_1inf, UnaryPiecewiseLinear.affine(1, 1))

    def test_certificate_present(self, m_pi):
        w = obstruction_find(m_pi, UnaryPiecewiseLinear.affine(2, 0))
        assert w.certificate["slope"] == "2"
        assert "comparison" in w.certificate


def _verify_choice_violation(m, cand, v):
    if isinstance(cand, UnaryPiecewiseLinear):
        fn = lambda a: cand.eval(m, a)
    else:
        fn = lambda a: cand.witness_for(m, {"x": a})
    if v.kind == "skolem-condition":
        (a,) = v.points
        w = fn(a)
        assert w is None or not i_member(m, w - a)
    else:
        a, b = v.points
        assert i_member(m, a - b)
        assert fn(a) != fn(b)


class TestChoiceViolation:
    def test_identity_gives_fiber_pair(self, m_sub2):
        cand = UnaryPiecewiseLinear.affine(1, 0)
        v = choice_violation(m_sub2, cand)
        assert v.kind == "fiber-pair"
        _verify_choice_violation(m_sub2, cand, v)

    def test_constant_fails_condition_one(self, m_sub2):
        cand = UnaryPiecewiseLinear.of([], [(0, 0)])
        v = choice_violation(m_sub2, cand)
        assert v.kind == "skolem-condition"
        _verify_choice_violation(m_sub2, cand, v)

    def test_scaling_fails_condition_one(self, m_1inf):
        cand = UnaryPiecewiseLinear.affine(2, 0)
        v = choice_violation(m_1inf, cand)
        _verify_choice_violation(m_1inf, cand, v)

    def test_synthesized_skolem_definition_violates(self, models):
        phi = parse_formula("I(x - y)")
        for name in ("lex2_sub1", "lex2_val_1inf", "lex3_val_1pi0"):
            m = models[name]
            sk = skolemize(phi, "y", build_structure(m))
            v = choice_violation(m, sk)
            _verify_choice_violation(m, sk, v)

    def test_trivial_stabilizer_rejected(self, m_pi):
        with pytest.raises(PreconditionViolatedError):
            choice_violation(m_pi, UnaryPiecewiseLinear.affine(1, 0))

    def test_random_pl_candidates_always_violate(self, models):
        rng = random.Random(41)
        for name in ("lex2_sub1", "lex2_val_1inf"):
            m = models[name]
            for _ in range(15):
                cand = _random_continuous_pl(rng)
                v = choice_violation(m, cand)
                _verify_choice_violation(m, cand, v)


def _random_continuous_pl(rng):
    n = rng.randint(0, 3)
    bps = sorted(rng.sample(range(-4, 5), n))
    slopes = [Fraction(rng.choice([-2, -1, 0, Fraction(1, 2), 1, 2]))
              for _ in range(n + 1)]
    pieces = [(slopes[0], Fraction(rng.randint(-2, 2)))]
    for i, b in enumerate(bps):
        s_prev, c_prev = pieces[-1]
        s_new = slopes[i + 1]
        pieces.append((s_new, (s_prev - s_new) * b + c_prev))
    return UnaryPiecewiseLinear.of(bps, pieces)
