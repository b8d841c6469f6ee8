import json
import random
from fractions import Fraction

import pytest

from convexqe.errors import MalformedModelError
from convexqe.models import (Cmp, DownwardCut, IntCompiledFormula,
                             ModelDescriptor, PLUS_INF, PiOracle, Point,
                             SqrtOracle, SubgroupLevel, compare_to_threshold,
                             eval_formula, model_from_json, model_to_json,
                             u_member)
from convexqe.parser import parse_formula
from convexqe.fuzz import SAMPLE_DENOM, gen_formula, gen_point, int_sample_pool


class TestOracles:
    def test_pi_interval_narrow_and_nested(self):
        o = PiOracle()
        lo1, hi1 = o.refine(16)
        lo2, hi2 = o.refine(64)
        assert lo1 <= lo2 < hi2 <= hi1
        assert hi2 - lo2 <= Fraction(1, 2 ** 64)
        below = Fraction(3141592653589793238462, 10 ** 21)  # truncation < pi
        above = Fraction(3141592653589793238463, 10 ** 21)  # > pi
        assert lo2 < above and below < hi2

    def test_sqrt_interval(self):
        o = SqrtOracle(Fraction(2))
        lo, hi = o.refine(40)
        assert lo * lo < 2 < hi * hi
        assert hi - lo <= Fraction(1, 2 ** 40)

    def test_square_rejected(self):
        with pytest.raises(MalformedModelError):
            SqrtOracle(Fraction(9, 4))

    def test_comparison_terminates(self):
        o = PiOracle()
        assert o.compare(Fraction(3)) < 0
        assert o.compare(Fraction(22, 7)) > 0
        assert o.compare(Fraction(355, 113)) > 0  # famously close to pi


class TestCompare:
    def test_pi_dim1(self, m_pi):
        assert compare_to_threshold(m_pi, Point.of(3)) is Cmp.BELOW

    def test_refined_above(self, m_11pi):
        assert compare_to_threshold(m_11pi, Point.of(1, 1, 4)) is Cmp.ABOVE

    def test_plus_inf_absorbs(self, m_1inf):
        assert compare_to_threshold(m_1inf, Point.of(1, 10 ** 6)) is Cmp.BELOW

    def test_equal_only_rational(self, m_rat):
        assert compare_to_threshold(m_rat, Point.of(1, 1)) is Cmp.EQUAL


class TestEval:
    def test_pi_membership(self, m_pi):
        assert eval_formula(m_pi, parse_formula("U(x)"), {"x": Point.of(3)})

    def test_group_identity(self, models):
        f = parse_formula("x + -1 * x = 0")
        for m in models.values():
            assert eval_formula(m, f, {"x": m.e_out})

    def test_subgroup_membership(self, m_sub2):
        f = parse_formula("U(x) & ~U(y)")
        asgn = {"x": Point.of(0, 5), "y": Point.of(1, 0)}
        assert eval_formula(m_sub2, f, asgn)

    def test_strictness_flag(self):
        strict = ModelDescriptor(1, DownwardCut((Fraction(1),), True),
                                 Point.of(Fraction(1, 2)), Point.of(2))
        loose = ModelDescriptor(1, DownwardCut((Fraction(1),), False),
                                Point.of(Fraction(1, 2)), Point.of(2))
        assert not u_member(strict, Point.of(1))
        assert u_member(loose, Point.of(1))

    def test_quantifier_rejected(self, m_sub2):
        with pytest.raises(ValueError):
            eval_formula(m_sub2, parse_formula("E y. x < y"), {"x": Point.of(0, 0)})


class TestOrderAxioms:
    def test_sampled(self, models):
        rng = random.Random(4)
        for m in models.values():
            pts = [gen_point(rng, m) for _ in range(12)]
            for a in pts:
                for b in pts:
                    lt = a.lex_lt(b)
                    gt = b.lex_lt(a)
                    assert lt + gt + (a == b) == 1  # totality
                    for c in pts[:4]:
                        assert lt == (a + c).lex_lt(b + c)  # translation
            for a in pts:  # divisibility: the halving point works
                h = a.scale(Fraction(1, 2))
                assert h + h == a

    def test_downward_closed_sampled(self, models):
        rng = random.Random(5)
        for m in models.values():
            if not isinstance(m.u_interp, DownwardCut):
                continue
            for _ in range(60):
                p = gen_point(rng, m)
                q = gen_point(rng, m)
                if u_member(m, p) and q.lex_lt(p):
                    assert u_member(m, q)


class TestValidation:
    def test_subgroup_level_bounds(self):
        with pytest.raises(MalformedModelError):
            ModelDescriptor(2, SubgroupLevel(2), Point.of(0, 1), Point.of(1, 0))

    def test_leading_plus_inf_rejected(self):
        with pytest.raises(MalformedModelError):
            ModelDescriptor(2, DownwardCut((PLUS_INF, Fraction(0))),
                            Point.of(0, 1), Point.of(1, 0))

    def test_gap_in_inf_block_rejected(self):
        with pytest.raises(MalformedModelError):
            ModelDescriptor(3, DownwardCut((Fraction(1), PLUS_INF, Fraction(0))),
                            Point.of(0, 1, 0), Point.of(2, 0, 0))

    def test_second_oracle_rejected(self):
        with pytest.raises(MalformedModelError):
            ModelDescriptor(2, DownwardCut((PiOracle(), PiOracle())),
                            Point.of(1, 0), Point.of(4, 0))

    def test_e_out_must_dominate(self):
        with pytest.raises(MalformedModelError):
            ModelDescriptor(2, DownwardCut((Fraction(1), PLUS_INF)),
                            Point.of(0, 1), Point.of(1, -3))

    def test_e_in_in_stabilizer(self):
        with pytest.raises(MalformedModelError):
            ModelDescriptor(2, DownwardCut((Fraction(1), PLUS_INF)),
                            Point.of(Fraction(1, 2), 0), Point.of(2, 0))


class TestJson:
    def test_round_trip(self, models):
        for m in models.values():
            again = model_from_json(json.loads(json.dumps(model_to_json(m))))
            assert again == m


class TestIntFastPath:
    def test_agrees_with_exact_eval(self, models):
        rng = random.Random(17)
        for m in models.values():
            pool = int_sample_pool(m)
            for _ in range(20):
                f = gen_formula(rng, ["x", "y"], 3, 0)
                from convexqe.normalform import normalize_atoms
                from convexqe.syntax import free_vars, is_quantifier_free
                if not is_quantifier_free(normalize_atoms(f)):
                    continue
                comp = IntCompiledFormula(m, f, SAMPLE_DENOM)
                for _ in range(10):
                    ints = {v: tuple(rng.choice(pool) for _ in range(m.dim))
                            for v in free_vars(f)}
                    pts = {v: Point(tuple(Fraction(c, SAMPLE_DENOM) for c in p))
                           for v, p in ints.items()}
                    assert comp.eval(ints) == eval_formula(m, f, pts)
