import random

import pytest

from convexqe.doagqe import QeOptions, eliminate_one, qe
from convexqe.models import eval_formula
from convexqe.normalform import dnf_clauses, normalize_atoms
from convexqe.oracle import oracle_truth
from convexqe.parser import parse_formula
from convexqe.fuzz import gen_point
from convexqe.syntax import (AtomKind, Exists, FalseF, TrueF, free_vars,
                             is_quantifier_free, print_formula)


def clause_of(text: str):
    [clause] = dnf_clauses(normalize_atoms(parse_formula(text)))
    return list(clause)


def assert_equiv(m, f, g, var_names, rng, n=80):
    for _ in range(n):
        asgn = {v: gen_point(rng, m) for v in var_names}
        assert oracle_truth(m, f, asgn) == eval_formula(m, g, asgn), (
            print_formula(f), print_formula(g), asgn)


class TestEliminateOne:
    def test_dense_interval(self):
        g = eliminate_one(clause_of("a < v & v < b"), "v")
        assert g == parse_formula("a - b < 0")

    def test_divisibility(self):
        g = eliminate_one(clause_of("v + v = x"), "v")
        assert isinstance(g, TrueF)

    def test_disequality_discharged(self, m_sub2):
        f = parse_formula("E v. (a < v & v < b & v != c)")
        g = eliminate_one(clause_of("a < v & v < b & v != c"), "v")
        assert g == parse_formula("a - b < 0")
        assert_equiv(m_sub2, f, g, ["a", "b", "c"], random.Random(1))

    def test_pinned_equality_substituted(self):
        g = eliminate_one(clause_of("v + v = x & v < b"), "v")
        assert g == parse_formula("1/2 * x - b < 0")

    def test_variable_hygiene(self):
        g = eliminate_one(clause_of("a < v & v < b & c < d"), "v")
        assert "v" not in free_vars(g)

    def test_membership_atoms_rejected(self):
        with pytest.raises(ValueError):
            eliminate_one(clause_of("U(v)"), "v")


class TestQe:
    def test_no_upper_endpoint(self):
        assert isinstance(qe(parse_formula("A x. E y. x < y")), TrueF)

    def test_irreflexivity(self):
        assert isinstance(qe(parse_formula("E y. (x < y & y < x)")), FalseF)

    def test_scaled_bounds(self, m_sub2):
        f = parse_formula("E y. (x < y + y & y + y < z)")
        g = qe(f)
        assert is_quantifier_free(g)
        assert_equiv(m_sub2, f, g, ["x", "z"], random.Random(2))

    def test_nonstrict_bounds(self, m_sub2):
        f = parse_formula("E v. (a <= v & v <= b)")
        g = qe(f)
        assert_equiv(m_sub2, f, g, ["a", "b"], random.Random(3))

    def test_universal_dualization(self, m_sub2):
        f = parse_formula("A v. (v < a -> v < b)")
        g = qe(f)
        assert_equiv(m_sub2, f, g, ["a", "b"], random.Random(4))

    def test_rejects_membership(self, m_sub2):
        with pytest.raises(ValueError):
            qe(parse_formula("E y. U(y)"))

    def test_idempotent_pointwise(self, m_sub2):
        rng = random.Random(5)
        from convexqe.fuzz import gen_formula
        for _ in range(20):
            f = gen_formula(rng, ["x", "y"], 3, 2)
            from convexqe.syntax import atoms_of
            if any(a.kind in (AtomKind.UMEM, AtomKind.IMEM) for a in atoms_of(f)):
                continue
            g = qe(f)
            g2 = qe(g)
            for _ in range(10):
                asgn = {v: gen_point(rng, m_sub2) for v in free_vars(f)}
                assert (eval_formula(m_sub2, g, asgn)
                        == eval_formula(m_sub2, g2, asgn))

    def test_differential_soundness(self, models):
        rng = random.Random(6)
        from convexqe.fuzz import gen_formula
        from convexqe.syntax import atoms_of
        for name in ("lex2_sub1", "q3_11pi"):
            m = models[name]
            done = 0
            while done < 25:
                f = gen_formula(rng, ["x", "y"], 3, 2)
                if any(a.kind in (AtomKind.UMEM, AtomKind.IMEM)
                       for a in atoms_of(f)):
                    continue
                g = qe(f)
                assert is_quantifier_free(g)
                assert_equiv(m, f, g, sorted(free_vars(f)), rng, n=25)
                done += 1

    def test_injected_bug_changes_output(self):
        f = parse_formula("E y. (x < y & y < z)")
        good = qe(f)
        bad = qe(f, QeOptions(inject_bug=True))
        assert good != bad
