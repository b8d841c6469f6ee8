import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from convexqe.errors import BudgetExceededError, FormulaSyntaxError
from convexqe.models import Point, eval_formula
from convexqe.normalform import dnf_clauses, normalize_atoms, to_dnf
from convexqe.parser import parse_formula, parse_term
from convexqe.syntax import (And, Atom, AtomF, AtomKind, Exists, Forall,
                             Formula, Not, Or, Term, canonicalize_bound,
                             free_vars, is_quantifier_free, print_formula,
                             substitute)


def rt(text: str) -> Formula:
    return parse_formula(text)


class TestParsing:
    def test_quantified_conjunction_shape(self):
        f = rt("E y. (x < y & U(y))")
        assert isinstance(f, Exists)
        assert isinstance(f.body, And)
        lhs, rhs = f.body.lhs, f.body.rhs
        assert lhs.atom.kind == AtomKind.LT
        assert rhs.atom.kind == AtomKind.UMEM

    def test_constant_atom(self):
        f = rt("U(e_in)")
        assert f.atom == Atom(AtomKind.UMEM, Term.ein())

    def test_linear_form_normalization(self):
        f = rt("2 * x - 3 * y < 1")
        t = f.atom.term
        assert f.atom.kind == AtomKind.LT
        assert t.coeff("x") == 2 and t.coeff("y") == -3
        assert t.offset == -1

    def test_rationals_and_unary_minus(self):
        t = parse_term("3/2 * x - -1")
        assert t.coeff("x") == Fraction(3, 2) and t.offset == 1

    def test_precedence(self):
        f = rt("~a < 0 & b < 0 | c < 0 -> d < 0")
        # -> binds loosest, then |, then &, then ~
        from convexqe.syntax import Implies
        assert isinstance(f, Implies)
        assert isinstance(f.lhs, Or)
        assert isinstance(f.lhs.lhs, And)
        assert isinstance(f.lhs.lhs.lhs, Not)

    def test_quantifier_body_extends_right(self):
        f = rt("E y. x < y & U(y)")
        assert isinstance(f, Exists)
        assert isinstance(f.body, And)

    def test_syntax_error_has_position(self):
        with pytest.raises(FormulaSyntaxError) as err:
            parse_formula("E y. ((x < y)")
        assert err.value.line == 1

    def test_reserved_word_misuse(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("E U. U < 0")

    def test_unknown_identifier(self):
        from convexqe.errors import UnknownIdentifierError
        with pytest.raises(UnknownIdentifierError):
            parse_formula("w < 0", known_vars={"x", "y"})

    def test_bound_variables_unique(self):
        f = rt("E x. (x < 0 & E x. x < 1)")
        inner = f.body.rhs
        assert isinstance(inner, Exists)
        assert inner.var != f.var


class TestSubstitution:
    def test_basic(self):
        f = rt("x < y")
        g = substitute(f, "x", parse_term("y + y"))
        assert g == rt("y + y < y")

    def test_bound_occurrence_untouched(self):
        f = rt("E x. x < y")
        assert substitute(f, "x", parse_term("1")) == f

    def test_constant_target(self):
        f = rt("U(x)")
        assert substitute(f, "x", Term.eout()) == rt("U(e_out)")

    def test_capture_avoided(self):
        f = rt("E y. x < y")
        g = substitute(f, "x", parse_term("y + 1"))
        assert isinstance(g, Exists)
        assert g.var not in parse_term("y + 1").vars()
        assert "y" in free_vars(g)

    def test_substitution_commutes_with_eval(self, m_sub2):
        rng = random.Random(9)
        f = rt("x < y & (U(x + y) | x + 1 = y)")
        t = parse_term("2 * y - 1")
        g = substitute(f, "x", t)
        for _ in range(50):
            yv = Point.of(rng.randint(-5, 5), rng.randint(-5, 5))
            asgn = {"y": yv}
            from convexqe.models import term_value
            ext = {"y": yv, "x": term_value(m_sub2, t, asgn)}
            assert eval_formula(m_sub2, g, asgn) == eval_formula(m_sub2, f, ext)


class TestNormalization:
    def test_le_rewrite(self):
        f = normalize_atoms(rt("x <= y"))
        assert f == Not(AtomF(Atom(AtomKind.LT, Term.var("y") - Term.var("x"))))

    def test_neq_rewrite(self):
        f = normalize_atoms(rt("x != y"))
        assert isinstance(f, Not)
        assert f.sub.atom.kind == AtomKind.EQ

    def test_implies_rewrite(self):
        f = normalize_atoms(rt("U(x) -> U(2 * x)"))
        assert f == rt("~U(x) | U(2 * x)")

    def test_only_normal_kinds_remain(self):
        f = normalize_atoms(rt("x <= y & (x != z -> U(x))"))
        from convexqe.syntax import atoms_of
        kinds = {a.kind for a in atoms_of(f)}
        assert kinds <= {AtomKind.LT, AtomKind.EQ, AtomKind.UMEM, AtomKind.IMEM}


class TestDnf:
    def test_distribution(self):
        f = normalize_atoms(rt("(a < 0 | b < 0) & c < 0"))
        assert to_dnf(f) == rt("a < 0 & c < 0 | b < 0 & c < 0")

    def test_single_literal_identity(self):
        f = normalize_atoms(rt("a < 0"))
        assert to_dnf(f) == f

    def test_de_morgan(self):
        f = normalize_atoms(rt("~(a < 0 & b < 0)"))
        assert to_dnf(f) == rt("~(a < 0) | ~(b < 0)")

    def test_budget(self):
        parts = " & ".join(f"(x{i} < 0 | y{i} < 0)" for i in range(12))
        f = normalize_atoms(parse_formula(parts))
        with pytest.raises(BudgetExceededError):
            dnf_clauses(f, budget=100)

    def test_truth_preserved_sampled(self, models):
        rng = random.Random(3)
        from convexqe.fuzz import gen_formula, gen_point
        for name in ("lex2_sub1", "lex3_val_1pi0"):
            m = models[name]
            for _ in range(25):
                f = gen_formula(rng, ["x", "y"], 3, 0)
                nf = normalize_atoms(f)
                if not is_quantifier_free(nf):
                    continue
                df = to_dnf(nf)
                for _ in range(10):
                    asgn = {v: gen_point(rng, m) for v in free_vars(f)}
                    ref = eval_formula(m, f, asgn)
                    assert eval_formula(m, nf, asgn) == ref
                    assert eval_formula(m, df, asgn) == ref


# --- round-trip property ----------------------------------------------------

_names = st.sampled_from(["x", "y", "z", "w"])
_rats = st.builds(Fraction, st.integers(-4, 4), st.integers(1, 3))


@st.composite
def terms(draw):
    t = Term()
    for _ in range(draw(st.integers(1, 3))):
        t = t + Term.var(draw(_names)).scale(draw(_rats))
    if draw(st.booleans()):
        t = t + Term.const(draw(_rats))
    if draw(st.booleans()):
        t = t + Term.ein(draw(_rats))
    return t


@st.composite
def formulas(draw, depth=3):
    if depth == 0 or draw(st.integers(0, 2)) == 0:
        kind = draw(st.sampled_from(list(AtomKind)))
        return AtomF(Atom(kind, draw(terms())))
    shape = draw(st.integers(0, 4))
    if shape == 0:
        return Not(draw(formulas(depth=depth - 1)))
    if shape == 1:
        return And(draw(formulas(depth=depth - 1)), draw(formulas(depth=depth - 1)))
    if shape == 2:
        return Or(draw(formulas(depth=depth - 1)), draw(formulas(depth=depth - 1)))
    cls = Exists if shape == 3 else Forall
    return cls(draw(_names), draw(formulas(depth=depth - 1)))


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_print_parse_round_trip(f):
    text = print_formula(f)
    g = parse_formula(text)
    assert canonicalize_bound(g) == canonicalize_bound(f)
    assert free_vars(g) == free_vars(f)
