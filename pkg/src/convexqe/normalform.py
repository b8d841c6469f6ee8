"""Atom normalization, negation normal form, DNF, and light simplification.

After ``normalize_atoms`` only LT / EQ / U / I atoms occur and the only
connectives are ~, &, |, E, A.  ``<=`` becomes a negated ``<`` and ``!=`` a
negated ``=``, so downstream code deals with four atom kinds and a polarity
bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import BudgetExceededError
from .syntax import (And, Atom, AtomF, AtomKind, Exists, FALSE, FalseF, Forall,
                     Formula, Implies, Not, Or, TRUE, TrueF, conj, disj)

DEFAULT_DNF_BUDGET = 50_000


def normalize_atoms(f: Formula) -> Formula:
    """Rewrite <= and != away and lower -> to ~/|; equivalent over every
    model."""
    if isinstance(f, AtomF):
        a = f.atom
        if a.kind == AtomKind.LE:
            # t <= 0  <=>  ~(-t < 0)
            return Not(AtomF(Atom(AtomKind.LT, -a.term)))
        if a.kind == AtomKind.NEQ:
            return Not(AtomF(Atom(AtomKind.EQ, a.term)))
        return f
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return Not(normalize_atoms(f.sub))
    if isinstance(f, Implies):
        return Or(Not(normalize_atoms(f.lhs)), normalize_atoms(f.rhs))
    if isinstance(f, (And, Or)):
        return type(f)(normalize_atoms(f.lhs), normalize_atoms(f.rhs))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, normalize_atoms(f.body))
    raise TypeError(type(f))


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.negated)

    def to_formula(self) -> Formula:
        f: Formula = AtomF(self.atom)
        return Not(f) if self.negated else f

    def sort_key(self):
        return (*self.atom.sort_key(), self.negated)


def _fold_ground(atom: Atom) -> Optional[bool]:
    """Decide relational atoms whose argument is a bare rational multiple of
    the (positive) unit element."""
    t = atom.term
    if not t.is_offset_only:
        return None
    if atom.kind == AtomKind.LT:
        return t.offset < 0
    if atom.kind == AtomKind.EQ:
        return t.offset == 0
    if atom.kind == AtomKind.IMEM and t.offset == 0:
        return True
    if atom.kind == AtomKind.UMEM and t.offset == 0:
        # 0 need not lie in a downward cut in general; do not fold.
        return None
    return None


def literal_truth(lit: Literal) -> Optional[bool]:
    v = _fold_ground(lit.atom)
    if v is None:
        return None
    return (not v) if lit.negated else v


def nnf(f: Formula) -> Formula:
    """Push negations down to literals.  Input must be quantifier-free with
    normalized atoms."""
    def pos(g: Formula) -> Formula:
        if isinstance(g, (TrueF, FalseF, AtomF)):
            return g
        if isinstance(g, Not):
            return neg(g.sub)
        if isinstance(g, (And, Or)):
            return type(g)(pos(g.lhs), pos(g.rhs))
        raise TypeError(f"nnf expects a normalized quantifier-free formula, got {type(g)}")

    def neg(g: Formula) -> Formula:
        if isinstance(g, TrueF):
            return FALSE
        if isinstance(g, FalseF):
            return TRUE
        if isinstance(g, AtomF):
            return Not(g)
        if isinstance(g, Not):
            return pos(g.sub)
        if isinstance(g, And):
            return Or(neg(g.lhs), neg(g.rhs))
        if isinstance(g, Or):
            return And(neg(g.lhs), neg(g.rhs))
        raise TypeError(f"nnf expects a normalized quantifier-free formula, got {type(g)}")

    return pos(f)


def dnf_clauses(f: Formula, budget: int = DEFAULT_DNF_BUDGET) -> list[list[Literal]]:
    """Clause list of a quantifier-free normalized formula; deterministic
    literal ordering, contradictory clauses dropped."""
    g = nnf(f)

    def go(h: Formula) -> list[list[Literal]]:
        if isinstance(h, TrueF):
            return [[]]
        if isinstance(h, FalseF):
            return []
        if isinstance(h, AtomF):
            return [[Literal(h.atom)]]
        if isinstance(h, Not):
            assert isinstance(h.sub, AtomF)
            return [[Literal(h.sub.atom, True)]]
        if isinstance(h, Or):
            left = go(h.lhs)
            right = go(h.rhs)
            if len(left) + len(right) > budget:
                raise BudgetExceededError("DNF clause budget exceeded")
            return left + right
        if isinstance(h, And):
            left = go(h.lhs)
            right = go(h.rhs)
            if len(left) * max(len(right), 1) > budget:
                raise BudgetExceededError("DNF clause budget exceeded")
            return [a + b for a in left for b in right]
        raise TypeError(type(h))

    out = []
    seen = set()
    for clause in go(g):
        cleaned = _clean_clause(clause)
        if cleaned is None:
            continue
        key = tuple(l.sort_key() for l in cleaned)
        if key not in seen:
            seen.add(key)
            out.append(cleaned)
    return out


def _clean_clause(clause: list[Literal]) -> Optional[list[Literal]]:
    kept: dict = {}
    for lit in clause:
        v = literal_truth(lit)
        if v is True:
            continue
        if v is False:
            return None
        key = (lit.atom.kind, lit.atom.term.sort_key())
        prev = kept.get(key)
        if prev is None:
            kept[key] = lit
        elif prev.negated != lit.negated:
            return None
    return sorted(kept.values(), key=Literal.sort_key)


def clause_formula(clause: Iterable[Literal]) -> Formula:
    return conj(l.to_formula() for l in clause)


def to_dnf(f: Formula, budget: int = DEFAULT_DNF_BUDGET) -> Formula:
    """Disjunction of conjunctions of literals, equivalent to the input."""
    return disj(clause_formula(c) for c in dnf_clauses(f, budget))


def simplify(f: Formula) -> Formula:
    """Cheap bottom-up constant folding; preserves equivalence."""
    if isinstance(f, AtomF):
        v = _fold_ground(f.atom)
        if v is True:
            return TRUE
        if v is False:
            return FALSE
        return f
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        s = simplify(f.sub)
        if isinstance(s, TrueF):
            return FALSE
        if isinstance(s, FalseF):
            return TRUE
        if isinstance(s, Not):
            return s.sub
        return Not(s)
    if isinstance(f, And):
        a, b = simplify(f.lhs), simplify(f.rhs)
        if isinstance(a, FalseF) or isinstance(b, FalseF):
            return FALSE
        if isinstance(a, TrueF):
            return b
        if isinstance(b, TrueF):
            return a
        if a == b:
            return a
        return And(a, b)
    if isinstance(f, Or):
        a, b = simplify(f.lhs), simplify(f.rhs)
        if isinstance(a, TrueF) or isinstance(b, TrueF):
            return TRUE
        if isinstance(a, FalseF):
            return b
        if isinstance(b, FalseF):
            return a
        if a == b:
            return a
        return Or(a, b)
    if isinstance(f, Implies):
        return simplify(Or(Not(f.lhs), f.rhs))
    if isinstance(f, (Exists, Forall)):
        body = simplify(f.body)
        if isinstance(body, (TrueF, FalseF)):
            return body
        return type(f)(f.var, body)
    raise TypeError(type(f))
