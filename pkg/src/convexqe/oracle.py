"""Independent truth oracle by coordinate decomposition.

Group operations act componentwise and the order is lexicographic, so every
formula over a fixture model translates into a boolean combination of
one-dimensional linear-arithmetic conditions over Q, one per coordinate,
with at most one irrational-cut symbol (the deciding threshold entry).
Each quantifier is eliminated coordinate-by-coordinate with a small,
self-contained Fourier-Motzkin pass over a dense order without endpoints.

This module deliberately shares no elimination machinery with the main
engines; it is the differential-testing reference.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Union

from .errors import BudgetExceededError
from .models import (DEFAULT_PRECISION_BITS, DownwardCut, IrrationalOracle,
                     ModelDescriptor, PlusInf, Point, SubgroupLevel)
from .normalform import normalize_atoms
from .syntax import (And, AtomF, AtomKind, Exists, FalseF, Forall, Formula,
                     Implies, Not, Or, Term, TrueF, rename_bound)

DEFAULT_ORACLE_BUDGET = 200_000

ZERO = Fraction(0)


@dataclass(frozen=True)
class LinForm:
    """Linear form over coordinate symbols plus the cut symbol alpha."""

    coeffs: tuple[tuple[str, Fraction], ...] = ()
    alpha: Fraction = ZERO
    const: Fraction = ZERO

    @staticmethod
    def make(coeffs: Mapping[str, Fraction], alpha=ZERO, const=ZERO) -> "LinForm":
        items = tuple(sorted((s, q) for s, q in coeffs.items() if q != 0))
        return LinForm(items, Fraction(alpha), Fraction(const))

    def coeff(self, sym: str) -> Fraction:
        for s, q in self.coeffs:
            if s == sym:
                return q
        return ZERO

    def drop(self, sym: str) -> "LinForm":
        return LinForm(tuple((s, q) for s, q in self.coeffs if s != sym),
                       self.alpha, self.const)

    def add(self, other: "LinForm") -> "LinForm":
        d = dict(self.coeffs)
        for s, q in other.coeffs:
            d[s] = d.get(s, ZERO) + q
        return LinForm.make(d, self.alpha + other.alpha, self.const + other.const)

    def scale(self, q: Fraction) -> "LinForm":
        if q == 0:
            return LinForm()
        return LinForm(tuple((s, c * q) for s, c in self.coeffs),
                       self.alpha * q, self.const * q)

    def subst(self, sym: str, repl: "LinForm") -> "LinForm":
        c = self.coeff(sym)
        if c == 0:
            return self
        return self.drop(sym).add(repl.scale(c))

    @property
    def ground(self) -> bool:
        return not self.coeffs


@dataclass(frozen=True)
class CAtom:
    """form < 0 (kind 'lt') or form = 0 (kind 'eq') over one coordinate."""

    form: LinForm
    kind: str  # "lt" | "eq"

    def sort_key(self):
        return (self.kind, self.form.coeffs, self.form.alpha, self.form.const)


@dataclass(frozen=True)
class CLit:
    atom: CAtom
    neg: bool = False

    def sort_key(self):
        return (*self.atom.sort_key(), self.neg)


# boolean trees: True | False | CLit | ("&"|"|", left, right)
BNode = Union[bool, CLit, tuple]


class _Decomposer:
    def __init__(self, m: ModelDescriptor, budget: int):
        self.m = m
        self.budget = budget
        self.alpha: Optional[IrrationalOracle] = None
        if isinstance(m.u_interp, DownwardCut):
            for e in m.u_interp.threshold:
                if isinstance(e, IrrationalOracle):
                    self.alpha = e
                    break

    # ground decision of symbol-free atoms happens eagerly so trees stay small
    def _ground_sign(self, form: LinForm) -> Optional[int]:
        if form.coeffs:
            return None
        if form.alpha == 0:
            v = form.const
            return -1 if v < 0 else (1 if v > 0 else 0)
        assert self.alpha is not None
        q = -form.const / form.alpha
        s = -self.alpha.compare(q)  # sign of (alpha - q)
        return s if form.alpha > 0 else -s

    def lit(self, form: LinForm, kind: str, neg: bool = False) -> BNode:
        s = self._ground_sign(form)
        if s is not None:
            truth = (s < 0) if kind == "lt" else (s == 0)
            return truth != neg
        return CLit(CAtom(form, kind), neg)

    # -- term decomposition -------------------------------------------------

    def term_coord(self, t: Term, i: int) -> LinForm:
        m = self.m
        const = (t.offset * m.unit.coords[i] + t.e_in * m.e_in.coords[i]
                 + t.e_out * m.e_out.coords[i])
        coeffs = {f"{v}#{i}": q for v, q in t.coeffs}
        return LinForm.make(coeffs, ZERO, const)

    def lex_lt_zero(self, t: Term) -> BNode:
        out: BNode = False
        for i in reversed(range(self.m.dim)):
            fi = self.term_coord(t, i)
            out = _bor(self.lit(fi, "lt"), _band(self.lit(fi, "eq"), out))
        return out

    def eq_zero(self, t: Term) -> BNode:
        out: BNode = True
        for i in range(self.m.dim):
            out = _band(out, self.lit(self.term_coord(t, i), "eq"))
        return out

    def prefix_zero(self, t: Term, k: int) -> BNode:
        out: BNode = True
        for i in range(k):
            out = _band(out, self.lit(self.term_coord(t, i), "eq"))
        return out

    def u_atom(self, t: Term) -> BNode:
        m = self.m
        if isinstance(m.u_interp, SubgroupLevel):
            return self.prefix_zero(t, m.u_interp.level)
        cut = m.u_interp

        def walk(i: int) -> BNode:
            if i == m.dim:
                return not cut.strict
            entry = cut.threshold[i]
            fi = self.term_coord(t, i)
            if isinstance(entry, PlusInf):
                return True
            if isinstance(entry, Fraction):
                below = self.lit(fi.add(LinForm(const=-entry)), "lt")
                ateq = self.lit(fi.add(LinForm(const=-entry)), "eq")
                return _bor(below, _band(ateq, walk(i + 1)))
            # deciding irrational entry: t_i < alpha, never equal
            return self.lit(fi.add(LinForm(alpha=Fraction(-1))), "lt")

        return walk(0)

    def i_atom(self, t: Term) -> BNode:
        return self.prefix_zero(t, self.m.stabilizer_level())

    # -- formula decomposition ----------------------------------------------

    def decompose(self, f: Formula) -> BNode:
        if isinstance(f, TrueF):
            return True
        if isinstance(f, FalseF):
            return False
        if isinstance(f, Not):
            return _bnot(self.decompose(f.sub))
        if isinstance(f, And):
            return _band(self.decompose(f.lhs), self.decompose(f.rhs))
        if isinstance(f, Or):
            return _bor(self.decompose(f.lhs), self.decompose(f.rhs))
        if isinstance(f, Implies):
            return _bor(_bnot(self.decompose(f.lhs)), self.decompose(f.rhs))
        if isinstance(f, AtomF):
            a = f.atom
            if a.kind == AtomKind.LT:
                return self.lex_lt_zero(a.term)
            if a.kind == AtomKind.EQ:
                return self.eq_zero(a.term)
            if a.kind == AtomKind.UMEM:
                return self.u_atom(a.term)
            if a.kind == AtomKind.IMEM:
                return self.i_atom(a.term)
            raise AssertionError(a.kind)
        if isinstance(f, Exists):
            body = self.decompose(f.body)
            for i in range(self.m.dim):
                body = self.eliminate_sym(body, f"{f.var}#{i}")
            return body
        if isinstance(f, Forall):
            body = _bnot(self.decompose(Exists(f.var, Not(f.body))))
            return body
        raise TypeError(type(f))

    # -- one-dimensional elimination over a dense order ----------------------

    def eliminate_sym(self, node: BNode, sym: str) -> BNode:
        clauses = _bdnf(node, self.budget)
        out: BNode = False
        for clause in clauses:
            has_sym = any(l.atom.form.coeff(sym) != 0 for l in clause)
            if not has_sym:
                out = _bor(out, _clause_node(clause))
                continue
            for resolved in self._eliminate_clause(clause, sym):
                out = _bor(out, resolved)
        return out

    def _eliminate_clause(self, clause: list[CLit], sym: str) -> list[BNode]:
        passthrough = [l for l in clause if l.atom.form.coeff(sym) == 0]
        with_sym = [l for l in clause if l.atom.form.coeff(sym) != 0]

        # split negated strict bounds into reversed-strict or equality
        choices: list[list[tuple[LinForm, str]]] = [[]]
        for l in with_sym:
            form, kind, neg = l.atom.form, l.atom.kind, l.neg
            if not neg:
                opts = [(form, kind)]
            elif kind == "lt":
                opts = [(form.scale(Fraction(-1)), "lt"), (form, "eq")]
            else:
                opts = [(form, "neq")]
            choices = [c + [o] for c in choices for o in opts]
            if len(choices) > self.budget:
                raise BudgetExceededError("oracle split budget exceeded")

        results: list[BNode] = []
        for combo in choices:
            eqs = [(f, k) for f, k in combo if k == "eq"]
            extra: list[BNode] = []
            if eqs:
                f0, _ = eqs[0]
                c = f0.coeff(sym)
                repl = f0.drop(sym).scale(Fraction(-1) / c)
                ok = True
                for f, k in combo:
                    if (f, k) is eqs[0]:
                        continue
                    g = f.subst(sym, repl)
                    if k == "neq":
                        n = self.lit(g, "eq", neg=True)
                    else:
                        n = self.lit(g, k)
                    if n is False:
                        ok = False
                        break
                    if n is not True:
                        extra.append(n)
                if not ok:
                    continue
            else:
                lowers: list[LinForm] = []
                uppers: list[LinForm] = []
                for f, k in combo:
                    if k == "neq":
                        continue  # density: finitely many points never empty an open set
                    c = f.coeff(sym)
                    bound = f.drop(sym).scale(Fraction(-1) / c)
                    (uppers if c > 0 else lowers).append(bound)
                ok = True
                for lo in lowers:
                    for up in uppers:
                        n = self.lit(lo.add(up.scale(Fraction(-1))), "lt")
                        if n is False:
                            ok = False
                            break
                        if n is not True:
                            extra.append(n)
                    if not ok:
                        break
                if not ok:
                    continue
            node = _clause_node(passthrough)
            for e in extra:
                node = _band(node, e)
            results.append(node)
        return results


# ---------------------------------------------------------------------------
# boolean-tree helpers


def _band(a: BNode, b: BNode) -> BNode:
    if a is False or b is False:
        return False
    if a is True:
        return b
    if b is True:
        return a
    return ("&", a, b)


def _bor(a: BNode, b: BNode) -> BNode:
    if a is True or b is True:
        return True
    if a is False:
        return b
    if b is False:
        return a
    return ("|", a, b)


def _bnot(a: BNode) -> BNode:
    if a is True:
        return False
    if a is False:
        return True
    if isinstance(a, CLit):
        return CLit(a.atom, not a.neg)
    op, l, r = a
    if op == "&":
        return _bor(_bnot(l), _bnot(r))
    return _band(_bnot(l), _bnot(r))


def _clause_node(lits: list[CLit]) -> BNode:
    node: BNode = True
    for l in lits:
        node = _band(node, l)
    return node


def _bdnf(node: BNode, budget: int) -> list[list[CLit]]:
    def go(n: BNode) -> list[list[CLit]]:
        if n is True:
            return [[]]
        if n is False:
            return []
        if isinstance(n, CLit):
            return [[n]]
        op, l, r = n
        left = go(l)
        right = go(r)
        if op == "|":
            if len(left) + len(right) > budget:
                raise BudgetExceededError("oracle DNF budget exceeded")
            return left + right
        if len(left) * max(len(right), 1) > budget:
            raise BudgetExceededError("oracle DNF budget exceeded")
        return [a + b for a in left for b in right]

    out = []
    seen = set()
    for clause in go(node):
        kept: dict = {}
        drop = False
        for lit in clause:
            key = lit.atom.sort_key()
            prev = kept.get(key)
            if prev is None:
                kept[key] = lit
            elif prev.neg != lit.neg:
                drop = True
                break
        if drop:
            continue
        cleaned = sorted(kept.values(), key=CLit.sort_key)
        key2 = tuple(l.sort_key() for l in cleaned)
        if key2 not in seen:
            seen.add(key2)
            out.append(cleaned)
    return out


# ---------------------------------------------------------------------------
# public interface


class OracleDecision:
    """Residual condition of a formula over one model: a boolean tree over
    coordinate atoms in the free variables, evaluated per assignment."""

    def __init__(self, m: ModelDescriptor, tree: BNode,
                 alpha: Optional[IrrationalOracle]):
        self.model = m
        self.tree = tree
        self.alpha = alpha

    def eval(self, asgn: Mapping[str, Point],
             precision: int = DEFAULT_PRECISION_BITS) -> bool:
        cache: dict = {}

        def atom_val(atom: CAtom) -> bool:
            v = cache.get(atom)
            if v is None:
                total = atom.form.const
                acoef = atom.form.alpha
                for s, q in atom.form.coeffs:
                    var, idx = s.rsplit("#", 1)
                    total += q * asgn[var].coords[int(idx)]
                if acoef == 0:
                    sign = -1 if total < 0 else (1 if total > 0 else 0)
                else:
                    assert self.alpha is not None
                    srel = -self.alpha.compare(-total / acoef, precision)
                    sign = srel if acoef > 0 else -srel
                v = (sign < 0) if atom.kind == "lt" else (sign == 0)
                cache[atom] = v
            return v

        def go(n: BNode) -> bool:
            if n is True or n is False:
                return n
            if isinstance(n, CLit):
                v = atom_val(n.atom)
                return (not v) if n.neg else v
            op, l, r = n
            if op == "&":
                return go(l) and go(r)
            return go(l) or go(r)

        return go(self.tree)


class IntOracleEval:
    """Integer fast path over a decided tree: coordinate symbols are looked
    up as numerators over a fixed denominator and each atom is pre-scaled
    to integer coefficients."""

    def __init__(self, dec: "OracleDecision", denom: int):
        import math as _math
        self.alpha = dec.alpha
        self._atoms: list[CAtom] = []
        index: dict = {}

        def build(n: BNode):
            if n is True or n is False:
                return n
            if isinstance(n, CLit):
                key = n.atom.sort_key()
                i = index.get(key)
                if i is None:
                    i = len(self._atoms)
                    index[key] = i
                    self._atoms.append(n.atom)
                return ("~", ("a", i)) if n.neg else ("a", i)
            op, l, r = n
            return (op, build(l), build(r))

        self.tree = build(dec.tree)
        self._compiled = []
        for a in self._atoms:
            dens = [q.denominator for _, q in a.form.coeffs]
            dens.append(a.form.alpha.denominator)
            dens.append(a.form.const.denominator)
            lc = 1
            for d in dens:
                lc = lc * d // _math.gcd(lc, d)
            entries = []
            for sym, q in a.form.coeffs:
                var, idx = sym.rsplit("#", 1)
                entries.append((var, int(idx), int(q * lc)))
            # scaled value = sum(entries) + const*lc*denom + (alpha_c*lc*denom)*alpha
            self._compiled.append((a.kind == "lt", tuple(entries),
                                   int(a.form.alpha * lc) * denom,
                                   int(a.form.const * lc) * denom))

    def _atom_value(self, i: int, coords) -> bool:
        is_lt, entries, alpha_scaled, const = self._compiled[i]
        total = const
        for var, ci, coef in entries:
            total += coef * coords[var][ci]
        if alpha_scaled == 0:
            sign = -1 if total < 0 else (1 if total > 0 else 0)
        else:
            srel = -self.alpha.compare(Fraction(-total, alpha_scaled))
            sign = srel if alpha_scaled > 0 else -srel
        return (sign < 0) if is_lt else (sign == 0)

    def eval(self, coords) -> bool:
        cache: list = [None] * len(self._atoms)

        def go(n) -> bool:
            if n is True or n is False:
                return n
            op = n[0]
            if op == "a":
                i = n[1]
                v = cache[i]
                if v is None:
                    v = cache[i] = self._atom_value(i, coords)
                return v
            if op == "~":
                return not go(n[1])
            if op == "&":
                return go(n[1]) and go(n[2])
            return go(n[1]) or go(n[2])

        return go(self.tree)


@functools.lru_cache(maxsize=4096)
def _compile(m: ModelDescriptor, f: Formula, budget: int) -> OracleDecision:
    d = _Decomposer(m, budget)
    tree = d.decompose(normalize_atoms(rename_bound(f)))
    return OracleDecision(m, tree, d.alpha)


def oracle_compile(m: ModelDescriptor, f: Formula,
                   budget: int = DEFAULT_ORACLE_BUDGET) -> OracleDecision:
    return _compile(m, f, budget)


def oracle_truth(m: ModelDescriptor, f: Formula, asgn: Mapping[str, Point],
                 budget: int = DEFAULT_ORACLE_BUDGET,
                 precision: int = DEFAULT_PRECISION_BITS) -> bool:
    """Decide f under asgn by coordinate decomposition (reference path)."""
    return _compile(m, f, budget).eval(asgn, precision)
