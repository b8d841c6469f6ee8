"""Quantifier elimination and Skolem-witness extraction for the language
with the convex predicate U and its stabilizer subgroup I.

Every literal mentioning the eliminated variable confines it to a convex
set on the line: a strict point ray, a translate of the working subgroup
(a coset), the region above or below such a coset, or (for cuts whose
quotient edge is irrational) a ray whose endpoint is an affine image of the
cut.  Convex sets on a line satisfy the pairwise Helly property, so the
existential reduces to a conjunction of pairwise compatibility conditions,
each of which compiles to a quantifier-free formula via the comparison
table below.  Equalities are substituted first; with no equality the
intersection has no greatest or least element, so disequalities are
discharged by density.

Interpretation classes:

* subgroup         - U itself is the working subgroup (I coincides with it);
* coset-topped cut - the cut is {x : x <= t + I} for a term t naming the top
                     coset; U-atoms are rewritten into order and I atoms;
* irrational cut   - the quotient edge is irrational; U-literals become cut
                     rays handled by the endpoint comparison table;
* rational cut     - U-atoms become order atoms against the threshold term
                     and the whole problem drops to the base engine;
* nonvaluational   - refused: no complete Skolemizing elimination exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional

from . import doagqe
from .cutarith import (cut_info, escape_witness, member_witness_above,
                       rational_prefix)
from .doagqe import QeOptions
from .errors import (BudgetExceededError, NonvaluationalInterpretationError,
                     SkolemShapeUnsupportedError, UnsupportedCutError)
from .models import (DownwardCut, ModelDescriptor, Point, SubgroupLevel,
                     term_value, u_member)
from .normalform import (Literal, dnf_clauses, normalize_atoms, simplify)
from .piecewise import UnaryPiecewiseLinear
from .syntax import (And, Atom, AtomF, AtomKind, Exists, FalseF, Forall,
                     Formula, Implies, Not, Or, Term, TrueF, conj, disj,
                     is_quantifier_free, rename_bound)

F0 = Fraction(0)
F1 = Fraction(1)


class CutClass(Enum):
    SUBGROUP = "subgroup"
    IRRATIONAL_CUT = "irrational-cut"
    COSET_CUT = "coset-topped-cut"
    RATIONAL_CUT = "rational-cut"
    NONVALUATIONAL = "nonvaluational"


@dataclass(frozen=True)
class CutStructure:
    """Elimination-relevant shape of one model's U interpretation."""

    model: ModelDescriptor
    cls: CutClass
    mem_kind: AtomKind  # atom kind whose cosets drive the machinery
    tau: Optional[Term] = None  # names the top coset / rational threshold
    strict: bool = True
    anchor_in: Term = Term(e_in=F1)  # a term provably inside the cut

    def require_eliminable(self):
        if self.cls is CutClass.NONVALUATIONAL:
            raise NonvaluationalInterpretationError(
                "the cut has trivial stabilizer; elimination would be unsound")


def _inside_anchor(m: ModelDescriptor) -> Term:
    """A closed term whose value provably lies in the cut; e_in when the cut
    contains it, otherwise a negative multiple of the unit."""
    if u_member(m, m.e_in):
        return Term(e_in=F1)
    n = 1
    while n < 2 ** 64:
        if u_member(m, m.unit.scale(-n)):
            return Term.const(-n)
        n *= 2
    raise UnsupportedCutError("no rational multiple of the unit is inside the cut")


def _solve_columns(cols: list[tuple[Fraction, ...]],
                   target: tuple[Fraction, ...]) -> Optional[list[Fraction]]:
    """One exact solution of sum_i x_i * cols[i] = target, or None."""
    rows = len(target)
    ncols = len(cols)
    aug = [[cols[c][r] for c in range(ncols)] + [target[r]] for r in range(rows)]
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, rows) if aug[i][c] != 0), None)
        if pr is None:
            continue
        aug[r], aug[pr] = aug[pr], aug[r]
        pivot = aug[r][c]
        aug[r] = [v / pivot for v in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c] != 0:
                factor = aug[i][c]
                aug[i] = [a - factor * b for a, b in zip(aug[i], aug[r])]
        pivots.append((r, c))
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if aug[i][ncols] != 0:
            return None
    sol = [F0] * ncols
    for pr, pc in pivots:
        sol[pc] = aug[pr][ncols]
    return sol


def build_structure(m: ModelDescriptor) -> CutStructure:
    info = cut_info(m)
    if info.kind == "subgroup":
        return CutStructure(m, CutClass.SUBGROUP, AtomKind.UMEM)
    if info.kind == "oracle" and not info.valuational:
        return CutStructure(m, CutClass.NONVALUATIONAL, AtomKind.IMEM)
    if info.kind == "oracle":
        return CutStructure(m, CutClass.IRRATIONAL_CUT, AtomKind.IMEM,
                            anchor_in=_inside_anchor(m))
    unit = m.unit
    if info.kind == "coset":
        k = info.stabilizer
        cols = [tuple(unit.coords[:k]), tuple(m.e_out.coords[:k])]
        target = rational_prefix(m, k)
        sol = _solve_columns(cols, target)
        if sol is None:
            raise UnsupportedCutError(
                "no closed term names the cut's top coset; quantifier-free "
                "answers do not exist in this language")
        tau = Term.const(sol[0]) + Term.eout(sol[1])
        return CutStructure(m, CutClass.COSET_CUT, AtomKind.IMEM, tau,
                            anchor_in=_inside_anchor(m))
    # rational cut: name the threshold point itself
    cols = [tuple(unit.coords), tuple(m.e_in.coords), tuple(m.e_out.coords)]
    target = rational_prefix(m, m.dim)
    sol = _solve_columns(cols, target)
    if sol is None:
        raise UnsupportedCutError(
            "no closed term names the rational threshold point")
    tau = Term.const(sol[0]) + Term.ein(sol[1]) + Term.eout(sol[2])
    return CutStructure(m, CutClass.RATIONAL_CUT, AtomKind.UMEM, tau,
                        m.u_interp.strict)


# ---------------------------------------------------------------------------
# class-specific rewrites


def _map_atoms(f: Formula, fn) -> Formula:
    if isinstance(f, AtomF):
        return fn(f.atom)
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return Not(_map_atoms(f.sub, fn))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_map_atoms(f.lhs, fn), _map_atoms(f.rhs, fn))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, _map_atoms(f.body, fn))
    raise TypeError(type(f))


def rewrite_for_class(f: Formula, st: CutStructure) -> Formula:
    """Normalize U/I atoms into the working vocabulary of the class."""
    if st.cls is CutClass.SUBGROUP:
        def sub_fn(a: Atom) -> Formula:
            if a.kind == AtomKind.IMEM:  # stabilizer of the closure = U itself
                return AtomF(Atom(AtomKind.UMEM, a.term))
            return AtomF(a)
        return _map_atoms(f, sub_fn)
    if st.cls is CutClass.COSET_CUT:
        tau = st.tau
        def coset_fn(a: Atom) -> Formula:
            if a.kind == AtomKind.UMEM:
                # t in U  <=>  t - tau < 0  or  I(t - tau)
                d = a.term - tau
                return Or(AtomF(Atom(AtomKind.LT, d)), AtomF(Atom(AtomKind.IMEM, d)))
            return AtomF(a)
        return _map_atoms(f, coset_fn)
    if st.cls is CutClass.RATIONAL_CUT:
        tau, strict = st.tau, st.strict
        def rat_fn(a: Atom) -> Formula:
            if a.kind == AtomKind.UMEM:
                if strict:
                    return AtomF(Atom(AtomKind.LT, a.term - tau))
                return Not(AtomF(Atom(AtomKind.LT, tau - a.term)))
            if a.kind == AtomKind.IMEM:  # trivial stabilizer
                return AtomF(Atom(AtomKind.EQ, a.term))
            return AtomF(a)
        return _map_atoms(f, rat_fn)
    return f


# ---------------------------------------------------------------------------
# constraint extraction


@dataclass(frozen=True)
class CutRay:
    """The literal (not positive => negated) U(a*v + s): a ray whose virtual
    endpoint is (sup U - s)/a."""

    a: Fraction
    s: Term
    positive: bool

    @property
    def is_upper(self) -> bool:
        return self.positive == (self.a > 0)

    def literal_at(self, t: Term) -> Formula:
        at = AtomF(Atom(AtomKind.UMEM, t.scale(self.a) + self.s))
        return at if self.positive else Not(at)


@dataclass
class PureBranch:
    """One case of a conjunct after all non-convex literals are split."""

    lowers: list[Term] = field(default_factory=list)
    uppers: list[Term] = field(default_factory=list)
    eqs: list[Term] = field(default_factory=list)
    neqs: list[Term] = field(default_factory=list)
    mems: list[Term] = field(default_factory=list)
    aboves: list[Term] = field(default_factory=list)
    belows: list[Term] = field(default_factory=list)
    rays: list[CutRay] = field(default_factory=list)
    residual: list[Formula] = field(default_factory=list)


def _branch_options(lit: Literal, v: str, st: CutStructure) -> list[tuple]:
    """Per-literal convex cases; each option is a tag plus normalized data."""
    a = lit.atom
    c = a.term.coeff(v)
    rest = a.term.drop_var(v)
    solved = rest.scale(Fraction(-1) / c)
    kind = a.kind
    if kind == AtomKind.LT:
        if not lit.negated:
            return [(("upper" if c > 0 else "lower"), solved)]
        # ~(t < 0): -t < 0 or t = 0
        return [(("lower" if c > 0 else "upper"), solved), ("eq", solved)]
    if kind == AtomKind.EQ:
        return [("neq" if lit.negated else "eq", solved)]
    if kind == st.mem_kind:
        if not lit.negated:
            return [("mem", solved)]
        return [("above", solved), ("below", solved)]
    if kind == AtomKind.UMEM and st.cls is CutClass.IRRATIONAL_CUT:
        return [("ray", CutRay(c, rest, not lit.negated))]
    raise AssertionError(f"unhandled literal {lit} for class {st.cls}")


def _expand(literals: Iterable[Literal], v: str, st: CutStructure,
            budget: int) -> list[PureBranch]:
    residual = []
    with_v = []
    for lit in literals:
        if lit.atom.term.coeff(v) == 0:
            residual.append(lit.to_formula())
        else:
            with_v.append(lit)
    combos: list[list[tuple]] = [[]]
    for lit in with_v:
        opts = _branch_options(lit, v, st)
        combos = [c + [o] for c in combos for o in opts]
        if len(combos) > budget:
            raise BudgetExceededError("case-split budget exceeded")
    out = []
    for combo in combos:
        br = PureBranch(residual=list(residual))
        for tag, data in combo:
            getattr(br, {"lower": "lowers", "upper": "uppers", "eq": "eqs",
                         "neq": "neqs", "mem": "mems", "above": "aboves",
                         "below": "belows", "ray": "rays"}[tag]).append(data)
        out.append(br)
    return out


# ---------------------------------------------------------------------------
# the comparison table


def _mem(st: CutStructure, t: Term) -> Formula:
    return AtomF(Atom(st.mem_kind, t))


def _above(st: CutStructure, t: Term) -> Formula:
    """t sits strictly above the working subgroup."""
    return And(AtomF(Atom(AtomKind.LT, -t)), Not(_mem(st, t)))


def _below(st: CutStructure, t: Term) -> Formula:
    return And(AtomF(Atom(AtomKind.LT, t)), Not(_mem(st, t)))


def _gamma_compare(st: CutStructure, r1: CutRay, r2: CutRay) -> Formula:
    """endpoint(r1) < endpoint(r2), endpoints (sup U - s_i)/a_i."""
    a1, a2 = r1.a, r2.a
    less = a1 * a2 > 0
    mcoef = a2 - a1
    w = r1.s.scale(a2) - r2.s.scale(a1)
    # condition: mcoef * supU  (< if less else >)  w
    if mcoef == 0:
        if less:
            return And(AtomF(Atom(AtomKind.LT, -w)), Not(_mem(st, w)))
        return And(AtomF(Atom(AtomKind.LT, w)), Not(_mem(st, w)))
    t = w.scale(F1 / mcoef)
    want_gamma_less = less if mcoef > 0 else not less
    if want_gamma_less:
        return Not(AtomF(Atom(AtomKind.UMEM, t)))
    return AtomF(Atom(AtomKind.UMEM, t))


def _pair_condition(st: CutStructure, lo: tuple, up: tuple,
                    inject_bug: bool = False) -> Formula:
    lk, lv = lo
    uk, uv = up
    if lk == "pt" and uk == "pt":
        if inject_bug:  # test hook: deliberately reversed bound pair
            return AtomF(Atom(AtomKind.LT, uv - lv))
        return AtomF(Atom(AtomKind.LT, lv - uv))
    if lk == "pt" and uk == "cb":
        return _below(st, lv - uv)
    if lk == "pt" and uk == "ray":
        return uv.literal_at(lv)
    if lk == "ca" and uk == "pt":
        return _above(st, uv - lv)
    if lk == "ca" and uk == "cb":
        return _above(st, uv - lv)
    if lk == "ca" and uk == "ray":
        return uv.literal_at(lv)
    if lk == "ray" and uk == "pt":
        return lv.literal_at(uv)
    if lk == "ray" and uk == "cb":
        return lv.literal_at(uv)
    if lk == "ray" and uk == "ray":
        return _gamma_compare(st, lv, uv)
    raise AssertionError((lk, uk))


def _mem_condition(st: CutStructure, c: Term, other: tuple) -> Formula:
    kind, val = other
    if kind == "pt_lower":
        return Not(_above(st, val - c))
    if kind == "pt_upper":
        return Not(_below(st, val - c))
    if kind == "ca":
        return _above(st, c - val)
    if kind == "cb":
        return _below(st, c - val)
    if kind == "ray":
        return val.literal_at(c)
    if kind == "mem":
        return _mem(st, c - val)
    raise AssertionError(kind)


def _branch_at(br: PureBranch, st: CutStructure, w: Term) -> list[Formula]:
    """All branch constraints instantiated at v := w."""
    parts = list(br.residual)
    for t in br.eqs:
        parts.append(AtomF(Atom(AtomKind.EQ, w - t)))
    for t in br.neqs:
        parts.append(Not(AtomF(Atom(AtomKind.EQ, w - t))))
    for t in br.lowers:
        parts.append(AtomF(Atom(AtomKind.LT, t - w)))
    for t in br.uppers:
        parts.append(AtomF(Atom(AtomKind.LT, w - t)))
    for t in br.mems:
        parts.append(_mem(st, w - t))
    for t in br.aboves:
        parts.append(_above(st, w - t))
    for t in br.belows:
        parts.append(_below(st, w - t))
    for r in br.rays:
        parts.append(r.literal_at(w))
    return parts


def _branch_condition(br: PureBranch, st: CutStructure,
                      inject_bug: bool = False) -> Formula:
    """Quantifier-free satisfiability condition of one pure branch."""
    if br.eqs:
        pin = br.eqs[0]
        reduced = PureBranch(lowers=br.lowers, uppers=br.uppers,
                             eqs=br.eqs[1:], neqs=br.neqs, mems=br.mems,
                             aboves=br.aboves, belows=br.belows, rays=br.rays,
                             residual=br.residual)
        return conj(_branch_at(reduced, st, pin))
    lower_objs = ([("pt", t) for t in br.lowers]
                  + [("ca", t) for t in br.aboves]
                  + [("ray", r) for r in br.rays if not r.is_upper])
    upper_objs = ([("pt", t) for t in br.uppers]
                  + [("cb", t) for t in br.belows]
                  + [("ray", r) for r in br.rays if r.is_upper])
    parts = list(br.residual)
    for lo in lower_objs:
        for up in upper_objs:
            parts.append(_pair_condition(st, lo, up, inject_bug))
    for i, c in enumerate(br.mems):
        for c2 in br.mems[i + 1:]:
            parts.append(_mem_condition(st, c, ("mem", c2)))
        for t in br.lowers:
            parts.append(_mem_condition(st, c, ("pt_lower", t)))
        for t in br.uppers:
            parts.append(_mem_condition(st, c, ("pt_upper", t)))
        for t in br.aboves:
            parts.append(_mem_condition(st, c, ("ca", t)))
        for t in br.belows:
            parts.append(_mem_condition(st, c, ("cb", t)))
        for r in br.rays:
            parts.append(_mem_condition(st, c, ("ray", r)))
    # disequalities: the convex intersection, if nonempty, has no extreme
    # points, hence is infinite; finitely many excluded points never empty it
    return conj(parts)


# ---------------------------------------------------------------------------
# elimination


def _eliminate_clause(clause: list[Literal], v: str, st: CutStructure,
                      options: QeOptions) -> Formula:
    branches = _expand(clause, v, st, options.dnf_budget)
    return simplify(disj(_branch_condition(br, st, options.inject_bug)
                         for br in branches))


def eliminate_one_cut(literals: list[Literal], v: str,
                      st: CutStructure,
                      options: Optional[QeOptions] = None) -> Formula:
    """v-free equivalent of the existential over one conjunct of normalized
    literals, possibly containing U/I atoms."""
    options = options or QeOptions()
    st.require_eliminable()
    f = conj(l.to_formula() for l in literals)
    f = rewrite_for_class(f, st)
    if st.cls is CutClass.RATIONAL_CUT:
        return simplify(disj(doagqe.eliminate_one(list(c), v, options)
                             for c in dnf_clauses(f, options.dnf_budget)))
    return simplify(disj(_eliminate_clause(list(c), v, st, options)
                         for c in dnf_clauses(f, options.dnf_budget)))


def _qe_rec(f: Formula, st: CutStructure, options: QeOptions, depth: int) -> Formula:
    if depth > options.depth_budget:
        raise BudgetExceededError("quantifier depth budget exceeded")
    if isinstance(f, (TrueF, FalseF, AtomF)):
        return f
    if isinstance(f, Not):
        return Not(_qe_rec(f.sub, st, options, depth))
    if isinstance(f, (And, Or)):
        return type(f)(_qe_rec(f.lhs, st, options, depth),
                       _qe_rec(f.rhs, st, options, depth))
    if isinstance(f, Implies):
        return Or(Not(_qe_rec(f.lhs, st, options, depth)),
                  _qe_rec(f.rhs, st, options, depth))
    if isinstance(f, Forall):
        return simplify(Not(_qe_rec(Exists(f.var, Not(f.body)), st, options,
                                    depth + 1)))
    if isinstance(f, Exists):
        body = _qe_rec(f.body, st, options, depth + 1)
        clauses = dnf_clauses(body, options.dnf_budget)
        return simplify(disj(_eliminate_clause(list(c), f.var, st, options)
                             for c in clauses))
    raise TypeError(type(f))


def _formula_mentions_cut(f: Formula) -> bool:
    from .syntax import atoms_of
    return any(a.kind in (AtomKind.UMEM, AtomKind.IMEM) for a in atoms_of(f))


def qe_star(f: Formula, st: CutStructure,
            options: Optional[QeOptions] = None) -> Formula:
    """Quantifier-free equivalent of f over the given model class."""
    options = options or QeOptions()
    if st.cls is CutClass.NONVALUATIONAL:
        if _formula_mentions_cut(f):
            st.require_eliminable()
        return doagqe.qe(f, options)
    f = normalize_atoms(rename_bound(f))
    f = rewrite_for_class(f, st)
    if st.cls is CutClass.RATIONAL_CUT:
        return doagqe.qe(f, options)
    return simplify(_qe_rec(f, st, options, 0))


def qe_star_model(f: Formula, m: ModelDescriptor,
                  options: Optional[QeOptions] = None) -> Formula:
    return qe_star(f, build_structure(m), options)


# ---------------------------------------------------------------------------
# Skolem synthesis


@dataclass(frozen=True)
class SkolemDefinition:
    """Ordered guarded witnesses: the first true guard selects its term."""

    target: str
    cases: tuple[tuple[Formula, Term], ...]

    def witness_for(self, m: ModelDescriptor, asgn) -> Optional[Point]:
        from .models import eval_formula
        for guard, term in self.cases:
            if eval_formula(m, guard, asgn):
                return term_value(m, term, asgn)
        return None


def _weighted_between(a: Term, b: Term, variants: int) -> list[Term]:
    n = variants + 1
    return [a.scale(Fraction(i, n)) + b.scale(Fraction(n - i, n))
            for i in range(1, n)]


def _ray_pivot(r: CutRay, st: CutStructure) -> Term:
    """A term provably inside the ray: solve a*v + s = w0 for a point w0 on
    the correct side of the cut (anchor_in sits in U, e_out above it)."""
    w0 = st.anchor_in if r.positive else Term.eout()
    return (w0 - r.s).scale(F1 / r.a)


def _branch_candidates(br: PureBranch, st: CutStructure) -> list[Term]:
    if br.eqs:
        return [br.eqs[0]]
    ein = Term.ein()
    eout = Term.eout()
    J = len(br.neqs) + 1
    out: list[Term] = []
    seen = set()

    def add(t: Term):
        if t not in seen:
            seen.add(t)
            out.append(t)

    ray_lowers = [r for r in br.rays if not r.is_upper]
    ray_uppers = [r for r in br.rays if r.is_upper]
    if br.mems:
        for c in br.mems:
            add(c)
            for j in range(1, J + 1):
                add(c + ein.scale(j))
                add(c - ein.scale(j))
        for l in br.lowers:
            for j in range(1, J + 1):
                add(l + ein.scale(j))
        for u in br.uppers:
            for j in range(1, J + 1):
                add(u - ein.scale(j))
        for l in br.lowers:
            for u in br.uppers:
                for t in _weighted_between(l, u, J):
                    add(t)
        return out

    # no coset pins the quotient position: a ray facing an opposite
    # quotient-scale edge would need a term between two irrational cut
    # images, which no finite guarded family of linear terms can supply
    if (ray_lowers and ray_uppers) or (ray_lowers and br.belows) \
            or (ray_uppers and br.aboves):
        raise SkolemShapeUnsupportedError(
            "branch needs a witness strictly between two cut edges")

    if not (br.lowers or br.uppers or br.aboves or br.belows or br.rays):
        for j in range(J + 1):
            add(ein.scale(j))
        return out
    for l in br.lowers:
        for j in range(1, J + 1):
            add(l + ein.scale(j))
    for u in br.uppers:
        for j in range(1, J + 1):
            add(u - ein.scale(j))
    for l in br.lowers:
        for u in br.uppers:
            for t in _weighted_between(l, u, J):
                add(t)
    for a in br.aboves:
        for j in range(J + 1):
            add(a + eout + ein.scale(j))
    for b in br.belows:
        for j in range(J + 1):
            add(b - eout - ein.scale(j))
    for a in br.aboves:
        for b in br.belows:
            for t in _weighted_between(a, b, J):
                add(t)
    for r in ray_lowers:
        base = _ray_pivot(r, st)
        for j in range(J + 1):
            add(base + ein.scale(j))
    for r in ray_uppers:
        base = _ray_pivot(r, st)
        for j in range(J + 1):
            add(base - ein.scale(j))
    return out


def skolemize(phi: Formula, target: str, st: CutStructure,
              options: Optional[QeOptions] = None) -> SkolemDefinition:
    """Guarded-term Skolem definition for the target variable of phi.

    Guards self-validate: each case's guard is the branch instantiated at
    its witness, so a firing guard proves the witness satisfies phi; the
    menu of candidates makes the guard disjunction cover the existential.
    """
    options = options or QeOptions()
    st.require_eliminable()
    phi0 = normalize_atoms(rename_bound(phi))
    if not is_quantifier_free(phi0):
        phi0 = qe_star(phi0, st, options)
    phi1 = rewrite_for_class(phi0, st)
    if st.cls is CutClass.RATIONAL_CUT:
        # the rewrite leaves a pure-group problem; reuse the cut machinery
        # with an empty coset vocabulary
        st = CutStructure(st.model, CutClass.IRRATIONAL_CUT, AtomKind.IMEM,
                          st.tau, st.strict)
    cases: list[tuple[Formula, Term]] = []
    seen = set()
    for clause in dnf_clauses(phi1, options.dnf_budget):
        for br in _expand(clause, target, st, options.dnf_budget):
            for w in _branch_candidates(br, st):
                if target in w.vars():
                    raise AssertionError("witness must not mention the target")
                guard = simplify(conj(_branch_at(br, st, w)))
                if isinstance(guard, FalseF):
                    continue
                key = (guard, w)
                if key not in seen:
                    seen.add(key)
                    cases.append((guard, w))
    return SkolemDefinition(target, tuple(cases))


def skolemize_model(phi: Formula, target: str, m: ModelDescriptor,
                    options: Optional[QeOptions] = None) -> SkolemDefinition:
    return skolemize(phi, target, build_structure(m), options)


# ---------------------------------------------------------------------------
# resistance checking (closure of U under a definable continuous function)


@dataclass(frozen=True)
class ResistanceResult:
    closed: bool
    witness: Optional[Point] = None  # a in U with f(a) outside U


def check_resistance(m: ModelDescriptor, f: UnaryPiecewiseLinear) -> ResistanceResult:
    """Closed iff f(U) is contained in U; otherwise a concrete witness."""
    f.require_continuous()
    if isinstance(m.u_interp, SubgroupLevel):
        return _check_resistance_subgroup(m, f)
    return _check_resistance_cut(m, f)


def _subgroup_point_in(m: ModelDescriptor, lo: Optional[Fraction],
                       hi: Optional[Fraction]) -> Optional[Point]:
    """A point of the subgroup U inside the unit-scale interval (lo, hi]."""
    if (lo is None or lo < 0) and (hi is None or hi > 0):
        return Point.zero(m.dim)
    if lo == 0 and (hi is None or hi > 0):
        return m.e_in  # positive, below every positive unit-scale bound
    if hi == 0 and (lo is None or lo < 0):
        return -m.e_in
    return None


def _check_resistance_subgroup(m: ModelDescriptor, f: UnaryPiecewiseLinear) -> ResistanceResult:
    bps = f.breakpoints
    for i, piece in enumerate(f.pieces):
        lo = bps[i - 1] if i > 0 else None
        hi = bps[i] if i < len(bps) else None
        x = _subgroup_point_in(m, lo, hi)
        if x is None:
            continue
        cval = term_value(m, piece.const, {})
        if not u_member(m, cval):
            return ResistanceResult(False, witness=x)
    return ResistanceResult(True)


def _check_resistance_cut(m: ModelDescriptor, f: UnaryPiecewiseLinear) -> ResistanceResult:
    assert isinstance(m.u_interp, DownwardCut)
    unit = m.unit
    bps = f.breakpoints
    for i, piece in enumerate(f.pieces):
        lo = bps[i - 1] if i > 0 else None
        hi = bps[i] if i < len(bps) else None
        lo_pt = None if lo is None else unit.scale(lo)
        hi_pt = None if hi is None else unit.scale(hi)
        # the piece meets C iff its left end lies in C (C is downward closed)
        if lo_pt is not None and not u_member(m, lo_pt):
            continue
        q = piece.slope
        cval = term_value(m, piece.const, {})
        if q == 0:
            if not u_member(m, cval):
                a = (member_witness_above(m, lo_pt) if hi_pt is None
                     else _cut_point_in(m, lo_pt, hi_pt))
                if a is not None:
                    return ResistanceResult(False, witness=a)
            continue
        if q > 0:
            if hi_pt is not None and u_member(m, hi_pt):
                img = hi_pt.scale(q) + cval
                if not u_member(m, img):
                    return ResistanceResult(False, witness=hi_pt)
                continue
            # the piece straddles the cut
            if not affine_ok(m, q, cval):
                return ResistanceResult(
                    False, witness=escape_witness(m, q, cval, lo_pt, hi_pt))
            continue
        # q < 0: the image is largest toward the piece's left end
        if lo_pt is None:
            a = _march_down(m, q, cval, hi_pt)
            return ResistanceResult(False, witness=a)
        img_left = lo_pt.scale(q) + cval
        if u_member(m, img_left):
            continue
        a = _descending_witness(m, q, cval, lo_pt, hi_pt)
        if a is not None:
            return ResistanceResult(False, witness=a)
    return ResistanceResult(True)


def affine_ok(m: ModelDescriptor, q: Fraction, c: Point) -> bool:
    from .cutarith import affine_image_inside_cut
    return affine_image_inside_cut(m, q, c)


def _cut_point_in(m: ModelDescriptor, lo_pt: Optional[Point],
                  hi_pt: Point) -> Optional[Point]:
    """A point of C in (lo, hi]; the left end is known to lie in C."""
    if u_member(m, hi_pt):
        return hi_pt
    from .cutarith import points_below_cut
    for a in points_below_cut(m):
        if (lo_pt is None or lo_pt.lex_lt(a)) and a.lex_lt(hi_pt) and u_member(m, a):
            return a
    return None


def _march_down(m: ModelDescriptor, q: Fraction, c: Point,
                hi_pt: Optional[Point]) -> Point:
    a = -m.unit
    if hi_pt is not None and hi_pt.lex_lt(a):
        a = hi_pt - m.unit
    for _ in range(512):
        if u_member(m, a) and not u_member(m, a.scale(q) + c):
            return a
        a = a.scale(2) if a.lex_sign() < 0 else a - m.unit
    raise AssertionError("unbounded decreasing piece must escape the cut")


def _descending_witness(m: ModelDescriptor, q: Fraction, c: Point,
                        lo_pt: Point, hi_pt: Optional[Point]) -> Optional[Point]:
    """For a decreasing piece whose left-end image exceeds the cut, approach
    the left end from above until the image escapes."""
    last = Point.unit(m.dim, m.dim - 1)
    step = last
    for _ in range(512):
        a = lo_pt + step
        if (hi_pt is None or not hi_pt.lex_lt(a)) and u_member(m, a) \
                and not u_member(m, a.scale(q) + c):
            return a
        step = step.scale(Fraction(1, 2))
    return None


def resistance_crossing(m: ModelDescriptor, f: UnaryPiecewiseLinear
                        ) -> Optional[tuple[Point, Point]]:
    """(alpha, beta) with both in U, f(alpha) in U and f(beta) outside U,
    when such a crossing exists among ladder candidates."""
    res = check_resistance(m, f)
    if res.closed:
        return None
    beta = res.witness
    ladder = [Point.zero(m.dim), m.e_in, -m.e_in, -m.unit, -m.unit.scale(2),
              -m.unit.scale(8), m.e_in.scale(Fraction(1, 2))]
    for b in f.breakpoints:
        ladder.append(m.unit.scale(b) - m.unit)
        ladder.append(m.unit.scale(b))
    for alpha in ladder:
        if u_member(m, alpha) and u_member(m, f.eval(m, alpha)):
            return alpha, beta
    return None
