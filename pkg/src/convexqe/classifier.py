"""Cut classification, stabilizer computation, pluslike translation tests,
monotone normalization, and cut canonicalization.

Everything here is decided with exact arithmetic: rational lexicographic
comparisons plus interval refinement of the provably irrational threshold
entries.  Limits of the form "for all sufficiently small positive epsilon"
are decided with dual numbers (pairs u + v*delta compared by the sign of u,
then of v), which is exact because the condition tested is monotone in
epsilon.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .cutarith import (cut_info, deciding_oracle, escape_witness,
                       rational_prefix, top_coset_rep)
from .errors import (NonvaluationalInterpretationError,
                     PreconditionViolatedError)
from .models import (DownwardCut, IrrationalOracle, ModelDescriptor, PlusInf,
                     Point, SubgroupLevel, term_value, u_member)
from .piecewise import (BinaryPiecewiseLinear, check_pluslike,
                        normalize_monotone, pluslike_from_unary)

F0 = Fraction(0)
F1 = Fraction(1)

RATIONAL_CUT = "rational"
IRRATIONAL_VALUATIONAL = "irrational-valuational"
IRRATIONAL_NONVALUATIONAL = "irrational-nonvaluational"


@dataclass(frozen=True)
class ClassificationReport:
    cut_kind: str
    epsilon_witness: Optional[Point]
    falsifier: Optional[Callable[[Point], Point]]
    stabilizer_level: int
    uniquely_realizable: bool

    def to_json(self, m: Optional[ModelDescriptor] = None) -> dict:
        out: dict = {"cut_kind": self.cut_kind,
                     "stabilizer_level": self.stabilizer_level,
                     "uniquely_realizable": self.uniquely_realizable,
                     "epsilon_witness": (None if self.epsilon_witness is None
                                         else [str(c) for c in self.epsilon_witness.coords])}
        if self.falsifier is not None and m is not None:
            eps = Point.unit(m.dim, m.dim - 1)
            a = self.falsifier(eps)
            out["falsifier_demo"] = {"epsilon": [str(c) for c in eps.coords],
                                     "inside": [str(c) for c in a.coords],
                                     "escapes": [str(c) for c in (a + eps).coords]}
        else:
            out["falsifier_demo"] = None
        return out


def _nonvaluational_falsifier(m: ModelDescriptor) -> Callable[[Point], Point]:
    """Given any eps > 0, produce a in C with a + eps outside C."""
    info = cut_info(m)
    j = info.deciding_index
    oracle = deciding_oracle(m)
    prefix = rational_prefix(m, j)

    def falsify(eps: Point) -> Point:
        from .cutarith import simplest_between
        if eps.lex_sign() <= 0:
            raise PreconditionViolatedError("epsilon must be positive")
        p = next(i for i, c in enumerate(eps.coords) if c != 0)
        if p < j:
            lo, _ = oracle.refine(16)
            q = simplest_between(lo - 1, lo)
            return Point(prefix + (q,) + (F0,) * (m.dim - j - 1))
        # the bump happens at the deciding coordinate: squeeze the interval
        # below the step size
        bits = 16
        while True:
            lo, hi = oracle.refine(bits)
            if hi - lo < eps.coords[j]:
                # any q in (hi - eps_j, lo) lies below the cut yet escapes
                # after the bump: q + eps_j > hi
                q = simplest_between(hi - eps.coords[j], lo)
                return Point(prefix + (q,) + (F0,) * (m.dim - j - 1))
            bits *= 2

    return falsify


def classify(m: ModelDescriptor) -> ClassificationReport:
    """Cut kind, valuational witness or falsifier, stabilizer level, and the
    unique-realizability label (subgroups classify via their downward
    closure)."""
    info = cut_info(m)
    if info.kind == "rational":
        return ClassificationReport(RATIONAL_CUT, None, None, m.dim, False)
    if not info.valuational:
        return ClassificationReport(IRRATIONAL_NONVALUATIONAL, None,
                                    _nonvaluational_falsifier(m), m.dim, True)
    eps = Point.unit(m.dim, info.stabilizer)  # first coordinate after the prefix
    return ClassificationReport(IRRATIONAL_VALUATIONAL, eps, None,
                                info.stabilizer, False)


# ---------------------------------------------------------------------------
# stabilizer, computed independently of classify


def _virtual_entries(m: ModelDescriptor):
    if isinstance(m.u_interp, DownwardCut):
        return m.u_interp.threshold
    k = m.u_interp.level  # the closure cut of the subgroup
    return tuple([F0] * k + [PlusInf()] * (m.dim - k))


def _axis_stabilizes(m: ModelDescriptor, i: int) -> bool:
    """Does adding the i-th unit vector leave the cut's lower set fixed?
    Decided constructively from the threshold entries."""
    entries = _virtual_entries(m)
    for q in range(i):
        if not isinstance(entries[q], Fraction):
            return True  # comparison is always settled before coordinate i
    return isinstance(entries[i], PlusInf)


def stabilizer(m: ModelDescriptor) -> int:
    """Level k with I = {x : x_1 = ... = x_k = 0}: the last coordinate whose
    unit vector moves the cut."""
    level = 0
    for i in range(m.dim):
        if not _axis_stabilizes(m, i):
            level = i + 1
    return level


def stabilizer_escape(m: ModelDescriptor, i: int) -> Optional[tuple[Point, Point]]:
    """For a non-stabilizing axis, a concrete pair (a, a + e_i) with a in C
    and a + e_i outside C; None when the axis stabilizes."""
    if _axis_stabilizes(m, i):
        return None
    entries = _virtual_entries(m)
    prefix = [Fraction(e) for e in entries[:i]]  # all rational here
    e = entries[i]
    if isinstance(e, Fraction):
        coords = prefix + [e - Fraction(1, 2)] + [F0] * (m.dim - i - 1)
    else:
        assert isinstance(e, IrrationalOracle)
        bits = 16
        while True:
            lo, hi = e.refine(bits)
            if hi - lo < 1:
                break
            bits *= 2
        coords = prefix + [lo] + [F0] * (m.dim - i - 1)
    a = Point(tuple(coords))
    return a, a + Point.unit(m.dim, i)


# ---------------------------------------------------------------------------
# dual-number comparisons (limits for epsilon -> 0+)


Dual = tuple[Fraction, Fraction]  # value u + v*delta


def _dual_sign(d: Dual) -> int:
    u, v = d
    if u != 0:
        return 1 if u > 0 else -1
    if v != 0:
        return 1 if v > 0 else -1
    return 0


def _dual_lex_sign(coords: list[Dual]) -> int:
    for d in coords:
        s = _dual_sign(d)
        if s != 0:
            return s
    return 0


def _dual_point(base: Point, drift: Point) -> list[Dual]:
    return [(u, v) for u, v in zip(base.coords, drift.coords)]


def _dual_u_member(m: ModelDescriptor, p: list[Dual]) -> bool:
    """Membership of base + delta*drift in the cut, for small delta > 0."""
    assert isinstance(m.u_interp, DownwardCut)
    for (u, v), entry in zip(p, m.u_interp.threshold):
        if isinstance(entry, PlusInf):
            return True
        if isinstance(entry, Fraction):
            s = _dual_sign((u - entry, v))
            if s < 0:
                return True
            if s > 0:
                return False
            continue
        return entry.compare(u) < 0  # u is rational, never equal to the value
    return not m.u_interp.strict


def _dual_virtual_cut_vs(m: ModelDescriptor, p: list[Dual]) -> int:
    """Limit sign of (sup U - (base + delta*drift)) for small delta > 0."""
    info = cut_info(m)
    if info.kind == "subgroup":
        return -_dual_lex_sign(p[:info.stabilizer])
    if info.kind == "rational":
        theta = rational_prefix(m, m.dim)
        return _dual_lex_sign([(t - u, -v) for t, (u, v) in zip(theta, p)])
    if info.kind == "coset":
        k = info.deciding_index
        prefix = rational_prefix(m, k)
        return _dual_lex_sign([(t - u, -v) for t, (u, v) in zip(prefix, p[:k])])
    return 1 if _dual_u_member(m, p) else -1


def _dual_affine_inside(m: ModelDescriptor, q: Fraction,
                        c: list[Dual]) -> bool:
    """Limit of affine_image_inside_cut(m, q, base + delta*drift)."""
    info = cut_info(m)
    k = info.stabilizer
    if info.kind == "subgroup":
        return _dual_lex_sign(c[:k]) <= 0
    if info.kind == "rational":
        theta = rational_prefix(m, m.dim)
        vals = [((q - 1) * t + u, v) for t, (u, v) in zip(theta, c)]
        return _dual_lex_sign(vals) <= 0
    if info.kind == "coset":
        c0 = top_coset_rep(m)
        vals = [(u - (1 - q) * t, v)
                for t, (u, v) in zip(c0.coords[:k], c[:k])]
        return _dual_lex_sign(vals) <= 0
    if q == 1:
        return _dual_lex_sign(c[:k]) <= 0
    z = [(u / (1 - q), v / (1 - q)) for u, v in c]
    inside = _dual_u_member(m, z)
    return inside if q < 1 else not inside


# ---------------------------------------------------------------------------
# pluslike translation test


@dataclass(frozen=True)
class FValuationalResult:
    valuational: bool
    epsilon: Optional[Point] = None
    falsifier: Optional[Callable[[Point], Point]] = None


def _top_cell_index(m: ModelDescriptor, f: BinaryPiecewiseLinear,
                    eps_base: Point, eps_drift: Point) -> int:
    """Cell met by (a, eps) as a approaches sup C from below, with
    eps = base + delta*drift for small delta >= 0."""
    dx, dy = f.direction
    idx = 0
    for t in f.thresholds:
        if dx != 0:
            # boundary position in a: (t*unit - dy*eps)/dx
            base = (m.unit.scale(t) - eps_base.scale(dy)).scale(F1 / dx)
            drift = (-eps_drift.scale(dy)).scale(F1 / dx)
            s = _dual_virtual_cut_vs(m, _dual_point(base, drift))
            # sign of (w_limit - t*unit) = sign(dx) * s
            above = (1 if dx > 0 else -1) * s
            if above > 0 or (above == 0 and dx > 0):
                idx += 1
        else:
            vals = _dual_point(eps_base.scale(dy) - m.unit.scale(t),
                               eps_drift.scale(dy))
            if _dual_lex_sign(vals) > 0:
                idx += 1
    return idx


def _condition_at(m: ModelDescriptor, f: BinaryPiecewiseLinear,
                  eps_base: Point, eps_drift: Point) -> bool:
    """Does F(., eps) map C into C, with eps = base + delta*drift for small
    delta >= 0 (exact dual-number decision)?"""
    idx = _top_cell_index(m, f, eps_base, eps_drift)
    piece = f.pieces[idx]
    cbase = eps_base.scale(piece.coef_y) + term_value(m, piece.const, {})
    cdrift = eps_drift.scale(piece.coef_y)
    return _dual_affine_inside(m, piece.coef_x, _dual_point(cbase, cdrift))


def f_valuational(m: ModelDescriptor, f: BinaryPiecewiseLinear) -> FValuationalResult:
    """Decide whether some eps > 0 satisfies: for all a in C, F(a, eps) in C.

    The condition is antitone in eps (F increases in its second argument and
    C is downward closed), so existence is equivalent to the limit condition
    along eps = delta * e_n as delta -> 0+, decided with dual numbers; a
    concrete witness is then found by halving.
    """
    rep = check_pluslike(f)
    if not rep.pluslike:
        raise PreconditionViolatedError(f"not pluslike: {rep.reason}")
    last = Point.unit(m.dim, m.dim - 1)
    zero = Point.zero(m.dim)
    if _condition_at(m, f, zero, last):
        delta = F1
        for _ in range(512):
            eps = last.scale(delta)
            if _condition_at(m, f, eps, zero):
                return FValuationalResult(True, epsilon=eps)
            delta /= 2
        raise AssertionError("limit condition held but no witness stabilized")

    def falsify(eps: Point) -> Point:
        if eps.lex_sign() <= 0:
            raise PreconditionViolatedError("epsilon must be positive")
        idx = _top_cell_index(m, f, eps, zero)
        piece = f.pieces[idx]
        cval = eps.scale(piece.coef_y) + term_value(m, piece.const, {})
        dx, dy = f.direction
        lo_pt = hi_pt = None
        if dx != 0:
            if idx > 0:
                b = (m.unit.scale(f.thresholds[idx - 1]) - eps.scale(dy)).scale(F1 / dx)
                lo_pt, hi_pt = (b, None) if dx > 0 else (None, b)
            if idx < len(f.thresholds):
                b = (m.unit.scale(f.thresholds[idx]) - eps.scale(dy)).scale(F1 / dx)
                if dx > 0:
                    hi_pt = b
                else:
                    lo_pt = b
        return escape_witness(m, piece.coef_x, cval, lo_pt, hi_pt)

    return FValuationalResult(False, falsifier=falsify)


# ---------------------------------------------------------------------------
# canonicalization toward a symmetric convex set


@dataclass(frozen=True)
class CanonicalCut:
    """Symmetric convex set V obtained by reflecting the cut to contain 0
    and intersecting with its own reflection, plus the transport record."""

    reflected: bool
    shift: Point  # kept for the record; always zero over these fixtures
    stabilizer_level: int
    edge_rep: Optional[Point]  # coset-scale edge of V, when it has one
    edge_included: Optional[bool]
    oracle_edge: Optional[str]  # tag of the irrational edge, when present

    def describe(self) -> dict:
        return {"reflected": self.reflected,
                "shift": [str(c) for c in self.shift.coords],
                "stabilizer_level": self.stabilizer_level,
                "edge_rep": (None if self.edge_rep is None
                             else [str(c) for c in self.edge_rep.coords]),
                "edge_included": self.edge_included,
                "oracle_edge": self.oracle_edge}


def canonical_member(m: ModelDescriptor, canon: CanonicalCut, p: Point) -> bool:
    """Membership in the symmetric set V, evaluated from the base model."""
    if isinstance(m.u_interp, SubgroupLevel):
        return u_member(m, p)

    def base(x: Point) -> bool:
        if canon.reflected:
            return not u_member(m, -x)
        return u_member(m, x)

    return base(p) and base(-p)


def canonicalize_cut(m: ModelDescriptor) -> CanonicalCut:
    """Reflect so 0 lies inside, record the (vacuous) positive shift, and
    symmetrize; the result is a symmetric convex set around 0 whose edge
    data is returned exactly."""
    info = cut_info(m)
    if info.kind == "subgroup":
        return CanonicalCut(False, Point.zero(m.dim), info.stabilizer,
                            Point.zero(m.dim), True, None)
    if not info.valuational:
        raise NonvaluationalInterpretationError(
            "canonicalization targets valuational cuts")
    zero = Point.zero(m.dim)
    reflected = not u_member(m, zero)
    if info.kind == "coset":
        rep = top_coset_rep(m)
        if reflected:
            return CanonicalCut(True, zero, info.stabilizer, -rep, False, None)
        return CanonicalCut(False, zero, info.stabilizer, rep, True, None)
    tag = deciding_oracle(m).tag
    return CanonicalCut(reflected, zero, info.stabilizer, None, None,
                        ("-" + tag) if reflected else tag)


__all__ = [
    "ClassificationReport", "classify", "stabilizer", "stabilizer_escape",
    "FValuationalResult", "f_valuational", "CanonicalCut", "canonicalize_cut",
    "canonical_member", "normalize_monotone", "check_pluslike",
    "pluslike_from_unary", "RATIONAL_CUT", "IRRATIONAL_VALUATIONAL",
    "IRRATIONAL_NONVALUATIONAL",
]
