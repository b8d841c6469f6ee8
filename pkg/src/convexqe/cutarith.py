"""Exact arithmetic at the cut: classification data, virtual comparisons
against the supremum of U, and constructive escape witnesses.

For a downward cut C with virtual supremum g, affine images q*x + c with
q > 0 satisfy f(C) subset-of C exactly when the virtual value q*g + c does
not exceed g; the comparison compiles to coordinate arithmetic plus at most
one oracle refinement, so everything here is exact and terminating.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import MalformedModelError, SearchExhaustedError
from .models import (DownwardCut, IrrationalOracle, ModelDescriptor,
                     PlusInf, Point, SubgroupLevel, u_member)

_SEARCH_LIMIT = 2000
_START_BITS = 16


@dataclass(frozen=True)
class CutInfo:
    kind: str  # "subgroup" | "rational" | "coset" | "oracle"
    deciding_index: Optional[int]  # 0-based; oracle position or first +inf
    stabilizer: int
    valuational: bool


def cut_info(m: ModelDescriptor) -> CutInfo:
    if isinstance(m.u_interp, SubgroupLevel):
        return CutInfo("subgroup", None, m.u_interp.level, True)
    t = m.u_interp.threshold
    j = next((i for i, e in enumerate(t) if not isinstance(e, Fraction)), None)
    if j is None:
        return CutInfo("rational", None, m.dim, False)
    if isinstance(t[j], PlusInf):
        return CutInfo("coset", j, j, True)
    if j == m.dim - 1:
        return CutInfo("oracle", j, m.dim, False)
    return CutInfo("oracle", j, j + 1, True)


def rational_prefix(m: ModelDescriptor, upto: int) -> tuple[Fraction, ...]:
    assert isinstance(m.u_interp, DownwardCut)
    out = []
    for e in m.u_interp.threshold[:upto]:
        assert isinstance(e, Fraction)
        out.append(e)
    return tuple(out)


def top_coset_rep(m: ModelDescriptor) -> Point:
    """Representative of the topmost stabilizer coset contained in a
    coset-topped cut (or the subgroup itself)."""
    info = cut_info(m)
    if info.kind == "subgroup":
        return Point.zero(m.dim)
    if info.kind != "coset":
        raise MalformedModelError("the cut has no topmost coset")
    prefix = rational_prefix(m, info.deciding_index)
    return Point(prefix + (Fraction(0),) * (m.dim - len(prefix)))


def deciding_oracle(m: ModelDescriptor) -> IrrationalOracle:
    assert isinstance(m.u_interp, DownwardCut)
    e = m.u_interp.threshold[cut_info(m).deciding_index]
    assert isinstance(e, IrrationalOracle)
    return e


def _lex_sign(coords) -> int:
    for c in coords:
        if c != 0:
            return 1 if c > 0 else -1
    return 0


def closure_member(m: ModelDescriptor, p: Point) -> bool:
    """Membership in the downward set whose stabilizer defines I: the cut
    itself, or the downward closure of the subgroup."""
    if isinstance(m.u_interp, SubgroupLevel):
        return _lex_sign(p.coords[:m.u_interp.level]) <= 0
    return u_member(m, p)


def virtual_cut_vs_point(m: ModelDescriptor, p: Point) -> int:
    """Sign of (sup U - p); 0 means p sits exactly at the cut edge (at the
    coset scale for coset-topped cuts, exactly for rational cuts)."""
    info = cut_info(m)
    if info.kind == "subgroup":
        return -_lex_sign(p.coords[:info.stabilizer])
    if info.kind == "rational":
        theta = rational_prefix(m, m.dim)
        return _lex_sign(tuple(t - c for t, c in zip(theta, p.coords)))
    if info.kind == "coset":
        k = info.deciding_index
        prefix = rational_prefix(m, k)
        return _lex_sign(tuple(t - c for t, c in zip(prefix, p.coords[:k])))
    return 1 if u_member(m, p) else -1  # oracle cut: never equal


def affine_image_inside_cut(m: ModelDescriptor, q: Fraction, c: Point) -> bool:
    """Does x |-> q*x + c (q > 0) map the downward set C into itself?

    Equivalently q*g + c <= g in the closure sense, where g = sup C.
    For the subgroup interpretation C is the downward closure of U.
    """
    if q <= 0:
        raise ValueError("affine_image_inside_cut needs a positive slope")
    info = cut_info(m)
    k = info.stabilizer
    if info.kind == "subgroup":
        return _lex_sign(c.coords[:k]) <= 0
    if info.kind == "rational":
        theta = Point(rational_prefix(m, m.dim))
        return (theta.scale(q - 1) + c).lex_sign() <= 0
    if info.kind == "coset":
        c0 = top_coset_rep(m)
        lhs = c.coords[:k]
        rhs = c0.scale(1 - q).coords[:k]
        return _lex_sign(tuple(a - b for a, b in zip(lhs, rhs))) <= 0
    # oracle flavor: (q-1)*g <= -c
    if q == 1:
        return _lex_sign(c.coords[:k]) <= 0
    z = c.scale(Fraction(1) / (1 - q))
    if q < 1:
        return u_member(m, z)
    return not u_member(m, z)


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """The smallest-denominator rational strictly between lo and hi."""
    if not lo < hi:
        raise ValueError("empty interval")
    if lo < 0 < hi:
        return Fraction(0)
    if hi <= 0:
        return -simplest_between(-hi, -lo)
    # 0 <= lo < hi
    fl = lo.numerator // lo.denominator
    if Fraction(fl + 1) < hi:
        return Fraction(fl + 1)
    if lo == fl:
        inv = Fraction(1) / (hi - fl)  # q = fl + 1/r with r just past 1/(hi-fl)
        return fl + Fraction(1, inv.numerator // inv.denominator + 1)
    return fl + Fraction(1) / simplest_between(Fraction(1) / (hi - fl),
                                               Fraction(1) / (lo - fl))


def points_below_cut(m: ModelDescriptor):
    """Yield points of C approaching sup C from below (cofinal in C)."""
    info = cut_info(m)
    last = Point.unit(m.dim, m.dim - 1)
    if info.kind == "subgroup":
        for t in range(_SEARCH_LIMIT):
            yield last.scale(2 ** t)
        return
    if info.kind == "rational":
        theta = Point(rational_prefix(m, m.dim))
        if not m.u_interp.strict:
            yield theta
        for t in range(_SEARCH_LIMIT):
            yield theta - last.scale(Fraction(1, 2 ** t))
        return
    if info.kind == "coset":
        base = top_coset_rep(m)
        for t in range(_SEARCH_LIMIT):
            yield base + last.scale(2 ** t)
        return
    j = info.deciding_index
    oracle = deciding_oracle(m)
    prefix = rational_prefix(m, j)
    bits = _START_BITS
    prev: Optional[Fraction] = None
    for _ in range(_SEARCH_LIMIT):
        lo, _hi = oracle.refine(bits)
        bits *= 2
        if prev is not None and lo <= prev:
            continue
        q = simplest_between(lo - 1 if prev is None else prev, lo)
        prev = q
        coords = list(prefix) + [q] + [Fraction(0)] * (m.dim - j - 1)
        yield Point(tuple(coords))


def escape_witness(m: ModelDescriptor, q: Fraction, c: Point,
                   lo: Optional[Point] = None,
                   hi: Optional[Point] = None) -> Point:
    """A point a in C with lo < a <= hi and q*a + c outside C; the caller
    guarantees existence (the affine image condition failed on a region
    whose closure reaches sup C)."""
    for a in points_below_cut(m):
        if lo is not None and not lo.lex_lt(a):
            continue
        if hi is not None and hi.lex_lt(a):
            continue
        if u_member(m, a) and not u_member(m, a.scale(q) + c):
            return a
    raise SearchExhaustedError("no escape witness found; model data suspect")


def member_witness_above(m: ModelDescriptor, lo: Optional[Point]) -> Point:
    """Some a in C with a > lo (exists whenever C has points above lo)."""
    for a in points_below_cut(m):
        if lo is None or lo.lex_lt(a):
            if u_member(m, a):
                return a
    raise SearchExhaustedError("no member above the given bound")
