"""Concrete computable models: lexicographic powers of the rationals with a
convex predicate, plus exact evaluation.

A model is the group (Q^n, +, <_lex) with U interpreted either as the convex
subgroup {x : x_1 = ... = x_k = 0} or as a downward cut against a threshold
whose entries are exact rationals, provably irrational constants (pi or
sqrt of a non-square rational) behind refinable interval oracles, or +inf.
The stabilizer predicate I always denotes {eps : eps + U-cut = U-cut}.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Optional, Union

from .errors import (MalformedModelError, PrecisionBudgetError)
from .normalform import normalize_atoms
from .syntax import (And, AtomF, AtomKind, FalseF, Formula, Implies, Not,
                     Or, Term, TrueF, is_quantifier_free)

DEFAULT_PRECISION_BITS = 4096
_START_BITS = 16


# ---------------------------------------------------------------------------
# Points


@dataclass(frozen=True)
class Point:
    coords: tuple[Fraction, ...]

    @staticmethod
    def of(*vals) -> "Point":
        return Point(tuple(Fraction(v) for v in vals))

    @staticmethod
    def zero(dim: int) -> "Point":
        return Point((Fraction(0),) * dim)

    @staticmethod
    def unit(dim: int, axis: int = 0) -> "Point":
        coords = [Fraction(0)] * dim
        coords[axis] = Fraction(1)
        return Point(tuple(coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __add__(self, other: "Point") -> "Point":
        return Point(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "Point") -> "Point":
        return Point(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "Point":
        return Point(tuple(-a for a in self.coords))

    def scale(self, q) -> "Point":
        q = Fraction(q)
        return Point(tuple(a * q for a in self.coords))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def lex_sign(self) -> int:
        for c in self.coords:
            if c != 0:
                return 1 if c > 0 else -1
        return 0

    def lex_lt(self, other: "Point") -> bool:
        return (self - other).lex_sign() < 0

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


# ---------------------------------------------------------------------------
# Irrational interval oracles


class IrrationalOracle:
    """Refinable rational interval around a provably irrational constant.

    Refinement is memoized; intervals are nested and shrink below 2^-bits.
    """

    def __init__(self, tag: str):
        self.tag = tag
        self._lock = threading.Lock()
        self._best: Optional[tuple[int, Fraction, Fraction]] = None

    def refine(self, bits: int) -> tuple[Fraction, Fraction]:
        with self._lock:
            if self._best is not None and self._best[0] >= bits:
                return self._best[1], self._best[2]
            lo, hi = self._compute(bits)
            if self._best is not None:
                lo = max(lo, self._best[1])
                hi = min(hi, self._best[2])
            self._best = (bits, lo, hi)
            return lo, hi

    def _compute(self, bits: int) -> tuple[Fraction, Fraction]:
        raise NotImplementedError

    def compare(self, q: Fraction, budget: int = DEFAULT_PRECISION_BITS) -> int:
        """Sign of q - value; terminates because the value is irrational."""
        bits = _START_BITS
        while bits <= budget:
            lo, hi = self.refine(bits)
            if q < lo:
                return -1
            if q > hi:
                return 1
            bits *= 2
        raise PrecisionBudgetError(
            f"could not separate {q} from {self.tag} within {budget} bits")

    def __eq__(self, other):
        return isinstance(other, IrrationalOracle) and self.tag == other.tag

    def __hash__(self):
        return hash(self.tag)

    def __repr__(self):
        return f"IrrationalOracle({self.tag})"


class PiOracle(IrrationalOracle):
    """pi via Machin's formula with alternating-series tail bounds."""

    def __init__(self):
        super().__init__("pi")

    @staticmethod
    def _arctan_inv(x: int, terms: int) -> tuple[Fraction, Fraction]:
        # arctan(1/x) partial sums; alternating, decreasing, so consecutive
        # partial sums bracket the value.
        s = Fraction(0)
        prev = Fraction(0)
        for k in range(terms):
            term = Fraction((-1) ** k, (2 * k + 1) * x ** (2 * k + 1))
            prev = s
            s += term
        return (s, prev) if s < prev else (prev, s)

    def _compute(self, bits: int) -> tuple[Fraction, Fraction]:
        terms = max(4, bits // 4 + 4)
        lo5, hi5 = self._arctan_inv(5, terms)
        lo239, hi239 = self._arctan_inv(239, terms)
        lo = 16 * lo5 - 4 * hi239
        hi = 16 * hi5 - 4 * lo239
        return lo, hi


class SqrtOracle(IrrationalOracle):
    """sqrt(q) for a positive non-square rational q, via integer isqrt."""

    def __init__(self, q: Fraction):
        q = Fraction(q)
        if q <= 0:
            raise MalformedModelError("sqrt oracle needs a positive rational")
        a, b = q.numerator, q.denominator
        ra, rb = math.isqrt(a), math.isqrt(b)
        if ra * ra == a and rb * rb == b:
            raise MalformedModelError(
                f"sqrt({q}) is rational; the oracle must be provably irrational")
        self.q = q
        super().__init__(f"sqrt({q})")

    def _compute(self, bits: int) -> tuple[Fraction, Fraction]:
        a, b = self.q.numerator, self.q.denominator
        # sqrt(a/b) = sqrt(a*b)/b
        v = a * b
        s = math.isqrt(v << (2 * bits))
        den = b << bits
        return Fraction(s, den), Fraction(s + 1, den)


def make_oracle(tag: str) -> IrrationalOracle:
    if tag == "pi":
        return PiOracle()
    if tag.startswith("sqrt(") and tag.endswith(")"):
        return SqrtOracle(Fraction(tag[5:-1]))
    raise MalformedModelError(f"unknown irrational tag {tag!r}")


# ---------------------------------------------------------------------------
# Threshold entries and interpretations


class PlusInf:
    _instance: Optional["PlusInf"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "+inf"


PLUS_INF = PlusInf()

ThresholdEntry = Union[Fraction, IrrationalOracle, PlusInf]


@dataclass(frozen=True)
class SubgroupLevel:
    level: int


@dataclass(frozen=True)
class DownwardCut:
    threshold: tuple[ThresholdEntry, ...]
    strict: bool = True


class Cmp(Enum):
    BELOW = -1
    EQUAL = 0
    ABOVE = 1


@dataclass(frozen=True)
class ModelDescriptor:
    dim: int
    u_interp: Union[SubgroupLevel, DownwardCut]
    e_in: Point
    e_out: Point

    def __post_init__(self):
        validate_model(self)

    @property
    def unit(self) -> Point:
        return Point.unit(self.dim)

    def stabilizer_level(self) -> int:
        """Length k of the deciding prefix; I = {x : x_1 = ... = x_k = 0}."""
        return _stabilizer_level(self)

    def describe(self) -> str:
        return f"LEX({self.dim}) with {self.u_interp}"


def _first_nonrational(threshold) -> Optional[int]:
    for i, e in enumerate(threshold):
        if not isinstance(e, Fraction):
            return i
    return None


def _stabilizer_level(m: ModelDescriptor) -> int:
    if isinstance(m.u_interp, SubgroupLevel):
        return m.u_interp.level
    t = m.u_interp.threshold
    j = _first_nonrational(t)
    if j is None:
        return m.dim
    if isinstance(t[j], PlusInf):
        return j  # deciding prefix ends just before the first +inf entry
    return j + 1  # the oracle coordinate itself participates


def validate_model(m: ModelDescriptor) -> None:
    if m.dim < 1:
        raise MalformedModelError("dimension must be positive")
    if m.e_in.dim != m.dim or m.e_out.dim != m.dim:
        raise MalformedModelError("constant points must match the dimension")
    u = m.u_interp
    if isinstance(u, SubgroupLevel):
        if not (1 <= u.level <= m.dim - 1):
            raise MalformedModelError(
                "subgroup level must keep U a proper nontrivial subgroup")
    else:
        t = u.threshold
        if len(t) != m.dim:
            raise MalformedModelError("threshold length must equal the dimension")
        j = _first_nonrational(t)
        inf_positions = [i for i, e in enumerate(t) if isinstance(e, PlusInf)]
        if inf_positions:
            start = inf_positions[0]
            if start == 0:
                raise MalformedModelError("a leading +inf entry makes U improper")
            if inf_positions != list(range(start, m.dim)):
                raise MalformedModelError("+inf entries must form a trailing block")
        oracle_positions = [i for i, e in enumerate(t) if isinstance(e, IrrationalOracle)]
        if len(oracle_positions) > 1:
            raise MalformedModelError("at most one deciding irrational entry")
        if oracle_positions and inf_positions and oracle_positions[0] > inf_positions[0]:
            raise MalformedModelError("an oracle entry may not follow +inf entries")
    # e_in is positive and lies in the stabilizer when it is nontrivial; it
    # must also lie in U whenever U has positive stabilizer elements at all
    # (cuts below zero admit no such point, e.g. reflection test inputs).
    if m.e_in.lex_sign() <= 0:
        raise MalformedModelError("e_in must be positive")
    k = _stabilizer_level(m)
    if k < m.dim:
        if not i_member(m, m.e_in):
            raise MalformedModelError("e_in must lie in the stabilizer subgroup")
        if u_member(m, Point.zero(m.dim)) and not u_member(m, m.e_in):
            raise MalformedModelError("e_in must lie inside U")
    elif not u_member(m, m.e_in):
        raise MalformedModelError("e_in must lie inside U")
    if not point_above_u(m, m.e_out):
        raise MalformedModelError("e_out must exceed every element of U")


# ---------------------------------------------------------------------------
# Membership and comparison


def compare_to_threshold(m: ModelDescriptor, p: Point,
                         budget: int = DEFAULT_PRECISION_BITS) -> Cmp:
    """Lexicographic position of p against the cut threshold, refining
    oracles until decided.  EQUAL only when every consulted entry is rational.
    """
    if not isinstance(m.u_interp, DownwardCut):
        raise MalformedModelError("compare_to_threshold needs a downward cut")
    for c, entry in zip(p.coords, m.u_interp.threshold):
        if isinstance(entry, PlusInf):
            return Cmp.BELOW
        if isinstance(entry, Fraction):
            if c < entry:
                return Cmp.BELOW
            if c > entry:
                return Cmp.ABOVE
            continue
        sign = entry.compare(c, budget)
        return Cmp.BELOW if sign < 0 else Cmp.ABOVE
    return Cmp.EQUAL


def u_member(m: ModelDescriptor, p: Point,
             budget: int = DEFAULT_PRECISION_BITS) -> bool:
    if isinstance(m.u_interp, SubgroupLevel):
        return all(c == 0 for c in p.coords[:m.u_interp.level])
    cmp = compare_to_threshold(m, p, budget)
    if cmp is Cmp.BELOW:
        return True
    if cmp is Cmp.EQUAL:
        return not m.u_interp.strict
    return False


def point_above_u(m: ModelDescriptor, p: Point,
                  budget: int = DEFAULT_PRECISION_BITS) -> bool:
    """p > u for every u in U."""
    if isinstance(m.u_interp, SubgroupLevel):
        k = m.u_interp.level
        prefix = p.coords[:k]
        return any(c != 0 for c in prefix) and next(c for c in prefix if c != 0) > 0
    return not u_member(m, p, budget)


def i_member(m: ModelDescriptor, p: Point) -> bool:
    k = _stabilizer_level(m)
    return all(c == 0 for c in p.coords[:k])


# ---------------------------------------------------------------------------
# Term and formula evaluation


def term_value(m: ModelDescriptor, t: Term, asgn: Mapping[str, Point]) -> Point:
    acc = m.unit.scale(t.offset)
    if t.e_in:
        acc = acc + m.e_in.scale(t.e_in)
    if t.e_out:
        acc = acc + m.e_out.scale(t.e_out)
    for v, q in t.coeffs:
        if v not in asgn:
            raise KeyError(f"unassigned variable {v!r}")
        acc = acc + asgn[v].scale(q)
    return acc


def eval_formula(m: ModelDescriptor, f: Formula, asgn: Mapping[str, Point],
                 precision_budget: int = DEFAULT_PRECISION_BITS) -> bool:
    """Exact truth value of a quantifier-free formula."""
    if not is_quantifier_free(f):
        raise ValueError("eval_formula needs a quantifier-free formula")
    f = normalize_atoms(f)

    def go(g: Formula) -> bool:
        if isinstance(g, TrueF):
            return True
        if isinstance(g, FalseF):
            return False
        if isinstance(g, Not):
            return not go(g.sub)
        if isinstance(g, And):
            return go(g.lhs) and go(g.rhs)
        if isinstance(g, Or):
            return go(g.lhs) or go(g.rhs)
        if isinstance(g, Implies):
            return (not go(g.lhs)) or go(g.rhs)
        if isinstance(g, AtomF):
            val = term_value(m, g.atom.term, asgn)
            kind = g.atom.kind
            if kind == AtomKind.LT:
                return val.lex_sign() < 0
            if kind == AtomKind.EQ:
                return val.is_zero()
            if kind == AtomKind.UMEM:
                return u_member(m, val, precision_budget)
            if kind == AtomKind.IMEM:
                return i_member(m, val)
            raise AssertionError(kind)
        raise TypeError(type(g))

    return go(f)


# ---------------------------------------------------------------------------
# Fast compiled evaluation (integer arithmetic) for the fuzz loops


class CompiledFormula:
    """Quantifier-free formula compiled against a model: distinct atoms are
    deduplicated and evaluated once per assignment via integer arithmetic on
    denominator-cleared points."""

    def __init__(self, m: ModelDescriptor, f: Formula, var_order: tuple[str, ...]):
        f = normalize_atoms(f)
        if not is_quantifier_free(f):
            raise ValueError("compile needs a quantifier-free formula")
        self.model = m
        self.vars = var_order
        self._atom_index: dict = {}
        self._atoms: list = []
        self.tree = self._build(f)

    def _build(self, f: Formula):
        if isinstance(f, TrueF):
            return True
        if isinstance(f, FalseF):
            return False
        if isinstance(f, Not):
            return ("~", self._build(f.sub))
        if isinstance(f, And):
            return ("&", self._build(f.lhs), self._build(f.rhs))
        if isinstance(f, Or):
            return ("|", self._build(f.lhs), self._build(f.rhs))
        if isinstance(f, Implies):
            return ("|", ("~", self._build(f.lhs)), self._build(f.rhs))
        if isinstance(f, AtomF):
            key = (f.atom.kind, f.atom.term.sort_key())
            idx = self._atom_index.get(key)
            if idx is None:
                idx = len(self._atoms)
                self._atom_index[key] = idx
                self._atoms.append(f.atom)
            return ("a", idx)
        raise TypeError(type(f))

    def eval(self, points: Mapping[str, Point],
             precision_budget: int = DEFAULT_PRECISION_BITS) -> bool:
        m = self.model
        cache: list = [None] * len(self._atoms)

        def atom_val(i: int) -> bool:
            v = cache[i]
            if v is None:
                a = self._atoms[i]
                val = term_value(m, a.term, points)
                if a.kind == AtomKind.LT:
                    v = val.lex_sign() < 0
                elif a.kind == AtomKind.EQ:
                    v = val.is_zero()
                elif a.kind == AtomKind.UMEM:
                    v = u_member(m, val, precision_budget)
                else:
                    v = i_member(m, val)
                cache[i] = v
            return v

        def go(node) -> bool:
            if node is True or node is False:
                return node
            op = node[0]
            if op == "a":
                return atom_val(node[1])
            if op == "~":
                return not go(node[1])
            if op == "&":
                return go(node[1]) and go(node[2])
            return go(node[1]) or go(node[2])

        return go(self.tree)


class IntCompiledFormula:
    """Integer fast path: assignments supply coordinate numerators over a
    fixed denominator, and every atom is pre-scaled to integer rows, so the
    hot loop runs on machine integers (oracle comparisons excepted)."""

    def __init__(self, m: ModelDescriptor, f: Formula, denom: int):
        import math as _math
        f = normalize_atoms(f)
        if not is_quantifier_free(f):
            raise ValueError("compile needs a quantifier-free formula")
        self.model = m
        self.denom = denom
        self._atom_index: dict = {}
        self._atoms: list[Atom] = []
        self.tree = self._build(f)
        cut = m.u_interp if isinstance(m.u_interp, DownwardCut) else None
        self._compiled = []
        for a in self._atoms:
            dens = [q.denominator for _, q in a.term.coeffs]
            const = (m.unit.scale(a.term.offset)
                     + m.e_in.scale(a.term.e_in) + m.e_out.scale(a.term.e_out))
            dens += [c.denominator for c in const.coords]
            if cut is not None and a.kind == AtomKind.UMEM:
                dens += [e.denominator for e in cut.threshold
                         if isinstance(e, Fraction)]
            lc = 1
            for d in dens:
                lc = lc * d // _math.gcd(lc, d)
            scale = lc * denom
            rows = []
            for i in range(m.dim):
                entries = tuple((v, int(q * lc)) for v, q in a.term.coeffs)
                rows.append((entries, int(const.coords[i] * scale)))
            thr = None
            if cut is not None and a.kind == AtomKind.UMEM:
                thr = tuple((int(e * scale) if isinstance(e, Fraction) else e)
                            for e in cut.threshold)
            self._compiled.append((a.kind, rows, scale, thr))

    def _build(self, f: Formula):
        if isinstance(f, TrueF):
            return True
        if isinstance(f, FalseF):
            return False
        if isinstance(f, Not):
            return ("~", self._build(f.sub))
        if isinstance(f, (And, Or)):
            op = "&" if isinstance(f, And) else "|"
            return (op, self._build(f.lhs), self._build(f.rhs))
        if isinstance(f, Implies):
            return ("|", ("~", self._build(f.lhs)), self._build(f.rhs))
        if isinstance(f, AtomF):
            key = (f.atom.kind, f.atom.term.sort_key())
            idx = self._atom_index.get(key)
            if idx is None:
                idx = len(self._atoms)
                self._atom_index[key] = idx
                self._atoms.append(f.atom)
            return ("a", idx)
        raise TypeError(type(f))

    def _atom_value(self, i: int, coords: Mapping[str, tuple[int, ...]]) -> bool:
        kind, rows, scale, thr = self._compiled[i]
        m = self.model
        vals = []
        for ci in range(m.dim):
            entries, const = rows[ci]
            total = const
            for var, coef in entries:
                total += coef * coords[var][ci]
            vals.append(total)
        if kind == AtomKind.LT:
            for v in vals:
                if v:
                    return v < 0
            return False
        if kind == AtomKind.EQ:
            return not any(vals)
        if kind == AtomKind.IMEM:
            k = m.stabilizer_level()
            return not any(vals[:k])
        # UMEM
        if isinstance(m.u_interp, SubgroupLevel):
            return not any(vals[:m.u_interp.level])
        for v, e in zip(vals, thr):
            if isinstance(e, PlusInf):
                return True
            if isinstance(e, int):
                if v < e:
                    return True
                if v > e:
                    return False
                continue
            return e.compare(Fraction(v, scale)) < 0
        return not m.u_interp.strict

    def eval(self, coords: Mapping[str, tuple[int, ...]]) -> bool:
        cache: list = [None] * len(self._atoms)

        def go(node) -> bool:
            if node is True or node is False:
                return node
            op = node[0]
            if op == "a":
                i = node[1]
                v = cache[i]
                if v is None:
                    v = cache[i] = self._atom_value(i, coords)
                return v
            if op == "~":
                return not go(node[1])
            if op == "&":
                return go(node[1]) and go(node[2])
            return go(node[1]) or go(node[2])

        return go(self.tree)


# ---------------------------------------------------------------------------
# JSON serialization


def _rat_str(q: Fraction) -> str:
    return str(q)


def _entry_to_json(e: ThresholdEntry):
    if isinstance(e, Fraction):
        return _rat_str(e)
    if isinstance(e, PlusInf):
        return "+inf"
    return {"irrational": e.tag}


def _entry_from_json(x) -> ThresholdEntry:
    if isinstance(x, str):
        if x.strip() == "+inf":
            return PLUS_INF
        return Fraction(x)
    if isinstance(x, dict) and "irrational" in x:
        return make_oracle(x["irrational"])
    raise MalformedModelError(f"bad threshold entry {x!r}")


def model_to_json(m: ModelDescriptor) -> dict:
    if isinstance(m.u_interp, SubgroupLevel):
        u = {"kind": "subgroup", "level": m.u_interp.level}
    else:
        u = {"kind": "downward-cut",
             "threshold": [_entry_to_json(e) for e in m.u_interp.threshold],
             "strict": m.u_interp.strict}
    return {"dim": m.dim, "U": u,
            "e_in": [_rat_str(c) for c in m.e_in.coords],
            "e_out": [_rat_str(c) for c in m.e_out.coords]}


def model_from_json(data: dict) -> ModelDescriptor:
    try:
        dim = int(data["dim"])
        u = data["U"]
        if u["kind"] == "subgroup":
            interp: Union[SubgroupLevel, DownwardCut] = SubgroupLevel(int(u["level"]))
        elif u["kind"] == "downward-cut":
            interp = DownwardCut(tuple(_entry_from_json(e) for e in u["threshold"]),
                                 bool(u.get("strict", True)))
        else:
            raise MalformedModelError(f"unknown U kind {u['kind']!r}")
        e_in = Point(tuple(Fraction(c) for c in data["e_in"]))
        e_out = Point(tuple(Fraction(c) for c in data["e_out"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise MalformedModelError(f"bad model descriptor: {exc}") from exc
    return ModelDescriptor(dim, interp, e_in, e_out)


def load_model(path: str) -> ModelDescriptor:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(json.load(fh))


def save_model(m: ModelDescriptor, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(m), fh, indent=2, sort_keys=True)
        fh.write("\n")
