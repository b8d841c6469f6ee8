"""Recursive-descent parser for the formula grammar.

Grammar (precedence ``~`` > ``&`` > ``|`` > ``->``; quantifier bodies
extend maximally to the right; parentheses group formulas only)::

    formula := "true" | "false" | atom | "(" formula ")" | "~" formula
             | formula "&" formula | formula "|" formula
             | formula "->" formula | "E" var "." formula | "A" var "." formula
    atom    := term rel term | "U(" term ")" | "I(" term ")"
    rel     := "<" | "<=" | "=" | "!="
    term    := rational | var | "e_in" | "e_out" | term "+" term
             | term "-" term | rational "*" term | "-" term
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import FormulaSyntaxError, UnknownIdentifierError
from .syntax import (Atom, AtomKind, Exists, FALSE, Forall, Formula, AtomF,
                     And, Or, Not, Implies, TRUE, Term, rename_bound)

RESERVED = {"true", "false", "E", "A", "U", "I", "e_in", "e_out"}

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<num>\d+)
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>->|<=|!=|[<=~&|()+\-*/.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num | name | op | eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        lexeme = m.group(0)
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, lexeme, line, col))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok], known_vars: Optional[set[str]]):
        self.toks = toks
        self.pos = 0
        self.known_vars = known_vars

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def fail(self, msg: str):
        t = self.peek()
        raise FormulaSyntaxError(msg, t.line, t.col)

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text:
            self.fail(f"expected {text!r}, found {t.text!r}" if t.text else f"expected {text!r}")
        return self.next()

    # formula levels -------------------------------------------------------

    def formula(self) -> Formula:
        lhs = self.or_level()
        if self.peek().text == "->":
            self.next()
            return Implies(lhs, self.formula())
        return lhs

    def or_level(self) -> Formula:
        f = self.and_level()
        while self.peek().text == "|":
            self.next()
            f = Or(f, self.and_level())
        return f

    def and_level(self) -> Formula:
        f = self.unary()
        while self.peek().text == "&":
            self.next()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        t = self.peek()
        if t.text == "~":
            self.next()
            return Not(self.unary())
        if t.text in ("E", "A"):
            self.next()
            v = self.peek()
            if v.kind != "name" or v.text in RESERVED:
                self.fail("expected a variable after quantifier")
            self.next()
            self.expect(".")
            body = self.formula()
            return Exists(v.text, body) if t.text == "E" else Forall(v.text, body)
        if t.text == "(":
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        if t.text == "true":
            self.next()
            return TRUE
        if t.text == "false":
            self.next()
            return FALSE
        return self.atom()

    # atoms and terms ------------------------------------------------------

    def atom(self) -> Formula:
        t = self.peek()
        if t.text in ("U", "I"):
            self.next()
            self.expect("(")
            arg = self.term()
            self.expect(")")
            kind = AtomKind.UMEM if t.text == "U" else AtomKind.IMEM
            return AtomF(Atom(kind, arg))
        lhs = self.term()
        rel = self.peek()
        if rel.text not in ("<", "<=", "=", "!="):
            self.fail("expected a relation (<, <=, =, !=)")
        self.next()
        rhs = self.term()
        kind = {"<": AtomKind.LT, "<=": AtomKind.LE,
                "=": AtomKind.EQ, "!=": AtomKind.NEQ}[rel.text]
        return AtomF(Atom(kind, lhs - rhs))

    def term(self) -> Term:
        t = self.signed_term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            rhs = self.signed_term()
            t = t + rhs if op == "+" else t - rhs
        return t

    def signed_term(self) -> Term:
        neg = False
        while self.peek().text == "-":
            self.next()
            neg = not neg
        t = self.primary_term()
        return -t if neg else t

    def primary_term(self) -> Term:
        t = self.peek()
        if t.kind == "num":
            q = self.rational()
            if self.peek().text == "*":
                self.next()
                return self.signed_term().scale(q)
            return Term.const(q)
        if t.kind == "name":
            self.next()
            if t.text == "e_in":
                return Term.ein()
            if t.text == "e_out":
                return Term.eout()
            if t.text in RESERVED:
                raise FormulaSyntaxError(
                    f"reserved word {t.text!r} cannot be used as a variable",
                    t.line, t.col)
            if self.known_vars is not None and t.text not in self.known_vars:
                raise UnknownIdentifierError(
                    f"unknown identifier {t.text!r}", t.line, t.col)
            return Term.var(t.text)
        self.fail("expected a term")
        raise AssertionError

    def rational(self) -> Fraction:
        num = int(self.expect_num().text)
        if self.peek().text == "/":
            self.next()
            den_tok = self.expect_num()
            den = int(den_tok.text)
            if den == 0:
                raise FormulaSyntaxError("zero denominator", den_tok.line, den_tok.col)
            return Fraction(num, den)
        return Fraction(num)

    def expect_num(self) -> _Tok:
        t = self.peek()
        if t.kind != "num":
            self.fail("expected a number")
        return self.next()


def parse_formula(text: str, known_vars: Optional[set[str]] = None) -> Formula:
    """Parse text into a formula AST; bound variables are made unique."""
    p = _Parser(_tokenize(text), known_vars)
    f = p.formula()
    tok = p.peek()
    if tok.kind != "eof":
        raise FormulaSyntaxError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return rename_bound(f)


def parse_term(text: str, known_vars: Optional[set[str]] = None) -> Term:
    p = _Parser(_tokenize(text), known_vars)
    t = p.term()
    tok = p.peek()
    if tok.kind != "eof":
        raise FormulaSyntaxError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return t
