"""Parser for the shared expression grammar.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" INT)?
    atom   := INT | IDENT | "(" expr ")" | "cyc" "(" expr ")"

``/`` only divides by scalar expressions, so ``3/4`` is a rational literal.
Identifiers resolve to generators, then to named parameters. ``hbar`` is
reserved: it must be declared as a generator to be used.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Mapping

from .exactcore import Alphabet, NcPoly, Potential, cyclify

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")

RESERVED = {"cyc", "hbar"}


class ParseError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int | None = None):
        self.text = text
        self.pos = pos
        if pos is not None:
            message = f"{message} at position {pos}: {text!r}"
        super().__init__(message)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else pos
        if m.group(1):
            tokens.append(("int", int(m.group(1)), start))
        elif m.group(2):
            tokens.append(("id", m.group(2), start))
        elif m.group(3):
            ch = m.group(3)
            if ch not in "+-*/^(),":
                raise ParseError(f"unexpected character {ch!r}", text, start)
            tokens.append(("op", ch, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text, alphabet, params):
        self.text = text
        self.alphabet = alphabet
        self.params = params
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise ParseError(f"expected {value!r}", self.text, tok[2])
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, self.text, tok[2])

    def parse(self):
        value = self.expr()
        if self.peek()[0] != "end":
            raise self.error("unexpected trailing input")
        return value

    def expr(self):
        value = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()
            rhs = self.term()
            value = self._combine(value, rhs, op)
        return value

    def _combine(self, a, b, op):
        a, b = self._promote(a, b, op)
        return a + b if op[1] == "+" else a - b

    def _promote(self, a, b, op):
        if isinstance(a, Potential) != isinstance(b, Potential):
            # a bare scalar zero may be added to a potential
            for x, y in ((a, b), (b, a)):
                if isinstance(x, Potential) and isinstance(y, NcPoly) and y.is_zero():
                    return (a, Potential(self.alphabet)) if x is a else (Potential(self.alphabet), b)
            raise self.error("cannot mix potentials and polynomials", op)
        return a, b

    def term(self):
        value = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            if op[1] == "*":
                if isinstance(value, Potential) or isinstance(rhs, Potential):
                    scalar = rhs if isinstance(value, Potential) else value
                    pot = value if isinstance(value, Potential) else rhs
                    if isinstance(scalar, Potential) or set(scalar.terms) - {()}:
                        raise self.error("potentials can only be scaled by scalars", op)
                    value = pot.scale(scalar.constant_term())
                else:
                    value = value * rhs
            else:
                if isinstance(rhs, Potential) or set(rhs.terms) - {()}:
                    raise self.error("division by a non-scalar", op)
                c = rhs.constant_term()
                if c == 0:
                    raise self.error("division by zero", op)
                value = value.scale(1 / c) if isinstance(value, Potential) else value / c
        return value

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("+", "-"):
            self.take()
            value = self.unary()
            return -value if tok[1] == "-" else value
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "int" or tok[1] <= 0:
                raise self.error("exponent must be a positive integer", tok)
            if isinstance(base, Potential):
                raise self.error("cannot raise a potential to a power", tok)
            base = base ** tok[1]
        return base

    def atom(self):
        tok = self.take()
        kind, value, pos = tok
        if kind == "int":
            return NcPoly.constant(self.alphabet, value)
        if kind == "id":
            if value == "cyc":
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                if isinstance(inner, Potential):
                    raise self.error("nested cyc()", tok)
                return cyclify(inner)
            if value in self.alphabet.names:
                return NcPoly.gen(self.alphabet, value)
            if value == "hbar":
                raise self.error("hbar used but not declared as a generator", tok)
            if value in self.params:
                return NcPoly.constant(self.alphabet, self.params[value])
            raise self.error(f"unknown identifier {value!r}", tok)
        if kind == "op" and value == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise self.error("unexpected token", tok)


def parse(text: str, alphabet: Alphabet, params: Mapping[str, Fraction] | None = None):
    """Parse ``text`` into an :class:`NcPoly` or a :class:`Potential`."""
    return _Parser(text, alphabet, dict(params or {})).parse()


def parse_poly(text: str, alphabet: Alphabet, params=None) -> NcPoly:
    value = parse(text, alphabet, params)
    if not isinstance(value, NcPoly):
        raise ParseError(f"expected a polynomial, got a potential: {text!r}")
    return value


def parse_potential(text: str, alphabet: Alphabet, params=None) -> Potential:
    value = parse(text, alphabet, params)
    if isinstance(value, NcPoly):
        if value.is_zero():
            return Potential(alphabet)
        raise ParseError(f"expected a potential (wrap words in cyc(...)): {text!r}")
    return value


def parse_rational(text: str) -> Fraction:
    """Parse a scalar literal such as ``-3/4`` or ``2``."""
    value = parse(text, Alphabet((), ()), {})
    if isinstance(value, Potential) or set(value.terms) - {()}:
        raise ParseError(f"not a rational literal: {text!r}")
    return value.constant_term()
