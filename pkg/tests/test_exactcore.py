import random
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, strategies as st

from deformwb.exactcore import (Alphabet, AlphabetMismatch, CyclicWord, NcPoly, Potential,
                                cyclic_derivative, cyclify, format_rational, mul)
from deformwb.expr import ParseError, parse_poly, parse_potential

from conftest import XYZ, ncpolys, words

x, y, z = (NcPoly.gen(XYZ, i) for i in range(3))


def P(text, params=None, alphabet=XYZ):
    return parse_poly(text, alphabet, params)


def test_free_product_is_noncommutative():
    assert mul(x, y) == NcPoly.word(XYZ, (0, 1))
    assert mul(y, x) == NcPoly.word(XYZ, (1, 0))
    assert x * y != y * x


def test_bilinearity_example():
    assert (x + y) * (x - y) == x * x - x * y + y * x - y * y


def test_unit():
    p = P("2*x*y - 1/3*z + 5")
    assert NcPoly.one(XYZ) * p == p == p * NcPoly.one(XYZ)


def test_alphabet_mismatch():
    other = Alphabet.of("ab")
    with pytest.raises(AlphabetMismatch):
        mul(x, NcPoly.gen(other, 0))


@given(ncpolys(), ncpolys(), ncpolys())
def test_product_associative_and_distributive(p, q, r):
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    if p and q:
        assert (p * q).degree() <= p.degree() + q.degree()


def test_cyclic_derivative_examples():
    phi = parse_potential("cyc(x*y*z) - cyc(x*z*y)", XYZ)
    assert cyclic_derivative(phi, 0) == P("y*z - z*y")
    skl = parse_potential("cyc(x*y*z) - t*cyc(x*z*y) + c/3*cyc(x^3 + y^3 + z^3)", XYZ, {"t": 5, "c": 7})
    assert cyclic_derivative(skl, 2) == P("x*y - 5*y*x + 7*z^2")
    assert cyclic_derivative(parse_potential("cyc(x^3)", XYZ), 0) == P("3*x^2")


def test_cyclify_examples():
    assert cyclify(P("x*y*z")) == cyclify(P("y*z*x")) == cyclify(P("z*x*y"))
    assert cyclify(P("x*y - y*x")).is_zero()
    efh = Alphabet.of("efh")
    pot = parse_potential("cyc(e*f*h) - cyc(e*h*f) - 1/2*cyc(h^2) - cyc(f^2) - cyc(e^2)", efh)
    assert len(pot) == 5


def _rotations(w):
    return [w[i:] + w[:i] for i in range(len(w))] or [()]


@given(words(XYZ, 6))
def test_cyclify_rotation_invariant(w):
    base = cyclify(NcPoly.word(XYZ, w))
    for r in _rotations(w):
        assert cyclify(NcPoly.word(XYZ, r)) == base
        assert CyclicWord.of(r) == CyclicWord.of(w)


def _derivative_oracle(w, i):
    # enumerate every position of the word directly
    out = {}
    for j, letter in enumerate(w):
        if letter == i:
            rest = w[j + 1:] + w[:j]
            out[rest] = out.get(rest, 0) + 1
    return NcPoly(XYZ, out)


@given(st.lists(st.tuples(words(XYZ, 6), st.integers(-3, 3)), max_size=4), st.integers(0, 2))
def test_cyclic_derivative_against_enumeration(terms, i):
    # the potential normalizes each word to its minimal rotation; the oracle uses the raw words
    expected = NcPoly.zero(XYZ)
    raw = {}
    for w, c in terms:
        raw[w] = raw.get(w, 0) + c
    for w, c in raw.items():
        expected = expected + _derivative_oracle(w, i).scale(c)
    phi = Potential(XYZ, raw)
    assert cyclic_derivative(phi, i) == expected


@given(ncpolys(), ncpolys(), st.integers(0, 2))
def test_cyclic_derivative_linear(p, q, i):
    lhs = cyclic_derivative(cyclify(p) + cyclify(q).scale(3), i)
    assert lhs == cyclic_derivative(cyclify(p), i) + cyclic_derivative(cyclify(q), i).scale(3)


def test_rational_sums_against_integer_oracle():
    rng = random.Random(7)
    for _ in range(10_000):
        a, c = rng.randint(-10**6, 10**6), rng.randint(-10**6, 10**6)
        b, d = rng.randint(1, 10**6), rng.randint(1, 10**6)
        num, den = a * d + c * b, b * d
        g = gcd(num, den)
        q = Fraction(a, b) + Fraction(c, d)
        assert (q.numerator, q.denominator) == (num // g, den // g)


def test_format_rational():
    assert format_rational(Fraction(3, 4)) == "3/4"
    assert format_rational(Fraction(-2)) == "-2"


def test_parser_grammar():
    assert P("(x + y)^2") == x * x + x * y + y * x + y * y
    assert P("3/4*x") == x.scale(Fraction(3, 4))
    assert P("-(x - 2)") == -x + 2
    with pytest.raises(ParseError):
        P("x + w")
    with pytest.raises(ParseError):
        P("x^")
    with pytest.raises(ParseError):
        P("hbar*x")
    with_h = Alphabet.of(["x", "hbar"])
    assert parse_poly("hbar*x", with_h) == NcPoly.word(with_h, (1, 0))


def test_weights():
    A = Alphabet.of("xyz", [1, 1, 2])
    assert A.weight((0, 2, 1)) == 4
    assert A.weight(()) == 0
    with pytest.raises(ValueError):
        Alphabet.of("xy", [1, 0])
