"""Weighted free algebras over Q: words, noncommutative polynomials, potentials.

Scalars are :class:`fractions.Fraction` throughout. A word is a tuple of
generator indices into an :class:`Alphabet`; the empty tuple is the unit.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

Rational = Fraction
Word = tuple


class AlphabetMismatch(ValueError):
    pass


def as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floating point coefficients are not allowed")
    return Fraction(value)


def format_rational(q: Fraction) -> str:
    """Render as ``"p/q"`` (or ``"p"`` for integers), the report wire format."""
    q = as_rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Alphabet:
    """Ordered generators with positive integer weights.

    The generator order is the letter order used by the monomial order.
    """

    names: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.names) != len(self.weights):
            raise ValueError("names and weights differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate generator names in {self.names}")
        for name, w in zip(self.names, self.weights):
            if not isinstance(w, int) or w <= 0:
                raise ValueError(f"weight of {name!r} must be a positive integer, got {w!r}")

    @classmethod
    def of(cls, names: Iterable[str], weights: Iterable[int] | None = None) -> "Alphabet":
        names = tuple(names)
        if weights is None:
            weights = (1,) * len(names)
        return cls(names, tuple(weights))

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown generator {name!r}") from None

    def weight(self, word: Word) -> int:
        ws = self.weights
        return sum(ws[i] for i in word)

    def sort_key(self, word: Word):
        """Weighted-degree-then-lexicographic key; larger key = larger word.

        Letters compare left to right with earlier-declared generators larger,
        so for ``x, y`` declared in that order ``xy > yx``.
        """
        return (self.weight(word), tuple(-a for a in word))

    def words_of_weight(self, d: int) -> Iterator[Word]:
        """All words of weight exactly ``d``."""
        if d == 0:
            yield ()
            return
        for i, w in enumerate(self.weights):
            if w <= d:
                for rest in self.words_of_weight(d - w):
                    yield (i,) + rest

    def word_str(self, word: Word) -> str:
        if not word:
            return "1"
        out = []
        i = 0
        while i < len(word):
            j = i
            while j < len(word) and word[j] == word[i]:
                j += 1
            name = self.names[word[i]]
            out.append(name if j - i == 1 else f"{name}^{j - i}")
            i = j
        return "*".join(out)


class NcPoly:
    """Finite Q-linear combination of words over a fixed alphabet."""

    __slots__ = ("alphabet", "terms")

    def __init__(self, alphabet: Alphabet, terms: Mapping | None = None):
        self.alphabet = alphabet
        clean = {}
        if terms:
            for w, c in terms.items():
                c = as_rational(c)
                if c:
                    clean[tuple(w)] = c
        self.terms = clean

    # constructors
    @classmethod
    def zero(cls, alphabet: Alphabet) -> "NcPoly":
        return cls(alphabet)

    @classmethod
    def one(cls, alphabet: Alphabet) -> "NcPoly":
        return cls(alphabet, {(): 1})

    @classmethod
    def constant(cls, alphabet: Alphabet, c) -> "NcPoly":
        return cls(alphabet, {(): c})

    @classmethod
    def gen(cls, alphabet: Alphabet, name) -> "NcPoly":
        i = name if isinstance(name, int) else alphabet.index(name)
        return cls(alphabet, {(i,): 1})

    @classmethod
    def word(cls, alphabet: Alphabet, word: Word, coeff=1) -> "NcPoly":
        return cls(alphabet, {tuple(word): coeff})

    @classmethod
    def _raw(cls, alphabet, terms):
        p = cls.__new__(cls)
        p.alphabet = alphabet
        p.terms = terms
        return p

    # basic queries
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def sorted_terms(self) -> list:
        """Terms in decreasing monomial order (leading term first)."""
        key = self.alphabet.sort_key
        return sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True)

    def __iter__(self):
        return iter(self.sorted_terms())

    def leading_word(self) -> Word:
        if not self.terms:
            raise ValueError("zero polynomial has no leading word")
        return max(self.terms, key=self.alphabet.sort_key)

    def leading_coefficient(self) -> Fraction:
        return self.terms[self.leading_word()]

    def degree(self) -> int:
        """Maximal weight of a term; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(self.alphabet.weight(w) for w in self.terms)

    def homogeneous_part(self, d: int) -> "NcPoly":
        wt = self.alphabet.weight
        return NcPoly._raw(self.alphabet, {w: c for w, c in self.terms.items() if wt(w) == d})

    def top_part(self) -> "NcPoly":
        return self.homogeneous_part(self.degree())

    def is_homogeneous(self) -> bool:
        wt = self.alphabet.weight
        return len({wt(w) for w in self.terms}) <= 1

    def monic(self) -> "NcPoly":
        lc = self.leading_coefficient()
        return self.scale(1 / lc)

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    # arithmetic
    def _check(self, other: "NcPoly"):
        if self.alphabet != other.alphabet:
            raise AlphabetMismatch(f"{self.alphabet.names} vs {other.alphabet.names}")

    def _coerce(self, other) -> "NcPoly":
        if isinstance(other, NcPoly):
            self._check(other)
            return other
        return NcPoly.constant(self.alphabet, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            v = out.get(w, 0) + c
            if v:
                out[w] = v
            else:
                out.pop(w, None)
        return NcPoly._raw(self.alphabet, out)

    __radd__ = __add__

    def __neg__(self):
        return NcPoly._raw(self.alphabet, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "NcPoly":
        c = as_rational(c)
        if not c:
            return NcPoly.zero(self.alphabet)
        return NcPoly._raw(self.alphabet, {w: v * c for w, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, NcPoly):
            return self.scale(other)
        return mul(self, other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        return self.scale(1 / as_rational(other))

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out = NcPoly.one(self.alphabet)
        for _ in range(n):
            out = out * self
        return out

    def lrmul(self, left: Word, right: Word, coeff=1) -> "NcPoly":
        """Return ``coeff * left * self * right`` for words ``left``, ``right``."""
        coeff = as_rational(coeff)
        return NcPoly._raw(
            self.alphabet, {left + w + right: c * coeff for w, c in self.terms.items()}
        )

    def __eq__(self, other):
        if isinstance(other, NcPoly):
            return self.alphabet == other.alphabet and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == ({(): Fraction(other)} if other else {})
        return NotImplemented

    def __hash__(self):
        return hash((self.alphabet, frozenset(self.terms.items())))

    def __repr__(self):
        return f"NcPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.sorted_terms():
            word = self.alphabet.word_str(w)
            if not w:
                body = format_rational(abs(c))
            elif abs(c) == 1:
                body = word
            else:
                body = f"{format_rational(abs(c))}*{word}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


def mul(p: NcPoly, q: NcPoly) -> NcPoly:
    """Concatenation product in the free algebra."""
    p._check(q)
    out: dict = {}
    for u, a in p.terms.items():
        for v, b in q.terms.items():
            w = u + v
            c = out.get(w, 0) + a * b
            if c:
                out[w] = c
            else:
                out.pop(w, None)
    return NcPoly._raw(p.alphabet, out)


def min_rotation(word: Word) -> Word:
    if not word:
        return ()
    return min(word[i:] + word[:i] for i in range(len(word)))


@dataclass(frozen=True, order=True)
class CyclicWord:
    """A word up to rotation, stored as its lexicographically minimal rotation."""

    representative: tuple

    @classmethod
    def of(cls, word: Word) -> "CyclicWord":
        return cls(min_rotation(tuple(word)))


class Potential:
    """Element of the cyclic quotient TV/[TV, TV]."""

    __slots__ = ("alphabet", "terms")

    def __init__(self, alphabet: Alphabet, terms: Mapping | None = None):
        self.alphabet = alphabet
        clean: dict = {}
        for w, c in (terms or {}).items():
            key = w.representative if isinstance(w, CyclicWord) else min_rotation(tuple(w))
            v = clean.get(key, 0) + as_rational(c)
            if v:
                clean[key] = v
            else:
                clean.pop(key, None)
        self.terms = clean

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __add__(self, other: "Potential") -> "Potential":
        if self.alphabet != other.alphabet:
            raise AlphabetMismatch("potentials over different alphabets")
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return Potential(self.alphabet, out)

    def __neg__(self):
        return Potential(self.alphabet, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Potential":
        c = as_rational(c)
        return Potential(self.alphabet, {w: v * c for w, v in self.terms.items()})

    __mul__ = scale
    __rmul__ = scale

    def __truediv__(self, c):
        return self.scale(1 / as_rational(c))

    def __eq__(self, other):
        if not isinstance(other, Potential):
            return NotImplemented
        return self.alphabet == other.alphabet and self.terms == other.terms

    def __hash__(self):
        return hash((self.alphabet, frozenset(self.terms.items())))

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(self.alphabet.weight(w) for w in self.terms)

    def is_homogeneous(self) -> bool:
        return len({self.alphabet.weight(w) for w in self.terms}) <= 1

    def sorted_terms(self):
        key = self.alphabet.sort_key
        return sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for w, c in self.sorted_terms():
            word = self.alphabet.word_str(w).replace("*", "")
            coeff = "" if c == 1 else ("-" if c == -1 else format_rational(c) + "*")
            out.append(f"{coeff}[{word}]")
        return " + ".join(out).replace("+ -", "- ")

    def __repr__(self):
        return f"Potential({self})"


def cyclify(p: NcPoly) -> Potential:
    """Image of ``p`` in TV/[TV, TV]."""
    return Potential(p.alphabet, p.terms)


def cyclic_derivative(phi: Potential, i: int) -> NcPoly:
    """Sum over occurrences of generator ``i``: rotate it to the front and delete it."""
    if not 0 <= i < len(phi.alphabet):
        raise IndexError(f"generator index {i} out of range")
    out: dict = {}
    for w, c in phi.terms.items():
        for j, letter in enumerate(w):
            if letter == i:
                rest = w[j + 1:] + w[:j]
                v = out.get(rest, 0) + c
                if v:
                    out[rest] = v
                else:
                    out.pop(rest, None)
    return NcPoly(phi.alphabet, out)
