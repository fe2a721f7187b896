"""Sparse commutative polynomials over Q keyed by exponent vectors."""
from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Mapping, Sequence

from .exactcore import NcPoly, as_rational, format_rational


class Poly:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping | None = None):
        self.nvars = nvars
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != nvars:
                raise ValueError(f"exponent {e} has wrong length for {nvars} variables")
            c = as_rational(c)
            if c:
                clean[e] = clean.get(e, 0) + c
                if not clean[e]:
                    del clean[e]
        self.terms = clean

    @classmethod
    def _raw(cls, nvars, terms):
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        return p

    @classmethod
    def zero(cls, nvars):
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, nvars, c):
        c = as_rational(c)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def var(cls, nvars, i):
        e = [0] * nvars
        e[i] = 1
        return cls._raw(nvars, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, exps, c=1):
        return cls(len(exps), {tuple(exps): c})

    @classmethod
    def from_ncpoly(cls, p: NcPoly) -> "Poly":
        """Commutative image of a free-algebra element."""
        n = len(p.alphabet)
        out: dict = {}
        for w, c in p.terms.items():
            e = [0] * n
            for a in w:
                e[a] += 1
            e = tuple(e)
            out[e] = out.get(e, 0) + c
        return cls(n, out)

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def is_constant(self):
        return all(not any(e) for e in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return Poly.constant(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Poly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c):
        c = as_rational(c)
        if not c:
            return Poly.zero(self.nvars)
        return Poly._raw(self.nvars, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        other = self._coerce(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return Poly._raw(self.nvars, out)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, c):
        return self.scale(1 / as_rational(c))

    def __pow__(self, n):
        out = Poly.constant(self.nvars, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def diff(self, i: int, k: int = 1) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            if e[i] < k:
                continue
            f = 1
            for j in range(k):
                f *= e[i] - j
            ne = e[:i] + (e[i] - k,) + e[i + 1:]
            out[ne] = c * f
        return Poly._raw(self.nvars, out)

    def diff_multi(self, alpha: Sequence[int]) -> "Poly":
        """Apply the partial derivative with multi-index ``alpha``."""
        out = {}
        for e, c in self.terms.items():
            f = 1
            ok = True
            for ei, ai in zip(e, alpha):
                if ei < ai:
                    ok = False
                    break
                f *= factorial(ei) // factorial(ei - ai)
            if ok:
                out[tuple(ei - ai for ei, ai in zip(e, alpha))] = c * f
        return Poly._raw(self.nvars, out)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def to_str(self, names: Sequence[str] | None = None) -> str:
        names = names or [f"x{i}" for i in range(self.nvars)]
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mon = "*".join(
                (names[i] if k == 1 else f"{names[i]}^{k}") for i, k in enumerate(e) if k
            )
            if not mon:
                body = format_rational(abs(c))
            elif abs(c) == 1:
                body = mon
            else:
                body = f"{format_rational(abs(c))}*{mon}"
            parts.append(("-" if c < 0 else "+", body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for s, b in parts[1:]:
            out += f" {s} {b}"
        return out

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"Poly({self})"


def monomials_up_to(nvars: int, degree: int):
    """Exponent vectors of total degree ``<= degree`` in graded lexicographic order."""
    out = []

    def rec(prefix, left, i):
        if i == nvars:
            out.append(tuple(prefix))
            return
        for k in range(left + 1):
            rec(prefix + [k], left - k, i + 1)

    for d in range(degree + 1):
        level = []
        out_before = len(out)
        rec([], d, 0)
        level = [e for e in out[out_before:] if sum(e) == d]
        del out[out_before:]
        out.extend(sorted(level, reverse=True))
    return out
