"""Truncated star products on polynomial algebras.

Bidifferential operators are stored symbolically as ``{(alpha, beta): Poly}``
meaning ``sum C(x) d^alpha f d^beta g``. A star product truncated at order N
is a list of N+1 such operators, one per power of hbar.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Callable, Mapping, Sequence

from .commpoly import Poly, monomials_up_to
from .lie import FinDimLieAlgebra, LieAlgebraError
from .poisson import PolyVectorField, is_constant, poisson_bracket


class StarProductError(ValueError):
    pass


class GaugeError(ValueError):
    pass


# multi-index helpers

def _madd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _msub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _below(a):
    """All multi-indices ``b <= a`` componentwise, with binomial weight ``C(a, b)``."""
    for b in itertools.product(*(range(k + 1) for k in a)):
        w = 1
        for ai, bi in zip(a, b):
            w *= comb(ai, bi)
        yield b, w


def _mfact(a):
    out = 1
    for k in a:
        out *= factorial(k)
    return out


class HbarSeries:
    """Polynomial coefficients of ``hbar^0 .. hbar^N``; arithmetic is mod hbar^(N+1)."""

    __slots__ = ("nvars", "coeffs")

    def __init__(self, nvars: int, coeffs: Sequence[Poly]):
        self.nvars = nvars
        self.coeffs = list(coeffs)

    @classmethod
    def zero(cls, nvars, order):
        return cls(nvars, [Poly.zero(nvars) for _ in range(order + 1)])

    @classmethod
    def from_poly(cls, f: Poly, order: int):
        return cls(f.nvars, [f] + [Poly.zero(f.nvars) for _ in range(order)])

    @property
    def order(self):
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k]

    def __add__(self, other):
        n = min(self.order, other.order)
        return HbarSeries(self.nvars, [self.coeffs[k] + other.coeffs[k] for k in range(n + 1)])

    def __neg__(self):
        return HbarSeries(self.nvars, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return HbarSeries(self.nvars, [p.scale(c) for p in self.coeffs])

    def truncate(self, order):
        return HbarSeries(self.nvars, self.coeffs[: order + 1])

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, HbarSeries):
            return NotImplemented
        return self.nvars == other.nvars and self.coeffs == other.coeffs

    def first_nonzero(self):
        for k, c in enumerate(self.coeffs):
            if not c.is_zero():
                return k
        return None

    def to_str(self, names=None):
        parts = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            h = "" if k == 0 else ("hbar" if k == 1 else f"hbar^{k}")
            s = c.to_str(names)
            parts.append(s if not h else f"{h}*({s})")
        return " + ".join(parts) if parts else "0"

    def to_json(self, names=None):
        return [c.to_str(names) for c in self.coeffs]

    def __repr__(self):
        return f"HbarSeries({self.to_str()})"


class DiffOp:
    """Linear differential operator ``sum P_alpha(x) d^alpha``."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping | None = None):
        self.nvars = nvars
        clean = {}
        for a, p in (terms or {}).items():
            if not isinstance(p, Poly):
                p = Poly.constant(nvars, p)
            a = tuple(a)
            q = clean.get(a, Poly.zero(nvars)) + p
            if q.is_zero():
                clean.pop(a, None)
            else:
                clean[a] = q
        self.terms = clean

    @classmethod
    def identity(cls, nvars):
        return cls(nvars, {(0,) * nvars: 1})

    @classmethod
    def laplacian(cls, nvars):
        return cls(nvars, {tuple(2 if j == i else 0 for j in range(nvars)): 1 for i in range(nvars)})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, DiffOp) and self.nvars == other.nvars and self.terms == other.terms

    def __add__(self, other):
        t = dict(self.terms)
        for a, p in other.terms.items():
            t[a] = t.get(a, Poly.zero(self.nvars)) + p
        return DiffOp(self.nvars, t)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return DiffOp(self.nvars, {a: p.scale(c) for a, p in self.terms.items()})

    def apply(self, f: Poly) -> Poly:
        out = Poly.zero(self.nvars)
        for a, p in self.terms.items():
            out = out + p * f.diff_multi(a)
        return out

    def compose(self, other: "DiffOp") -> "DiffOp":
        """``self o other`` via the Leibniz rule."""
        out: dict = {}
        for a, p in self.terms.items():
            for b, q in other.terms.items():
                for a1, w in _below(a):
                    dq = q.diff_multi(a1)
                    if dq.is_zero():
                        continue
                    key = _madd(_msub(a, a1), b)
                    out[key] = out.get(key, Poly.zero(self.nvars)) + (p * dq).scale(w)
        return DiffOp(self.nvars, out)

    def after(self, op: "BiDiffOp") -> "BiDiffOp":
        """``self o op``: apply this operator to the output of a bidifferential operator."""
        out: dict = {}
        for e, q in self.terms.items():
            ef = _mfact(e)
            for e1 in itertools.product(*(range(k + 1) for k in e)):
                rest = _msub(e, e1)
                for e2 in itertools.product(*(range(k + 1) for k in rest)):
                    e3 = _msub(rest, e2)
                    w = Fraction(ef, _mfact(e1) * _mfact(e2) * _mfact(e3))
                    for (g, d), c in op.terms.items():
                        dc = c.diff_multi(e1)
                        if dc.is_zero():
                            continue
                        key = (_madd(g, e2), _madd(d, e3))
                        out[key] = out.get(key, Poly.zero(self.nvars)) + (q * dc).scale(w)
        return BiDiffOp(self.nvars, out)

    def to_json(self, names=None):
        return {",".join(map(str, a)): p.to_str(names) for a, p in sorted(self.terms.items())}


class BiDiffOp:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping | None = None):
        self.nvars = nvars
        clean = {}
        for (a, b), p in (terms or {}).items():
            if not isinstance(p, Poly):
                p = Poly.constant(nvars, p)
            key = (tuple(a), tuple(b))
            q = clean.get(key, Poly.zero(nvars)) + p
            if q.is_zero():
                clean.pop(key, None)
            else:
                clean[key] = q
        self.terms = clean

    @classmethod
    def multiplication(cls, nvars):
        z = (0,) * nvars
        return cls(nvars, {(z, z): 1})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, BiDiffOp) and self.nvars == other.nvars and self.terms == other.terms

    def __add__(self, other):
        t = dict(self.terms)
        for k, p in other.terms.items():
            t[k] = t.get(k, Poly.zero(self.nvars)) + p
        return BiDiffOp(self.nvars, t)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return BiDiffOp(self.nvars, {k: p.scale(c) for k, p in self.terms.items()})

    def swapped(self):
        return BiDiffOp(self.nvars, {(b, a): p for (a, b), p in self.terms.items()})

    def apply(self, f: Poly, g: Poly) -> Poly:
        out = Poly.zero(self.nvars)
        df: dict = {}
        dg: dict = {}
        for (a, b), p in self.terms.items():
            if a not in df:
                df[a] = f.diff_multi(a)
            if df[a].is_zero():
                continue
            if b not in dg:
                dg[b] = g.diff_multi(b)
            if dg[b].is_zero():
                continue
            out = out + p * df[a] * dg[b]
        return out

    def precompose(self, t1: DiffOp, t2: DiffOp) -> "BiDiffOp":
        """``(f, g) -> self(t1 f, t2 g)``."""
        out: dict = {}
        for (g_, d_), c in self.terms.items():
            left = []
            for e, p in t1.terms.items():
                for g1, w in _below(g_):
                    dp = p.diff_multi(g1)
                    if not dp.is_zero():
                        left.append((_madd(_msub(g_, g1), e), dp.scale(w)))
            right = []
            for z, q in t2.terms.items():
                for d1, w in _below(d_):
                    dq = q.diff_multi(d1)
                    if not dq.is_zero():
                        right.append((_madd(_msub(d_, d1), z), dq.scale(w)))
            for a, pa in left:
                cpa = c * pa
                for b, qb in right:
                    out[(a, b)] = out.get((a, b), Poly.zero(self.nvars)) + cpa * qb
        return BiDiffOp(self.nvars, out)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (sum(t[0][0]) + sum(t[0][1]), t[0]))

    def to_json(self, names=None):
        return [
            {"left": list(a), "right": list(b), "coefficient": p.to_str(names)}
            for (a, b), p in self.sorted_terms()
        ]

    def __repr__(self):
        return f"BiDiffOp({len(self.terms)} terms)"


class StarProduct:
    """Star product truncated at ``hbar^order``.

    ``grading`` is metadata: ``"symplectic"`` when hbar has weight 2 (Weyl type),
    ``"lie"`` when it has weight 1 (enveloping-algebra type).
    """

    def __init__(self, nvars: int, ops: Sequence[BiDiffOp], grading: str | None = None, names=None):
        if not ops:
            raise StarProductError("a star product needs at least the order-0 operator")
        self.nvars = nvars
        self.ops = list(ops)
        self.grading = grading
        self.names = tuple(names) if names else tuple(f"x{i}" for i in range(nvars))

    @property
    def order(self):
        return len(self.ops) - 1

    def apply(self, f: Poly, g: Poly) -> HbarSeries:
        return HbarSeries(self.nvars, [op.apply(f, g) for op in self.ops])

    def truncate(self, order):
        return StarProduct(self.nvars, self.ops[: order + 1], self.grading, self.names)

    def perturbed(self, k: int, op: BiDiffOp) -> "StarProduct":
        ops = list(self.ops)
        ops[k] = ops[k] + op
        return StarProduct(self.nvars, ops, self.grading, self.names)

    def __eq__(self, other):
        return isinstance(other, StarProduct) and self.nvars == other.nvars and self.ops == other.ops

    def to_json(self):
        return {
            "grading": self.grading,
            "order": self.order,
            "variables": list(self.names),
            "operators": [op.to_json(self.names) for op in self.ops],
        }


def _series_star(star, F: HbarSeries, G: HbarSeries, order: int, mono=None) -> HbarSeries:
    """Bilinear extension of ``star.apply`` to hbar-series, truncated at ``order``."""
    n = F.nvars
    out = [Poly.zero(n) for _ in range(order + 1)]
    for i, fi in enumerate(F.coeffs[: order + 1]):
        if fi.is_zero():
            continue
        for j, gj in enumerate(G.coeffs[: order + 1 - i]):
            if gj.is_zero():
                continue
            prod = mono(fi, gj) if mono else star.apply(fi, gj)
            for k, c in enumerate(prod.coeffs[: order + 1 - i - j]):
                out[i + j + k] = out[i + j + k] + c
    return HbarSeries(n, out)


def check_quantization_axioms(star, pi: PolyVectorField, degree: int):
    """Order 0 is the product and the hbar^1 antisymmetrization is the bracket, on monomials."""
    n = star.nvars
    monos = [Poly.monomial(e) for e in monomials_up_to(n, degree)]
    for f in monos:
        for g in monos:
            s = star.apply(f, g)
            if s[0] != f * g:
                return False, (f, g, 0)
            if star.order >= 1:
                t = star.apply(g, f)
                if s[1] - t[1] != poisson_bracket(pi, f, g):
                    return False, (f, g, 1)
    return True, None


# Moyal-Weyl

def moyal_star(pi: PolyVectorField, order: int, names=None) -> StarProduct:
    """``mu o exp(hbar/2 pi)``: order k is ``(1/k!)(1/2)^k`` times ``pi^k``."""
    if pi.arity != 2:
        raise StarProductError("moyal needs a bivector")
    if not is_constant(pi):
        raise StarProductError("moyal needs a constant bivector")
    if order < 0:
        raise StarProductError("order must be nonnegative")
    n = pi.nvars
    # symbol of pi: sum p^{ij}(xi_i eta_j - xi_j eta_i) in 2n commuting symbols
    sym = {}
    for (i, j), p in pi.components.items():
        c = p.constant_term()
        e = [0] * (2 * n)
        e[i] += 1
        e[n + j] += 1
        sym[tuple(e)] = sym.get(tuple(e), 0) + c
        e = [0] * (2 * n)
        e[j] += 1
        e[n + i] += 1
        sym[tuple(e)] = sym.get(tuple(e), 0) - c
    P = Poly(2 * n, sym)
    ops = []
    power = Poly.constant(2 * n, 1)
    for k in range(order + 1):
        w = Fraction(1, factorial(k) * 2 ** k)
        ops.append(BiDiffOp(n, {(e[:n], e[n:]): c * w for e, c in power.terms.items()}))
        power = power * P
    return StarProduct(n, ops, grading="symplectic", names=names)


def moyal(f: Poly, g: Poly, pi: PolyVectorField, order: int) -> HbarSeries:
    return moyal_star(pi, order).apply(f, g)


# Gutt product via PBW straightening in U_hbar(g)

class EnvelopingAlgebra:
    """``U_hbar g = T g [hbar] / (xy - yx - hbar [x, y])`` with PBW basis of sorted words.

    Elements are dicts ``{(sorted word, hbar power): coefficient}``; words are
    tuples of basis indices in the declared order.
    """

    def __init__(self, lie: FinDimLieAlgebra, max_hbar: int | None = None):
        bad = lie.jacobi_defect()
        if bad:
            raise LieAlgebraError(f"Jacobi identity fails for {bad}")
        self.lie = lie
        self.n = lie.dim
        self.max_hbar = max_hbar
        self._cache: dict = {}
        self._sym: dict = {}

    def straighten_word(self, word: tuple) -> dict:
        hit = self._cache.get(word)
        if hit is not None:
            return hit
        for i in range(len(word) - 1):
            if word[i] > word[i + 1]:
                break
        else:
            out = {(word, 0): Fraction(1)}
            self._cache[word] = out
            return out
        a, b = word[i], word[i + 1]
        out = dict(self.straighten_word(word[:i] + (b, a) + word[i + 2:]))
        row = self.lie.c[a][b]
        for k in range(self.n):
            if not row[k]:
                continue
            for (w, h), c in self.straighten_word(word[:i] + (k,) + word[i + 2:]).items():
                if self.max_hbar is not None and h + 1 > self.max_hbar:
                    continue
                key = (w, h + 1)
                v = out.get(key, 0) + row[k] * c
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
        self._cache[word] = out
        return out

    def straighten(self, elem: Mapping) -> dict:
        out: dict = {}
        for (w, h), c in elem.items():
            for (w2, h2), c2 in self.straighten_word(tuple(w)).items():
                hh = h + h2
                if self.max_hbar is not None and hh > self.max_hbar:
                    continue
                v = out.get((w2, hh), 0) + c * c2
                if v:
                    out[(w2, hh)] = v
                else:
                    out.pop((w2, hh), None)
        return out

    def multiply(self, u: Mapping, v: Mapping) -> dict:
        prod: dict = {}
        for (w1, h1), c1 in u.items():
            for (w2, h2), c2 in v.items():
                key = (w1 + w2, h1 + h2)
                prod[key] = prod.get(key, 0) + c1 * c2
        return self.straighten(prod)

    def sigma_monomial(self, exps: tuple) -> dict:
        """Straightened symmetrization of ``x^exps``: the average over its distinct orderings."""
        hit = self._sym.get(exps)
        if hit is not None:
            return hit
        letters = tuple(i for i, k in enumerate(exps) for _ in range(k))
        words = list(_multiset_permutations(letters))
        w = Fraction(1, len(words))
        out = self.straighten({(word, 0): w for word in words})
        self._sym[exps] = out
        return out

    def sigma(self, f: Poly) -> dict:
        out: dict = {}
        for e, c in f.terms.items():
            for k, v in self.sigma_monomial(e).items():
                out[k] = out.get(k, 0) + c * v
        return {k: v for k, v in out.items() if v}

    def sigma_inverse(self, elem: Mapping, order: int) -> HbarSeries:
        """Triangular inversion: peel off the longest PBW word, subtract its symmetrization."""
        n = self.n
        work = {k: v for k, v in elem.items() if v and k[1] <= order}
        coeffs = [dict() for _ in range(order + 1)]
        while work:
            (w, h), c = max(work.items(), key=lambda kv: (len(kv[0][0]), kv[0][0], -kv[0][1]))
            exps = tuple(w.count(i) for i in range(n))
            coeffs[h][exps] = coeffs[h].get(exps, 0) + c
            for (w2, h2), c2 in self.sigma_monomial(exps).items():
                hh = h + h2
                if hh > order:
                    continue
                v = work.get((w2, hh), 0) - c * c2
                if v:
                    work[(w2, hh)] = v
                else:
                    work.pop((w2, hh), None)
        return HbarSeries(n, [Poly(n, c) for c in coeffs])


def _multiset_permutations(items: tuple):
    if not items:
        yield ()
        return
    seen = set()
    for i, x in enumerate(items):
        if x in seen:
            continue
        seen.add(x)
        for rest in _multiset_permutations(items[:i] + items[i + 1:]):
            yield (x,) + rest


class GuttStar:
    """Gutt star product ``sigma^-1(sigma(f) sigma(g))`` on Sym g, truncated at ``order``."""

    grading = "lie"

    def __init__(self, lie: FinDimLieAlgebra, order: int):
        if order < 0:
            raise StarProductError("order must be nonnegative")
        self.lie = lie
        self.order = order
        self.nvars = lie.dim
        self.names = lie.names
        self.U = EnvelopingAlgebra(lie, max_hbar=order)

    def __getstate__(self):
        return {"lie": self.lie, "order": self.order}

    def __setstate__(self, state):
        self.__init__(state["lie"], state["order"])

    def apply(self, f: Poly, g: Poly) -> HbarSeries:
        U = self.U
        return U.sigma_inverse(U.multiply(U.sigma(f), U.sigma(g)), self.order)

    def to_star(self, max_degree: int) -> StarProduct:
        """Bidifferential operators of this product, exact on inputs of degree <= max_degree."""
        ops = extract_bidiff(self.apply, self.nvars, self.order, max_degree)
        return StarProduct(self.nvars, ops, grading="lie", names=self.names)


def gutt(f: Poly, g: Poly, lie: FinDimLieAlgebra, order: int) -> HbarSeries:
    return GuttStar(lie, order).apply(f, g)


def extract_bidiff(bilinear: Callable, nvars: int, order: int, max_degree: int) -> list:
    """Recover ``B_k = sum C_ab d^a (x) d^b`` from values on monomial pairs.

    Uses ``B(x^a, x^b) = sum_{c<=a, d<=b} C_cd a!/(a-c)! b!/(b-d)! x^(a-c+b-d)``,
    solved for ``C_ab`` in order of increasing total degree.
    """
    monos = monomials_up_to(nvars, max_degree)
    monos = sorted(monos, key=lambda e: (sum(e), e))
    pairs = sorted(itertools.product(monos, monos), key=lambda ab: (sum(ab[0]) + sum(ab[1]), ab))
    coeffs = [dict() for _ in range(order + 1)]
    for a, b in pairs:
        val = bilinear(Poly.monomial(a), Poly.monomial(b))
        for k in range(order + 1):
            rem = val[k]
            for (c, d), C in coeffs[k].items():
                if all(ci <= ai for ci, ai in zip(c, a)) and all(di <= bi for di, bi in zip(d, b)):
                    w = Fraction(_mfact(a), _mfact(_msub(a, c))) * Fraction(_mfact(b), _mfact(_msub(b, d)))
                    rem = rem - C * Poly.monomial(_madd(_msub(a, c), _msub(b, d)), w)
            if not rem.is_zero():
                # rem = C_ab * a! b! after all lower terms are removed
                coeffs[k][(a, b)] = rem.scale(Fraction(1, _mfact(a) * _mfact(b)))
    return [BiDiffOp(nvars, c) for c in coeffs]


# associativity

@dataclass(frozen=True)
class AssocResult:
    associative: bool
    witness: tuple | None = None
    order: int | None = None
    residual: HbarSeries | None = None

    def __bool__(self):
        return self.associative


class _MonomialCache:
    def __init__(self, star):
        self.star = star
        self.cache: dict = {}

    def mono(self, f: Poly, g: Poly) -> HbarSeries:
        n = f.nvars
        out = HbarSeries.zero(n, self.star.order)
        for e1, c1 in f.terms.items():
            for e2, c2 in g.terms.items():
                key = (e1, e2)
                r = self.cache.get(key)
                if r is None:
                    r = self.star.apply(Poly.monomial(e1), Poly.monomial(e2))
                    self.cache[key] = r
                out = out + r.scale(c1 * c2)
        return out


def _assoc_scan(star, monos, first_indices):
    cache = _MonomialCache(star)
    N = star.order
    n = star.nvars
    polys = [Poly.monomial(e) for e in monos]
    for i in first_indices:
        f = polys[i]
        for j, g in enumerate(polys):
            fg = cache.mono(f, g)
            for k, h in enumerate(polys):
                left = _series_star(star, fg, HbarSeries.from_poly(h, N), N, cache.mono)
                gh = cache.mono(g, h)
                right = _series_star(star, HbarSeries.from_poly(f, N), gh, N, cache.mono)
                diff = left - right
                if not diff.is_zero():
                    return (i, j, k), diff
    return None


def assoc_check(star, test_degree: int, jobs: int = 1) -> AssocResult:
    """Exhaustive ``(f*g)*h == f*(g*h)`` mod hbar^(N+1) over monomials of degree <= test_degree.

    The witness is the lexicographically first failing triple in the monomial
    order of ``monomials_up_to``, whatever the number of worker processes.
    """
    monos = monomials_up_to(star.nvars, test_degree)
    idx = list(range(len(monos)))
    found = None
    if jobs <= 1:
        found = _assoc_scan(star, monos, idx)
    else:
        chunks = [idx[r::jobs] for r in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_assoc_scan, [star] * jobs, [monos] * jobs, chunks))
        hits = [r for r in results if r is not None]
        if hits:
            found = min(hits, key=lambda r: r[0])
            # a worker only reports its own first failure; rescan that first index to be exact
            found = _assoc_scan(star, monos, [found[0][0]])
    if found is None:
        return AssocResult(True)
    (i, j, k), diff = found
    return AssocResult(False, (monos[i], monos[j], monos[k]), diff.first_nonzero(), diff)


# gauge transformations

class GaugeSeries:
    """``phi = Id + sum_{k>=1} hbar^k T_k`` truncated at ``order``."""

    def __init__(self, nvars: int, ops: Mapping[int, DiffOp], order: int):
        if 0 in ops and not ops[0].is_zero():
            raise GaugeError("gauge series must be the identity at order 0; "
                             "a nonzero order-0 component is not invertible in this normal form")
        bad = [k for k in ops if k < 0 or k > order]
        if bad:
            raise GaugeError(f"gauge components outside orders 1..{order}: {bad}")
        self.nvars = nvars
        self.order = order
        self.ops = {k: op for k, op in ops.items() if k >= 1 and not op.is_zero()}

    def component(self, k) -> DiffOp:
        if k == 0:
            return DiffOp.identity(self.nvars)
        return self.ops.get(k, DiffOp(self.nvars))

    def apply(self, f: Poly) -> HbarSeries:
        return HbarSeries(self.nvars, [self.component(k).apply(f) for k in range(self.order + 1)])

    def inverse(self) -> "GaugeSeries":
        """Series inverse: ``S_k = -sum_{j=1..k} T_j o S_{k-j}``."""
        S = {0: DiffOp.identity(self.nvars)}
        for k in range(1, self.order + 1):
            acc = DiffOp(self.nvars)
            for j in range(1, k + 1):
                tj = self.ops.get(j)
                if tj is not None:
                    acc = acc + tj.compose(S[k - j])
            S[k] = -acc
        return GaugeSeries(self.nvars, {k: v for k, v in S.items() if k}, self.order)

    def compose(self, other: "GaugeSeries") -> "GaugeSeries":
        N = min(self.order, other.order)
        out = {}
        for k in range(1, N + 1):
            acc = DiffOp(self.nvars)
            for a in range(k + 1):
                acc = acc + self.component(a).compose(other.component(k - a))
            out[k] = acc
        return GaugeSeries(self.nvars, out, N)

    def is_identity(self):
        return not self.ops


def gauge_transform(star: StarProduct, T: GaugeSeries) -> StarProduct:
    """``a *' b = phi^-1(phi(a) * phi(b))`` as explicit bidifferential operators."""
    if not isinstance(star, StarProduct):
        raise StarProductError("gauge_transform needs explicit operators; convert with to_star()")
    if T.nvars != star.nvars:
        raise GaugeError("gauge series acts on a different number of variables")
    N = min(star.order, T.order)
    S = T.inverse()
    inner = [BiDiffOp(star.nvars) for _ in range(N + 1)]
    for b in range(N + 1):
        for c in range(N + 1 - b):
            for d in range(N + 1 - b - c):
                inner[b + c + d] = inner[b + c + d] + star.ops[b].precompose(T.component(c), T.component(d))
    ops = []
    for k in range(N + 1):
        acc = BiDiffOp(star.nvars)
        for a in range(k + 1):
            acc = acc + S.component(a).after(inner[k - a])
        ops.append(acc)
    return StarProduct(star.nvars, ops, star.grading, star.names)
