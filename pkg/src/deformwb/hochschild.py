"""Hochschild and Chevalley-Eilenberg cohomology of small algebras, exactly.

Cochains are dense numpy object arrays of Fractions: a k-cochain with values
in an m-dimensional bimodule has shape ``(n,)*k + (m,)``.

Conventions
-----------
Bar differential on ``phi in C^k(A, M)``::

    (d phi)(a1..a_{k+1}) = a1 phi(a2..) + sum_i (-1)^i phi(.., a_i a_{i+1}, ..)
                           + (-1)^{k+1} phi(a1..a_k) a_{k+1}

Circle product (Gerstenhaber's sign, which satisfies the graded pre-Lie
identity)::

    (g o h)(a..) = sum_i (-1)^{(i-1)(n-1)} g(a1.., h(a_i..a_{i+n-1}), ..)

With these, ``[mu, g] = (-1)^{k+1} d g`` for a k-cochain g (``mu`` the
multiplication) and ``mu o mu`` is the associator.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

import numpy as np

from . import linalg
from .lie import FinDimLieAlgebra

DEFAULT_ARITY_CAP = 4
DEFAULT_ELEMENT_CAP = 250_000


class AlgebraError(ValueError):
    pass


class CochainError(ValueError):
    pass


class HochschildResourceError(RuntimeError):
    pass


def _frac_array(data, shape=None):
    arr = np.array(data, dtype=object)
    if shape is not None:
        arr = arr.reshape(shape)
    flat = arr.reshape(-1)
    for i, v in enumerate(flat):
        if isinstance(v, float):
            raise TypeError("floating point entries are not allowed")
        flat[i] = Fraction(v)
    return arr


def zeros(shape):
    arr = np.empty(shape, dtype=object)
    arr.fill(Fraction(0))
    return arr


def _is_zero(arr) -> bool:
    return not any(arr.reshape(-1))


class FinDimAlgebra:
    """Associative unital algebra with ``e_i e_j = sum_k mult[i, j, k] e_k``."""

    def __init__(self, names: Sequence[str], mult, unit, check: bool = True):
        self.names = tuple(names)
        n = len(self.names)
        self.n = n
        self.mult = _frac_array(mult, (n, n, n))
        self.unit = [Fraction(u) for u in unit]
        if len(self.unit) != n:
            raise AlgebraError("unit has the wrong length")
        if check:
            bad = self.associativity_defect()
            if bad is not None:
                raise AlgebraError(f"not associative at {bad}")
            if not self.unit_ok():
                raise AlgebraError("unit vector does not act as the identity")

    @classmethod
    def from_table(cls, names, table: dict, unit: str, check: bool = True):
        """``{(a, b): {c: coeff}}`` for products of basis names; missing products are zero."""
        names = tuple(names)
        idx = {x: i for i, x in enumerate(names)}
        n = len(names)
        mult = zeros((n, n, n))
        u = idx[unit]
        for i in range(n):
            mult[u, i, i] = Fraction(1)
            mult[i, u, i] = Fraction(1)
        for (a, b), val in table.items():
            for k in range(n):
                mult[idx[a], idx[b], k] = Fraction(0)
            for c, coeff in val.items():
                mult[idx[a], idx[b], idx[c]] = Fraction(coeff)
        unit_vec = [1 if i == u else 0 for i in range(n)]
        return cls(names, mult, unit_vec, check=check)

    def mul(self, u, v):
        u = np.asarray(u, dtype=object)
        v = np.asarray(v, dtype=object)
        return np.tensordot(np.multiply.outer(u, v), self.mult, axes=([0, 1], [0, 1]))

    def associativity_defect(self):
        """First basis triple (names) where (ab)c != a(bc), or None."""
        m = self.mult
        left = np.tensordot(m, m, axes=([2], [0]))  # [a,b,c,out] = (ab)c
        right = np.transpose(np.tensordot(m, m, axes=([2], [1])), (2, 0, 1, 3))  # a(bc)
        diff = left - right
        for idx in itertools.product(range(self.n), repeat=3):
            if not _is_zero(diff[idx]):
                return tuple(self.names[i] for i in idx)
        return None

    def is_associative(self):
        return self.associativity_defect() is None

    def unit_ok(self):
        u = np.array(self.unit, dtype=object)
        for i in range(self.n):
            e = np.array([Fraction(int(j == i)) for j in range(self.n)], dtype=object)
            if list(self.mul(u, e)) != list(e) or list(self.mul(e, u)) != list(e):
                return False
        return True

    def unit_index(self):
        """Index of the unit if it is a basis vector, else None."""
        nz = [i for i, v in enumerate(self.unit) if v]
        if len(nz) == 1 and self.unit[nz[0]] == 1:
            return nz[0]
        return None

    def change_basis(self, P, names=None) -> "FinDimAlgebra":
        """New basis ``f_j = sum_i P[i][j] e_i`` (P invertible)."""
        P = _frac_array(P, (self.n, self.n))
        Pinv = _frac_array(_inverse(P.tolist()))
        m = np.tensordot(np.tensordot(P, P, axes=0), self.mult, axes=([0, 2], [0, 1]))  # [j1,j2,k]
        m = np.tensordot(m, Pinv, axes=([2], [1]))
        unit = np.tensordot(Pinv, np.array(self.unit, dtype=object), axes=([1], [0]))
        return FinDimAlgebra(names or [f"f{j}" for j in range(self.n)], m, list(unit), check=False)

    def perturbed(self, i, j, k, delta) -> "FinDimAlgebra":
        m = self.mult.copy()
        m[i, j, k] = m[i, j, k] + Fraction(delta)
        return FinDimAlgebra(self.names, m, self.unit, check=False)

    def __repr__(self):
        return f"FinDimAlgebra({self.names})"


def _inverse(M):
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c]), None)
        if p is None:
            raise AlgebraError("basis change matrix is singular")
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [x / piv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c]:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


def ground_field():
    return FinDimAlgebra.from_table(["1"], {}, "1")


def dual_numbers():
    """k[x]/(x^2) on the basis 1, x."""
    return FinDimAlgebra.from_table(["1", "x"], {("x", "x"): {}}, "1")


def truncated_polynomial(k: int):
    """k[x]/(x^k) on the basis 1, x, .., x^(k-1)."""
    names = ["1"] + [f"x^{i}" if i > 1 else "x" for i in range(1, k)]
    table = {}
    for i in range(1, k):
        for j in range(1, k):
            table[(names[i], names[j])] = {names[i + j]: 1} if i + j < k else {}
    return FinDimAlgebra.from_table(names, table, "1")


def product_of_fields(r: int = 2):
    """k^r with the idempotent basis; the unit is the sum of all idempotents."""
    n = r
    mult = zeros((n, n, n))
    for i in range(n):
        mult[i, i, i] = Fraction(1)
    return FinDimAlgebra([f"p{i}" for i in range(n)], mult, [1] * n)


def exterior_pair_model():
    """k[x,y]/(x^2, y^2) on the basis 1, x, y, xy."""
    return FinDimAlgebra.from_table(
        ["1", "x", "y", "xy"],
        {("x", "y"): {"xy": 1}, ("y", "x"): {"xy": 1}, ("x", "x"): {}, ("y", "y"): {}},
        "1",
    )


def exterior_pair():
    """Exterior algebra on two odd generators: basis 1, s, t, w with w = st = -ts."""
    return FinDimAlgebra.from_table(
        ["1", "s", "t", "w"],
        {("s", "t"): {"w": 1}, ("t", "s"): {"w": -1}, ("s", "s"): {}, ("t", "t"): {}},
        "1",
    )


def odd_moyal_series(A: FinDimAlgebra | None = None):
    """hbar-components [None, g1, g2] of the Weyl-ordered Clifford product on ``exterior_pair``.

    With ``st + ts = hbar`` and ``w`` the symmetrized product ``(st - ts)/2``,
    the deformed product is ``mu + hbar g1 + hbar^2 g2`` exactly.
    """
    A = A or exterior_pair()
    i = {name: k for k, name in enumerate(A.names)}
    half = Fraction(1, 2)
    g1 = Cochain.zero(2, 4, 4)
    for (a, b), (c, v) in {
        ("s", "t"): ("1", half), ("t", "s"): ("1", half),
        ("s", "w"): ("s", -half), ("w", "s"): ("s", half),
        ("t", "w"): ("t", half), ("w", "t"): ("t", -half),
    }.items():
        g1.tensor[i[a], i[b], i[c]] = v
    g2 = Cochain.zero(2, 4, 4)
    g2.tensor[i["w"], i["w"], i["1"]] = Fraction(1, 4)
    return [None, g1, g2]


def matrix_algebra(d: int = 2):
    names = [f"E{i}{j}" for i in range(d) for j in range(d)]
    n = d * d
    mult = zeros((n, n, n))
    for i, j, k, l in itertools.product(range(d), repeat=4):
        if j == k:
            mult[i * d + j, k * d + l, i * d + l] = Fraction(1)
    unit = [1 if i == j else 0 for i in range(d) for j in range(d)]
    return FinDimAlgebra(names, mult, unit)


def group_algebra_cyclic(r: int):
    n = r
    mult = zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            mult[i, j, (i + j) % n] = Fraction(1)
    return FinDimAlgebra([f"g{i}" for i in range(n)], mult, [1] + [0] * (n - 1))


class Bimodule:
    """Left action ``L[i]`` and right action ``R[i]`` (m x m matrices) of each basis element."""

    def __init__(self, A: FinDimAlgebra, L, R, check: bool = True):
        self.A = A
        self.L = _frac_array(L)
        self.R = _frac_array(R)
        self.m = self.L.shape[1]
        if self.L.shape != (A.n, self.m, self.m) or self.R.shape != (A.n, self.m, self.m):
            raise AlgebraError("action matrices have the wrong shape")
        if check:
            bad = self.defect()
            if bad:
                raise AlgebraError(bad)

    @classmethod
    def regular(cls, A: FinDimAlgebra):
        # L[i][k, j] = coefficient of e_k in e_i e_j ; R[i][k, j] = coefficient of e_k in e_j e_i
        L = np.transpose(A.mult, (0, 2, 1))
        R = np.transpose(A.mult, (1, 2, 0))
        return cls(A, L, R, check=False)

    @classmethod
    def endomorphisms(cls, A: FinDimAlgebra, rho) -> "Bimodule":
        """End_k(M) for a left module ``rho``: ``a . phi . b = rho(a) phi rho(b)`` on row-major vec."""
        rho = _frac_array(rho)
        d = rho.shape[1]
        I = _frac_array(np.eye(d, dtype=int).tolist())
        L = np.array([np.kron(r, I) for r in rho], dtype=object)
        R = np.array([np.kron(I, r.T) for r in rho], dtype=object)
        return cls(A, L, R)

    def defect(self):
        A = self.A
        n = A.n
        for i in range(n):
            for j in range(n):
                prod_L = np.tensordot(A.mult[i, j], self.L, axes=([0], [0]))
                if not _is_zero(self.L[i].dot(self.L[j]) - prod_L):
                    return f"left action is not multiplicative at ({A.names[i]}, {A.names[j]})"
                prod_R = np.tensordot(A.mult[i, j], self.R, axes=([0], [0]))
                if not _is_zero(self.R[j].dot(self.R[i]) - prod_R):
                    return f"right action is not multiplicative at ({A.names[i]}, {A.names[j]})"
                if not _is_zero(self.L[i].dot(self.R[j]) - self.R[j].dot(self.L[i])):
                    return f"left and right actions do not commute at ({A.names[i]}, {A.names[j]})"
        u = np.array(A.unit, dtype=object)
        eye = _frac_array(np.eye(self.m, dtype=int).tolist())
        if not _is_zero(np.tensordot(u, self.L, axes=([0], [0])) - eye):
            return "unit does not act as the identity on the left"
        if not _is_zero(np.tensordot(u, self.R, axes=([0], [0])) - eye):
            return "unit does not act as the identity on the right"
        return None


@dataclass
class Cochain:
    arity: int
    tensor: np.ndarray

    @classmethod
    def zero(cls, arity, n, m):
        return cls(arity, zeros((n,) * arity + (m,)))

    @classmethod
    def from_array(cls, data, n, m):
        arr = _frac_array(data)
        k = arr.ndim - 1
        if arr.shape != (n,) * k + (m,):
            raise CochainError(f"cochain tensor shape {arr.shape} does not fit (n={n}, m={m})")
        return cls(k, arr)

    @classmethod
    def multiplication(cls, A: FinDimAlgebra):
        return cls(2, A.mult.copy())

    @classmethod
    def identity(cls, A: FinDimAlgebra):
        return cls(1, _frac_array(np.eye(A.n, dtype=int).tolist()))

    @property
    def shape(self):
        return self.tensor.shape

    def __add__(self, other):
        self._check(other)
        return Cochain(self.arity, self.tensor + other.tensor)

    def __sub__(self, other):
        self._check(other)
        return Cochain(self.arity, self.tensor - other.tensor)

    def __neg__(self):
        return Cochain(self.arity, -self.tensor)

    def scale(self, c):
        return Cochain(self.arity, self.tensor * Fraction(c))

    def _check(self, other):
        if self.shape != other.shape:
            raise CochainError("cochains of different shapes")

    def is_zero(self):
        return _is_zero(self.tensor)

    def __eq__(self, other):
        return isinstance(other, Cochain) and self.shape == other.shape and _is_zero(self.tensor - other.tensor)

    def is_normalized(self, A: FinDimAlgebra):
        """Vanishes whenever some argument is the unit."""
        u = np.array(A.unit, dtype=object)
        for pos in range(self.arity):
            if not _is_zero(np.tensordot(self.tensor, u, axes=([pos], [0]))):
                return False
        return True

    def evaluate(self, *args):
        t = self.tensor
        for a in args:
            t = np.tensordot(np.asarray(a, dtype=object), t, axes=([0], [0]))
        return t

    def flat(self):
        return self.tensor.reshape(-1)

    def to_json(self):
        out = {}
        for idx in itertools.product(*(range(s) for s in self.shape)):
            v = self.tensor[idx]
            if v:
                out[",".join(map(str, idx))] = f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
        return {"arity": self.arity, "entries": out}


def hoch_differential(c: Cochain, A: FinDimAlgebra, M: Bimodule | None = None) -> Cochain:
    M = M or Bimodule.regular(A)
    k = c.arity
    if c.shape != (A.n,) * k + (M.m,):
        raise CochainError(f"cochain shape {c.shape} does not match the algebra/bimodule")
    fast = _differential_int(c, A, M)
    if fast is not None:
        return fast
    T = c.tensor
    # a1 . phi(a2..)
    out = np.tensordot(M.L, T, axes=([2], [k]))  # [a1, p, a2.., ] -> move p last
    out = np.moveaxis(out, 1, -1)
    for i in range(k):
        # phi(.., a_i a_{i+1}, ..) with sign (-1)^(i+1) for 0-based position i
        t = np.tensordot(T, A.mult, axes=([i], [2]))  # args without i, out, then (a_i, a_i+1)
        nd = t.ndim
        perm = list(range(i)) + [nd - 2, nd - 1] + list(range(i, nd - 2))
        t = np.transpose(t, perm)
        out = out + t if i % 2 else out - t
    t = np.tensordot(T, M.R, axes=([k], [2]))  # [a1..ak, a_{k+1}, p]
    out = out + t if (k + 1) % 2 == 0 else out - t
    return Cochain(k + 1, out)


def _int_view(arr):
    """``(int64 array, common denominator)``, or None when the scaled entries get large."""
    if arr.dtype != object:
        return arr.astype(np.int64), 1
    flat = arr.reshape(-1)
    den = 1
    for v in flat:
        den = lcm(den, v.denominator)
    vals = [int(v * den) for v in flat]
    if vals and max(map(abs, vals)) >= 2 ** 40:
        return None
    return np.array(vals, dtype=np.int64).reshape(arr.shape), den


def _differential_int(c: Cochain, A: FinDimAlgebra, M: Bimodule):
    # same contraction as below, in machine integers; only for integral structure constants
    views = [_int_view(t) for t in (c.tensor, M.L, A.mult, M.R)]
    if any(v is None for v in views) or any(d != 1 for _, d in views[1:]):
        return None
    (T, den), (L, _), (mult, _), (R, _) = views
    k = c.arity
    big = max(int(np.abs(x).max(initial=0)) for x in (L, mult, R))
    bound = (k + 2) * max(A.n, M.m) * int(np.abs(T).max(initial=0)) * big
    if bound >= 2 ** 62:
        return None
    out = np.moveaxis(np.tensordot(L, T, axes=([2], [k])), 1, -1)
    for i in range(k):
        t = np.tensordot(T, mult, axes=([i], [2]))
        nd = t.ndim
        t = np.transpose(t, list(range(i)) + [nd - 2, nd - 1] + list(range(i, nd - 2)))
        out = out + t if i % 2 else out - t
    t = np.tensordot(T, R, axes=([k], [2]))
    out = out + t if (k + 1) % 2 == 0 else out - t
    if c.tensor.dtype != object:
        return Cochain(k + 1, out)
    back = np.frompyfunc(lambda v: Fraction(int(v), den), 1, 1)
    return Cochain(k + 1, back(out).astype(object))


def _convention_sign(i: int, n: int, convention: str) -> int:
    if convention == "standard":
        return -1 if (i * (n - 1)) % 2 else 1
    if convention == "printed":
        return -1 if (i + 1) % 2 else 1
    raise ValueError(f"unknown sign convention {convention!r}")


def circle(g: Cochain, h: Cochain, convention: str = "standard") -> Cochain:
    """Insert h into each slot of g. ``convention="printed"`` uses the plain ``(-1)^i`` sign."""
    m, p = g.arity, h.arity
    n = g.shape[-1]
    if m + p == 0:
        raise CochainError("circle product of two 0-cochains is undefined")
    exact_int = g.tensor.dtype != object and h.tensor.dtype != object
    if m == 0:
        if exact_int:
            return Cochain(p - 1, np.zeros((n,) * p, dtype=np.int64))
        return Cochain.zero(p - 1, n, n)
    if g.shape[-1] != n or h.shape[-1] != n:
        raise CochainError("circle product needs coefficients in the algebra itself")
    shape = (n,) * (m + p - 1) + (n,)
    out = np.zeros(shape, dtype=np.int64) if exact_int else zeros(shape)
    for i in range(m):
        t = np.tensordot(h.tensor, g.tensor, axes=([p], [i]))
        perm = list(range(p, p + i)) + list(range(p)) + list(range(p + i, p + m))
        t = np.transpose(t, perm)
        out = out + t if _convention_sign(i, p, convention) > 0 else out - t
    return Cochain(m + p - 1, out)


def gerstenhaber(g: Cochain, h: Cochain, convention: str = "standard") -> Cochain:
    """``[g, h] = g o h - (-1)^{(m+1)(n+1)} h o g``."""
    sign = -1 if ((g.arity + 1) * (h.arity + 1)) % 2 else 1
    a = circle(g, h, convention)
    b = circle(h, g, convention)
    return a - b if sign > 0 else a + b


def pre_lie_residual(g: Cochain, h: Cochain, t: Cochain, convention: str = "standard") -> Cochain:
    """Graded right pre-Lie identity residual (shifted degrees |x| = arity - 1)."""
    lhs = circle(g, circle(h, t, convention), convention) - circle(circle(g, h, convention), t, convention)
    rhs = circle(g, circle(t, h, convention), convention) - circle(circle(g, t, convention), h, convention)
    s = (t.arity - 1) * (h.arity - 1)
    return lhs - rhs if s % 2 == 0 else lhs + rhs


def cup(g: Cochain, h: Cochain, A: FinDimAlgebra) -> Cochain:
    """``(g u h)(a.., b..) = g(a..) h(b..)`` with the algebra product on values."""
    t = np.tensordot(g.tensor, h.tensor, axes=0)
    nd = t.ndim
    # move g's value axis next to h's value axis
    t = np.moveaxis(t, g.arity, nd - 2)
    out = np.tensordot(t, A.mult, axes=([nd - 2, nd - 1], [0, 1]))
    return Cochain(g.arity + h.arity, out)


# cohomology

@dataclass
class CohomologyReport:
    dims: list
    representatives: list = field(default_factory=list)
    complex_dims: list = field(default_factory=list)
    normalized: bool = False

    def to_json(self):
        return {
            "dims": list(self.dims),
            "complex_dims": list(self.complex_dims),
            "normalized": self.normalized,
            "representatives": [[r.to_json() if isinstance(r, Cochain) else r for r in reps] for reps in self.representatives],
        }


def _index_set(n, k, skip):
    rng = [i for i in range(n) if i != skip]
    return list(itertools.product(rng, repeat=k))


def _differential_columns(A, M, k, skip, cap):
    """Images of the basis k-cochains under d, restricted to the chosen index sets."""
    n, m = A.n, M.m
    src = _index_set(n, k, skip)
    dst = _index_set(n, k + 1, skip)
    if n ** (k + 1) * m > cap:
        raise HochschildResourceError(f"cochain tensor of size {n ** (k + 1) * m} exceeds cap {cap}")
    dst_pos = {idx: r for r, idx in enumerate(dst)}
    cols = []
    for idx in src:
        for p in range(m):
            c = Cochain.zero(k, n, m)
            c.tensor[idx + (p,)] = Fraction(1)
            d = hoch_differential(c, A, M).tensor
            col = {}
            for didx in dst:
                vals = d[didx]
                base = dst_pos[didx] * m
                for q in range(m):
                    if vals[q]:
                        col[base + q] = vals[q]
            cols.append(col)
    return cols, len(src) * m, len(dst) * m


def _vector_to_cochain(vec, A, M, k, skip):
    c = Cochain.zero(k, A.n, M.m)
    src = _index_set(A.n, k, skip)
    for pos, v in vec.items():
        idx, p = divmod(pos, M.m)
        c.tensor[src[idx] + (p,)] = v
    return c


def hh(A: FinDimAlgebra, M: Bimodule | None = None, top: int = 3, *, normalized: bool = True,
       arity_cap: int = DEFAULT_ARITY_CAP, element_cap: int = DEFAULT_ELEMENT_CAP) -> CohomologyReport:
    """Dimensions and representative cocycles of HH^0..HH^top.

    With ``normalized`` (default) and the unit a basis vector, the normalized
    subcomplex is used (cochains vanishing on the unit); otherwise the full
    bar complex.
    """
    if top > arity_cap:
        raise HochschildResourceError(f"top degree {top} exceeds the arity cap {arity_cap}")
    M = M or Bimodule.regular(A)
    skip = A.unit_index() if normalized else None
    cols = []
    sizes = []
    for k in range(top + 1):
        c, ns, nd = _differential_columns(A, M, k, skip, element_cap)
        cols.append(c)
        sizes.append(ns)
    dims, reps = [], []
    for k in range(top + 1):
        rows = linalg.transpose(cols[k], _next_size(A, M, k, skip))
        kernel = linalg.nullspace(rows, sizes[k])
        image = cols[k - 1] if k > 0 else []
        rank_prev = linalg.rank(image)
        dims.append(len(kernel) - rank_prev)
        chosen = linalg.complement_basis(image, kernel)
        reps.append([_vector_to_cochain(v, A, M, k, skip) for v in chosen])
    return CohomologyReport(dims, reps, sizes, normalized=skip is not None)


def _next_size(A, M, k, skip):
    return len(_index_set(A.n, k + 1, skip)) * M.m


def center(A: FinDimAlgebra) -> list:
    """Basis of Z(A) by solving ``e_i x = x e_i`` directly."""
    n = A.n
    rows = []
    for i in range(n):
        for k in range(n):
            row = {}
            for j in range(n):
                v = A.mult[i, j, k] - A.mult[j, i, k]
                if v:
                    row[j] = v
            if row:
                rows.append(row)
    return linalg.nullspace(rows, n)


def derivation_dims(A: FinDimAlgebra):
    """(dim Der(A), dim Inn(A)) by direct linear algebra on n x n matrices."""
    n = A.n
    rows = []
    # D(e_i e_j) = D(e_i) e_j + e_i D(e_j), D as matrix D[k, l]: e_l -> sum_k D[k,l] e_k
    for i in range(n):
        for j in range(n):
            for out in range(n):
                row = {}
                for l in range(n):
                    c = A.mult[i, j, l]
                    if c:
                        row[out * n + l] = row.get(out * n + l, 0) + c
                for k in range(n):
                    c = A.mult[k, j, out]
                    if c:
                        row[k * n + i] = row.get(k * n + i, 0) - c
                    c = A.mult[i, k, out]
                    if c:
                        row[k * n + j] = row.get(k * n + j, 0) - c
                row = {a: b for a, b in row.items() if b}
                if row:
                    rows.append(row)
    der = len(linalg.nullspace(rows, n * n))
    inner = []
    for x in range(n):
        col = {}
        for l in range(n):
            for k in range(n):
                v = A.mult[x, l, k] - A.mult[l, x, k]
                if v:
                    col[k * n + l] = v
        inner.append(col)
    return der, linalg.rank(inner)


# deformation calculus

@dataclass
class ObstructionResult:
    obstruction: Cochain
    vanishes: bool
    lift: Cochain | None
    verified: bool

    def __bool__(self):
        return self.vanishes


def _solve_coboundary(target: Cochain, A: FinDimAlgebra, M: Bimodule, k: int):
    """Find a k-cochain x with d x = target (full cochains), or None."""
    cols, ns, nd = _differential_columns(A, M, k, None, DEFAULT_ELEMENT_CAP)
    rows = linalg.transpose(cols, nd)
    rhs = list(target.tensor.reshape(-1))
    sol = linalg.solve(rows, rhs, ns)
    if sol is None:
        return None
    return _vector_to_cochain(sol, A, M, k, None)


def mc_obstruction(gamma1: Cochain, A: FinDimAlgebra) -> ObstructionResult:
    """Obstruction to extending ``mu + e gamma1`` to second order.

    The e^2 part of associativity reads ``d gamma2 = gamma1 o gamma1`` with the
    bar differential above (equivalently ``[mu, gamma2] = -gamma1 o gamma1``).
    The returned lift is checked by expanding associativity modulo e^3.
    """
    M = Bimodule.regular(A)
    if gamma1.arity != 2 or gamma1.shape != (A.n,) * 3:
        raise CochainError("gamma1 must be a 2-cochain with values in A")
    if not hoch_differential(gamma1, A, M).is_zero():
        raise CochainError("gamma1 is not a Hochschild 2-cocycle")
    ob = circle(gamma1, gamma1)
    if not hoch_differential(ob, A, M).is_zero():
        raise CochainError("internal error: obstruction is not a 3-cocycle")
    lift = _solve_coboundary(ob, A, M, 2)
    verified = False
    if lift is not None:
        mu = Cochain.multiplication(A)
        series = [mu, gamma1, lift]
        verified = _associative_mod(series, 2)
    return ObstructionResult(ob, lift is not None, lift, verified)


def _associative_mod(series: Sequence[Cochain], N: int) -> bool:
    """``sum e^k m_k`` associative modulo e^(N+1)."""
    return _first_mc_failure(series, N) is None


def _first_mc_failure(series, N):
    for k in range(N + 1):
        acc = None
        for a in range(k + 1):
            b = k - a
            if a < len(series) and b < len(series):
                t = circle(series[a], series[b])
                acc = t if acc is None else acc + t
        if acc is not None and not acc.is_zero():
            return k
    return None


@dataclass
class TwistResult:
    ok: bool
    mc_failure_order: int | None
    square_failure: tuple | None = None

    def __bool__(self):
        return self.ok


def _series_bracket(X, Y, N):
    out = []
    for k in range(N + 1):
        acc = None
        for a in range(k + 1):
            if a < len(X) and k - a < len(Y) and X[a] is not None and Y[k - a] is not None:
                t = gerstenhaber(X[a], Y[k - a])
                acc = t if acc is None else acc + t
        out.append(acc)
    return out


def twist_check(xi: Sequence[Cochain | None], A: FinDimAlgebra, N: int, test_arities=(0, 1, 2)) -> TwistResult:
    """Check ``(d^xi)^2 = 0`` mod hbar^(N+1) where ``d^xi y = [mu + xi, y]``.

    ``xi[k]`` is the hbar^k component (``xi[0]`` must be absent or zero). The
    Maurer-Cartan equation ``[mu + xi, mu + xi] = 0`` is checked first, order by
    order, and its first failing order is reported. The square of the twisted
    differential is then evaluated on every basis cochain of the test arities.
    """
    n = A.n
    xi = list(xi) + [None] * max(0, N + 1 - len(xi))
    if xi[0] is not None and not xi[0].is_zero():
        raise CochainError("xi must have no hbar^0 component")
    mu = Cochain.multiplication(A)
    D = [mu] + [x if x is not None else Cochain.zero(2, n, n) for x in xi[1:N + 1]]
    fail = _first_mc_failure(D, N)
    if fail is not None:
        return TwistResult(False, fail)
    # (d^xi)^2 is homogeneous in xi, so clearing denominators does not change which entries vanish
    D = _integral(D)
    for k in test_arities:
        for idx in itertools.product(range(n), repeat=k):
            for p in range(n):
                y = Cochain(k, np.zeros((n,) * k + (n,), dtype=np.int64))
                y.tensor[idx + (p,)] = 1
                once = _series_bracket(D, [y], N)
                twice = _series_bracket(D, once, N)
                for order, t in enumerate(twice):
                    if t is not None and not t.is_zero():
                        return TwistResult(False, None, (k, idx, p, order))
    return TwistResult(True, None)


def _integral(series):
    """Scale every component by one common denominator and store as int64 (exact for small tables)."""
    den = 1
    for c in series:
        for v in c.tensor.reshape(-1):
            den = den * v.denominator // gcd(den, v.denominator)
    out = []
    for c in series:
        vals = [v * den for v in c.tensor.reshape(-1)]
        if any(abs(v) >= 2 ** 20 for v in vals):
            return series
        out.append(Cochain(c.arity, np.array([int(v) for v in vals], dtype=np.int64).reshape(c.shape)))
    return out


@dataclass
class ModuleObstructionResult:
    obstruction: Cochain
    vanishes: bool
    lift: Cochain | None
    verified: bool
    ext1_dim: int

    def __bool__(self):
        return self.vanishes


def module_obstruction(A: FinDimAlgebra, rho, gamma: Cochain) -> ModuleObstructionResult:
    """Second-order extension of ``rho + e gamma``: solve ``d gamma2 = -gamma u gamma``.

    ``gamma`` is a 1-cochain with values in End(M) (row-major vectorized matrices).
    """
    rho = _frac_array(rho)
    d = rho.shape[1]
    E = Bimodule.endomorphisms(A, rho)
    if gamma.arity != 1 or gamma.shape != (A.n, d * d):
        raise CochainError("gamma must be a 1-cochain with values in End(M)")
    if not hoch_differential(gamma, A, E).is_zero():
        raise CochainError("gamma is not a 1-cocycle")
    g = gamma.tensor.reshape(A.n, d, d)
    sq = np.empty((A.n, A.n, d, d), dtype=object)
    for i in range(A.n):
        for j in range(A.n):
            sq[i, j] = g[i].dot(g[j])
    ob = Cochain(2, sq.reshape(A.n, A.n, d * d))
    lift = _solve_coboundary(-ob, A, E, 1)
    verified = False
    if lift is not None:
        l2 = lift.tensor.reshape(A.n, d, d)
        verified = True
        for i in range(A.n):
            for j in range(A.n):
                # rho_e(e_i e_j) = rho_e(e_i) rho_e(e_j) at orders e^1 and e^2
                prod = A.mult[i, j]
                o1 = np.tensordot(prod, g, axes=([0], [0])) - (rho[i].dot(g[j]) + g[i].dot(rho[j]))
                o2 = np.tensordot(prod, l2, axes=([0], [0])) - (rho[i].dot(l2[j]) + g[i].dot(g[j]) + l2[i].dot(rho[j]))
                if not (_is_zero(o1) and _is_zero(o2)):
                    verified = False
    ext1 = hh(A, E, top=1, normalized=False).dims[1]
    return ModuleObstructionResult(ob, lift is not None, lift, verified, ext1)


# Chevalley-Eilenberg

def _ce_basis(n, k):
    return list(itertools.combinations(range(n), k))


def _ce_columns(g: FinDimLieAlgebra, rho, k):
    """Columns of d: C^k -> C^{k+1} on Hom(wedge^k g, M)."""
    n = g.dim
    m = rho.shape[1]
    src = _ce_basis(n, k)
    dst = _ce_basis(n, k + 1)
    src_pos = {s: i for i, s in enumerate(src)}
    cols = [dict() for _ in range(len(src) * m)]
    for r, x in enumerate(dst):
        # (d w)(x0..xk) = sum_i (-1)^i x_i . w(..^x_i..) + sum_{i<j} (-1)^{i+j} w([x_i,x_j], ..^..)
        for i in range(k + 1):
            rest = x[:i] + x[i + 1:]
            s = src_pos[rest]
            sign = -1 if i % 2 else 1
            act = rho[x[i]]
            for q in range(m):
                for p in range(m):
                    v = act[q, p]
                    if v:
                        col = cols[s * m + p]
                        key = r * m + q
                        col[key] = col.get(key, 0) + sign * v
        for i in range(k + 1):
            for j in range(i + 1, k + 1):
                rest = x[:i] + x[i + 1:j] + x[j + 1:]
                sign = -1 if (i + j) % 2 else 1
                br = g.c[x[i]][x[j]]
                for t in range(n):
                    if not br[t] or t in rest:
                        continue
                    s2, key = _wedge_insert(t, rest)
                    s = src_pos[key]
                    for p in range(m):
                        col = cols[s * m + p]
                        kk = r * m + p
                        col[kk] = col.get(kk, 0) + sign * s2 * br[t]
    return [{a: b for a, b in c.items() if b} for c in cols], len(src) * m, len(dst) * m


def _wedge_insert(t, rest):
    """Sign and sorted key of ``t ^ rest``."""
    pos = sum(1 for r in rest if r < t)
    return (-1 if pos % 2 else 1), tuple(sorted(rest + (t,)))


def lie_module_defect(g: FinDimLieAlgebra, rho):
    n = g.dim
    for i in range(n):
        for j in range(n):
            lhs = rho[i].dot(rho[j]) - rho[j].dot(rho[i])
            rhs = sum((rho[k] * g.c[i][j][k] for k in range(n)), zeros(rho[0].shape))
            if not _is_zero(lhs - rhs):
                return (g.names[i], g.names[j])
    return None


def ce_cohomology(g: FinDimLieAlgebra, module=None, top: int | None = None) -> CohomologyReport:
    """Cohomology of ``Hom(wedge^* g, M)``; ``module=None`` is the trivial module k."""
    n = g.dim
    top = n if top is None else top
    if module is None:
        rho = zeros((n, 1, 1))
    else:
        rho = _frac_array(module)
    if rho.shape[0] != n or rho.shape[1] != rho.shape[2]:
        raise AlgebraError("module must be a list of square action matrices, one per basis element")
    bad = lie_module_defect(g, rho)
    if bad:
        raise AlgebraError(f"action is not a Lie module: fails on [{bad[0]}, {bad[1]}]")
    m = rho.shape[1]
    dims, reps, sizes = [], [], []
    prev_cols = []
    for k in range(top + 1):
        if k > n:
            dims.append(0)
            reps.append([])
            sizes.append(0)
            prev_cols = []
            continue
        cols, ns, nd = _ce_columns(g, rho, k) if k < n else ([{} for _ in range(m)], m, 0)
        rows = linalg.transpose(cols, nd) if nd else []
        kernel = linalg.nullspace(rows, ns)
        dims.append(len(kernel) - linalg.rank(prev_cols))
        chosen = linalg.complement_basis(prev_cols, kernel)
        basis = _ce_basis(n, k)
        reps.append([
            {",".join(g.names[i] for i in basis[pos // m]) + f"|{pos % m}": str(v) for pos, v in sorted(vec.items())}
            for vec in chosen
        ])
        sizes.append(ns)
        prev_cols = cols
    return CohomologyReport(dims, reps, sizes)


def adjoint_module(g: FinDimLieAlgebra):
    return _frac_array([g.ad_matrix(i) for i in range(g.dim)])
