"""Polyvector fields with polynomial coefficients and the Schouten-Nijenhuis bracket.

A polyvector field of arity k is stored as ``{(i1 < ... < ik): Poly}``,
meaning ``sum p_I d_{i1} ^ ... ^ d_{ik}``. Bivector coefficients ``pi^{ij}``
for ``i > j`` are read off by antisymmetry.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .commpoly import Poly
from .lie import FinDimLieAlgebra


def _sort_sign(idx: Sequence[int]):
    """Sign of the permutation sorting ``idx``; 0 if an index repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, None
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sign, tuple(sorted(idx))


class PolyVectorField:
    __slots__ = ("nvars", "arity", "components")

    def __init__(self, nvars: int, arity: int, components: Mapping | None = None):
        self.nvars = nvars
        self.arity = arity
        comps: dict = {}
        for key, p in (components or {}).items():
            key = tuple(key)
            if len(key) != arity:
                raise ValueError(f"index {key} does not have arity {arity}")
            if any(not 0 <= i < nvars for i in key):
                raise ValueError(f"index {key} out of range")
            if not isinstance(p, Poly):
                p = Poly.constant(nvars, p)
            sign, skey = _sort_sign(key)
            if sign == 0 or p.is_zero():
                continue
            q = comps.get(skey, Poly.zero(nvars)) + p.scale(sign)
            if q.is_zero():
                comps.pop(skey, None)
            else:
                comps[skey] = q
        self.components = comps

    @classmethod
    def function(cls, f: Poly) -> "PolyVectorField":
        return cls(f.nvars, 0, {(): f})

    @classmethod
    def vector(cls, coeffs: Sequence[Poly]) -> "PolyVectorField":
        n = len(coeffs)
        return cls(n, 1, {(i,): c for i, c in enumerate(coeffs)})

    def is_zero(self):
        return not self.components

    def __eq__(self, other):
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return self.nvars == other.nvars
        return (self.nvars, self.arity, self.components) == (other.nvars, other.arity, other.components)

    def __add__(self, other):
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if (self.nvars, self.arity) != (other.nvars, other.arity):
            raise ValueError("cannot add polyvectors of different arity or dimension")
        comps = dict(self.components)
        for k, p in other.components.items():
            comps[k] = comps.get(k, Poly.zero(self.nvars)) + p
        return PolyVectorField(self.nvars, self.arity, comps)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return PolyVectorField(self.nvars, self.arity, {k: p.scale(c) for k, p in self.components.items()})

    def coeff(self, idx: Sequence[int]) -> Poly:
        """Coefficient for an arbitrary (unsorted) index tuple, antisymmetrized."""
        sign, key = _sort_sign(idx)
        if sign == 0:
            return Poly.zero(self.nvars)
        return self.components.get(key, Poly.zero(self.nvars)).scale(sign)

    def wedge(self, other: "PolyVectorField") -> "PolyVectorField":
        comps: dict = {}
        for I, p in self.components.items():
            for J, q in other.components.items():
                sign, key = _sort_sign(I + J)
                if sign == 0:
                    continue
                comps[key] = comps.get(key, Poly.zero(self.nvars)) + (p * q).scale(sign)
        return PolyVectorField(self.nvars, self.arity + other.arity, comps)

    def to_str(self, names: Sequence[str] | None = None) -> str:
        names = names or [f"x{i}" for i in range(self.nvars)]
        if not self.components:
            return "0"
        parts = []
        for key in sorted(self.components):
            p = self.components[key]
            field = "^".join(f"d{names[i]}" for i in key)
            parts.append(f"({p.to_str(names)})" + (f" {field}" if field else ""))
        return " + ".join(parts)

    def __repr__(self):
        return f"PolyVectorField(arity={self.arity}, {self.to_str()})"


def _right_odd_derivative(P: PolyVectorField, k: int) -> PolyVectorField:
    comps = {}
    for I, p in P.components.items():
        if k in I:
            pos = I.index(k)
            sign = -1 if (len(I) - 1 - pos) % 2 else 1
            comps[I[:pos] + I[pos + 1:]] = p.scale(sign)
    return PolyVectorField(P.nvars, max(P.arity - 1, 0), comps)


def _left_odd_derivative(P: PolyVectorField, k: int) -> PolyVectorField:
    comps = {}
    for I, p in P.components.items():
        if k in I:
            pos = I.index(k)
            sign = -1 if pos % 2 else 1
            comps[I[:pos] + I[pos + 1:]] = p.scale(sign)
    return PolyVectorField(P.nvars, max(P.arity - 1, 0), comps)


def _even_derivative(P: PolyVectorField, k: int) -> PolyVectorField:
    return PolyVectorField(P.nvars, P.arity, {I: p.diff(k) for I, p in P.components.items()})


def schouten(a: PolyVectorField, b: PolyVectorField) -> PolyVectorField:
    """Schouten-Nijenhuis bracket; on vector fields it is the Lie bracket.

    Computed as the odd Poisson bracket on polyvectors viewed as functions of
    even coordinates ``x_i`` and odd ``d_i``:
    ``[P, Q] = sum_i (P d/d(d_i)) (d_{x_i} Q) - (d_{x_i} P) (d/d(d_i) Q)``
    with the odd derivative acting from the right on P and from the left on Q.
    """
    if a.nvars != b.nvars:
        raise ValueError("polyvector fields over different coordinate sets")
    n = a.nvars
    arity = max(a.arity + b.arity - 1, 0)
    out = PolyVectorField(n, arity)
    for i in range(n):
        if a.arity:
            t1 = _right_odd_derivative(a, i).wedge(_even_derivative(b, i))
            if not t1.is_zero():
                out = out + t1
        if b.arity:
            t2 = _even_derivative(a, i).wedge(_left_odd_derivative(b, i))
            if not t2.is_zero():
                out = out - t2
    return PolyVectorField(n, arity, out.components) if out.arity == arity else PolyVectorField(n, arity)


def bivector(nvars: int, entries: Mapping) -> PolyVectorField:
    """Bivector from ``{(i, j): coefficient}``; unordered keys are sign-normalized."""
    return PolyVectorField(nvars, 2, entries)


def poisson_bracket(pi: PolyVectorField, f: Poly, g: Poly) -> Poly:
    """``{f, g} = sum_{i,j} pi^{ij} d_i f d_j g``."""
    out = Poly.zero(pi.nvars)
    for (i, j), p in pi.components.items():
        out = out + p * (f.diff(i) * g.diff(j) - f.diff(j) * g.diff(i))
    return out


@dataclass(frozen=True)
class JacobiResult:
    is_poisson: bool
    witness: PolyVectorField

    def __bool__(self):
        return self.is_poisson


def jacobi_check(pi: PolyVectorField) -> JacobiResult:
    """Poisson iff ``[pi, pi] = 0``; the trivector is returned as witness."""
    if pi.arity != 2:
        raise ValueError("jacobi_check expects a bivector")
    tri = schouten(pi, pi)
    return JacobiResult(tri.is_zero(), tri)


def surface_bivector(f: Poly) -> PolyVectorField:
    """``pi_f = f_x dy^dz + f_y dz^dx + f_z dx^dy`` on affine 3-space."""
    if f.nvars != 3:
        raise ValueError("surface_bivector needs a polynomial in three variables")
    return bivector(3, {(1, 2): f.diff(0), (2, 0): f.diff(1), (0, 1): f.diff(2)})


def poisson_central_check(g: Poly, pi: PolyVectorField) -> bool:
    x = [Poly.var(pi.nvars, i) for i in range(pi.nvars)]
    return all(poisson_bracket(pi, g, xi).is_zero() for xi in x)


def divergence(pi: PolyVectorField) -> list:
    """Components ``sum_i d_i pi^{ij}`` for each j (standard volume form)."""
    n = pi.nvars
    return [sum((pi.coeff((i, j)).diff(i) for i in range(n)), Poly.zero(n)) for j in range(n)]


def unimodularity_check(pi: PolyVectorField) -> bool:
    return all(d.is_zero() for d in divergence(pi))


def linear_poisson(g: FinDimLieAlgebra) -> PolyVectorField:
    """Kirillov-Kostant bivector on g*: ``pi^{ij} = sum_k c_ij^k x_k``."""
    n = g.dim
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            entries[(i, j)] = Poly(n, {tuple(1 if m == k else 0 for m in range(n)): g.c[i][j][k] for k in range(n)})
    return bivector(n, entries)


def constant_bivector(matrix) -> PolyVectorField:
    n = len(matrix)
    for i in range(n):
        for j in range(n):
            if Fraction(matrix[i][j]) != -Fraction(matrix[j][i]):
                raise ValueError("bivector matrix must be antisymmetric")
    return bivector(n, {(i, j): Poly.constant(n, matrix[i][j]) for i in range(n) for j in range(i + 1, n)})


def standard_symplectic(m: int) -> PolyVectorField:
    """``sum_i d_{x_i} ^ d_{y_i}`` on coordinates ``x_1..x_m, y_1..y_m``."""
    n = 2 * m
    return bivector(n, {(i, m + i): Poly.constant(n, 1) for i in range(m)})


def is_constant(pi: PolyVectorField) -> bool:
    return all(p.is_constant() for p in pi.components.values())
