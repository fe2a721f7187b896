"""Finite-dimensional Lie algebras given by structure constants."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence


class LieAlgebraError(ValueError):
    pass


class FinDimLieAlgebra:
    """Structure constants ``brackets[i][j][k]``: ``[e_i, e_j] = sum_k c_ij^k e_k``.

    Antisymmetry and the Jacobi identity are verified on construction unless
    ``check=False`` (used to build deliberately broken examples).
    """

    def __init__(self, names: Sequence[str], brackets, check: bool = True):
        self.names = tuple(names)
        n = len(self.names)
        self.dim = n
        self.c = [[[Fraction(brackets[i][j][k]) for k in range(n)] for j in range(n)] for i in range(n)]
        if check:
            bad = self.antisymmetry_defect()
            if bad:
                raise LieAlgebraError(f"bracket not antisymmetric at {bad}")
            bad = self.jacobi_defect()
            if bad:
                raise LieAlgebraError(f"Jacobi identity fails for {bad}")

    @classmethod
    def from_table(cls, names, table: dict, check: bool = True):
        """Build from ``{(a, b): {c: coeff}}`` keyed by names; antisymmetry is implied."""
        names = tuple(names)
        n = len(names)
        idx = {x: i for i, x in enumerate(names)}
        br = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
        for (a, b), val in table.items():
            i, j = idx[a], idx[b]
            for name, coeff in val.items():
                k = idx[name]
                br[i][j][k] += Fraction(coeff)
                if i != j:
                    br[j][i][k] -= Fraction(coeff)
        return cls(names, br, check=check)

    def bracket(self, u: Sequence, v: Sequence) -> list:
        n = self.dim
        out = [Fraction(0)] * n
        for i in range(n):
            if not u[i]:
                continue
            for j in range(n):
                if not v[j]:
                    continue
                s = u[i] * v[j]
                row = self.c[i][j]
                for k in range(n):
                    if row[k]:
                        out[k] += s * row[k]
        return out

    def basis_vector(self, i) -> list:
        v = [Fraction(0)] * self.dim
        v[i] = Fraction(1)
        return v

    def antisymmetry_defect(self):
        n = self.dim
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if self.c[i][j][k] != -self.c[j][i][k]:
                        return (self.names[i], self.names[j])
        return None

    def jacobi_defect(self):
        n = self.dim
        e = [self.basis_vector(i) for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    a = self.bracket(e[i], self.bracket(e[j], e[k]))
                    b = self.bracket(e[j], self.bracket(e[k], e[i]))
                    c = self.bracket(e[k], self.bracket(e[i], e[j]))
                    if any(x + y + z for x, y, z in zip(a, b, c)):
                        return (self.names[i], self.names[j], self.names[k])
        return None

    def satisfies_jacobi(self) -> bool:
        return self.jacobi_defect() is None

    def ad_matrix(self, i) -> list:
        """Matrix of ``ad e_i`` in the basis: column j holds ``[e_i, e_j]``."""
        n = self.dim
        return [[self.c[i][j][k] for j in range(n)] for k in range(n)]

    def is_abelian(self):
        return all(not x for plane in self.c for row in plane for x in row)

    def reordered(self, order: Sequence[str]) -> "FinDimLieAlgebra":
        idx = [self.names.index(x) for x in order]
        n = self.dim
        br = [[[self.c[idx[i]][idx[j]][idx[k]] for k in range(n)] for j in range(n)] for i in range(n)]
        return FinDimLieAlgebra(order, br)

    def __repr__(self):
        return f"FinDimLieAlgebra({self.names})"


def sl2() -> FinDimLieAlgebra:
    """Basis e, f, h with [e,f]=h, [h,e]=2e, [h,f]=-2f."""
    return FinDimLieAlgebra.from_table(
        "efh", {("e", "f"): {"h": 1}, ("h", "e"): {"e": 2}, ("h", "f"): {"f": -2}}
    )


def heisenberg() -> FinDimLieAlgebra:
    """Basis x, y, z with [x,y]=z central."""
    return FinDimLieAlgebra.from_table("xyz", {("x", "y"): {"z": 1}})


def abelian(n: int, names=None) -> FinDimLieAlgebra:
    names = tuple(names or [f"a{i}" for i in range(n)])
    return FinDimLieAlgebra.from_table(names, {})


def so3() -> FinDimLieAlgebra:
    """[x,y]=z, [y,z]=x, [z,x]=y."""
    return FinDimLieAlgebra.from_table(
        "xyz", {("x", "y"): {"z": 1}, ("y", "z"): {"x": 1}, ("z", "x"): {"y": 1}}
    )


def two_dim_nonabelian() -> FinDimLieAlgebra:
    return FinDimLieAlgebra.from_table("ab", {("a", "b"): {"b": 1}})


def gl2() -> FinDimLieAlgebra:
    """Elementary matrices E11, E12, E21, E22."""
    names = ("E11", "E12", "E21", "E22")
    idx = {(1, 1): "E11", (1, 2): "E12", (2, 1): "E21", (2, 2): "E22"}
    table = {}
    for (a, b), x in idx.items():
        for (c, d), y in idx.items():
            if names.index(x) >= names.index(y):
                continue
            val = {}
            if b == c:
                val[idx[(a, d)]] = val.get(idx[(a, d)], 0) + 1
            if d == a:
                val[idx[(c, b)]] = val.get(idx[(c, b)], 0) - 1
            val = {k: v for k, v in val.items() if v}
            if val:
                table[(x, y)] = val
    return FinDimLieAlgebra.from_table(names, table)
