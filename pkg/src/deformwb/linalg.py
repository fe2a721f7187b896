"""Exact sparse linear algebra over Q.

Rows are dicts ``{column: value}``. Elimination is fraction-free: every row
is scaled to a primitive integer vector and updated by cross-multiplication,
so intermediate entries stay integral and small.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence


def _primitive(row: dict) -> dict:
    """Scale a rational row to a primitive integer row with positive leading entry."""
    if not row:
        return {}
    den = 1
    for v in row.values():
        if isinstance(v, Fraction):
            den = lcm(den, v.denominator)
    ints = {j: int(v * den) for j, v in row.items() if v}
    g = 0
    for v in ints.values():
        g = gcd(g, v)
    lead = min(ints)
    if ints[lead] < 0:
        g = -g
    return {j: v // g for j, v in ints.items()}


def _eliminate(row: dict, pivot: dict, col: int) -> dict:
    a = pivot[col]
    b = row[col]
    g = gcd(a, b)
    a //= g
    b //= g
    out = {j: a * v for j, v in row.items()}
    for j, v in pivot.items():
        w = out.get(j, 0) - b * v
        if w:
            out[j] = w
        else:
            out.pop(j, None)
    if not out:
        return out
    g = 0
    for v in out.values():
        g = gcd(g, v)
        if g == 1:
            break
    if g > 1:
        out = {j: v // g for j, v in out.items()}
    return out


class Echelon:
    """Incrementally maintained row-echelon form of a growing set of rows."""

    def __init__(self):
        self.pivots: dict = {}  # leading column -> primitive integer row

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def add(self, row: dict) -> bool:
        """Insert ``row``; return True if it increased the rank."""
        r = _primitive({j: v for j, v in row.items() if v})
        while r:
            j = min(r)
            p = self.pivots.get(j)
            if p is None:
                self.pivots[j] = _primitive(r)
                return True
            r = _eliminate(r, p, j)
        return False

    def contains(self, row: dict) -> bool:
        r = _primitive({j: v for j, v in row.items() if v})
        while r:
            j = min(r)
            p = self.pivots.get(j)
            if p is None:
                return False
            r = _eliminate(r, p, j)
        return True

    def reduced(self) -> dict:
        """Reduced row-echelon form as ``{pivot column: row}`` with unit pivots (rationals)."""
        cols = sorted(self.pivots)
        rows = {j: dict(self.pivots[j]) for j in cols}
        for j in reversed(cols):
            pj = rows[j]
            for i in cols:
                if i < j and j in rows[i]:
                    rows[i] = _eliminate(rows[i], pj, j)
        out = {}
        for j in cols:
            r = rows[j]
            lead = r[j]
            out[j] = {k: Fraction(v, lead) for k, v in r.items()}
        return out


def echelon(rows: Iterable[dict]) -> Echelon:
    e = Echelon()
    for r in rows:
        e.add(r)
    return e


def rank(rows: Iterable[dict]) -> int:
    return echelon(rows).rank


def nullspace(rows: Sequence[dict], ncols: int) -> list:
    """Basis of ``{x : A x = 0}`` as sparse Fraction dicts, ordered by free column."""
    rref = echelon(rows).reduced()
    pivot_cols = set(rref)
    basis = []
    for f in range(ncols):
        if f in pivot_cols:
            continue
        vec = {f: Fraction(1)}
        for p, r in rref.items():
            v = r.get(f)
            if v:
                vec[p] = -v
        basis.append(vec)
    return basis


def solve(rows: Sequence[dict], rhs: Sequence, ncols: int):
    """A particular solution of ``A x = b`` (free variables zero), or None."""
    aug = []
    for r, b in zip(rows, rhs):
        row = dict(r)
        if b:
            row[ncols] = Fraction(b)
        aug.append(row)
    rref = echelon(aug).reduced()
    if ncols in rref:
        return None
    x = {}
    for p, r in rref.items():
        v = r.get(ncols)
        if v:
            x[p] = v
    return x


def dense_to_rows(matrix) -> list:
    return [{j: Fraction(v) for j, v in enumerate(row) if v} for row in matrix]


def transpose(rows: Sequence[dict], ncols: int) -> list:
    cols = [dict() for _ in range(ncols)]
    for i, r in enumerate(rows):
        for j, v in r.items():
            cols[j][i] = v
    return cols


def complement_basis(span_rows: Iterable[dict], candidates: Iterable[dict]) -> list:
    """Candidates (in order) that extend a basis of ``span_rows``."""
    e = echelon(span_rows)
    chosen = []
    for c in candidates:
        if e.add(c):
            chosen.append(c)
    return chosen
