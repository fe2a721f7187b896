"""Kontsevich admissible graphs and the bidifferential operators they define.

A graph with m aerial vertices is a tuple of m ordered edge pairs. Targets
are ``"L"``, ``"R"`` (the two ground sinks) or an aerial vertex number
``1..m``. Text encoding: ``m;v1:(t,t);v2:(t,t);...`` and ``0`` for the graph
with no aerial vertices.
"""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from . import linalg
from .commpoly import Poly
from .exactcore import format_rational
from .lie import FinDimLieAlgebra
from .poisson import PolyVectorField, bivector
from .starprod import BiDiffOp, StarProduct, moyal_star

DEFAULT_MAX_AERIAL = 3

_ENC_RE = re.compile(r"^v(\d+):\(([^,()]+),([^,()]+)\)$")


class GraphError(ValueError):
    pass


class MissingWeightError(KeyError):
    pass


def _target_rank(t):
    if t == "L":
        return 0
    if t == "R":
        return 1
    return t + 1


@dataclass(frozen=True)
class AdmissibleGraph:
    edges: tuple
    allow_self_loops: bool = False

    def __post_init__(self):
        m = len(self.edges)
        for j, pair in enumerate(self.edges, start=1):
            if len(pair) != 2:
                raise GraphError(f"vertex {j} must have exactly two outgoing edges")
            for t in pair:
                if t in ("L", "R"):
                    continue
                if not isinstance(t, int) or not 1 <= t <= m:
                    raise GraphError(f"vertex {j} has an invalid target {t!r}")
                if t == j and not self.allow_self_loops:
                    raise GraphError(f"vertex {j} has a self-loop")

    @property
    def m(self):
        return len(self.edges)

    @classmethod
    def parse(cls, text: str) -> "AdmissibleGraph":
        text = text.strip()
        parts = [p.strip() for p in text.split(";")]
        try:
            m = int(parts[0])
        except ValueError:
            raise GraphError(f"graph encoding must start with the vertex count: {text!r}") from None
        if len(parts) != m + 1:
            raise GraphError(f"expected {m} vertex entries in {text!r}")
        edges = []
        for j, p in enumerate(parts[1:], start=1):
            mt = _ENC_RE.match(p.replace(" ", ""))
            if not mt or int(mt.group(1)) != j:
                raise GraphError(f"malformed vertex entry {p!r}")
            pair = []
            for t in mt.group(2, 3):
                pair.append(t if t in ("L", "R") else int(t))
            edges.append(tuple(pair))
        return cls(tuple(edges))

    def encode(self) -> str:
        if not self.edges:
            return "0"
        body = ";".join(f"v{j}:({a},{b})" for j, (a, b) in enumerate(self.edges, start=1))
        return f"{self.m};{body}"

    def relabeled(self, perm) -> "AdmissibleGraph":
        """``perm[old-1] = new``; vertex ``old`` becomes vertex ``new``."""
        m = self.m
        new = [None] * m
        for old, pair in enumerate(self.edges, start=1):
            new[perm[old - 1] - 1] = tuple(t if t in ("L", "R") else perm[t - 1] for t in pair)
        return AdmissibleGraph(tuple(new), self.allow_self_loops)

    def flipped(self, vertex: int) -> "AdmissibleGraph":
        e = list(self.edges)
        a, b = e[vertex - 1]
        e[vertex - 1] = (b, a)
        return AdmissibleGraph(tuple(e), self.allow_self_loops)

    def _key(self):
        return tuple((_target_rank(a), _target_rank(b)) for a, b in self.edges)

    def canonical(self) -> "AdmissibleGraph":
        best = None
        for perm in itertools.permutations(range(1, self.m + 1)):
            g = self.relabeled(perm)
            if best is None or g._key() < best._key():
                best = g
        return best if best is not None else self

    def flip_canonical(self) -> "AdmissibleGraph":
        """Minimal canonical form over all edge-order flips."""
        best = None
        for flips in itertools.product((False, True), repeat=self.m):
            g = self
            for j, f in enumerate(flips, start=1):
                if f:
                    g = g.flipped(j)
            c = g.canonical()
            if best is None or c._key() < best._key():
                best = c
        return best if best is not None else self

    def flip_parity(self) -> int:
        """Number of flips (mod 2) taking this graph to its flip-canonical class, or -1 if ambiguous."""
        target = self.flip_canonical().canonical()._key()
        parities = set()
        for flips in itertools.product((False, True), repeat=self.m):
            g = self
            for j, f in enumerate(flips, start=1):
                if f:
                    g = g.flipped(j)
            if g.canonical()._key() == target:
                parities.add(sum(flips) % 2)
        return parities.pop() if len(parities) == 1 else -1

    def has_parallel_edges(self):
        return any(a == b for a, b in self.edges)

    def __str__(self):
        return self.encode()


def enumerate_graphs(m: int, max_aerial: int = DEFAULT_MAX_AERIAL) -> list:
    """All admissible graphs with m aerial vertices up to relabeling, sorted by canonical form."""
    if m < 0:
        raise GraphError("m must be nonnegative")
    if m > max_aerial:
        raise GraphError(f"m = {m} exceeds the enumeration cap {max_aerial}")
    if m == 0:
        return [AdmissibleGraph(())]
    seen = {}
    per_vertex = []
    for j in range(1, m + 1):
        targets = ["L", "R"] + [t for t in range(1, m + 1) if t != j]
        per_vertex.append(list(itertools.product(targets, repeat=2)))
    for choice in itertools.product(*per_vertex):
        g = AdmissibleGraph(tuple(choice)).canonical()
        seen.setdefault(g._key(), g)
    return [seen[k] for k in sorted(seen)]


def compile_graph(gamma: AdmissibleGraph, pi: PolyVectorField) -> BiDiffOp:
    """``B_{Gamma,pi}``: sum over edge labelings I of prod_j d^{in(j)} pi^{I(e1_j) I(e2_j)} d^{..}f d^{..}g."""
    n = pi.nvars
    m = gamma.m
    zero = (0,) * n
    if m == 0:
        return BiDiffOp(n, {(zero, zero): 1})
    edge_list = [(j, slot, t) for j, pair in enumerate(gamma.edges, start=1) for slot, t in enumerate(pair)]
    entries = {}
    for i in range(n):
        for k in range(n):
            c = pi.coeff((i, k))
            if not c.is_zero():
                entries[(i, k)] = c
    if not entries:
        return BiDiffOp(n)
    terms: dict = {}
    for labels in itertools.product(range(n), repeat=len(edge_list)):
        lab = {}
        for (j, slot, t), l in zip(edge_list, labels):
            lab[(j, slot)] = l
        coeff = Poly.constant(n, 1)
        ok = True
        for j in range(1, m + 1):
            p = entries.get((lab[(j, 0)], lab[(j, 1)]))
            if p is None:
                ok = False
                break
            d = [0] * n
            for (jj, slot, t), l in zip(edge_list, labels):
                if t == j:
                    d[l] += 1
            p = p.diff_multi(d)
            if p.is_zero():
                ok = False
                break
            coeff = coeff * p
        if not ok:
            continue
        a = [0] * n
        b = [0] * n
        for (j, slot, t), l in zip(edge_list, labels):
            if t == "L":
                a[l] += 1
            elif t == "R":
                b[l] += 1
        key = (tuple(a), tuple(b))
        terms[key] = terms.get(key, Poly.zero(n)) + coeff
    return BiDiffOp(n, terms)


class WeightTable:
    """Rational weights keyed by canonical graph encoding."""

    def __init__(self, weights: Mapping | None = None):
        self.weights = {}
        for k, v in (weights or {}).items():
            g = k if isinstance(k, AdmissibleGraph) else AdmissibleGraph.parse(k)
            if isinstance(v, float):
                raise TypeError("weights must be exact rationals")
            self.weights[g.canonical().encode()] = Fraction(v)
        if self.weights.get("0", Fraction(1)) != 1:
            raise GraphError("the empty graph must have weight 1")
        self.weights["0"] = Fraction(1)

    def __getitem__(self, g: AdmissibleGraph):
        key = g.canonical().encode()
        if key not in self.weights:
            raise MissingWeightError(f"no weight for graph {key}")
        return self.weights[key]

    def __contains__(self, g):
        return g.canonical().encode() in self.weights

    def to_json(self) -> str:
        return json.dumps({k: format_rational(v) for k, v in sorted(self.weights.items())}, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "WeightTable":
        data = json.loads(text)
        return cls({k: Fraction(v) for k, v in data.items()})

    def __eq__(self, other):
        return isinstance(other, WeightTable) and self.weights == other.weights


def builtin_weights() -> WeightTable:
    """Exact table through one aerial vertex: the wedge L,R has weight 1, the rest 0."""
    table = {"0": 1}
    for g in enumerate_graphs(1):
        table[g.encode()] = 1 if g.edges == (("L", "R"),) else 0
    return WeightTable(table)


def assemble(weights: WeightTable, pi: PolyVectorField, order: int, grading=None, names=None) -> StarProduct:
    """``f*g = sum_Gamma (hbar/2)^m W_Gamma B_Gamma(f, g)`` truncated at ``hbar^order``."""
    n = pi.nvars
    ops = []
    for m in range(order + 1):
        acc = BiDiffOp(n)
        for g in enumerate_graphs(m, max(DEFAULT_MAX_AERIAL, order)):
            w = weights[g]
            if w:
                acc = acc + compile_graph(g, pi).scale(w * Fraction(1, 2 ** m))
        ops.append(acc)
    return StarProduct(n, ops, grading=grading, names=names)


@dataclass
class WeightSolveResult:
    table: WeightTable
    surviving: list
    unique: bool


def solve_order2_weights(pi: PolyVectorField, base: WeightTable | None = None) -> WeightSolveResult:
    """Order-2 weights making ``assemble`` agree with Moyal for the constant bivector ``pi``.

    Unknowns are the flip-canonical classes whose operator is nonzero for
    ``pi``; every other class with two aerial vertices gets weight 0.
    """
    base = base or builtin_weights()
    target = moyal_star(pi, 2).ops[2]
    graphs = enumerate_graphs(2)
    surviving, ops = [], []
    for g in graphs:
        if g.canonical()._key() != g.flip_canonical()._key():
            continue
        op = compile_graph(g, pi)
        if not op.is_zero():
            surviving.append(g)
            ops.append(op.scale(Fraction(1, 4)))
    keys = sorted({k for op in ops for k in op.terms} | set(target.terms))
    rows, rhs = [], []
    for key in keys:
        # each coefficient is a constant polynomial for constant pi
        for mono in sorted({e for op in ops if key in op.terms for e in op.terms[key].terms}
                           | (set(target.terms[key].terms) if key in target.terms else set())):
            row = {}
            for c, op in enumerate(ops):
                v = op.terms.get(key)
                if v is not None and mono in v.terms:
                    row[c] = v.terms[mono]
            rows.append(row)
            rhs.append(target.terms[key].terms.get(mono, 0) if key in target.terms else 0)
    sol = linalg.solve(rows, rhs, len(ops))
    if sol is None:
        raise GraphError("no order-2 weights reproduce the Moyal product for this bivector")
    unique = not linalg.nullspace([r for r in rows if r], len(ops))
    table = dict(base.weights)
    for g in graphs:
        table[g.encode()] = 0
    for c, g in enumerate(surviving):
        table[g.encode()] = sol.get(c, 0)
    return WeightSolveResult(WeightTable(table), surviving, unique)


def wheel_graph(m: int) -> AdmissibleGraph:
    """Vertex j points first at L, then at vertex j+1 (cyclically)."""
    if m < 1:
        raise GraphError("wheels need at least one aerial vertex")
    edges = tuple(("L", j % m + 1) for j in range(1, m + 1))
    return AdmissibleGraph(edges, allow_self_loops=(m == 1))


def linear_bivector(g: FinDimLieAlgebra) -> PolyVectorField:
    n = g.dim
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            entries[(i, j)] = Poly(n, {tuple(int(t == k) for t in range(n)): g.c[i][j][k] for k in range(n)})
    return bivector(n, entries)


def wheel(m: int, g: FinDimLieAlgebra) -> Poly:
    """Symbol of ``B_{W_m}`` for the linear bivector of g, as a polynomial on g.

    The compiled operator has constant coefficients and differentiates only f;
    replacing ``d_a`` by the coordinate ``x_a`` gives ``x -> tr((ad x)^m)``.
    """
    op = compile_graph(wheel_graph(m), linear_bivector(g))
    n = g.dim
    out = Poly.zero(n)
    for (a, b), c in op.terms.items():
        if any(b) or not c.is_constant():
            raise GraphError("wheel operator is not a constant-coefficient operator on the first slot")
        out = out + Poly.monomial(a, c.constant_term())
    return out
