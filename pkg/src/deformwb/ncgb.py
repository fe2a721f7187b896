"""Degree-truncated two-sided Groebner bases in weighted free algebras.

Leading terms use the weighted-degree-then-lexicographic order of the
alphabet. Completion resolves overlap ambiguities of leading words in
increasing order of the overlap word, discarding overlaps heavier than the
truncation degree. A basis is only certified through its ``max_degree``.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactcore import Alphabet, NcPoly, format_rational


class ResourceLimitError(RuntimeError):
    """Completion exceeded the configured basis-size or term-count budget."""


class TruncationError(ValueError):
    """A request needs a Groebner basis certified beyond its truncation degree."""


DEFAULT_MAX_BASIS = 5000
DEFAULT_MAX_TERMS = 200_000


@dataclass(frozen=True)
class MonomialOrder:
    """Weighted degree first, then left-to-right letters; earlier generators are larger."""

    alphabet: Alphabet

    def key(self, word):
        return self.alphabet.sort_key(word)

    def less(self, u, v) -> bool:
        return self.key(u) < self.key(v)


def _heap_key(alphabet: Alphabet, word):
    # max-heap key: equal-weight words are never prefixes of each other,
    # so plain tuple order on letters is the reversed monomial order.
    return (-alphabet.weight(word), word)


def _shift_trace(trace: dict, left, right, coeff) -> dict:
    return {(left + l, g, r + right): c * coeff for (l, g, r), c in trace.items()}


def _add_into(acc: dict, other: dict, coeff=1):
    for k, v in other.items():
        w = acc.get(k, 0) + coeff * v
        if w:
            acc[k] = w
        else:
            acc.pop(k, None)


class _Reducer:
    """Leading-word rewriting against a mutable list of monic polynomials."""

    def __init__(self, alphabet: Alphabet, max_terms: int = DEFAULT_MAX_TERMS):
        self.alphabet = alphabet
        self.polys: list = []   # terms dicts, or None when retired
        self.leads: list = []
        self.traces: list = []
        self.lead_index: dict = {}
        self.lengths: set = set()
        self.max_terms = max_terms

    def _refresh_lengths(self):
        self.lengths = {len(w) for w in self.lead_index}

    def find_divisor(self, word):
        n = len(word)
        for start in range(n):
            for ln in sorted(self.lengths):
                end = start + ln
                if end > n:
                    break
                k = self.lead_index.get(word[start:end])
                if k is not None:
                    return k, word[:start], word[end:]
        return None

    def reduce(self, terms: dict, trace: dict | None = None):
        """Full normal form; returns ``(nf_terms, subtracted_trace)``.

        ``subtracted_trace`` expresses ``p - nf`` through the generators when
        ``trace`` bookkeeping is active (``trace`` is the cofactor form of p).
        """
        alph = self.alphabet
        p = dict(terms)
        heap = [_heap_key(alph, w) + (w,) for w in p]
        heapq.heapify(heap)
        out = {}
        sub_trace = {} if trace is not None else None
        while heap:
            *_, w = heapq.heappop(heap)
            c = p.pop(w, None)
            if c is None:
                continue
            hit = self.find_divisor(w)
            if hit is None:
                out[w] = c
                continue
            k, left, right = hit
            lw = self.leads[k]
            for u, a in self.polys[k].items():
                if u == lw:
                    continue
                v = left + u + right
                old = p.get(v)
                new = (old or 0) - c * a
                if new:
                    p[v] = new
                    if old is None:
                        heapq.heappush(heap, _heap_key(alph, v) + (v,))
                else:
                    p.pop(v, None)
            if sub_trace is not None:
                _add_into(sub_trace, _shift_trace(self.traces[k], left, right, c))
            if len(p) > self.max_terms:
                raise ResourceLimitError(f"intermediate polynomial exceeded {self.max_terms} terms")
        return out, sub_trace


@dataclass(frozen=True)
class TruncatedGB:
    alphabet: Alphabet
    basis: tuple
    max_degree: int
    generators: tuple
    traces: tuple | None = None

    @property
    def leading_words(self) -> frozenset:
        return frozenset(g.leading_word() for g in self.basis)

    def _reducer(self) -> _Reducer:
        red = _Reducer(self.alphabet)
        for i, g in enumerate(self.basis):
            lw = g.leading_word()
            red.polys.append(g.terms)
            red.leads.append(lw)
            red.traces.append(self.traces[i] if self.traces else {})
            red.lead_index[lw] = i
        red._refresh_lengths()
        return red

    def to_json(self) -> dict:
        return {
            "alphabet": {n: w for n, w in zip(self.alphabet.names, self.alphabet.weights)},
            "basis": [str(g) for g in self.basis],
            "leading_words": sorted(
                (self.alphabet.word_str(g.leading_word()) for g in self.basis)
            ),
            "max_degree": self.max_degree,
        }


def _overlaps(a, b):
    """Proper overlaps: suffix of ``a`` equal to prefix of ``b``; yields the shared length."""
    la, lb = len(a), len(b)
    for s in range(1, min(la, lb)):
        if a[la - s:] == b[:s]:
            yield s


def groebner(
    gens: Sequence[NcPoly],
    max_degree: int,
    *,
    alphabet: Alphabet | None = None,
    trace: bool = False,
    max_basis: int = DEFAULT_MAX_BASIS,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> TruncatedGB:
    """Two-sided Groebner basis of the ideal generated by ``gens``, complete through ``max_degree``."""
    gens = list(gens)
    if alphabet is None:
        if not gens:
            raise ValueError("an alphabet is required when there are no generators")
        alphabet = gens[0].alphabet
    for g in gens:
        if g.alphabet != alphabet:
            raise ValueError("generators over different alphabets")
        if g.is_zero():
            raise ValueError("zero generator")
    top = max((g.degree() for g in gens), default=0)
    if max_degree < top:
        raise ValueError(f"max_degree {max_degree} below generator degree {top}")

    red = _Reducer(alphabet, max_terms)
    counter = itertools.count()
    queue: list = []
    key = alphabet.sort_key
    weight = alphabet.weight

    def push_poly(terms, tr):
        lw = max(terms, key=key)
        heapq.heappush(queue, (key(lw), next(counter), "poly", (terms, tr)))

    def push_overlaps(k):
        a = red.leads[k]
        for j, b in enumerate(red.leads):
            if red.polys[j] is None:
                continue
            pairs = [(k, j, s) for s in _overlaps(a, b)]
            if j != k:
                pairs += [(j, k, s) for s in _overlaps(b, a)]
            for i1, i2, s in pairs:
                word = red.leads[i1] + red.leads[i2][s:]
                if weight(word) <= max_degree:
                    heapq.heappush(queue, (key(word), next(counter), "overlap", (i1, i2, s)))

    def s_poly(i1, i2, s):
        a, b = red.leads[i1], red.leads[i2]
        left = a[: len(a) - s]
        right = b[s:]
        f = NcPoly._raw(alphabet, red.polys[i1]).lrmul((), right)
        g = NcPoly._raw(alphabet, red.polys[i2]).lrmul(left, ())
        terms = (f - g).terms
        tr = None
        if trace:
            tr = _shift_trace(red.traces[i1], (), right, 1)
            _add_into(tr, _shift_trace(red.traces[i2], left, (), 1), -1)
        return terms, tr

    def insert(terms, tr):
        lw = max(terms, key=key)
        lc = terms[lw]
        terms = {w: c / lc for w, c in terms.items()}
        if tr is not None:
            tr = {k: v / lc for k, v in tr.items()}
        k = len(red.polys)
        red.polys.append(terms)
        red.leads.append(lw)
        red.traces.append(tr if tr is not None else {})
        # retire elements whose leading word now reduces
        for j, old in enumerate(red.leads[:-1]):
            if red.polys[j] is None:
                continue
            if _is_subword(lw, old):
                push_poly(red.polys[j], red.traces[j] if trace else None)
                red.polys[j] = None
                del red.lead_index[old]
        red.lead_index[lw] = k
        red._refresh_lengths()
        if len(red.lead_index) > max_basis:
            raise ResourceLimitError(f"basis exceeded {max_basis} elements")
        push_overlaps(k)

    for idx, g in enumerate(gens):
        push_poly(dict(g.terms), {((), idx, ()): Fraction(1)} if trace else None)

    while True:
        while queue:
            _, _, kind, payload = heapq.heappop(queue)
            if kind == "poly":
                terms, tr = payload
            else:
                i1, i2, s = payload
                if red.polys[i1] is None or red.polys[i2] is None:
                    continue
                terms, tr = s_poly(i1, i2, s)
            nf, sub = red.reduce(terms, tr)
            if not nf:
                continue
            if tr is not None:
                tr = dict(tr)
                _add_into(tr, sub, -1)
            insert(nf, tr)
        # certification sweep: every overlap of the final basis must resolve
        alive = [k for k, p in enumerate(red.polys) if p is not None]
        pending = False
        for k in alive:
            for j in alive:
                for s in _overlaps(red.leads[k], red.leads[j]):
                    word = red.leads[k] + red.leads[j][s:]
                    if weight(word) > max_degree:
                        continue
                    terms, _ = s_poly(k, j, s)
                    nf, _ = red.reduce(terms)
                    if nf:
                        heapq.heappush(queue, (key(word), next(counter), "overlap", (k, j, s)))
                        pending = True
        if not pending:
            break

    # tail-reduce for a canonical (reduced) basis
    alive = sorted(
        (k for k, p in enumerate(red.polys) if p is not None), key=lambda k: key(red.leads[k])
    )
    basis = []
    traces = []
    for k in alive:
        lw = red.leads[k]
        tail = {w: c for w, c in red.polys[k].items() if w != lw}
        tail_tr = None
        if trace:
            tail_tr = dict(red.traces[k])
        nf_tail, sub = red.reduce(tail, tail_tr)
        nf_tail[lw] = Fraction(1)
        basis.append(NcPoly(alphabet, nf_tail))
        if trace:
            _add_into(tail_tr, sub, -1)
            traces.append(tail_tr)
    return TruncatedGB(
        alphabet=alphabet,
        basis=tuple(basis),
        max_degree=max_degree,
        generators=tuple(gens),
        traces=tuple(traces) if trace else None,
    )


def _is_subword(u, w) -> bool:
    n, m = len(u), len(w)
    return any(w[i:i + n] == u for i in range(m - n + 1))


def normal_form(p: NcPoly, gb: TruncatedGB) -> NcPoly:
    if p.alphabet != gb.alphabet:
        raise ValueError("alphabet mismatch")
    if p.degree() > gb.max_degree:
        raise TruncationError(
            f"degree {p.degree()} exceeds the basis truncation {gb.max_degree}"
        )
    nf, _ = gb._reducer().reduce(p.terms)
    return NcPoly(p.alphabet, nf)


def normal_form_traced(p: NcPoly, gb: TruncatedGB):
    """Normal form plus cofactors ``{(left, gen_index, right): coeff}`` with ``p - nf = sum``."""
    if gb.traces is None:
        raise ValueError("basis was computed without trace=True")
    if p.degree() > gb.max_degree:
        raise TruncationError(
            f"degree {p.degree()} exceeds the basis truncation {gb.max_degree}"
        )
    nf, sub = gb._reducer().reduce(p.terms, {})
    return NcPoly(p.alphabet, nf), sub


def expand_cofactors(cofactors: dict, gens: Sequence[NcPoly], alphabet: Alphabet) -> NcPoly:
    out = NcPoly.zero(alphabet)
    for (left, g, right), c in sorted(cofactors.items()):
        out = out + gens[g].lrmul(left, right, c)
    return out


def verify_traces(gb: TruncatedGB) -> bool:
    """Re-derive every basis element from the generators by multiplication."""
    if gb.traces is None:
        raise ValueError("basis was computed without trace=True")
    return all(
        expand_cofactors(tr, gb.generators, gb.alphabet) == g
        for g, tr in zip(gb.basis, gb.traces)
    )


def in_ideal(p: NcPoly, gb: TruncatedGB) -> bool:
    return normal_form(p, gb).is_zero()


# -- normal words and Hilbert series ---------------------------------------

def normal_words(gb: TruncatedGB, degree: int | None = None):
    """Normal words of weight at most ``degree`` (default: the truncation)."""
    D = gb.max_degree if degree is None else degree
    if D > gb.max_degree:
        raise TruncationError(f"degree {D} exceeds the basis truncation {gb.max_degree}")
    leads = gb.leading_words
    lens = sorted({len(w) for w in leads})
    alph = gb.alphabet
    out = []

    def extend(word, wt):
        out.append(word)
        for i, wi in enumerate(alph.weights):
            if wt + wi > D:
                continue
            nw = word + (i,)
            if any(ln <= len(nw) and nw[len(nw) - ln:] in leads for ln in lens):
                continue
            extend(nw, wt + wi)

    extend((), 0)
    out.sort(key=alph.sort_key)
    return out


@dataclass(frozen=True)
class HilbertSeries:
    coefficients: tuple

    @property
    def max_degree(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, d):
        return self.coefficients[d]

    def to_json(self) -> dict:
        return {"coefficients": list(self.coefficients), "max_degree": self.max_degree}


def hilbert(gb: TruncatedGB) -> HilbertSeries:
    """Number of normal words in each weighted degree up to the truncation."""
    counts = [0] * (gb.max_degree + 1)
    for w in normal_words(gb):
        counts[gb.alphabet.weight(w)] += 1
    return HilbertSeries(tuple(counts))


# -- flatness ---------------------------------------------------------------

class KoszulModeError(ValueError):
    pass


@dataclass(frozen=True)
class FlatnessReport:
    dims_gr: tuple
    dims_b: tuple
    max_degree: int
    flat: bool
    violation_degree: int | None = None
    witness: NcPoly | None = None
    koszul_certificate: bool = False
    notes: tuple = field(default_factory=tuple)

    @property
    def verdict(self) -> str:
        if self.flat:
            return f"flat-through-{self.max_degree}"
        return f"violation-at-{self.violation_degree}"

    def to_json(self) -> dict:
        out = {
            "dims_B": list(self.dims_b),
            "dims_grA": list(self.dims_gr),
            "flat": self.flat,
            "koszul_certificate": self.koszul_certificate,
            "max_degree": self.max_degree,
            "verdict": self.verdict,
        }
        if not self.flat:
            out["violation_degree"] = self.violation_degree
            out["witness"] = str(self.witness)
        if self.koszul_certificate:
            out["certifies"] = "flat in all degrees (Koszul deformation principle; B declared Koszul)"
        return out


def pbw_check(
    filtered: Sequence[NcPoly],
    max_degree: int,
    koszul_mode: bool = False,
    **gb_options,
) -> FlatnessReport:
    """Compare the associated graded of ``TV/(E)`` with ``B = TV/(top parts of E)``.

    In ``koszul_mode`` the caller declares ``B`` Koszul; the relations' top
    parts must be quadratic, only degrees up to 3 are examined, and a flat
    verdict is reported as a certificate of flatness in every degree.
    """
    filtered = list(filtered)
    if not filtered:
        raise ValueError("no relations given")
    tops = [r.top_part() for r in filtered]
    if koszul_mode:
        for t in tops:
            if any(len(w) != 2 for w in t.terms):
                raise KoszulModeError(f"top part {t} is not quadratic")
        max_degree = 3
    gb_a = groebner(filtered, max_degree, **gb_options)
    gb_b = groebner(tops, max_degree, **gb_options)
    dims_gr = hilbert(gb_a).coefficients
    dims_b = hilbert(gb_b).coefficients
    for d, (a, b) in enumerate(zip(dims_gr, dims_b)):
        if a > b:
            raise AssertionError(f"dim gr A_{d} = {a} exceeds dim B_{d} = {b}")
    if dims_gr == dims_b:
        return FlatnessReport(dims_gr, dims_b, max_degree, True, koszul_certificate=koszul_mode)
    bad = next(d for d, (a, b) in enumerate(zip(dims_gr, dims_b)) if a != b)
    witness = None
    for g in gb_a.basis:
        if normal_form(g.top_part(), gb_b):
            witness = g
            break
    return FlatnessReport(dims_gr, dims_b, max_degree, False, bad, witness)


def report_json(obj) -> dict:
    """JSON-ready dict; rationals as ``"p/q"`` strings."""
    def conv(x):
        if isinstance(x, Fraction):
            return format_rational(x)
        if isinstance(x, dict):
            return {str(k): conv(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [conv(v) for v in x]
        return x
    return conv(obj.to_json() if hasattr(obj, "to_json") else obj)
