"""Algebras defined by a potential: relations, Hilbert series, central elements."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from . import linalg
from .exactcore import Alphabet, NcPoly, Potential, cyclic_derivative, format_rational
from .expr import parse_poly, parse_potential
from .ncgb import TruncatedGB, TruncationError, groebner, hilbert, normal_form, normal_words


class CentralityRefused(TruncationError):
    pass


@dataclass(frozen=True)
class PotentialAlgebraSpec:
    alphabet: Alphabet
    potential: Potential
    params: Mapping = field(default_factory=dict)

    @classmethod
    def from_text(cls, names, weights, potential: str, params=None):
        alphabet = Alphabet.of(names, weights)
        params = {k: Fraction(v) for k, v in (params or {}).items()}
        return cls(alphabet, parse_potential(potential, alphabet, params), params)

    @property
    def total_weight(self) -> int:
        """d: the weight of the potential (a+b+c for the cubic three-variable case)."""
        return self.potential.degree()

    def relations(self) -> list:
        return relations_from_potential(self)

    def parse(self, text: str) -> NcPoly:
        return parse_poly(text, self.alphabet, self.params)


def relations_from_potential(spec: PotentialAlgebraSpec) -> list:
    """One relation per generator: the cyclic derivatives of the potential."""
    return [cyclic_derivative(spec.potential, i) for i in range(len(spec.alphabet))]


def series_inverse_product(weights: Sequence[int], max_degree: int) -> list:
    """Coefficients of ``1 / prod(1 - t^w)`` through ``max_degree``."""
    coeffs = [1] + [0] * max_degree
    for w in weights:
        for d in range(w, max_degree + 1):
            coeffs[d] += coeffs[d - w]
    return coeffs


@dataclass
class HilbertComparison:
    computed: list
    predicted: list
    params: dict

    @property
    def matches(self) -> list:
        return [a == b for a, b in zip(self.computed, self.predicted)]

    @property
    def ok(self) -> bool:
        return all(self.matches)

    @property
    def first_mismatch(self):
        for d, m in enumerate(self.matches):
            if not m:
                return d
        return None

    def to_json(self):
        out = {
            "computed": list(self.computed),
            "match": self.ok,
            "params": {k: format_rational(v) for k, v in sorted(self.params.items())},
            "predicted": list(self.predicted),
        }
        if not self.ok:
            out["first_mismatch"] = self.first_mismatch
        return out


def hilbert_vs_cy(spec: PotentialAlgebraSpec, max_degree: int, relations=None, **gb_options) -> HilbertComparison:
    """Truncated Hilbert series of A_Phi against ``1/((1-t^a)(1-t^b)(1-t^c))``."""
    if len(spec.alphabet) != 3:
        raise ValueError("the Calabi-Yau comparison is for three generators")
    rels = [r for r in (relations if relations is not None else relations_from_potential(spec)) if not r.is_zero()]
    gb = groebner(rels, max_degree, alphabet=spec.alphabet, **gb_options)
    computed = list(hilbert(gb).coefficients)
    predicted = series_inverse_product(spec.alphabet.weights, max_degree)
    return HilbertComparison(computed, predicted, dict(spec.params))


@dataclass
class CentralityReport:
    central: bool
    commutators: dict
    witness: tuple | None
    check_degree: int

    def __bool__(self):
        return self.central

    def to_json(self):
        out = {
            "central": self.central,
            "check_degree": self.check_degree,
            "commutators": {k: str(v) for k, v in sorted(self.commutators.items())},
        }
        if self.witness:
            out["witness"] = {"generator": self.witness[0], "normal_form": str(self.witness[1])}
        return out


def centrality_check(spec: PotentialAlgebraSpec, psi: NcPoly, max_degree: int | None = None,
                     gb: TruncatedGB | None = None, relations=None, **gb_options) -> CentralityReport:
    """Normal forms of ``[psi, x_i]`` for every generator; refuses if the basis is too shallow."""
    A = spec.alphabet
    need = max(psi.degree(), 0) + max(A.weights)
    if gb is None:
        if max_degree is None:
            raise ValueError("a truncation degree is required")
        if max_degree < need:
            raise CentralityRefused(f"truncation {max_degree} is below deg(psi) + max weight = {need}")
        rels = [r for r in (relations if relations is not None else relations_from_potential(spec)) if not r.is_zero()]
        gb = groebner(rels, max_degree, alphabet=A, **gb_options)
    elif gb.max_degree < need:
        raise CentralityRefused(f"truncation {gb.max_degree} is below deg(psi) + max weight = {need}")
    comms = {}
    witness = None
    for i, name in enumerate(A.names):
        x = NcPoly.gen(A, i)
        nf = normal_form(psi * x - x * psi, gb)
        comms[name] = nf
        if witness is None and not nf.is_zero():
            witness = (name, nf)
    return CentralityReport(witness is None, comms, witness, gb.max_degree)


def central_elements(gb: TruncatedGB, degree: int) -> list:
    """Basis of central elements spanned by normal words of weighted degree ``degree``."""
    A = gb.alphabet
    if degree + max(A.weights) > gb.max_degree:
        raise CentralityRefused(f"degree {degree} too high for truncation {gb.max_degree}")
    words = [w for w in normal_words(gb, degree) if A.weight(w) == degree]
    eqs: dict = {}
    for k, w in enumerate(words):
        W = NcPoly.word(A, w)
        for i in range(len(A)):
            x = NcPoly.gen(A, i)
            for u, c in normal_form(W * x - x * W, gb).terms.items():
                eqs.setdefault((i, u), {})[k] = c
    basis = linalg.nullspace(list(eqs.values()), len(words))
    return [NcPoly(A, {words[k]: v for k, v in vec.items()}) for vec in basis]


@dataclass
class ParameterSearch:
    chosen: dict | None
    tried: list

    def to_json(self):
        return {
            "chosen": None if self.chosen is None else {k: format_rational(v) for k, v in sorted(self.chosen.items())},
            "tried": [
                {"params": {k: format_rational(v) for k, v in sorted(p.items())}, "result": r}
                for p, r in self.tried
            ],
        }


def search_parameters(build: Callable[[dict], PotentialAlgebraSpec], candidates: Iterable[Mapping],
                      max_degree: int, excluded: Callable[[dict], bool] | None = None, **gb_options) -> ParameterSearch:
    """First candidate whose algebra matches the CY Hilbert series through ``max_degree``.

    Candidates on the excluded (singular) locus are recorded as skipped.
    """
    tried = []
    for cand in candidates:
        cand = {k: Fraction(v) for k, v in cand.items()}
        if excluded is not None and excluded(cand):
            tried.append((cand, "excluded"))
            continue
        cmp = hilbert_vs_cy(build(cand), max_degree, **gb_options)
        tried.append((cand, "match" if cmp.ok else f"mismatch-at-{cmp.first_mismatch}"))
        if cmp.ok:
            return ParameterSearch(cand, tried)
    return ParameterSearch(None, tried)


# the displayed families

SKLYANIN_POTENTIAL = "cyc(x*y*z) - t*cyc(x*z*y) + c/3*cyc(x^3 + y^3 + z^3)"
SKLYANIN_POTENTIAL_NEG = "cyc(x*y*z) - t*cyc(x*z*y) - c/3*cyc(x^3 + y^3 + z^3)"
E6_PSI = "c*y^3 + (t^3 - c^3)/(c^3 + 1)*(y*z*x + c*z^3) - t*z*y*x"
E7_POTENTIAL = "cyc(x*y*z) - t*cyc(y*x*z) + c*(cyc(x^4)/4 + cyc(y^4)/4 + cyc(z^2)/2)"
E7_PSI = "(t^2 + 1)*x*y*x*y - (t^4 + t^2 + 1)/(t^2 - c^4)*(t*x*y^2*x + c^2*y^4) + t*y^2*x^2"
E7_PSI_CORRECTED = "(t^2 + 1)*x*y*x*y - (t^4 + t^2 + 1)/(t^2 - c^4)*(t*x*y^2*x - c^2*y^4) + t*y^2*x^2"

DEFAULT_PARAMETER_LIST = (
    {"t": 2, "c": 1}, {"t": 3, "c": 1}, {"t": 2, "c": 3}, {"t": 3, "c": 2},
    {"t": 5, "c": 2}, {"t": Fraction(1, 2), "c": 2},
)


def sklyanin_spec(t, c, sign: int = 1) -> PotentialAlgebraSpec:
    pot = SKLYANIN_POTENTIAL if sign > 0 else SKLYANIN_POTENTIAL_NEG
    return PotentialAlgebraSpec.from_text("xyz", [1, 1, 1], pot, {"t": t, "c": c})


def e7_spec(t, c) -> PotentialAlgebraSpec:
    return PotentialAlgebraSpec.from_text("xyz", [1, 1, 2], E7_POTENTIAL, {"t": t, "c": c})


def e6_singular(p) -> bool:
    return p["c"] ** 3 + 1 == 0 or p["t"] ** 2 - p["c"] ** 4 == 0 or p["c"] == 0


def e7_singular(p) -> bool:
    return p["t"] ** 2 - p["c"] ** 4 == 0 or p["c"] == 0
