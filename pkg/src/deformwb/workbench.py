"""Declarative ``.wb`` input files.

Sections (any order, each optional)::

    [generators]      name weight=w        one per line (weight defaults to 1)
    [params]          name = rational
    [relations]       one expression per line
    [lie]             [a,b] = linear expression
    [algebra]         a*b = linear expression   (unit named in [options] unit = ...)
    [pi]              pi = coeff dadb + coeff dadc + ...
    [potential]       a sum of cyc(...) terms, possibly over several lines
    [options]         key = value

``#`` starts a comment. Errors carry ``line:column`` positions.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .commpoly import Poly
from .exactcore import Alphabet, NcPoly, Potential, format_rational
from .expr import ParseError, parse_poly, parse_potential, parse_rational
from .hochschild import AlgebraError, FinDimAlgebra
from .lie import FinDimLieAlgebra, LieAlgebraError
from .poisson import PolyVectorField

FORMAT_VERSION = 1
SECTIONS = ("generators", "params", "relations", "lie", "algebra", "pi", "potential", "options")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*$")
_GEN_LINE = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(?:\s+weight\s*=\s*(\S+))?\s*$")
_BRACKET = re.compile(r"^\[\s*([A-Za-z_][A-Za-z_0-9]*)\s*,\s*([A-Za-z_][A-Za-z_0-9]*)\s*\]\s*=\s*(.*)$")
_PRODUCT = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)\s*\*\s*([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(.*)$")


class WorkbenchError(ValueError):
    def __init__(self, message, line=None, col=None, source="<input>"):
        self.line = line
        self.col = col
        loc = source
        if line is not None:
            loc += f":{line}"
            if col is not None:
                loc += f":{col}"
        super().__init__(f"{loc}: {message}")


@dataclass
class WorkbenchFile:
    generators: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    relations: list = field(default_factory=list)
    lie: dict | None = None
    algebra: dict | None = None
    pi: PolyVectorField | None = None
    potential: Potential | None = None
    options: dict = field(default_factory=dict)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet.of([g for g, _ in self.generators], [w for _, w in self.generators])

    @property
    def names(self):
        return [g for g, _ in self.generators]

    def lie_algebra(self) -> FinDimLieAlgebra:
        if self.lie is None:
            raise WorkbenchError("no [lie] section")
        table = {k: dict(v) for k, v in self.lie.items()}
        return FinDimLieAlgebra.from_table(self.names, table)

    def fin_dim_algebra(self) -> FinDimAlgebra:
        if self.algebra is None:
            raise WorkbenchError("no [algebra] section")
        unit = self.options.get("unit")
        if unit is None:
            raise WorkbenchError("[options] must name the unit, e.g. unit = e")
        if unit not in self.names:
            raise WorkbenchError(f"unit {unit!r} is not a generator")
        return FinDimAlgebra.from_table(self.names, self.algebra, unit)

    def option_int(self, key, default=None):
        v = self.options.get(key)
        if v is None:
            return default
        try:
            return int(v)
        except ValueError:
            raise WorkbenchError(f"option {key} must be an integer, got {v!r}") from None


def _strip_comment(line):
    i = line.find("#")
    return line if i < 0 else line[:i]


def _linear(expr: NcPoly, names, where):
    out = {}
    for w, c in expr.terms.items():
        if len(w) != 1:
            raise WorkbenchError("expected a linear combination of generators", *where)
        out[names[w[0]]] = c
    return out


def _pi_pattern(names):
    alt = "|".join(re.escape(n) for n in sorted(names, key=len, reverse=True))
    return re.compile(rf"\bd({alt})d({alt})\b")


def parse_workbench(text: str, source: str = "<input>") -> WorkbenchFile:
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        m = re.match(r"^\[([a-z]+)\]$", stripped)
        if m:
            name = m.group(1)
            if name not in SECTIONS:
                raise WorkbenchError(f"unknown section [{name}]", lineno, raw.index("[") + 1, source)
            if name in sections:
                raise WorkbenchError(f"duplicate section [{name}]", lineno, 1, source)
            sections[name] = []
            current = name
            continue
        if current is None:
            raise WorkbenchError("content before the first section header", lineno, 1, source)
        col = len(raw) - len(raw.lstrip()) + 1
        sections[current].append((lineno, col, stripped))

    wb = WorkbenchFile()
    seen = set()
    for lineno, col, s in sections.get("generators", []):
        m = _GEN_LINE.match(s)
        if not m:
            raise WorkbenchError("expected 'name weight=w'", lineno, col, source)
        name, w = m.group(1), m.group(2)
        if name in seen:
            raise WorkbenchError(f"duplicate generator {name!r}", lineno, col, source)
        if name in ("cyc", "hbar", "pi"):
            raise WorkbenchError(f"{name!r} is reserved", lineno, col, source)
        try:
            weight = int(w) if w is not None else 1
        except ValueError:
            raise WorkbenchError(f"weight must be a positive integer, got {w!r}", lineno, col, source) from None
        if weight <= 0:
            raise WorkbenchError("weight must be positive", lineno, col, source)
        seen.add(name)
        wb.generators.append((name, weight))

    for lineno, col, s in sections.get("params", []):
        if "=" not in s:
            raise WorkbenchError("expected 'name = rational'", lineno, col, source)
        name, val = (p.strip() for p in s.split("=", 1))
        if not _IDENT.match(name):
            raise WorkbenchError(f"bad parameter name {name!r}", lineno, col, source)
        if name in seen:
            raise WorkbenchError(f"parameter {name!r} shadows a generator", lineno, col, source)
        try:
            wb.params[name] = parse_rational(val)
        except ParseError as e:
            raise WorkbenchError(str(e), lineno, col + s.index("=") + 1, source) from None

    alphabet = wb.alphabet
    names = wb.names

    def expr_at(text, lineno, col, offset=0):
        try:
            return parse_poly(text, alphabet, wb.params)
        except ParseError as e:
            c = col + offset + (e.pos or 0)
            raise WorkbenchError(str(e).split(" at position")[0], lineno, c, source) from None

    for lineno, col, s in sections.get("relations", []):
        p = expr_at(s, lineno, col)
        if p.is_zero():
            raise WorkbenchError("relation is zero", lineno, col, source)
        wb.relations.append(p)

    if "lie" in sections:
        wb.lie = {}
        for lineno, col, s in sections["lie"]:
            m = _BRACKET.match(s)
            if not m:
                raise WorkbenchError("expected '[a,b] = expression'", lineno, col, source)
            a, b, rhs = m.groups()
            for g in (a, b):
                if g not in names:
                    raise WorkbenchError(f"unknown generator {g!r}", lineno, col, source)
            val = _linear(expr_at(rhs, lineno, col, s.index("=") + 1), names, (lineno, col))
            wb.lie[(a, b)] = val

    if "algebra" in sections:
        wb.algebra = {}
        for lineno, col, s in sections["algebra"]:
            m = _PRODUCT.match(s)
            if not m:
                raise WorkbenchError("expected 'a*b = expression'", lineno, col, source)
            a, b, rhs = m.groups()
            for g in (a, b):
                if g not in names:
                    raise WorkbenchError(f"unknown generator {g!r}", lineno, col, source)
            wb.algebra[(a, b)] = _linear(expr_at(rhs, lineno, col, s.index("=") + 1), names, (lineno, col))

    if "pi" in sections:
        lines = sections["pi"]
        body = " ".join(s for _, _, s in lines)
        lineno, col = lines[0][0], lines[0][1]
        if not body.startswith("pi") or "=" not in body:
            raise WorkbenchError("expected 'pi = coeff dadb + ...'", lineno, col, source)
        body = body.split("=", 1)[1]
        wb.pi = _parse_pi(body, alphabet, wb.params, lineno, col, source)

    if "potential" in sections:
        lines = sections["potential"]
        body = " ".join(s for _, _, s in lines)
        try:
            wb.potential = parse_potential(body, alphabet, wb.params)
        except ParseError as e:
            raise WorkbenchError(str(e).split(" at position")[0], lines[0][0], lines[0][1], source) from None

    for lineno, col, s in sections.get("options", []):
        if "=" not in s:
            raise WorkbenchError("expected 'key = value'", lineno, col, source)
        k, v = (p.strip() for p in s.split("=", 1))
        wb.options[k] = v
    return wb


def _parse_pi(body, alphabet, params, lineno, col, source):
    names = list(alphabet.names)
    n = len(names)
    comps = {}
    if body.strip() == "0":
        return PolyVectorField(n, 2, comps)
    pat = _pi_pattern(names)
    pos = 0
    found = False
    for m in pat.finditer(body):
        found = True
        coeff_text = body[pos:m.start()].strip()
        pos = m.end()
        sign = 1
        if coeff_text.startswith("+"):
            coeff_text = coeff_text[1:].strip()
        elif coeff_text.startswith("-"):
            sign = -1
            coeff_text = coeff_text[1:].strip()
        coeff_text = coeff_text.rstrip("*").strip()
        if not coeff_text:
            c = Poly.constant(n, sign)
        else:
            try:
                c = Poly.from_ncpoly(parse_poly(coeff_text, alphabet, params)).scale(sign)
            except ParseError as e:
                raise WorkbenchError(str(e).split(" at position")[0], lineno, col, source) from None
        i, j = names.index(m.group(1)), names.index(m.group(2))
        if i == j:
            raise WorkbenchError(f"d{names[i]}d{names[j]} is zero by antisymmetry", lineno, col, source)
        key = (i, j)
        comps[key] = comps.get(key, Poly.zero(n)) + c
    if not found or body[pos:].strip():
        raise WorkbenchError("could not read the bivector; use 'pi = coeff dxdy + ...'", lineno, col, source)
    return PolyVectorField(n, 2, comps)


def potential_to_text(phi: Potential) -> str:
    if phi.is_zero():
        return "0"
    parts = []
    for w, c in phi.sorted_terms():
        word = phi.alphabet.word_str(w)
        body = f"cyc({word})"
        mag = abs(c)
        body = body if mag == 1 else f"{format_rational(mag)}*{body}"
        parts.append(("-" if c < 0 else "+", body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for s, b in parts[1:]:
        out += f" {s} {b}"
    return out


def _lin_text(val: dict, names) -> str:
    alphabet = Alphabet.of(names)
    p = NcPoly(alphabet, {(names.index(k),): v for k, v in val.items()})
    return str(p)


def to_text(wb: WorkbenchFile) -> str:
    """Canonical printer; ``to_text(parse_workbench(to_text(w))) == to_text(w)``."""
    names = wb.names
    out = [f"# deformwb workbench format {FORMAT_VERSION}"]
    if wb.generators:
        out.append("[generators]")
        out += [f"{g} weight={w}" for g, w in wb.generators]
    if wb.params:
        out.append("[params]")
        out += [f"{k} = {format_rational(v)}" for k, v in sorted(wb.params.items())]
    if wb.relations:
        out.append("[relations]")
        out += [str(r) for r in wb.relations]
    if wb.lie is not None:
        out.append("[lie]")
        for (a, b), v in sorted(wb.lie.items(), key=lambda kv: (names.index(kv[0][0]), names.index(kv[0][1]))):
            out.append(f"[{a},{b}] = {_lin_text(v, names)}")
    if wb.algebra is not None:
        out.append("[algebra]")
        for (a, b), v in sorted(wb.algebra.items(), key=lambda kv: (names.index(kv[0][0]), names.index(kv[0][1]))):
            out.append(f"{a}*{b} = {_lin_text(v, names)}")
    if wb.pi is not None:
        out.append("[pi]")
        terms = []
        for (i, j), p in sorted(wb.pi.components.items()):
            terms.append(f"({p.to_str(names)}) d{names[i]}d{names[j]}")
        out.append("pi = " + (" + ".join(terms) if terms else "0"))
    if wb.potential is not None:
        out.append("[potential]")
        out.append(potential_to_text(wb.potential))
    if wb.options:
        out.append("[options]")
        out += [f"{k} = {v}" for k, v in sorted(wb.options.items())]
    return "\n".join(out) + "\n"


def load(path) -> WorkbenchFile:
    with open(path, encoding="utf-8") as fh:
        return parse_workbench(fh.read(), source=str(path))
