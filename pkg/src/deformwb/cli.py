"""Command-line front end: ``deformwb <command> ...``.

Exit codes: 0 verdict true, 1 verdict false, 2 input error, 3 resource cap.
Reports are JSON with sorted keys (``--text`` for a line-oriented rendering).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction

from . import __version__
from .commpoly import Poly, monomials_up_to
from .cypot import (CentralityRefused, PotentialAlgebraSpec, central_elements, centrality_check,
                    hilbert_vs_cy, relations_from_potential)
from .exactcore import format_rational
from .expr import ParseError, parse_poly
from .hochschild import (AlgebraError, CochainError, HochschildResourceError, adjoint_module,
                         ce_cohomology, dual_numbers, exterior_pair_model, ground_field, hh,
                         matrix_algebra, product_of_fields, truncated_polynomial, center,
                         derivation_dims)
from .kgraph import (GraphError, MissingWeightError, WeightTable, assemble, builtin_weights,
                     enumerate_graphs, solve_order2_weights, wheel)
from .lie import FinDimLieAlgebra, LieAlgebraError, abelian, gl2, heisenberg, so3, sl2, two_dim_nonabelian
from .ncgb import DEFAULT_MAX_BASIS, KoszulModeError, ResourceLimitError, TruncationError, groebner, hilbert, pbw_check
from .poisson import (constant_bivector, jacobi_check, poisson_central_check, standard_symplectic,
                      surface_bivector, unimodularity_check)
from .starprod import GuttStar, StarProductError, assoc_check, moyal_star
from .workbench import WorkbenchError, load, parse_workbench, to_text

REPORT_SCHEMA = 1

BUILTIN_LIE = {
    "sl2": sl2, "heisenberg": heisenberg, "so3": so3, "gl2": gl2,
    "abelian2": lambda: abelian(2, "ab"), "aff1": two_dim_nonabelian,
}
BUILTIN_ALGEBRAS = {
    "k": ground_field, "dual": dual_numbers, "kxk": lambda: product_of_fields(2),
    "trunc3": lambda: truncated_polynomial(3), "kxy": exterior_pair_model, "mat2": lambda: matrix_algebra(2),
}


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(2)


def _digest(parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(str(p).encode())
        h.update(b"\0")
    return h.hexdigest()[:16]


def _json_ready(x):
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, dict):
        return {str(k): _json_ready(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_ready(v) for v in x]
    return x


def _render_text(obj, prefix="") -> list:
    lines = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            key = f"{prefix}{k}"
            if isinstance(v, (dict, list)) and v:
                lines += _render_text(v, key + ".")
            else:
                lines.append(f"{key}: {json.dumps(v, sort_keys=True)}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            key = f"{prefix}{i}"
            if isinstance(v, (dict, list)) and v:
                lines += _render_text(v, key + ".")
            else:
                lines.append(f"{key}: {json.dumps(v, sort_keys=True)}")
    return lines


def emit(command, inputs, results, verdict, fmt, out):
    report = {
        "command": command,
        "inputs_digest": _digest(inputs),
        "results": _json_ready(results),
        "schema": REPORT_SCHEMA,
        "verdict": bool(verdict),
        "version": __version__,
    }
    if fmt == "text":
        out.write("\n".join(_render_text(report)) + "\n")
    else:
        out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    return 0 if verdict else 1


def _load(path):
    if not path:
        raise InputError("--file is required")
    try:
        wb = load(path)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    return wb, to_text(wb)


def _lie_from(args):
    if getattr(args, "builtin", None):
        if args.builtin not in BUILTIN_LIE:
            raise InputError(f"unknown built-in Lie algebra {args.builtin!r}; choose from {sorted(BUILTIN_LIE)}")
        return BUILTIN_LIE[args.builtin](), f"builtin:{args.builtin}"
    wb, canon = _load(args.lie)
    return wb.lie_algebra(), canon


# subcommands

def cmd_gb(args, out):
    wb, canon = _load(args.file)
    if not wb.relations:
        raise InputError("the file has no [relations]")
    gb = groebner(wb.relations, args.max_degree, trace=args.trace, max_basis=args.max_basis)
    res = gb.to_json()
    res["hilbert"] = list(hilbert(gb).coefficients)
    if args.trace:
        from .ncgb import verify_traces
        res["traces_verified"] = verify_traces(gb)
    return emit("gb", [canon, args.max_degree, args.trace], res, res.get("traces_verified", True), args.fmt, out)


def cmd_pbw(args, out):
    wb, canon = _load(args.file)
    if not wb.relations:
        raise InputError("the file has no [relations]")
    if args.koszul and args.max_degree != 3:
        raise InputError("--koszul examines exactly degree 3; pass --max-degree 3")
    rep = pbw_check(wb.relations, args.max_degree, koszul_mode=args.koszul, max_basis=args.max_basis)
    return emit("pbw", [canon, args.max_degree, args.koszul], rep.to_json(), rep.flat, args.fmt, out)


def cmd_hilbert(args, out):
    wb, canon = _load(args.file)
    rels = wb.relations or (relations_from_potential(PotentialAlgebraSpec(wb.alphabet, wb.potential, wb.params))
                            if wb.potential is not None else [])
    gb = groebner([r for r in rels if r], args.max_degree, alphabet=wb.alphabet, max_basis=args.max_basis)
    res = {"coefficients": list(hilbert(gb).coefficients), "max_degree": args.max_degree}
    return emit("hilbert", [canon, args.max_degree], res, True, args.fmt, out)


def _pi_from(args):
    if getattr(args, "pi", None):
        if not args.vars:
            raise InputError("--pi needs --vars (comma-separated coordinate names)")
        names = [v.strip() for v in args.vars.split(",") if v.strip()]
        text = "[generators]\n" + "\n".join(names) + "\n[pi]\n" + (
            args.pi if args.pi.lstrip().startswith("pi") else "pi = " + args.pi) + "\n"
        wb = parse_workbench(text, "<--pi>")
        return wb.pi, wb.names, to_text(wb)
    if args.file:
        wb, canon = _load(args.file)
        if wb.pi is None:
            raise InputError("the file has no [pi] section")
        return wb.pi, wb.names, canon
    if args.dim is None:
        raise InputError("give --dim or --file")
    if args.dim % 2:
        raise InputError("--dim must be even for the standard symplectic bivector")
    m = args.dim // 2
    names = [f"x{i + 1}" for i in range(m)] + [f"y{i + 1}" for i in range(m)]
    return standard_symplectic(m), names, f"standard:{args.dim}"


def cmd_star(args, out):
    kind = args.kind
    res = {}
    verdict = True
    if kind == "moyal" or (kind == "check-assoc" and not args.lie and not args.builtin):
        pi, names, canon = _pi_from(args)
        star = moyal_star(pi, args.order, names=names)
        res["kind"] = "moyal"
        res["star"] = star.to_json()
        x = [Poly.var(pi.nvars, i) for i in range(pi.nvars)]
        comm = {}
        for i in range(pi.nvars):
            for j in range(i + 1, pi.nvars):
                c = star.apply(x[i], x[j]) - star.apply(x[j], x[i])
                comm[f"[{names[i]},{names[j]}]"] = c.to_json(names)
        res["commutators"] = comm
    else:
        lie, canon = _lie_from(args)
        star = GuttStar(lie, args.order)
        names = list(lie.names)
        res["kind"] = "gutt"
        x = [Poly.var(lie.dim, i) for i in range(lie.dim)]
        comm = {}
        for i in range(lie.dim):
            for j in range(i + 1, lie.dim):
                c = star.apply(x[i], x[j]) - star.apply(x[j], x[i])
                comm[f"[{names[i]},{names[j]}]"] = c.to_json(names)
        res["commutators"] = comm
        res["grading"] = "lie"
    degree = args.check_assoc if kind != "check-assoc" else args.degree
    if kind == "check-assoc" and degree is None:
        raise InputError("check-assoc needs --degree")
    if degree is not None:
        r = assoc_check(star, degree, jobs=args.jobs)
        res["associativity"] = {"associative": r.associative, "test_degree": degree}
        if not r.associative:
            res["associativity"]["witness"] = [list(w) for w in r.witness]
            res["associativity"]["failing_order"] = r.order
        verdict = r.associative
    return emit("star", [kind, canon, args.order, degree], res, verdict, args.fmt, out)


def cmd_hh(args, out):
    if args.algebra:
        if args.algebra not in BUILTIN_ALGEBRAS:
            raise InputError(f"unknown algebra {args.algebra!r}; choose from {sorted(BUILTIN_ALGEBRAS)}")
        A = BUILTIN_ALGEBRAS[args.algebra]()
        canon = f"builtin:{args.algebra}"
    else:
        wb, canon = _load(args.file)
        A = wb.fin_dim_algebra()
    rep = hh(A, top=args.top)
    res = {"dims": rep.dims, "complex_dims": rep.complex_dims, "normalized": rep.normalized,
           "basis": list(A.names)}
    res["center_dim"] = len(center(A))
    der, inn = derivation_dims(A)
    res["outer_derivations_dim"] = der - inn
    res["representatives"] = rep.to_json()["representatives"]
    ok = rep.dims[0] == res["center_dim"] and (args.top < 1 or rep.dims[1] == der - inn)
    return emit("hh", [canon, args.top], res, ok, args.fmt, out)


def cmd_ce(args, out):
    lie, canon = _lie_from(args)
    module = None if args.module == "trivial" else adjoint_module(lie)
    rep = ce_cohomology(lie, module, args.top)
    res = {"dims": rep.dims, "module": args.module}
    return emit("ce", [canon, args.module, args.top], res, True, args.fmt, out)


def cmd_graphs(args, out):
    if args.action == "list":
        gs = enumerate_graphs(args.m, args.max_aerial)
        res = {"count": len(gs), "graphs": [g.encode() for g in gs], "m": args.m}
        return emit("graphs", ["list", args.m], res, True, args.fmt, out)
    if args.action == "solve":
        pi, names, canon = _pi_from(args)
        sol = solve_order2_weights(pi)
        res = {"surviving": [g.encode() for g in sol.surviving], "unique": sol.unique,
               "weights": json.loads(sol.table.to_json())}
        ok = sol.unique and assemble(sol.table, pi, 2) == moyal_star(pi, 2)
        res["reproduces_moyal"] = ok
        return emit("graphs", ["solve", canon], res, ok, args.fmt, out)
    # assemble
    pi, names, canon = _pi_from(args)
    if args.weights:
        try:
            with open(args.weights, encoding="utf-8") as fh:
                table = WeightTable.from_json(fh.read())
        except OSError as e:
            raise InputError(f"cannot read {args.weights}: {e.strerror}") from None
    else:
        table = builtin_weights()
    star = assemble(table, pi, args.order, names=names)
    return emit("graphs", ["assemble", canon, table.to_json(), args.order], {"star": star.to_json()}, True, args.fmt, out)


def _trace_power(lie: FinDimLieAlgebra, m: int) -> Poly:
    n = lie.dim
    x = [Poly.var(n, a) for a in range(n)]
    ad = [[sum((x[a].scale(lie.c[a][j][k]) for a in range(n)), Poly.zero(n)) for j in range(n)] for k in range(n)]
    P = [[Poly.constant(n, int(i == j)) for j in range(n)] for i in range(n)]
    for _ in range(m):
        P = [[sum((P[i][k] * ad[k][j] for k in range(n)), Poly.zero(n)) for j in range(n)] for i in range(n)]
    return sum((P[i][i] for i in range(n)), Poly.zero(n))


def cmd_wheel(args, out):
    lie, canon = _lie_from(args)
    w = wheel(args.m, lie)
    direct = _trace_power(lie, args.m)
    res = {"polynomial": w.to_str(list(lie.names)), "matrix_trace": direct.to_str(list(lie.names)), "m": args.m}
    return emit("wheel", [canon, args.m], res, w == direct, args.fmt, out)


def cmd_poisson(args, out):
    if args.f:
        names = ["x", "y", "z"]
        from .exactcore import Alphabet
        f = Poly.from_ncpoly(parse_poly(args.f, Alphabet.of(names)))
        pi = surface_bivector(f)
        canon = f"surface:{f.to_str(names)}"
    else:
        pi, names, canon = _pi_from(args)
        f = None
    res = {"pi": pi.to_str(names)}
    if args.action == "jacobi":
        r = jacobi_check(pi)
        res["poisson"] = r.is_poisson
        if not r.is_poisson:
            res["witness"] = r.witness.to_str(names)
        verdict = r.is_poisson
    elif args.action == "unimodular":
        verdict = unimodularity_check(pi)
        res["unimodular"] = verdict
    else:
        if f is None:
            raise InputError("'surface' needs --f")
        j = jacobi_check(pi).is_poisson
        u = unimodularity_check(pi)
        c = poisson_central_check(f, pi)
        res.update({"poisson": j, "unimodular": u, "f_central": c})
        verdict = j and u and c
    return emit("poisson", [args.action, canon], res, verdict, args.fmt, out)


def cmd_potential(args, out):
    wb, canon = _load(args.file)
    if wb.potential is None:
        raise InputError("the file has no [potential] section")
    spec = PotentialAlgebraSpec(wb.alphabet, wb.potential, wb.params)
    if args.action == "relations":
        rels = relations_from_potential(spec)
        res = {"relations": {n: str(r) for n, r in zip(wb.names, rels)}}
        return emit("potential", ["relations", canon], res, True, args.fmt, out)
    if args.max_degree is None:
        raise InputError(f"'potential {args.action}' needs --max-degree")
    if args.action == "hilbert":
        cmp = hilbert_vs_cy(spec, args.max_degree)
        return emit("potential", ["hilbert", canon, args.max_degree], cmp.to_json(), cmp.ok, args.fmt, out)
    if args.action == "center":
        if args.psi:
            psi = parse_poly(args.psi, wb.alphabet, wb.params)
            rep = centrality_check(spec, psi, args.max_degree)
            return emit("potential", ["center", canon, args.psi, args.max_degree], rep.to_json(), rep.central,
                        args.fmt, out)
        if args.degree is None:
            raise InputError("give --psi to check, or --degree to search for central elements")
        gb = groebner([r for r in relations_from_potential(spec) if r], args.max_degree, alphabet=wb.alphabet)
        found = central_elements(gb, args.degree)
        res = {"central_elements": [str(p) for p in found], "degree": args.degree}
        return emit("potential", ["discover", canon, args.degree, args.max_degree], res, True, args.fmt, out)
    raise InputError(f"unknown potential action {args.action!r}")


def build_parser():
    common = _Parser(add_help=False)
    g = common.add_mutually_exclusive_group()
    g.add_argument("--json", dest="fmt", action="store_const", const="json", help="JSON report (default)")
    g.add_argument("--text", dest="fmt", action="store_const", const="text", help="line-oriented report")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for exhaustive sweeps")
    common.set_defaults(fmt="json")

    p = _Parser(prog="deformwb", description="Exact computations for algebraic deformation theory.")
    p.add_argument("--version", action="version", version=f"deformwb {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("gb", parents=[common], help="truncated noncommutative Groebner basis")
    s.add_argument("--file", required=True)
    s.add_argument("--max-degree", type=int, required=True)
    s.add_argument("--trace", action="store_true", help="record and re-verify cofactor traces")
    s.add_argument("--max-basis", type=int, default=DEFAULT_MAX_BASIS, help="resource cap on basis size")
    s.set_defaults(func=cmd_gb)

    s = sub.add_parser("pbw", parents=[common], help="flatness of a filtered deformation")
    s.add_argument("--file", required=True)
    s.add_argument("--max-degree", type=int, required=True)
    s.add_argument("--koszul", action="store_true", help="declare the graded algebra Koszul (degree-3 check)")
    s.add_argument("--max-basis", type=int, default=DEFAULT_MAX_BASIS, help="resource cap on basis size")
    s.set_defaults(func=cmd_pbw)

    s = sub.add_parser("hilbert", parents=[common], help="Hilbert series by normal-word census")
    s.add_argument("--file", required=True)
    s.add_argument("--max-degree", type=int, required=True)
    s.add_argument("--max-basis", type=int, default=DEFAULT_MAX_BASIS, help="resource cap on basis size")
    s.set_defaults(func=cmd_hilbert)

    s = sub.add_parser("star", parents=[common], help="star products")
    s.add_argument("kind", choices=["moyal", "gutt", "check-assoc"])
    s.add_argument("--order", type=int, required=True, help="truncation order in hbar")
    s.add_argument("--dim", type=int, help="number of coordinates for the standard symplectic bivector")
    s.add_argument("--pi", help="constant bivector, e.g. \"1 dxdy\"")
    s.add_argument("--vars", help="coordinate names for --pi, e.g. x,y")
    s.add_argument("--file", help="workbench file with a constant [pi] section")
    s.add_argument("--lie", help="workbench file with a [lie] section")
    s.add_argument("--builtin", help=f"built-in Lie algebra: {', '.join(sorted(BUILTIN_LIE))}")
    s.add_argument("--check-assoc", type=int, metavar="D", help="also run the associativity sweep to degree D")
    s.add_argument("--degree", type=int, help="test degree for check-assoc")
    s.set_defaults(func=cmd_star)

    s = sub.add_parser("hh", parents=[common], help="Hochschild cohomology HH^*(A, A)")
    s.add_argument("--algebra", help=f"built-in algebra: {', '.join(sorted(BUILTIN_ALGEBRAS))}")
    s.add_argument("--file", help="workbench file with an [algebra] section")
    s.add_argument("--top", type=int, required=True)
    s.set_defaults(func=cmd_hh)

    s = sub.add_parser("ce", parents=[common], help="Chevalley-Eilenberg cohomology")
    s.add_argument("--lie")
    s.add_argument("--builtin")
    s.add_argument("--module", choices=["trivial", "adjoint"], default="trivial")
    s.add_argument("--top", type=int, required=True)
    s.set_defaults(func=cmd_ce)

    s = sub.add_parser("graphs", parents=[common], help="Kontsevich graphs")
    s.add_argument("action", choices=["list", "solve", "assemble"])
    s.add_argument("--m", type=int, default=0)
    s.add_argument("--max-aerial", type=int, default=3)
    s.add_argument("--dim", type=int)
    s.add_argument("--file")
    s.add_argument("--pi")
    s.add_argument("--vars")
    s.add_argument("--weights", help="weight table JSON (default: built-in table through one vertex)")
    s.add_argument("--order", type=int, default=1)
    s.set_defaults(func=cmd_graphs)

    s = sub.add_parser("wheel", parents=[common], help="wheel operators against tr((ad x)^m)")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--lie")
    s.add_argument("--builtin")
    s.set_defaults(func=cmd_wheel)

    s = sub.add_parser("poisson", parents=[common], help="bivector checks")
    s.add_argument("action", choices=["jacobi", "unimodular", "surface"])
    s.add_argument("--f", help="polynomial in x, y, z for the surface bivector")
    s.add_argument("--file")
    s.add_argument("--dim", type=int)
    s.add_argument("--pi")
    s.add_argument("--vars")
    s.set_defaults(func=cmd_poisson)

    s = sub.add_parser("potential", parents=[common], help="algebras defined by a potential")
    s.add_argument("action", choices=["relations", "hilbert", "center"])
    s.add_argument("--file", required=True)
    s.add_argument("--max-degree", type=int)
    s.add_argument("--psi", help="candidate central element")
    s.add_argument("--degree", type=int, help="search for central elements of this degree")
    s.set_defaults(func=cmd_potential)
    return p


INPUT_ERRORS = (InputError, WorkbenchError, ParseError, AlgebraError, CochainError, LieAlgebraError,
                KoszulModeError, StarProductError, MissingWeightError, TruncationError, ValueError)
RESOURCE_ERRORS = (ResourceLimitError, HochschildResourceError)


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args, out)
    except RESOURCE_ERRORS as e:
        sys.stderr.write(f"resource cap: {e}\n")
        return 3
    except GraphError as e:
        sys.stderr.write(f"error: {e}\n")
        return 3 if "cap" in str(e) else 2
    except INPUT_ERRORS as e:
        sys.stderr.write(f"error: {e}\n")
        return 2


def main():
    raise SystemExit(run())


if __name__ == "__main__":
    main()
