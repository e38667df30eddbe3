"""
Command-line interface: network generators, measurements, face data and
the theorem checks, with deterministic text or JSON reports.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations
from typing import Callable, Sequence

from .exprcore import ParseError, parse_expr, rf_equal
from .network import Network, NetworkFormatError, ValidationError, generate, load_network, validate

__all__ = ["main", "run", "build_parser", "render_matrix"]


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ input


def _read_network(args) -> Network:
    if getattr(args, "net", None):
        try:
            return generate(args.net, args.net_args or [], args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    src = args.network
    if src in (None, "-"):
        text = sys.stdin.read()
        where = "<stdin>"
    else:
        try:
            with open(src, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"{src}: {exc.strerror}") from exc
        where = src
    try:
        net = load_network(text)
    except (NetworkFormatError, ValidationError, ParseError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"{where}: {exc}") from exc
    if getattr(args, "command", None) != "validate":
        errs = validate(net)
        if errs:
            raise UsageError(f"{where}: invalid network: {errs[0]}")
    return net


def _add_net_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("network", nargs="?", help="network JSON file, '-' or omitted for stdin")
    p.add_argument("--net", help="use a built-in network instead of a file (see 'gen --list')")
    p.add_argument("--net-args", nargs="*", default=[], help="parameters for --net")


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", default="alpha", help="white parameter (expression), default symbolic")
    p.add_argument("--beta", default="beta", help="black parameter (expression), default symbolic")


def _param(text: str):
    try:
        return parse_expr(text)
    except ParseError as exc:
        raise UsageError(f"bad parameter {text!r}: {exc}") from exc


def _emit_report(rep, args) -> int:
    rep = rep.sorted()
    if args.format == "json":
        print(rep.dumps())
    else:
        groups: dict[str, list] = {}
        for r in rep.results:
            groups.setdefault(r.check_id, []).append(r)
        for cid, rs in groups.items():
            bad = [r for r in rs if r.status != "PASS"]
            print(f"{'FAIL' if bad else 'PASS'} {cid} ({len(rs) - len(bad)}/{len(rs)})")
            for r in bad:
                print(f"  FAIL {r.instance}: {r.lhs} != {r.rhs}")
        print("PASS" if rep.ok else "FAIL")
    return 0 if rep.ok else 1


def _jobs_map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def render_matrix(rows) -> str:
    """Row-major canonical rendering, entries tab-separated."""
    return "".join("\t".join(str(x) for x in row) + "\n" for row in rows)


# ------------------------------------------------------------- subcommands


def cmd_gen(args) -> int:
    from .network import GENERATORS

    if args.list:
        for name in sorted(GENERATORS) + ["diag", "eminus", "eplus", "generic", "hex", "random"]:
            print(name)
        return 0
    if not args.name:
        raise UsageError("gen needs a network name")
    try:
        net = generate(args.name, args.args, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(net.dumps())
    return 0


def cmd_validate(args) -> int:
    net = _read_network(args)
    errs = validate(net)
    for e in errs:
        print(e)
    print("valid" if not errs else "invalid")
    return 0 if not errs else 1


def cmd_measure(args) -> int:
    from .measurement import measurement_matrix

    M = measurement_matrix(_read_network(args))
    if args.labelled:
        for p, i in enumerate(M.sources):
            for q, j in enumerate(M.sinks):
                print(f"M({i},{j}) = {M.entries[p][q]}")
    else:
        print(render_matrix(M.entries), end="")
    return 0


def cmd_grassmannian(args) -> int:
    from .measurement import extended_matrix

    print(render_matrix(extended_matrix(_read_network(args)).rows), end="")
    return 0


def cmd_plucker(args) -> int:
    from .measurement import extended_matrix, plucker

    P = plucker(extended_matrix(_read_network(args)))
    for S in sorted(P.coords):
        print(f"x{list(S)} = {P.coords[S]}")
    if args.check:
        from .poisson import short_plucker_check

        return _emit_report(short_plucker_check(extended_matrix(_read_network(args)), "input"), args)
    return 0


def cmd_faces(args) -> int:
    from .exprcore import ONE
    from .faces import enumerate_faces, face_weights

    net = _read_network(args)
    fs = enumerate_faces(net)
    y = face_weights(net, fs)
    prod = ONE
    for f in fs.faces:
        kind = "bounded" if f.bounded else "unbounded"
        edges = " ".join(("+" if g == 1 else "-") + e for e, g in f.boundary)
        print(f"{f.id} {kind} [{edges}] y = {y[f.id]}")
        prod = prod * y[f.id]
    print(f"product = {prod}")
    return 0 if rf_equal(prod, ONE) else 1


def cmd_dual(args) -> int:
    from .faces import dual_network, enumerate_faces

    net = _read_network(args)
    fs = enumerate_faces(net)
    d = dual_network(net, fs, _param(args.alpha), _param(args.beta))
    for e in d.edges:
        print(f"{e.primal}: {e.tail} -> {e.head} weight {e.weight}")
    return 0


def cmd_bracket(args) -> int:
    from .measurement import measurement_matrix
    from .network import assign_flag_variables
    from .poisson import Report, log_canonical_bracket, measurement_bracket

    net = _read_network(args)
    a, b = _param(args.alpha), _param(args.beta)
    fnet, spec = assign_flag_variables(net, True, a, b)
    M = measurement_matrix(fnet)
    I, J = list(M.sources), list(M.sinks)
    i, j, ib, jb = args.entries
    try:
        p, q, pb, qb = I.index(i), J.index(j), I.index(ib), J.index(jb)
    except ValueError as exc:
        raise UsageError("entries must be source/sink label pairs of the network") from exc
    lhs = log_canonical_bracket(spec, M.entries[p][q], M.entries[pb][qb])
    rhs = measurement_bracket(I, J, M.entries, p, q, pb, qb, a, b, net.n)
    print(f"flag bracket   = {lhs}")
    print(f"matrix bracket = {rhs}")
    rep = Report()
    rep.add("bracket", f"M({i},{j}) M({ib},{jb})", rf_equal(lhs, rhs), lhs, rhs)
    return _emit_report(rep, args)


def _pushforward_job(item):
    from .network import generate
    from .poisson import verify_pushforward

    name, nargs, seed, alpha, beta, six = item
    net = generate(name, nargs, seed)
    if six:
        return verify_pushforward(net, gauge_reduced=False, name=name)
    return verify_pushforward(net, parse_expr(alpha), parse_expr(beta), name=name)


def cmd_verify_psme(args) -> int:
    from .poisson import Report, verify_pushforward

    rep = Report()
    if args.net or args.network:
        net = _read_network(args)
        name = args.net or args.network
        if args.six:
            rep.extend(verify_pushforward(net, gauge_reduced=False, name=name))
        else:
            rep.extend(verify_pushforward(net, _param(args.alpha), _param(args.beta), name=name))
    else:
        items = [(nm, [], args.seed, args.alpha, args.beta, args.six) for nm in ("fig1", "g24", "white", "black")]
        items += [("random", [], args.seed + s, args.alpha, args.beta, args.six) for s in range(args.random)]
        for r in _jobs_map(_pushforward_job, items, args.jobs):
            rep.extend(r)
    return _emit_report(rep, args)


def cmd_verify_mcybe(args) -> int:
    from .poisson import Report, RMatrix, mcybe_check

    rep = Report()
    for k in args.k:
        r = RMatrix(k, _param(args.alpha), _param(args.beta))
        rep.extend(mcybe_check(r, trials=args.trials, seed=args.seed, scaled=args.scaled))
    return _emit_report(rep, args)


def _jacobi_job(item):
    from .poisson import check_jacobi_IJ

    I, n = item
    J = [j for j in range(1, n + 1) if j not in I]
    return check_jacobi_IJ(list(I), J, n=n)


def cmd_verify_jacobi(args) -> int:
    from .poisson import Report, s_identities_check

    rep = Report()
    n = args.n
    items = [(I, n) for k in range(1, n) for I in combinations(range(1, n + 1), k)]
    for r in _jobs_map(_jacobi_job, items, args.jobs):
        rep.extend(r)
    if args.s_identities:
        rep.extend(s_identities_check(n))
    return _emit_report(rep, args)


def cmd_cluster_compat(args) -> int:
    from .cluster import check_compatibility

    res = check_compatibility(args.k, args.m, _param(args.alpha), _param(args.beta))
    print("B~ =")
    for row in res.B:
        print("  " + " ".join(f"{x:2d}" for x in row))
    print("Omega^tau (cluster rows) =")
    for row in res.omega:
        print("  " + " | ".join(str(x) for x in row))
    print(f"factor = {res.factor}")
    return _emit_report(res.report, args)


def cmd_concat(args) -> int:
    from .measurement import a_matrix, concatenate, matmul
    from .poisson import Report

    def load(path):
        try:
            with open(path, encoding="utf-8") as fh:
                return load_network(fh.read())
        except OSError as exc:
            raise UsageError(f"{path}: {exc.strerror}") from exc
        except (NetworkFormatError, ValidationError, ParseError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise UsageError(f"{path}: {exc}") from exc

    n1, n2 = load(args.first), load(args.second)
    try:
        net = concatenate(n1, n2)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not args.check:
        print(net.dumps())
        return 0
    A = a_matrix(net)
    B = matmul(a_matrix(n1), a_matrix(n2))
    rep = Report()
    for r in range(len(A)):
        for c in range(len(A)):
            rep.add("concat", f"A({r + 1},{c + 1})", rf_equal(A[r][c], B[r][c]), A[r][c], B[r][c])
    return _emit_report(rep, args)


# ------------------------------------------------------------------ parser


_GLOBAL_DEFAULTS = {"seed": 0, "jobs": 1, "format": "text"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomized checks and generators")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="worker processes for independent checks")
    common.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS, help="report format")
    ap = argparse.ArgumentParser(prog="perfnet", description=__doc__.strip(), parents=[common])
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    p = sub.add_parser("gen", help="print a built-in network as JSON")
    p.add_argument("name", nargs="?")
    p.add_argument("args", nargs="*", help="builder parameters, e.g. 'hex 3 4' or 'eminus 3 1'")
    p.add_argument("--list", action="store_true", help="list network names")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("measure", help="boundary measurement matrix, rows tab-separated")
    _add_net_args(p)
    p.add_argument("--labelled", action="store_true", help="one 'M(i,j) = ...' line per entry")
    p.set_defaults(func=cmd_measure)

    for name, fn, text in (
        ("validate", cmd_validate, "check a network file"),
        ("grassmannian", cmd_grassmannian, "k x n Grassmannian representative"),
        ("faces", cmd_faces, "faces and face weights"),
    ):
        p = sub.add_parser(name, help=text)
        _add_net_args(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("plucker", help="Pluecker coordinates of the Grassmannian point")
    _add_net_args(p)
    p.add_argument("--check", action="store_true", help="also check the short Pluecker relations")
    p.set_defaults(func=cmd_plucker)

    p = sub.add_parser("dual", help="directed dual network")
    _add_net_args(p)
    _add_params(p)
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("bracket", help="bracket of two boundary measurements, flag level vs matrix formula")
    _add_net_args(p)
    _add_params(p)
    p.add_argument("--entries", nargs=4, type=int, required=True, metavar=("I", "J", "I2", "J2"))
    p.set_defaults(func=cmd_bracket)

    p = sub.add_parser("verify-psme", help="pushforward of the flag bracket equals the matrix bracket")
    _add_net_args(p)
    _add_params(p)
    p.add_argument("--six", action="store_true", help="use the six-parameter flag bracket")
    p.add_argument("--random", type=int, default=5, help="random networks in the default corpus")
    p.set_defaults(func=cmd_verify_psme)

    p = sub.add_parser("verify-mcybe", help="modified classical Yang-Baxter equation for R")
    _add_params(p)
    p.add_argument("--k", type=int, nargs="+", default=[2, 3])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--scaled", action="store_true", help="compare with -c1^2 [x, y] instead of -[x, y]")
    p.set_defaults(func=cmd_verify_mcybe, alpha="1", beta="-1")

    p = sub.add_parser("verify-jacobi", help="Jacobi identity of the matrix bracket for all I in [1, n]")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--s-identities", action="store_true", help="also check the three s-function identities")
    p.set_defaults(func=cmd_verify_jacobi)

    p = sub.add_parser("cluster-compat", help="compatibility with the Grassmannian cluster structure on N(k, m)")
    p.add_argument("k", type=int)
    p.add_argument("m", type=int)
    _add_params(p)
    p.set_defaults(func=cmd_cluster_compat)

    p = sub.add_parser("concat", help="concatenate two square networks")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--check", action="store_true", help="check A of the result against the product")
    p.set_defaults(func=cmd_concat)
    return ap


def run(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    # global flags may appear on either side of the subcommand
    for key, value in _GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"perfnet {args.command}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"perfnet {args.command}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
