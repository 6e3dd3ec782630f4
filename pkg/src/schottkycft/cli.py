"""Command-line front end.

Exit status: 0 on success, 1 on usage or parse errors, 2 when a checked
statement fails at the requested order (a non-unit ratio, an unmatched
coordinate, a failed factorization).
"""

from __future__ import annotations

import argparse
import logging
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import __version__
from .errors import NonUnitRatio, ParseError, SchottkyCFTError

log = logging.getLogger("schottkycft")

THREADS_ENV = "SCHOTTKYCFT_THREADS"
EXIT_OK, EXIT_USAGE, EXIT_FALSIFIED = 0, 1, 2


class Falsified(SchottkyCFTError):
    """A checked statement failed at the requested order."""


@dataclass
class RunConfig:
    """Resolved options of one run."""

    command: tuple
    inputs: list = field(default_factory=list)
    order: int = 2
    numeric: bool = False
    output: str | None = None
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.order < 0:
            raise SchottkyCFTError("order must be >= 0")
        if self.threads < 1:
            raise SchottkyCFTError(f"{THREADS_ENV} must be a positive integer")


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise SchottkyCFTError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if n < 1:
        raise SchottkyCFTError(f"{THREADS_ENV} must be at least 1, got {n}")
    return n


def _number(text: str):
    """Exact rational unless the token has a decimal point, exponent or ``j``."""
    try:
        if any(ch in text for ch in "ij"):
            return complex(text.replace("i", "j"))
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _fmt(c, numeric: bool) -> str:
    from .series import format_number

    if numeric and not isinstance(c, complex):
        c = complex(c)
    if isinstance(c, complex):
        return f"{c.real:.12g}" if c.imag == 0 else f"({c.real:.12g}{c.imag:+.12g}j)"
    return format_number(c)


def _series_str(s, numeric: bool) -> str:
    from .series import TruncatedSeries

    if not isinstance(s, TruncatedSeries) or not numeric:
        return str(s)
    terms = {e: complex(c.constant() if hasattr(c, "constant") else c) for e, c in s.terms.items()}
    return str(TruncatedSeries(s.variables, s.order, terms))


def _read_graph(path: str):
    from .graphs import parse_graph

    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_graph(text)
    except ParseError as exc:
        err = ParseError(f"{path}: {exc}")
        err.line = exc.line
        raise err from None


def _rigidified(graph):
    from .graphs import find_rigidification

    return graph if graph.rigid else graph.replace(rigid=find_rigidification(graph))


# --------------------------------------------------------------------------
# graph
# --------------------------------------------------------------------------


def cmd_graph_check(args, cfg: RunConfig) -> list:
    from .graphs import format_graph

    g = _rigidified(_read_graph(args.file))
    out = [f"genus {g.genus()}  tails {len(g.tails)}  vertices {len(g.vertices)}  edges {len(g.edges)}",
           f"stable {g.is_stable()}  trivalent {g.is_trivalent()}",
           f"3g-3+n = {3 * g.genus() - 3 + len(g.tails)}"]
    return out + ["", format_graph(g).rstrip()]


def cmd_graph_extend(args, cfg: RunConfig) -> list:
    from .graphs import extend_tails, format_graph

    return [format_graph(extend_tails(_rigidified(_read_graph(args.file)))).rstrip()]


def cmd_graph_fuse(args, cfg: RunConfig) -> list:
    from .graphs import format_graph, fuse_surgery

    g = _read_graph(args.file)
    v0, branches = _vertex_and_branches(g, args)
    s = fuse_surgery(g, v0, branches, args.new_edge)
    return ["# prime: " + " ".join(map(str, branches[:2])) + " | " + " ".join(map(str, branches[2:])),
            format_graph(s.prime).rstrip(), "",
            "# double prime: " + " ".join(str(branches[i]) for i in (0, 2)) + " | "
            + " ".join(str(branches[i]) for i in (1, 3)),
            format_graph(s.double_prime).rstrip()]


# --------------------------------------------------------------------------
# schottky
# --------------------------------------------------------------------------


def _words(graph, tokens: Sequence[str]):
    from .graphs import StableGraph, check_path, fundamental_group_generators, he

    if tokens:
        words = []
        for t in tokens:
            p = tuple(he(x, graph) for x in t.replace(",", " ").split())
            check_path(graph, p)
            words.append(p)
        return words
    core = StableGraph(graph.vertices, graph.edges, {})
    return fundamental_group_generators(core, graph.vertices[0])


REPORT_SLACK = (0, 2, 4, 8, 16)


class _Projective:
    """Fixed point outside the affine chart, printed as ``[u : v]``."""

    def __init__(self, u, v):
        self.u, self.v = u, v
        self.order = min(u.order, v.order)

    def truncate(self, order):
        return _Projective(self.u.truncate(order), self.v.truncate(order))


def _word_record(g, p, order: int):
    """Multiplier and attractive fixed point of ``p`` at ``order``.

    Conjugated words lose precision to divisions by deformation
    parameters, so the computation is repeated with growing slack until
    both series are known to ``order``.  A fixed point with a pole in the
    deformation parameters is returned in projective coordinates.
    """
    from .schottky import attractive_fixed_point, multiplier, path_element, pointed_config

    last = None
    for slack in REPORT_SLACK:
        sc = pointed_config(g, order + slack)
        try:
            lam = multiplier(path_element(sc, p))
            pt = attractive_fixed_point(sc, p)
        except SchottkyCFTError as exc:
            last = exc
            continue
        try:
            fix = pt.affine()
        except SchottkyCFTError:
            fix = _Projective(pt.u, pt.v)
        got = min(lam.order, getattr(fix, "order", order))
        if got >= order:
            return lam.truncate(order), fix.truncate(order) if hasattr(fix, "truncate") else fix
        last = SchottkyCFTError(f"precision {got} < {order} with slack {slack}")
    raise last


def _point_str(fix, numeric: bool) -> str:
    if isinstance(fix, _Projective):
        return f"[{_series_str(fix.u, numeric)} : {_series_str(fix.v, numeric)}]"
    return _series_str(fix, numeric)


def cmd_schottky_report(args, cfg: RunConfig) -> list:
    from .graphs import path_str
    from .schottky import closed_fiber, pointed_config

    g = _rigidified(_read_graph(args.file))
    words = _words(g, args.word)

    def record(p):
        try:
            lam, fix = _word_record(g, p, cfg.order)
            lam, fix = _series_str(lam, cfg.numeric), _point_str(fix, cfg.numeric)
        except SchottkyCFTError as exc:
            lam = fix = f"<{type(exc).__name__}: {exc}>"
        return f"word={path_str(p)} multiplier={lam} fix={fix}"

    with ThreadPoolExecutor(cfg.threads) as pool:
        records = list(pool.map(record, words))
    return ["# closed fibre", str(closed_fiber(pointed_config(g, cfg.order), g)), "# words"] + records


# --------------------------------------------------------------------------
# compare / uparams
# --------------------------------------------------------------------------


def _vertex_and_branches(graph, args) -> tuple:
    """4-valent vertex and its ordered branches from ``--vertex`` / ``--branches``.

    ``--branches`` is one string such as ``"a,-a,b,-b"`` (commas or spaces),
    so tokens starting with ``-`` are not taken for options.
    """
    from .compare import default_branches
    from .graphs import he

    if args.vertex:
        v0, default = args.vertex, tuple(graph.branches(args.vertex))
    else:
        v0, default = default_branches(graph)
    if not args.branches:
        return v0, default
    tokens = args.branches.replace(",", " ").split()
    if len(tokens) != 4:
        raise SchottkyCFTError(f"--branches needs 4 half-edges, got {len(tokens)}")
    return v0, tuple(he(t, graph) for t in tokens)


def _case(args, side=None):
    from .compare import ComparisonCase

    g = _read_graph(args.graph)
    v0, branches = _vertex_and_branches(g, args)
    return ComparisonCase(g, v0, branches, side or args.side)


def cmd_compare(args, cfg: RunConfig) -> list:
    from .compare import ratio_report

    case = _case(args)
    rep = ratio_report(case, cfg.order)
    out = [f"# {case}  order {cfg.order}", rep.table()]
    if rep.cross_ratio is not None:
        out.append(f"cross ratio = {_series_str(rep.cross_ratio, cfg.numeric)}")
    if not rep.all_units():
        bad = ", ".join(e.name for e in rep.entries if not e.is_unit)
        raise Falsified(f"compare: non-unit ratios at order {cfg.order}: {bad}\n" + "\n".join(out))
    return out


def cmd_uparams(args, cfg: RunConfig) -> list:
    from .compare import coordinate_count, u_parameters

    case = _case(args, "prime")
    ups = u_parameters(case, cfg.order)
    out = [f"# {case.v0}: ({', '.join(map(str, case.branches))})  order {cfg.order}",
           f"{'name':<6} | {'coordinate':<24} | matched | constant"]
    for u in ups:
        out.append(f"{u.name:<6} | {u.formula():<24} | {u.matched:<7} | {_fmt(u.constant, cfg.numeric)}")
    out.append(f"coordinate count = {coordinate_count(case)} (x and {len(ups)} u)")
    bad = [u.name for u in ups if u.constant != 1]
    if bad:
        raise Falsified("uparams: constants not normalised for " + ", ".join(bad) + "\n" + "\n".join(out))
    return out


# --------------------------------------------------------------------------
# blocks
# --------------------------------------------------------------------------


def _coerce(x, numeric: bool):
    return complex(x) if numeric else x


def _coefficients(block, numeric: bool) -> list:
    return [f"q^{k}: {_fmt(c, numeric)}" for k, c in enumerate(block.coefficients())]


def cmd_blocks_four_point(args, cfg: RunConfig) -> list:
    from .blocks import four_point_block

    n = cfg.numeric
    b = four_point_block(*(_coerce(v, n) for v in (args.c, args.d1, args.d2, args.d3, args.d4, args.dbeta)),
                         cfg.order)
    return _coefficients(b, n)


def cmd_blocks_torus(args, cfg: RunConfig) -> list:
    from .blocks import torus_block

    n = cfg.numeric
    b = torus_block(_coerce(args.c, n), _coerce(args.dext, n), _coerce(args.dbeta, n), cfg.order)
    return _coefficients(b, n)


def _weights(args, graph, numeric: bool) -> tuple:
    from .virasoro import VirasoroParams

    given = {}
    for item in args.weight or []:
        label, sep, val = item.partition("=")
        if not sep:
            raise SchottkyCFTError(f"--weight expects label=value, got {item!r}")
        given[label] = _number(val)
    unknown = set(given) - set(graph.edges) - set(graph.tails)
    if unknown:
        raise SchottkyCFTError(f"--weight for unknown labels {sorted(unknown)}")
    c = _coerce(args.c, numeric)

    def w(label):
        if label in given:
            return VirasoroParams(c, _coerce(given[label], numeric))
        if args.default_weight is None:
            raise SchottkyCFTError(f"no weight for {label}; pass --weight {label}=... or --default-weight")
        return VirasoroParams(c, _coerce(args.default_weight, numeric))

    return {t: w(t) for t in graph.tails}, {e: w(e) for e in graph.edges}


def _pants(args, numeric: bool):
    from .blocks import PantsDecomposition

    g = _read_graph(args.file)
    external, internal = _weights(args, g, numeric)
    return PantsDecomposition(g, external, internal)


def cmd_blocks_graph(args, cfg: RunConfig) -> list:
    from .blocks import graph_block
    from .series import dumps

    b = graph_block(_pants(args, cfg.numeric), cfg.order)
    shifts = " ".join(f"{e}={_fmt(s, cfg.numeric)}" for e, s in b.shifts.items())
    return [f"# shifts {shifts}", dumps(b.body).rstrip()]


# --------------------------------------------------------------------------
# moves
# --------------------------------------------------------------------------


def cmd_moves_apply(args, cfg: RunConfig) -> list:
    from .blocks import graph_block
    from .graphs import format_graph
    from .moves import AnalyticContinuationRequired, MoveWord, compose
    from .series import dumps

    pants = _pants(args, cfg.numeric)
    word = MoveWord.parse(args.word, pants)
    block = graph_block(pants, cfg.order)
    res = compose(word, block)
    out = [f"# word: {word.text() or '(empty)'}"]
    if isinstance(res, AnalyticContinuationRequired):
        out.append(str(res))
        if res.state is not None:
            out += [res.state.table(), "# decomposition after the move", format_graph(res.state.after.graph).rstrip()]
        tb = res.partial
    else:
        tb = res
        out.append("# final decomposition")
        out.append(format_graph(word.final.graph).rstrip())
    out.append(f"# twists {dict(tb.twists)}  phase {tb.formal_phase()}"
               + (f" = {_fmt(tb.phase(), True)}" if cfg.numeric else ""))
    out.append(dumps(tb.block.body).rstrip())
    return out


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", "-N", type=int, default=2, help="truncation order N (default 2)")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact rational arithmetic (default)")
    mode.add_argument("--numeric", action="store_true", help="complex floating point")
    common.add_argument("--output", "-o", help="write the report to this file instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised checks")

    p = argparse.ArgumentParser(prog="schottkycft", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--verbose", "-v", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    graph = sub.add_parser("graph", help="stable graph utilities").add_subparsers(dest="action", required=True)
    for name, fn, hlp in (("check", cmd_graph_check, "validate and summarise a graph file"),
                          ("extend", cmd_graph_extend, "replace tails by bridges to loop vertices")):
        q = graph.add_parser(name, parents=[common], help=hlp)
        q.add_argument("file")
        q.set_defaults(func=fn)
    q = graph.add_parser("fuse", parents=[common], help="both resolutions of a 4-valent vertex")
    q.add_argument("file")
    q.add_argument("--vertex")
    q.add_argument("--branches", metavar="H1,H2,H3,H4", help="ordered branches, e.g. 'a,-a,b,-b'")
    q.add_argument("--new-edge", default="e0")
    q.set_defaults(func=cmd_graph_fuse)

    sch = sub.add_parser("schottky", help="Schottky group reports").add_subparsers(dest="action", required=True)
    q = sch.add_parser("report", parents=[common], help="closed fibre, multipliers and fixed points")
    q.add_argument("file")
    q.add_argument("--word", action="append", help="closed walk, e.g. 'a -b' (repeatable)")
    q.set_defaults(func=cmd_schottky_report)

    for name, fn, hlp in (("compare", cmd_compare, "unit report for a 4-valent vertex"),
                          ("uparams", cmd_uparams, "coordinates x, u_i on the contracted family")):
        q = sub.add_parser(name, parents=[common], help=hlp)
        q.add_argument("--graph", required=True, metavar="FILE", help="graph file")
        q.add_argument("--vertex", help="4-valent vertex (default: the only one)")
        q.add_argument("--branches", metavar="H1,H2,H3,H4", help="ordered branches, e.g. 'a,-a,b,-b'")
        if name == "compare":
            q.add_argument("--side", default="prime", choices=["prime", "double_prime", "'", "''"],
                           metavar="{prime,double_prime}", help="resolution to compare against (default prime)")
        q.set_defaults(func=fn)

    blocks = sub.add_parser("blocks", help="conformal block expansions").add_subparsers(dest="action", required=True)
    q = blocks.add_parser("four-point", parents=[common], help="sphere with four insertions")
    q.add_argument("--c", type=_number, required=True)
    for d in ("d1", "d2", "d3", "d4"):
        q.add_argument(f"--{d}", type=_number, required=True)
    q.add_argument("--dbeta", type=_number, required=True)
    q.set_defaults(func=cmd_blocks_four_point)
    q = blocks.add_parser("torus", parents=[common], help="torus with one insertion")
    q.add_argument("--c", type=_number, required=True)
    q.add_argument("--dext", type=_number, required=True)
    q.add_argument("--dbeta", type=_number, required=True)
    q.set_defaults(func=cmd_blocks_torus)

    def weighted(parser):
        parser.add_argument("--file", required=True)
        parser.add_argument("--c", type=_number, required=True)
        parser.add_argument("--weight", action="append", metavar="LABEL=DELTA")
        parser.add_argument("--default-weight", type=_number)

    q = blocks.add_parser("graph", parents=[common], help="block of a trivalent graph file")
    weighted(q)
    q.set_defaults(func=cmd_blocks_graph)

    moves = sub.add_parser("moves", help="move words").add_subparsers(dest="action", required=True)
    q = moves.add_parser("apply", parents=[common], help="apply a move word to the block of a graph")
    weighted(q)
    q.add_argument("--word", required=True, help="tokens HD:<edge> F:<edge>:<13|14> S:<handle>")
    q.set_defaults(func=cmd_moves_apply)
    return p


def run(cfg: RunConfig, args) -> list:
    random.seed(cfg.seed)
    return args.func(args, cfg)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = RunConfig((args.command, getattr(args, "action", None)), order=args.order, numeric=args.numeric,
                        output=args.output, seed=args.seed, threads=_threads())
        lines = run(cfg, args)
    except Falsified as exc:
        print(f"falsified: {exc}", file=sys.stderr)
        return EXIT_FALSIFIED
    except NonUnitRatio as exc:
        print(f"falsified: {type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FALSIFIED
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchottkyCFTError as exc:
        print(f"error: {type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = "\n".join(lines) + "\n"
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
