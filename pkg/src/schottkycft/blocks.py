"""Conformal blocks glued from three-point functionals along a trivalent graph.

Every vertex of a pants decomposition is a three-pointed sphere whose legs
sit at ``inf, 1, 0``; which half-edge occupies which leg is read from the
graph's rigidification (slot ``inf`` is leg 1, slot ``1`` leg 2, slot ``0``
leg 3).  An edge ``e`` with internal weight ``beta`` contributes

    sum_k q_e^(Delta_beta + k) sum_{l, m} F(.. v_l ..) G_k^{-1}[l][m] F(.. v_m ..)

with ``v_l`` the level-``k`` basis and ``G_k`` its Gram matrix.  The factor
``q_e^Delta_beta`` is kept aside as an exponent shift; the remaining
power series (the *body*) is truncated at total degree ``N``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from . import linalg
from .errors import DegenerateModule, GraphError, SchottkyCFTError
from .graphs import HalfEdge, StableGraph, build_graph, find_rigidification
from .series import SeriesRing, TruncatedSeries
from .virasoro import (
    VermaVector,
    VirasoroParams,
    module,
    partitions,
    three_point_functional,
)

log = logging.getLogger(__name__)

#: Rigidification slot of each leg of the three-point functional.
LEG_SLOTS = ("inf", "1", "0")


def q_var(edge: str) -> str:
    return f"q_{edge}"


@dataclass
class BlockSeries:
    """``prod_e q_e^shift_e * body`` with ``body`` a truncated power series."""

    edges: tuple
    shifts: Mapping[str, object]
    body: TruncatedSeries

    def constant_term(self):
        return self.body.constant_term()

    def coefficients(self, edge: str | None = None) -> list:
        """Coefficients of ``q_edge^k`` (single-edge blocks), ``k = 0..N``."""
        if edge is None:
            if len(self.edges) != 1:
                raise SchottkyCFTError("name the edge of a multi-edge block")
            edge = self.edges[0]
        i = self.body.variables.index(q_var(edge))
        out = []
        for k in range(self.body.order + 1):
            e = [0] * len(self.body.variables)
            e[i] = k
            out.append(self.body.coefficient(tuple(e)))
        return out

    def exponent(self, edge: str, k: int):
        """Full exponent of ``q_edge`` in a body monomial of degree ``k``."""
        return self.shifts[edge] + k

    def twist(self, edge: str) -> "BlockSeries":
        """Body after ``q_edge -> -q_edge`` (shift untouched)."""
        i = self.body.variables.index(q_var(edge))
        terms = {e: (-c if e[i] % 2 else c) for e, c in self.body.terms.items()}
        return BlockSeries(self.edges, dict(self.shifts), TruncatedSeries(self.body.variables, self.body.order, terms))

    def __str__(self):
        pre = " * ".join(f"q_{e}^({self.shifts[e]})" for e in self.edges)
        return f"{pre} * [{self.body}]" if pre else str(self.body)


def leading_normalization(block: BlockSeries):
    """Constant term of ``prod q_e^{-Delta_e} * block``."""
    return block.constant_term()


# --------------------------------------------------------------------------
# One-edge gluing
# --------------------------------------------------------------------------


def _level_basis(k: int) -> list:
    return [VermaVector.basis(lam) for lam in partitions(k)]


def glue_two(f1: Callable, f2: Callable, beta: VirasoroParams, order: int, edge: str = "e",
             ring: SeriesRing | None = None) -> BlockSeries:
    """Glue two blocks along one leg each.

    ``f1``, ``f2`` take a vector of the module of ``beta`` and return a
    scalar or a series in ``ring``.
    """
    ring = ring or SeriesRing([q_var(edge)], order)
    q = ring.gen(q_var(edge))
    mod = module(beta)
    body = ring.zero()
    for k in range(order + 1):
        basis = _level_basis(k)
        try:
            ginv = mod.dual(k)
        except DegenerateModule as exc:
            raise DegenerateModule(str(exc), level=k, edge=edge) from None
        a = [f1(v) for v in basis]
        b = [f2(v) for v in basis]
        term = ring.zero()
        for i, ai in enumerate(a):
            for j, bj in enumerate(b):
                g = ginv[i][j]
                if g != 0:
                    term = term + (ring(ai) * ring(bj)).scale(g)
        body = body + term * q ** k
    return BlockSeries((edge,), {edge: beta.delta}, body)


def self_glue(f: Callable, beta: VirasoroParams, order: int, edge: str = "e") -> BlockSeries:
    """Glue two legs of one block; ``f`` takes the two vectors at those legs."""
    ring = SeriesRing([q_var(edge)], order)
    q = ring.gen(q_var(edge))
    mod = module(beta)
    body = ring.zero()
    for k in range(order + 1):
        basis = _level_basis(k)
        try:
            ginv = mod.dual(k)
        except DegenerateModule as exc:
            raise DegenerateModule(str(exc), level=k, edge=edge) from None
        acc = Fraction(0)
        for i, vi in enumerate(basis):
            for j, vj in enumerate(basis):
                if ginv[i][j] != 0:
                    acc += f(vi, vj) * ginv[i][j]
        body = body + q ** k * acc
    return BlockSeries((edge,), {edge: beta.delta}, body)


def four_point_block(c, d1, d2, d3, d4, d_beta, order: int) -> BlockSeries:
    """Sphere with ``d1, d2`` on one pair of pants and ``d3, d4`` on the other.

    Legs: ``(d1, d2, beta)`` at ``(inf, 1, 0)`` and ``(beta, d3, d4)`` at
    ``(inf, 1, 0)``.
    """
    p = [VirasoroParams(c, d) for d in (d1, d2, d3, d4)]
    pb = VirasoroParams(c, d_beta)
    left = three_point_functional((p[0], p[1], pb))
    right = three_point_functional((pb, p[2], p[3]))
    e = VermaVector.highest()
    return glue_two(lambda v: left(e, e, v), lambda v: right(v, e, e), pb, order)


def torus_block(c, d_ext, d_beta, order: int) -> BlockSeries:
    """One-point torus: the legs at ``inf`` and ``0`` are glued, ``d_ext`` at ``1``."""
    pe, pb = VirasoroParams(c, d_ext), VirasoroParams(c, d_beta)
    f = three_point_functional((pb, pe, pb))
    e = VermaVector.highest()
    return self_glue(lambda v, w: f(v, e, w), pb, order)


# --------------------------------------------------------------------------
# Pants decompositions
# --------------------------------------------------------------------------


@dataclass
class PantsDecomposition:
    """Trivalent graph with tails, weights and the leg order at each vertex."""

    graph: StableGraph
    external: Mapping[str, VirasoroParams]  # tail -> module
    internal: Mapping[str, VirasoroParams]  # edge -> module
    legs: Mapping[str, tuple] = field(default_factory=dict)  # vertex -> half-edges at inf, 1, 0

    def __post_init__(self):
        g = self.graph
        if any(g.degree(v) != 3 for v in g.vertices):
            raise GraphError("every vertex of a pants decomposition is trivalent")
        n = len(g.tails)
        if len(g.edges) != 3 * g.genus() - 3 + n:
            raise GraphError("edge count differs from 3g - 3 + n")
        missing = set(g.tails) - set(self.external)
        if missing:
            raise GraphError(f"no weight for tails {sorted(missing)}")
        missing = set(g.edges) - set(self.internal)
        if missing:
            raise GraphError(f"no weight for edges {sorted(missing)}")
        if not self.legs:
            rigid = g.rigid or find_rigidification(g)
            self.legs = {v: tuple(rigid[v][a] for a in LEG_SLOTS) for v in g.vertices}
        for v in g.vertices:
            if set(self.legs[v]) != set(g.branches(v)):
                raise GraphError(f"legs at {v} do not match its branches")
        cs = {p.c for p in list(self.external.values()) + list(self.internal.values())}
        if len(cs) > 1:
            raise SchottkyCFTError("all modules must share the central charge")

    def weight(self, h: HalfEdge) -> VirasoroParams:
        return self.external[h.label] if h.is_tail else self.internal[h.label]


def pants_from_legs(vertices: Sequence[str], legs: Mapping[str, Sequence[str]], c,
                    weights: Mapping[str, object]) -> PantsDecomposition:
    """Build a decomposition from leg lists ``v: [h_inf, h_1, h_0]``.

    Tokens are ``e`` / ``-e`` for edge halves (``+e`` ends at the head) and
    ``t`` for tails; each edge label appearing twice, each tail once.
    ``weights`` maps edge and tail labels to conformal weights.
    """
    seen = {}
    for v in vertices:
        for tok in legs[v]:
            lab = tok.lstrip("-")
            seen.setdefault(lab, []).append((v, tok.startswith("-")))
    edges, tails = {}, {}
    for lab, occ in seen.items():
        if len(occ) == 1:
            tails[lab] = occ[0][0]
        elif len(occ) == 2:
            head = [v for v, neg in occ if not neg]
            tail = [v for v, neg in occ if neg]
            if len(head) != 1 or len(tail) != 1:
                raise GraphError(f"edge {lab} needs one '{lab}' and one '-{lab}'")
            edges[lab] = (tail[0], head[0])
        else:
            raise GraphError(f"label {lab} used {len(occ)} times")
    g = build_graph(list(vertices), edges, tails)
    hl = {}
    for v in vertices:
        hs = []
        for tok in legs[v]:
            lab = tok.lstrip("-")
            hs.append(HalfEdge(lab, 1, True) if lab in tails else HalfEdge(lab, -1 if tok.startswith("-") else 1))
        hl[v] = tuple(hs)
    ext = {t: VirasoroParams(c, weights[t]) for t in tails}
    internal = {e: VirasoroParams(c, weights[e]) for e in edges}
    return PantsDecomposition(g, ext, internal, hl)


def four_point_pants(c, d1, d2, d3, d4, d_beta) -> PantsDecomposition:
    return pants_from_legs(["v1", "v2"], {"v1": ["t1", "t2", "e"], "v2": ["-e", "t3", "t4"]}, c,
                           {"t1": d1, "t2": d2, "t3": d3, "t4": d4, "e": d_beta})


def torus_pants(c, d_ext, d_beta) -> PantsDecomposition:
    return pants_from_legs(["v"], {"v": ["a", "t1", "-a"]}, c, {"t1": d_ext, "a": d_beta})


def dumbbell_pants(c, d_a, d_b, d_c) -> PantsDecomposition:
    """Genus 2: loops ``a``, ``b`` joined by the separating edge ``c``."""
    return pants_from_legs(["v1", "v2"], {"v1": ["a", "c", "-a"], "v2": ["b", "-c", "-b"]}, c,
                           {"a": d_a, "b": d_b, "c": d_c})


# --------------------------------------------------------------------------
# Contraction
# --------------------------------------------------------------------------


class _Tensor:
    """Open half-edges and ``{states: {q-exponent: value}}``."""

    def __init__(self, legs: tuple, data: dict):
        self.legs = legs
        self.data = data


def _add_poly(dst: dict, src: dict, factor):
    for e, c in src.items():
        v = dst.get(e, 0) + c * factor
        if v == 0:
            dst.pop(e, None)
        else:
            dst[e] = v


def graph_block(pants: PantsDecomposition, order: int, vectors: Mapping[str, VermaVector] | None = None,
                contraction_order: Sequence[str] | None = None,
                basis_change: Mapping[str, Mapping[int, list]] | None = None,
                variables: Sequence[str] | None = None) -> BlockSeries:
    """Glue the three-point functionals of ``pants`` along every edge.

    ``vectors`` puts descendants on tails (default: highest-weight vectors).
    ``contraction_order`` lists the edges in the order they are summed;
    ``basis_change[e][k]`` replaces the level-``k`` basis on edge ``e`` by
    ``P @ basis``.  Neither changes the result.
    """
    g = pants.graph
    vectors = dict(vectors or {})
    basis_change = basis_change or {}
    edges = list(contraction_order or g.edges)
    if sorted(edges) != sorted(g.edges):
        raise GraphError("contraction order must list every edge once")
    qnames = list(variables) if variables is not None else [q_var(e) for e in g.edges]
    qidx = {e: qnames.index(q_var(e)) for e in g.edges}
    nq = len(qnames)
    zero_exp = (0,) * nq

    # per-edge level data: basis vectors (possibly changed) and inverse Gram
    edge_basis, edge_ginv = {}, {}
    for e in g.edges:
        mod = module(pants.internal[e])
        for k in range(order + 1):
            base = _level_basis(k)
            gram = mod.gram(k)
            P = basis_change.get(e, {}).get(k)
            if P is not None:
                base = [_combine(P[i], base) for i in range(len(base))]
                gram = linalg.matmul(linalg.matmul(P, gram), linalg.transpose(P))
            try:
                if linalg.is_exact(gram):
                    ginv = linalg.inverse(gram, f"Gram matrix of edge {e} at level {k}")
                else:
                    ginv, _ = linalg.inverse(gram, f"Gram matrix of edge {e} at level {k}")
            except DegenerateModule as exc:
                raise DegenerateModule(str(exc), level=k, edge=e) from None
            edge_basis[e, k] = base
            edge_ginv[e, k] = ginv

    def states(h: HalfEdge):
        if h.is_tail:
            return [(None, vectors.get(h.label, VermaVector.highest()))]
        return [((k, i), v) for k in range(order + 1) for i, v in enumerate(edge_basis[h.label, k])]

    tensors = []
    for v in g.vertices:
        legs = pants.legs[v]
        f = three_point_functional(tuple(pants.weight(h) for h in legs))
        open_legs = tuple(h for h in legs if not h.is_tail)
        data = {}
        choices = [states(h) for h in legs]
        for s0 in choices[0]:
            for s1 in choices[1]:
                for s2 in choices[2]:
                    picked = (s0, s1, s2)
                    # a loop's two ends share one q-degree; bound per distinct edge
                    per_edge = {}
                    for s, h in zip(picked, legs):
                        if not h.is_tail:
                            per_edge[h.label] = max(per_edge.get(h.label, 0), s[0][0])
                    if sum(per_edge.values()) > order:
                        continue
                    val = f(s0[1], s1[1], s2[1])
                    if val == 0:
                        continue
                    key = tuple(s[0] for s, h in zip(picked, legs) if not h.is_tail)
                    data[key] = {zero_exp: val}
        tensors.append(_Tensor(open_legs, data))

    def open_degree(legs, key) -> int:
        per_edge = {}
        for (k, _), h in zip(key, legs):
            per_edge[h.label] = max(per_edge.get(h.label, 0), k)
        return sum(per_edge.values())

    for e in edges:
        hp, hm = HalfEdge(e, 1), HalfEdge(e, -1)
        tp = next(t for t in tensors if hp in t.legs)
        tm = next(t for t in tensors if hm in t.legs)
        if tp is not tm:
            merged = {}
            for k1, p1 in tp.data.items():
                for k2, p2 in tm.data.items():
                    key = k1 + k2
                    poly = {}
                    for e1, c1 in p1.items():
                        for e2, c2 in p2.items():
                            ex = tuple(a + b for a, b in zip(e1, e2))
                            if sum(ex) <= order:
                                poly[ex] = poly.get(ex, 0) + c1 * c2
                    if poly:
                        merged[key] = poly
            tensors = [t for t in tensors if t is not tp and t is not tm]
            t = _Tensor(tp.legs + tm.legs, merged)
            tensors.append(t)
        else:
            t = tp
        ip, im = t.legs.index(hp), t.legs.index(hm)
        rest = tuple(h for i, h in enumerate(t.legs) if i not in (ip, im))
        out = {}
        for key, poly in t.data.items():
            (kp, lp), (km, lm) = key[ip], key[im]
            if kp != km:
                continue
            gval = edge_ginv[e, kp][lp][lm]
            if gval == 0:
                continue
            nkey = tuple(s for i, s in enumerate(key) if i not in (ip, im))
            shifted = {}
            for ex, c in poly.items():
                ex2 = list(ex)
                ex2[qidx[e]] += kp
                ex2 = tuple(ex2)
                if sum(ex2) <= order:
                    shifted[ex2] = c
            if not shifted:
                continue
            tgt = out.setdefault(nkey, {})
            _add_poly(tgt, shifted, gval)
        kept = {}
        for k, p in out.items():
            d = open_degree(rest, k)
            p = {ex: c for ex, c in p.items() if sum(ex) + d <= order}
            if p:
                kept[k] = p
        t_new = _Tensor(rest, kept)
        tensors = [x for x in tensors if x is not t]
        tensors.append(t_new)

    total = {zero_exp: Fraction(1)}
    for t in tensors:
        if t.legs:
            raise SchottkyCFTError("uncontracted legs remain")
        poly = t.data.get((), {})
        nxt = {}
        for e1, c1 in total.items():
            for e2, c2 in poly.items():
                ex = tuple(a + b for a, b in zip(e1, e2))
                if sum(ex) <= order:
                    nxt[ex] = nxt.get(ex, 0) + c1 * c2
        total = nxt
    body = TruncatedSeries(qnames, order, total)
    return BlockSeries(tuple(g.edges), {e: pants.internal[e].delta for e in g.edges}, body)


def _combine(row, base: list) -> VermaVector:
    out = VermaVector({}, base[0].level if base else 0)
    for c, v in zip(row, base):
        if c != 0:
            out = out + v.scale(c)
    return out


# --------------------------------------------------------------------------
# Factorisation along a separating edge
# --------------------------------------------------------------------------


def cut_edge(pants: PantsDecomposition, edge: str) -> tuple:
    """Split along a separating ``edge`` into the head side and the tail side.

    The cut ends become tails ``edge+`` (head side) and ``edge-`` (tail side),
    both carrying the internal weight of ``edge``.
    """
    g = pants.graph
    if edge not in g.edges:
        raise GraphError(f"unknown edge {edge}")
    u, w = g.edges[edge]
    rest = {e: uv for e, uv in g.edges.items() if e != edge}
    # connected components without the edge
    comp = {w}
    frontier = [w]
    while frontier:
        x = frontier.pop()
        for e, (a, b) in rest.items():
            for y, z in ((a, b), (b, a)):
                if y == x and z not in comp:
                    comp.add(z)
                    frontier.append(z)
    if u in comp:
        raise GraphError(f"edge {edge} is not separating")
    sides = []
    for verts, name, half in ((comp, f"{edge}+", HalfEdge(edge, 1)), (set(g.vertices) - comp, f"{edge}-", HalfEdge(edge, -1))):
        vs = [v for v in g.vertices if v in verts]
        es = {e: uv for e, uv in rest.items() if uv[0] in verts}
        ts = {t: g.tails[t] for t in g.tails if g.tails[t][0] in verts}
        ts[name] = (g.terminal(half), len(g.tails) + 1)
        sub = StableGraph(tuple(vs), es, ts)
        legs = {}
        for v in vs:
            legs[v] = tuple(HalfEdge(name, 1, True) if h == half else h for h in pants.legs[v])
        ext = {t: pants.external[t] for t in ts if t != name}
        ext[name] = pants.internal[edge]
        sides.append(PantsDecomposition(sub, ext, {e: pants.internal[e] for e in es}, legs))
    return tuple(sides)


def factorization(pants: PantsDecomposition, edge: str, order: int) -> tuple:
    """``(direct, glued)`` blocks: the second glues the two halves along ``edge``.

    Both live in the same series ring; they agree when the gluing is
    consistent.
    """
    head, tail = cut_edge(pants, edge)
    names = [q_var(e) for e in pants.graph.edges]
    ring = SeriesRing(names, order)
    direct = graph_block(pants, order)

    def side(p, tail_name):
        return lambda v: graph_block(p, order, vectors={tail_name: v}, variables=names).body

    glued = glue_two(side(head, f"{edge}+"), side(tail, f"{edge}-"), pants.internal[edge], order, edge, ring=ring)
    return direct, BlockSeries(tuple(pants.graph.edges), dict(direct.shifts), glued.body)
