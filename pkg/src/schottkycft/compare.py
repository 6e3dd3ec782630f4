"""Comparison of deformation parameters across the two resolutions of a
4-valent vertex.

Given a stable graph with one 4-valent vertex ``v0`` and ordered branches
``h1..h4``, the family over the ``x``-line degenerates at ``x -> 0`` to the
resolution separating ``{h1, h2}`` from ``{h3, h4}`` (side ``"prime"``) and at
``x -> 1`` to the one separating ``{h1, h3}`` from ``{h2, h4}`` (side
``"double_prime"``).  Both families are uniformised by Schottky groups; since
multipliers and cross ratios of attractive fixed points are conjugation
invariant, matching one such invariant per edge of the resolved graph
determines its parameters as power series in the parameters of the
unresolved family.  Ratios of the two sets of parameters are then tested
for being units.

Computations on the unresolved side take place in the ring ``A1`` whose
variables are ``X`` (the coordinate ``x``; ``T = 1 - x`` on the other side)
and, per edge, either ``y_e`` or the rescaled ``Y_e = y_e / X``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import (
    GraphError,
    NonUnit,
    NonUnitRatio,
    RecipeUnavailable,
    Unsatisfiable,
)
from .graphs import (
    HalfEdge,
    StableGraph,
    check_path,
    closed_walk,
    extend_tails,
    find_rigidification,
    fuse_surgery,
    path_str,
)
from .schottky import (
    INF,
    Moebius,
    SchottkyConfig,
    alpha_from_rigidification,
    attractive_fixed_point,
    cross_ratio,
    multiplier,
    path_element,
    pointed_config,
)
from .series import LocalizedScalar, SeriesRing, TruncatedSeries

log = logging.getLogger(__name__)

SIDES = ("prime", "double_prime")


def _side(side: str) -> str:
    aliases = {"prime": "prime", "'": "prime", "0": "prime", "double_prime": "double_prime",
               "double-prime": "double_prime", "''": "double_prime", "1": "double_prime"}
    if side not in aliases:
        raise ValueError(f"unknown side {side!r}; use 'prime' or 'double_prime'")
    return aliases[side]


# --------------------------------------------------------------------------
# Case description
# --------------------------------------------------------------------------


@dataclass
class ComparisonCase:
    """Graph, distinguished vertex, ordered branches and the side to compare."""

    graph: StableGraph
    v0: str
    branches: tuple
    side: str = "prime"
    new_edge: str = "e0"

    def __post_init__(self):
        self.side = _side(self.side)
        self.branches = tuple(self.branches)
        if len(self.branches) != 4:
            raise GraphError("exactly four branches h1..h4 are required")
        br = self.graph.branches(self.v0)
        if set(br) != set(self.branches) or len(br) != 4:
            raise GraphError(f"branches do not match the 4 branches at {self.v0}")
        for v in self.graph.vertices:
            if v != self.v0 and self.graph.degree(v) != 3:
                raise GraphError(f"vertex {v} is not trivalent")

    # combinatorial data ---------------------------------------------------
    @property
    def index_set(self) -> list:
        """Indices ``i`` (1-based) with ``h_i`` an edge half rather than a tail."""
        return [i + 1 for i, h in enumerate(self.branches) if not h.is_tail]

    def label(self, i: int) -> str:
        return self.branches[i - 1].label

    @property
    def pattern(self) -> str:
        lab = [h.label if not h.is_tail else f"tail:{h.label}" for h in self.branches]
        if len(set(lab)) == 4:
            return "all-distinct"
        if lab[0] == lab[1] and lab[2] == lab[3]:
            return "h1=h2,h3=h4"
        if lab[0] == lab[1] and len(set(lab)) == 3:
            return "h1=h2"
        return "other"

    @property
    def invariant_edges(self) -> list:
        touched = {h.label for h in self.branches if not h.is_tail}
        return [e for e in self.graph.edges if e not in touched]

    def colliding(self) -> tuple:
        """Branch indices that collide with ``h1`` on this side."""
        return (1, 2) if self.side == "prime" else (1, 3)

    def rescaled_edges(self) -> list:
        """Edges whose parameter is divided by the collision coordinate in ``A1``.

        A non-loop branch in the colliding pair is rescaled; a loop is
        rescaled exactly when its two ends are separated by the new edge.
        """
        coll = set(self.colliding())
        out = []
        for i, h in enumerate(self.branches, start=1):
            if h.is_tail or h.label in out:
                continue
            idx = [j for j, k in enumerate(self.branches, start=1) if not k.is_tail and k.label == h.label]
            if len(idx) == 1:
                if i in coll:
                    out.append(h.label)
            else:
                inside = [j in coll for j in idx]
                if inside[0] != inside[1]:
                    out.append(h.label)
        return out

    def rigidification(self) -> dict:
        """Rigidification with ``h2, h3, h4`` on ``0, 1, inf`` at ``v0``.

        ``h1`` sits at the collision coordinate, which tends to ``0`` at one
        degeneration and ``1`` at the other.  The far end of a non-loop
        ``h1`` is kept off both slots (so it lands on ``inf``), otherwise
        ``1/(alpha_h1 - alpha_-h1)`` blows up in a limit and the parameter of
        ``h1`` picks up a spurious power of ``x`` or ``1 - x``.  When that is
        impossible only the slot of the selected side is avoided.
        """
        h1, h2, h3, h4 = self.branches
        fixed = {self.v0: {"0": h2, "1": h3, "inf": h4}}
        if h1.is_tail or self.graph.start(h1) == self.v0:
            return find_rigidification(self.graph, fixed)
        try:
            return find_rigidification(self.graph, fixed, {-h1: ("0", "1")})
        except Unsatisfiable:
            log.warning("far end of h1 cannot sit on inf; rigidification depends on the side")
            return find_rigidification(self.graph, fixed, {-h1: "0" if self.side == "prime" else "1"})

    def surgery(self):
        return fuse_surgery(self.graph, self.v0, self.branches, self.new_edge)

    def resolved(self) -> StableGraph:
        s = self.surgery()
        return s.prime if self.side == "prime" else s.double_prime

    def resolved_prefix(self) -> str:
        return "s" if self.side == "prime" else "t"

    def supported(self) -> bool:
        p = self.pattern
        if self.side == "prime":
            return p in ("all-distinct", "h1=h2", "h1=h2,h3=h4")
        return p in ("all-distinct", "h1=h2", "h1=h2,h3=h4")

    def __str__(self):
        return f"{self.v0}: ({', '.join(map(str, self.branches))}) side={self.side} pattern={self.pattern}"


def case_from_tokens(graph: StableGraph, v0: str, tokens: Sequence[str], side: str = "prime") -> ComparisonCase:
    from .graphs import he

    return ComparisonCase(graph, v0, tuple(he(t, graph) for t in tokens), side)


def default_branches(graph: StableGraph) -> tuple:
    """The unique 4-valent vertex and its branches in enumeration order."""
    four = [v for v in graph.vertices if graph.degree(v) == 4]
    if len(four) != 1:
        raise GraphError("expected exactly one 4-valent vertex")
    return four[0], tuple(graph.branches(four[0]))


# --------------------------------------------------------------------------
# Configurations on both sides
# --------------------------------------------------------------------------


def collision_name(side: str) -> str:
    return "X" if _side(side) == "prime" else "T"


def y_name(e: str, rescaled: bool) -> str:
    return f"Y_{e}" if rescaled else f"y_{e}"


def s_name(prefix: str, e: str) -> str:
    return f"{prefix}_{e}"


@dataclass
class UnresolvedSide:
    """Schottky data of the unresolved family, written in ``A1``."""

    case: ComparisonCase
    cfg: SchottkyConfig
    ring: SeriesRing
    rescaled: list
    y: Mapping[str, TruncatedSeries]  # y_e as elements of A1
    x: TruncatedSeries  # the coordinate x as an element of A1


def unresolved_side(case: ComparisonCase, order: int) -> UnresolvedSide:
    rigid = case.rigidification()
    g = case.graph.replace(rigid=rigid)
    resc = case.rescaled_edges()
    cname = collision_name(case.side)
    names = [cname] + [y_name(e, e in resc) for e in g.edges]
    ring = SeriesRing(names, order)
    c = ring.gen(cname)
    x = c if case.side == "prime" else 1 - c
    y = {}
    for e in g.edges:
        v = ring.gen(y_name(e, e in resc))
        y[e] = c * v if e in resc else v
    h1 = case.branches[0]
    cfg = pointed_config(g, order, {HalfEdge(h1.label, h1.sign): x}, ring=ring, q=y)
    return UnresolvedSide(case, cfg, ring, resc, y, x)


@dataclass
class ResolvedSide:
    case: ComparisonCase
    graph: StableGraph
    cfg: SchottkyConfig
    ring: SeriesRing
    prefix: str
    new_edge: str

    def variable(self, e: str) -> str:
        return s_name(self.prefix, e)


def resolved_side(case: ComparisonCase, order: int) -> ResolvedSide:
    graph = case.resolved()
    rigid = find_rigidification(graph)
    graph = graph.replace(rigid=rigid)
    prefix = case.resolved_prefix()
    ring = SeriesRing([s_name(prefix, e) for e in graph.edges], order)
    qs = {e: ring.gen(s_name(prefix, e)) for e in graph.edges}
    cfg = pointed_config(graph, order, ring=ring, q=qs)
    return ResolvedSide(case, graph, cfg, ring, prefix, case.new_edge)


def _vertex_map(case: ComparisonCase, resolved: StableGraph) -> dict:
    out = {v: v for v in case.graph.vertices}
    for v in resolved.vertices:
        if v not in out:
            out[v] = case.v0
    return out


def contract_walk(walk: Sequence[HalfEdge], new_edge: str) -> tuple:
    """Image of a walk of the resolved graph after collapsing the new edge."""
    return tuple(h for h in walk if h.label != new_edge)


# --------------------------------------------------------------------------
# Invariants
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EdgeInvariant:
    """How the parameter of one resolved edge is detected.

    ``kind`` is ``"multiplier"`` (one walk) or ``"cross_ratio"`` (four walks
    ``a, b, c, d`` giving ``[f_a, f_c; f_b, f_d]``).  Walks live on the
    extended resolved graph.
    """

    edge: str
    kind: str
    base: str
    walks: tuple

    def describe(self) -> str:
        ws = ", ".join(path_str(w) for w in self.walks)
        return f"{self.edge}: {self.kind} at {self.base} of [{ws}]"


def edge_invariants(resolved: ResolvedSide) -> list:
    """One invariant per (non-extension) edge of the resolved graph."""
    g = resolved.cfg.graph
    out = []
    for e in resolved.graph.edges:
        u0, w0 = g.edges[e]
        h = HalfEdge(e, 1)
        if u0 == w0:
            out.append(EdgeInvariant(e, "multiplier", w0, ((h,),)))
            continue
        u, w = g.terminal(h), g.start(h)
        a, b = [k for k in g.branches(u) if k != h]
        c, d = [k for k in g.branches(w) if k != -h]
        walks = (
            closed_walk(g, u, (a,)),
            closed_walk(g, u, (b,)),
            closed_walk(g, u, (c, h)),
            closed_walk(g, u, (d, h)),
        )
        out.append(EdgeInvariant(e, "cross_ratio", u, walks))
    return out


def evaluate_invariant(cfg: SchottkyConfig, inv: EdgeInvariant, walks=None):
    walks = walks if walks is not None else inv.walks
    if inv.kind == "multiplier":
        return multiplier(path_element(cfg, walks[0]))
    fa, fb, fc, fd = (attractive_fixed_point(cfg, w) for w in walks)
    return cross_ratio(fa, fc, fb, fd)


class _LowPrecision(Exception):
    """An invariant vanished to working precision; retry with more slack."""


def _mu_split(value: TruncatedSeries, what: str):
    if value is INF:
        raise NonUnitRatio(f"{what} is infinite")
    if value.is_zero():
        raise _LowPrecision(what)
    try:
        return value.split_monomial_unit()
    except NonUnit as exc:
        raise NonUnitRatio(f"{what} is not a monomial times a unit: {value.short()}") from exc


# --------------------------------------------------------------------------
# Recipes of the proof (for inspection and the CLI)
# --------------------------------------------------------------------------


def gamma_recipes(case: ComparisonCase) -> list:
    """Four closed walks at ``v0`` ending in ``h2``, ``h3``, ``h5.h1``, ``h6.h1``.

    ``h5, h6`` are the two oriented edges other than ``-h1`` ending at the
    far end of ``h1``.  Returns ``[]`` when ``h1`` is a tail (no parameter
    to compare); raises :class:`RecipeUnavailable` when ``h1`` is a loop
    or ``h5`` and ``h6`` cannot be chosen distinct.
    """
    h1, h2, h3, h4 = case.branches
    if h1.is_tail:
        log.info("h1 is a tail: no parameter attached, no recipe needed")
        return []
    g = extend_tails(case.graph)
    e1 = HalfEdge(h1.label, h1.sign)
    if g.is_loop(e1):
        raise RecipeUnavailable("h1 is a loop; the alternate recipe is required", case.pattern)
    far = g.start(e1)
    cand = [k for k in g.branches(far) if k != -e1]
    if len(cand) < 2 or len(set(cand)) < 2:
        raise RecipeUnavailable("h5 and h6 cannot be chosen distinct", case.pattern)
    h5, h6 = cand[:2]

    def edge(k):
        return HalfEdge(k.label, k.sign)

    return [
        closed_walk(g, case.v0, (edge(h2),)),
        closed_walk(g, case.v0, (edge(h3),)),
        closed_walk(g, case.v0, (h5, e1)),
        closed_walk(g, case.v0, (h6, e1)),
    ]


def invariant_cross_ratio(case: ComparisonCase, order: int, assume_zero: Sequence[str] = (), max_slack: int = 24):
    """Cross ratio detecting the collision coordinate, computed in ``A1``.

    Fixed points ``f_i`` of closed walks at ``v0`` ending in ``h_i``; the
    pairing is ``[f1, f3; f2, f4]`` on the ``x -> 0`` side and
    ``[f1, f2; f3, f4]`` on the ``x -> 1`` side, which lie in ``X * unit``
    and ``T * unit`` respectively.  Parameters named in ``assume_zero`` are
    set to 0 beforehand.
    """
    side = unresolved_side(case, order)
    cfg = side.cfg
    if assume_zero:
        q = dict(cfg.q)
        for e in assume_zero:
            q[e] = side.ring.zero()
        cfg = SchottkyConfig(cfg.graph, cfg.alpha, q, cfg.ring, cfg.marked)
    g = cfg.graph
    fs = []
    for h in case.branches:
        k = HalfEdge(h.label, h.sign)
        fs.append(attractive_fixed_point(cfg, closed_walk(g, case.v0, (k,))))
    f1, f2, f3, f4 = fs
    if case.side == "prime":
        return cross_ratio(f1, f3, f2, f4)
    return cross_ratio(f1, f2, f3, f4)


# --------------------------------------------------------------------------
# Solving for the resolved parameters
# --------------------------------------------------------------------------


@dataclass
class Solution:
    """Resolved parameters written as series in ``A1``."""

    case: ComparisonCase
    unresolved: UnresolvedSide
    resolved: ResolvedSide
    invariants: list
    params: Mapping[str, TruncatedSeries]  # resolved edge -> series in A1
    monomials: Mapping[str, tuple]  # resolved edge -> exponent vector in A1
    residuals: Mapping[str, TruncatedSeries] = field(default_factory=dict)
    order: int | None = None
    values: Mapping[str, tuple] = field(default_factory=dict)  # edge -> (resolved, unresolved) invariant  # requested precision (work order may be higher)


def _integer_inverse(mat):
    from .linalg import inverse

    inv = inverse([[Fraction(v) for v in row] for row in mat], "exponent matrix")
    for row in inv:
        for v in row:
            if v.denominator != 1:
                raise NonUnitRatio("leading monomials are not related by a unimodular change")
    return [[int(v) for v in row] for row in inv]


def solve_parameters(case: ComparisonCase, order: int, max_slack: int = 24) -> Solution:
    """Match one invariant per resolved edge and solve for its parameter.

    Work happens at a raised truncation order because normalising
    homogeneous coordinates divides by monomials; the slack is doubled
    until every solved unit is known to ``order``.
    """
    slack = 2
    while True:
        try:
            sol = _solve_at(case, order + slack, need=order)
        except _LowPrecision as exc:
            if slack >= max_slack:
                raise NonUnitRatio(f"{exc} vanishes to working order {order + slack}") from None
            slack *= 2
            continue
        got = min((p.order - sum(sol.monomials[e]) for e, p in sol.params.items()), default=order + slack)
        if got >= order:
            sol.order = order
            return sol
        if slack >= max_slack:
            raise NonUnitRatio(f"could not reach order {order} (got {got}) with working order {order + slack}")
        log.debug("working order %d gave precision %d; retrying", order + slack, got)
        slack *= 2


def _solve_at(case: ComparisonCase, order: int, need: int | None = None) -> Solution:
    """Solve at working ``order``; ``need`` is the precision the caller wants.

    A parameter is never known better than the unresolved invariants it is
    solved from, so a working order that cannot deliver ``need`` is
    abandoned before the iteration.
    """
    un = unresolved_side(case, order)
    res = resolved_side(case, order)
    invs = edge_invariants(res)
    edges = [inv.edge for inv in invs]
    svars = [res.variable(e) for e in edges]

    lhs_mono, lhs_unit = [], []
    rhs_mono, rhs_unit = [], []
    values = {}
    for inv in invs:
        sval = evaluate_invariant(res.cfg, inv)
        m, u = _mu_split(sval, f"resolved invariant of {inv.edge}")
        lhs_mono.append(m)
        lhs_unit.append(u)
        dwalks = tuple(contract_walk(w, res.new_edge) for w in inv.walks)
        for w in dwalks:
            check_path(un.cfg.graph, w)
        dval = evaluate_invariant(un.cfg, inv, dwalks)
        values[inv.edge] = (sval, dval)
        m2, u2 = _mu_split(dval, f"unresolved invariant of {inv.edge}")
        rhs_mono.append(m2)
        rhs_unit.append(u2)

    # lhs monomials are exponent vectors in the s variables (ordered as res.ring)
    idx = [res.ring.variables.index(v) for v in svars]
    E = [[m[j] for j in idx] for m in lhs_mono]
    Einv = _integer_inverse(E)
    n = len(edges)
    k = len(un.ring.variables)
    mu = []
    for j in range(n):
        vec = [sum(Einv[j][i] * rhs_mono[i][t] for i in range(n)) for t in range(k)]
        if min(vec) < 0 or sum(vec) == 0:
            raise NonUnitRatio(f"parameter of {edges[j]} would not lie in the maximal ideal of A1")
        mu.append(tuple(vec))
    mu_series = [un.ring.monomial(m) for m in mu]
    if need is not None:
        for j in range(n):
            avail = min(rhs_unit[i].order for i in range(n) if Einv[j][i])
            if avail < need:
                raise _LowPrecision(f"unresolved invariants known to order {avail} only")

    c_lhs = [u.constant_term() for u in lhs_unit]
    c_rhs = [u.constant_term() for u in rhs_unit]
    const = []
    for j in range(n):
        c = Fraction(1)
        for i in range(n):
            c *= (Fraction(c_rhs[i]) / Fraction(c_lhs[i])) ** Einv[j][i]
        const.append(c)
    sigma = [un.ring(c) for c in const]
    log_rhs = [(u.scale(1 / Fraction(c_rhs[i])) - 1).log1p() for i, u in enumerate(rhs_unit)]

    for _ in range(order + 2):
        subst = {svars[j]: mu_series[j] * sigma[j] for j in range(n)}
        for v in res.ring.variables:
            subst.setdefault(v, un.ring.zero())
        log_lhs = []
        for i, u in enumerate(lhs_unit):
            uu = u.substitute(subst)
            if not isinstance(uu, TruncatedSeries):
                uu = un.ring(uu)
            log_lhs.append((uu.scale(1 / Fraction(c_lhs[i])) - 1).log1p())
        new = []
        for j in range(n):
            acc = un.ring.zero()
            for i in range(n):
                if Einv[j][i]:
                    acc = acc + (log_rhs[i] - log_lhs[i]).scale(Einv[j][i])
            new.append(acc.exp().scale(const[j]))
        done = all(a == b for a, b in zip(new, sigma))
        sigma = new
        if done:
            break
    params = {edges[j]: mu_series[j] * sigma[j] for j in range(n)}
    sol = Solution(case, un, res, invs, params, dict(zip(edges, mu)), values=values)
    sol.residuals = residuals(sol)
    return sol


def residuals(sol: Solution) -> dict:
    """Left minus right of every matched invariant after substitution."""
    out = {}
    subst = {sol.resolved.variable(e): s for e, s in sol.params.items()}
    for v in sol.resolved.ring.variables:
        subst.setdefault(v, sol.unresolved.ring.zero())
    for inv in sol.invariants:
        if inv.edge in sol.values:
            sval, dval = sol.values[inv.edge]
        else:
            sval = evaluate_invariant(sol.resolved.cfg, inv)
            dwalks = tuple(contract_walk(w, sol.resolved.new_edge) for w in inv.walks)
            dval = evaluate_invariant(sol.unresolved.cfg, inv, dwalks)
        lhs = sval.substitute(subst)
        out[inv.edge] = lhs - dval
    return out


def check_extra_words(sol: Solution, walks) -> dict:
    """Compare multipliers of further closed walks on both sides.

    Walks are given on the extended resolved graph; returns the difference
    of the two multipliers in ``A1`` for each.
    """
    subst = {sol.resolved.variable(e): s for e, s in sol.params.items()}
    out = {}
    for w in walks:
        lam_s = multiplier(path_element(sol.resolved.cfg, w)).substitute(subst)
        lam_d = multiplier(path_element(sol.unresolved.cfg, contract_walk(w, sol.resolved.new_edge)))
        out[path_str(w)] = lam_s - lam_d
    return out


# --------------------------------------------------------------------------
# Ratio reports
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RatioEntry:
    name: str
    value: TruncatedSeries
    is_unit: bool
    constant: object
    sign: int
    note: str = ""

    def leading(self, degree: int = 2) -> str:
        return self.value.truncate(min(degree, self.value.order)).short(8)


@dataclass
class RatioReport:
    case: ComparisonCase
    order: int
    entries: list
    cross_ratio: TruncatedSeries | None = None
    notes: list = field(default_factory=list)

    def all_units(self) -> bool:
        return all(e.is_unit for e in self.entries)

    def signs(self) -> dict:
        return {e.name: e.sign for e in self.entries}

    def table(self) -> str:
        head = f"{'ratio':<24} | {'unit?':<5} | {'sign':>4} | leading series (<= order 2)"
        lines = [head, "-" * len(head)]
        for e in self.entries:
            lines.append(f"{e.name:<24} | {'yes' if e.is_unit else 'NO':<5} | {e.sign:>+4d} | {e.leading()}")
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines)


def _ratio_entry(name, num_mono, num_coeff, den: Sequence[TruncatedSeries], ring, note="", order=None):
    """``num_coeff * monomial / prod(den)`` as a series, with unit test."""
    den_total = ring.one()
    for d in den:
        den_total = den_total * d
    try:
        m, unit = den_total.split_monomial_unit()
    except NonUnit:
        return RatioEntry(name, ring.zero(), False, 0, 0, "denominator is not monomial times unit")
    diff = tuple(a - b for a, b in zip(num_mono, m))
    if any(diff):
        val = unit.invert().scale(num_coeff)
        return RatioEntry(name, val, False, 0, 0, f"monomial mismatch {diff}")
    val = unit.invert().scale(num_coeff)
    if order is not None:
        val = val.truncate(order)
    c = val.constant_term()
    sign = 1 if Fraction(c) > 0 else -1
    return RatioEntry(name, val, True, c, sign, note)


def ratio_list(case: ComparisonCase) -> list:
    """``(name, numerator, [denominator edges])`` in the standard order.

    ``numerator`` is ``"x"`` / ``"1-x"`` or an edge label; denominators name
    resolved edges.  Raises :class:`RecipeUnavailable` outside the supported
    loop patterns.
    """
    if not case.supported():
        raise RecipeUnavailable(f"loop pattern {case.pattern!r} is not covered", case.pattern)
    p = case.prefix if hasattr(case, "prefix") else case.resolved_prefix()
    e0 = case.new_edge
    I = case.index_set
    lab = {i: case.label(i) for i in I}
    out = []
    if case.side == "prime":
        out.append((f"x/{p}_{e0}", "x", [e0]))
        if case.pattern == "all-distinct":
            for i in I:
                if i in (1, 2):
                    out.append((f"y_{lab[i]}/({p}_{e0}*{p}_{lab[i]})", lab[i], [e0, lab[i]]))
                else:
                    out.append((f"y_{lab[i]}/{p}_{lab[i]}", lab[i], [lab[i]]))
        else:
            seen = []
            for i in I:
                if lab[i] not in seen:
                    seen.append(lab[i])
                    out.append((f"y_{lab[i]}/{p}_{lab[i]}", lab[i], [lab[i]]))
    else:
        out.append((f"(1-x)/{p}_{e0}", "1-x", [e0]))
        if case.pattern == "all-distinct":
            with_t0 = (1, 3)
        elif case.pattern == "h1=h2":
            with_t0 = (1, 2, 3)
        else:
            with_t0 = (1, 2, 3, 4)
        seen = []
        for i in I:
            if lab[i] in seen:
                continue
            seen.append(lab[i])
            if i in with_t0:
                out.append((f"y_{lab[i]}/({p}_{e0}*{p}_{lab[i]})", lab[i], [e0, lab[i]]))
            else:
                out.append((f"y_{lab[i]}/{p}_{lab[i]}", lab[i], [lab[i]]))
    for e in case.invariant_edges:
        out.append((f"y_{e}/{p}_{e}", e, [e]))
    return out


def ratio_report(case: ComparisonCase, order: int, strict: bool = False) -> RatioReport:
    """Compute every ratio of the unit statement for ``case`` at ``order``.

    With ``strict=True`` a non-unit raises :class:`NonUnitRatio`.
    """
    recipe = ratio_list(case)
    sol = solve_parameters(case, order)
    un = sol.unresolved
    ring = un.ring
    cname = collision_name(case.side)
    entries = []
    for name, num, den in recipe:
        if num in ("x", "1-x"):
            mono = ring.monomial({cname: 1}).split_monomial_unit()[0]
        else:
            mono = un.y[num].split_monomial_unit()[0]
        entries.append(_ratio_entry(name, mono, 1, [sol.params[d] for d in den], ring, order=order))
    notes = []
    if case.side == "prime" and case.pattern == "all-distinct":
        for i in case.index_set:
            if i in (1, 2):
                lab = case.label(i)
                p = case.resolved_prefix()
                x_mono = ring.monomial({cname: 1}).split_monomial_unit()[0]
                num_mono = un.y[lab].split_monomial_unit()[0]
                den = sol.params[lab] * ring.monomial(x_mono)
                entries.append(_ratio_entry(f"y_{lab}/(x*{p}_{lab})", num_mono, 1, [den], ring,
                                            note="alternative normalisation", order=order))
        if any(i in (1, 2) for i in case.index_set):
            notes.append(f"y_i/({case.resolved_prefix()}_e0*s_i) and y_i/(x*s_i) differ by the unit x/{case.resolved_prefix()}_{case.new_edge}")
    if case.side == "double_prime" and case.pattern in ("h1=h2", "h1=h2,h3=h4"):
        lab = case.label(1)
        for e in entries:
            if e.name.startswith(f"y_{lab}/(") and e.is_unit and e.sign != 1:
                notes.append(f"square argument violated: {e.name} has sign {e.sign}")
                if strict:
                    raise NonUnitRatio(f"{e.name} should have constant term +1")
    try:
        cr = invariant_cross_ratio(case, order)
    except Exception as exc:  # reported, not fatal for the table
        cr = None
        notes.append(f"cross ratio unavailable: {exc}")
    bad = [r for r in sol.residuals.values() if not r.is_zero()]
    if bad:
        notes.append("matched invariants disagree after solving")
    report = RatioReport(case, order, entries, cr, notes)
    if strict and (not report.all_units() or bad):
        raise NonUnitRatio("; ".join(e.name for e in entries if not e.is_unit) or "residual mismatch")
    return report


# --------------------------------------------------------------------------
# Coordinates on the total family
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class UParameter:
    """One coordinate ``u = sign * y_e * x^a * (1-x)^b`` and its check data."""

    name: str
    edge: str
    x_exp: int
    one_minus_x_exp: int
    sign: int
    series: TruncatedSeries  # over LocalizedScalar coefficients, variables y_e
    matched: str  # resolved parameter it is compared with
    constant: object  # constant term of u / matched on the selected side

    def formula(self) -> str:
        den = []
        num = f"y_{self.edge}"
        if self.x_exp < 0:
            den.append("x" if self.x_exp == -1 else f"x^{-self.x_exp}")
        elif self.x_exp > 0:
            num += f"*x^{self.x_exp}"
        if self.one_minus_x_exp < 0:
            den.append("(1-x)" if self.one_minus_x_exp == -1 else f"(1-x)^{-self.one_minus_x_exp}")
        elif self.one_minus_x_exp > 0:
            num += f"*(1-x)^{self.one_minus_x_exp}"
        s = num if not den else f"{num}/{'*'.join(den)}" if len(den) == 1 else f"{num}/({'*'.join(den)})"
        return ("" if self.sign > 0 else "-") + s


def _x_exponent(case: ComparisonCase, order: int, edge: str) -> int:
    """Power of the collision coordinate in the leading monomial of ``y_e / s_e``."""
    sol = solve_parameters(case, order)
    un = sol.unresolved
    cname = collision_name(case.side)
    ci = un.ring.variables.index(cname)
    mono_param = sol.monomials[edge]
    mono_y = un.y[edge].split_monomial_unit()[0]
    return mono_param[ci] - mono_y[ci]


def u_parameters(case: ComparisonCase, order: int = 2, signs: Mapping[str, int] | None = None) -> list:
    """Coordinates ``u_i`` with ``{x, u_i}`` parameters at ``x -> 0`` and ``{1-x, u_i}`` at ``x -> 1``.

    The powers of ``x`` and ``1 - x`` are read off from the solved
    parameters on both sides; signs make ``u_i / s_i`` start with ``+1`` on
    ``case.side`` unless ``signs`` overrides them.
    """
    cases = {s: ComparisonCase(case.graph, case.v0, case.branches, s, case.new_edge) for s in SIDES}
    sols = {s: solve_parameters(c, order) for s, c in cases.items()}
    I = case.index_set
    labels = []
    for i in I:
        if case.label(i) not in labels:
            labels.append(case.label(i))
    labels += case.invariant_edges
    yvars = [f"y_{e}" for e in case.graph.edges]
    yring = SeriesRing(yvars, order)
    sel = sols[case.side]
    un = sel.unresolved
    out = []
    for k, e in enumerate(labels, start=1):
        exps = {}
        for s, sol in sols.items():
            cname = collision_name(s)
            ci = sol.unresolved.ring.variables.index(cname)
            mono_y = sol.unresolved.y[e].split_monomial_unit()[0]
            exps[s] = sol.monomials[e][ci] - mono_y[ci]
        a = exps["prime"]
        b = exps["double_prime"]
        # u / s_e in the selected A1: the monomial parts must cancel
        cname = collision_name(case.side)
        ci = un.ring.variables.index(cname)
        mono_y, unit_y = un.y[e].split_monomial_unit()
        p_coll, p_unit = (a, b) if case.side == "prime" else (b, a)
        mono_u = list(mono_y)
        mono_u[ci] += p_coll
        unit_u = unit_y * (1 - un.ring.gen(cname)) ** p_unit
        mu, sigma = sel.params[e].split_monomial_unit()
        if tuple(mono_u) != tuple(mu):
            raise NonUnitRatio(f"u for {e} does not match {sel.resolved.variable(e)} to leading order")
        c = (unit_u * sigma.invert()).constant_term()
        name = f"u_{k}"
        sg = (signs or {}).get(name, 1 if Fraction(c) > 0 else -1)
        coeff = LocalizedScalar((Fraction(sg),), max(-a, 0), max(-b, 0))
        num = LocalizedScalar((Fraction(1),))
        if a > 0:
            num = num * LocalizedScalar.x() ** a
        if b > 0:
            num = num * (1 - LocalizedScalar.x()) ** b
        series = yring.gen(f"y_{e}").scale(coeff * num)
        out.append(UParameter(name, e, a, b, sg, series, sel.resolved.variable(e), c * sg))
    return out


def coordinate_count(case: ComparisonCase) -> int:
    """``1 + #u``; equals ``3g - 3 + n`` of the resolved trivalent graph."""
    labels = {case.label(i) for i in case.index_set}
    return 1 + len(labels) + len(case.invariant_edges)


# --------------------------------------------------------------------------
# Ihara-Nakamura deformation
# --------------------------------------------------------------------------

#: The six anharmonic transformations as integer matrices.
ANHARMONIC = {
    "z": (1, 0, 0, 1),
    "1-z": (-1, 1, 0, 1),
    "1/z": (0, 1, 1, 0),
    "1/(1-z)": (0, 1, -1, 1),
    "z/(z-1)": (1, 0, 1, -1),
    "(z-1)/z": (1, -1, 1, 0),
}

_SLOT_POINT = {"0": Fraction(0), "1": Fraction(1), "inf": INF}


def _apply_int(m, p):
    a, b, c, d = m
    if p is INF:
        return INF if c == 0 else Fraction(a, c)
    den = c * p + d
    if den == 0:
        return INF
    return (a * p + b) / den


def standard_coordinates(graph: StableGraph, rigid: Mapping) -> dict:
    """Per half-edge anharmonic map sending its special point to 0.

    Coordinates are relative to the rigidification chart of ``v_h``; the
    choice sends ``tau(0), tau(1), tau(inf)`` to ``0, 1, inf`` up to the
    least permutation with ``h`` at 0.
    """
    out = {}
    for v, tau in rigid.items():
        for slot, h in tau.items():
            p = _SLOT_POINT[slot]
            for name, m in ANHARMONIC.items():
                if _apply_int(m, p) == 0:
                    out[HalfEdge(h.label, h.sign, h.is_tail)] = name
                    break
    return out


def _check_coordinates(graph, rigid, coords):
    for v, tau in rigid.items():
        for slot, h in tau.items():
            key = HalfEdge(h.label, h.sign, h.is_tail)
            if key not in coords:
                continue
            m = ANHARMONIC[coords[key]]
            if _apply_int(m, _SLOT_POINT[slot]) != 0:
                raise GraphError(f"coordinate {coords[key]} does not send {h} to 0")


def ihara_nakamura_element(graph: StableGraph, path: Sequence[HalfEdge], order: int, coords: Mapping | None = None,
                           ring: SeriesRing | None = None) -> Moebius:
    """``g_d h_{d-1} ... g_1 h_0 g_0`` over ``Z[[q_e]]``.

    ``h_k`` is ``z -> q / z``; ``g_k`` changes from the coordinate of
    ``h_{k-1}`` to that of ``-h_k`` on the common line.  Coordinates are
    anharmonic maps relative to the rigidification chart; the base chart
    of the starting vertex is the rigidification chart itself.
    """
    if graph.rigid is None:
        raise GraphError("graph needs a rigidification")
    if any(graph.degree(v) != 3 for v in graph.vertices) or graph.tails:
        raise GraphError("a trivalent tailless graph is required")
    coords = dict(coords) if coords is not None else standard_coordinates(graph, graph.rigid)
    _check_coordinates(graph, graph.rigid, coords)
    ring = ring or SeriesRing([f"q_{e}" for e in graph.edges], order)
    path = tuple(path)
    one, zero = ring.one(), ring.zero()
    ident = Moebius(one, zero, zero, one)
    if not path:
        return ident
    check_path(graph, path)
    if graph.start(path[0]) != graph.terminal(path[-1]):
        raise GraphError("path is not closed")

    def mat(name):
        a, b, c, d = ANHARMONIC[name]
        return Moebius(ring(a), ring(b), ring(c), ring(d))

    g = mat(coords[-path[0]])
    for k, h in enumerate(path):
        q = ring.gen(f"q_{h.label}")
        g = Moebius(zero, q, one, zero) @ g
        if k + 1 < len(path):
            nxt = path[k + 1]
            g = mat(coords[-nxt]) @ mat(coords[h]).adjugate() @ g
    return mat(coords[path[-1]]).adjugate() @ g


def compare_ihara_nakamura(graph: StableGraph, paths, order: int) -> list:
    """``(path, IN multiplier, Schottky multiplier, ratio, is_unit)`` records.

    Each multiplier is a monomial of degree ``len(path)`` times a unit, so the
    work happens at ``order + len(path)``; the unit ratio is truncated to
    ``order``.
    """
    from .schottky import generic_config

    alpha = alpha_from_rigidification(graph.rigid)
    out = []
    for p in paths:
        work = order + len(p)
        cfg = generic_config(graph, alpha, work)
        m_in = multiplier(ihara_nakamura_element(graph, p, work, ring=cfg.ring))
        m_s = multiplier(path_element(cfg, p))
        try:
            mono, unit = m_s.split_monomial_unit()
            mono2, unit2 = m_in.split_monomial_unit()
            ok = mono == mono2
            ratio = (unit2 * unit.invert()).truncate(order) if ok else None
        except NonUnit:
            ok, ratio = False, None
        out.append((tuple(p), m_in, m_s, ratio, ok))
    return out
