"""Universal Schottky groups over truncated series rings and over C.

Elements of PGL2 are stored as unnormalised 2x2 matrices whose entries are
either :class:`~schottkycft.series.TruncatedSeries` (exact mode) or Python
``complex`` numbers (numeric mode).  Scalars are never divided out; equality
is projective.
"""

from __future__ import annotations

import cmath
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import GraphError, Indeterminate, NoConvergence, NonUnit, NotDivisible, NotLoxodromic
from .graphs import SLOTS, HalfEdge, StableGraph, check_path, extend_tails, extension_loop
from .series import LocalizedScalar, SeriesRing, TruncatedSeries, as_coeff

log = logging.getLogger(__name__)


class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INF"

    __str__ = __repr__


#: The point at infinity, used as an ``alpha`` value.
INF = _Infinity()

SLOT_VALUES = {"0": Fraction(0), "1": Fraction(1), "inf": INF}


def _is_zero(c) -> bool:
    if isinstance(c, TruncatedSeries):
        return c.is_zero()
    if isinstance(c, complex):
        return c == 0
    return c == 0


# --------------------------------------------------------------------------
# Projective points and Moebius elements
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectivePoint:
    """Homogeneous pair ``[u : v]``; ``[1 : 0]`` is infinity."""

    u: object
    v: object

    def __post_init__(self):
        if _is_zero(self.u) and _is_zero(self.v):
            raise Indeterminate("[0 : 0] is not a point")

    def affine(self):
        """``u / v`` (numbers or series); ``INF`` when ``v`` vanishes."""
        if _is_zero(self.v):
            return INF
        if isinstance(self.v, TruncatedSeries):
            return _divide(self.u, self.v)
        return self.u / self.v

    def same_as(self, other: "ProjectivePoint", tol: float = 0.0) -> bool:
        d = self.u * other.v - other.u * self.v
        if isinstance(d, TruncatedSeries):
            return d.is_zero()
        scale = max(abs(self.u) + abs(self.v), 1e-300) * max(abs(other.u) + abs(other.v), 1e-300)
        return abs(d) <= tol * scale


def _divide(a, b):
    """``a / b`` for series where ``b`` is a monomial times a unit."""
    if isinstance(b, TruncatedSeries):
        m, unit = b.split_monomial_unit()
        if not isinstance(a, TruncatedSeries):
            a = TruncatedSeries.constant(b.variables, b.order, a)
        return a.monomial_ratio(m) * unit.invert()
    return a / b


@dataclass(frozen=True)
class Moebius:
    """``[[a, b], [c, d]]`` acting by ``z -> (a z + b) / (c z + d)``."""

    a: object
    b: object
    c: object
    d: object

    def __matmul__(self, o: "Moebius") -> "Moebius":
        return Moebius(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def det(self):
        return self.a * self.d - self.b * self.c

    def trace(self):
        return self.a + self.d

    def adjugate(self) -> "Moebius":
        """Projective inverse."""
        return Moebius(self.d, -self.b, -self.c, self.a)

    inverse = adjugate

    def __call__(self, p: ProjectivePoint) -> ProjectivePoint:
        return ProjectivePoint(self.a * p.u + self.b * p.v, self.c * p.u + self.d * p.v)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def projectively_equal(self, other: "Moebius", tol: float = 0.0) -> bool:
        """All 2x2 minors of the stacked entry vectors vanish."""
        x, y = self.entries(), other.entries()
        for i in range(4):
            for j in range(i + 1, 4):
                m = x[i] * y[j] - x[j] * y[i]
                if isinstance(m, TruncatedSeries):
                    if not m.is_zero():
                        return False
                else:
                    scale = max(max(abs(t) for t in x), 1e-300) * max(max(abs(t) for t in y), 1e-300)
                    if abs(m) > tol * scale:
                        return False
        return True

    def is_scalar(self, tol: float = 0.0) -> bool:
        one = _one_like(self.a)
        zero = one - one
        return self.projectively_equal(Moebius(one, zero, zero, one), tol)

    def map(self, f) -> "Moebius":
        return Moebius(*(f(t) for t in self.entries()))


def _one_like(t):
    if isinstance(t, TruncatedSeries):
        return TruncatedSeries.constant(t.variables, t.order, 1)
    if isinstance(t, complex):
        return complex(1)
    return Fraction(1)


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------


@dataclass
class SchottkyConfig:
    """Oriented tailless graph with fixed points ``alpha`` and parameters ``q``.

    ``alpha[h]`` is a ring element or :data:`INF`; ``q[e]`` is a ring
    element.  ``ring`` is a :class:`SeriesRing` in exact mode and ``None``
    in numeric mode (all values complex).  ``marked`` maps tail labels of
    the original pointed graph to their marked points.
    """

    graph: StableGraph
    alpha: Mapping[HalfEdge, object]
    q: Mapping[str, object]
    ring: SeriesRing | None = None
    marked: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.graph.tails:
            raise GraphError("Schottky configurations need a tailless graph; use extend_tails")
        self.alpha = {h: self._lift(v) for h, v in self.alpha.items()}
        self.q = {e: self._lift(v) for e, v in self.q.items()}
        self.validate()

    @property
    def numeric(self) -> bool:
        return self.ring is None

    def _lift(self, v):
        if v is INF:
            return INF
        if self.ring is None:
            if isinstance(v, TruncatedSeries):
                raise GraphError("numeric configuration got a series value")
            return complex(v.constant() if isinstance(v, LocalizedScalar) else v)
        if isinstance(v, TruncatedSeries):
            if v.variables != self.ring.variables:
                raise GraphError("value lives in a different ring")
            return v
        return self.ring(v)

    def infinite_half_edges(self) -> list:
        return [h for h, a in self.alpha.items() if a is INF]

    def validate(self):
        hs = self.graph.half_edges(include_tails=False)
        missing = [str(h) for h in hs if h not in self.alpha]
        if missing:
            raise GraphError(f"alpha missing for {missing}")
        if set(self.q) != set(self.graph.edges):
            raise GraphError("q must be given for every edge")
        inf = set(self.infinite_half_edges())
        for h in inf:
            if -h in inf:
                raise GraphError(f"both {h} and {-h} are at infinity")
        seen = {}
        for h in inf:
            v = self.graph.terminal(h)
            if v in seen:
                raise GraphError(f"{seen[v]} and {h} both at infinity on vertex {v}")
            seen[v] = h
        for h in hs:
            if self._same_point(self.alpha[h], self.alpha[-h]):
                raise GraphError(f"alpha_{h} equals alpha_{-h}")
        for v in self.graph.vertices:
            br = [h for h in self.graph.branches(v) if not h.is_tail]
            for i, h in enumerate(br):
                for k in br[i + 1 :]:
                    if self._same_point(self.alpha[h], self.alpha[k]):
                        raise GraphError(f"alpha_{h} equals alpha_{k} on vertex {v}")
        return True

    @staticmethod
    def _same_point(a, b) -> bool:
        if a is INF or b is INF:
            return a is b
        d = a - b
        if isinstance(d, TruncatedSeries):
            return d.is_zero()
        return d == 0

    def point(self, h: HalfEdge) -> ProjectivePoint:
        a = self.alpha[h]
        one = self.one()
        if a is INF:
            return ProjectivePoint(one, one - one)
        return ProjectivePoint(a, one)

    def one(self):
        return complex(1) if self.ring is None else self.ring.one()

    def specialize(self, values: Mapping) -> "SchottkyConfig":
        """Numeric configuration obtained by evaluating every variable."""
        if self.ring is None:
            return self

        def ev(t):
            if t is INF:
                return INF
            r = t.substitute(values)
            return complex(r.constant_term() if isinstance(r, TruncatedSeries) else r)

        return SchottkyConfig(
            self.graph,
            {h: ev(a) for h, a in self.alpha.items()},
            {e: ev(q) for e, q in self.q.items()},
            None,
            {t: ev(a) for t, a in self.marked.items()},
        )


def q_name(e: str) -> str:
    return f"q_{e}"


def generic_config(graph: StableGraph, alpha: Mapping, order: int, extra=()) -> SchottkyConfig:
    """Exact configuration with one variable ``q_e`` per edge."""
    ring = SeriesRing([q_name(e) for e in graph.edges] + list(extra), order)
    return SchottkyConfig(graph, alpha, {e: ring.gen(q_name(e)) for e in graph.edges}, ring)


def alpha_from_rigidification(rigid: Mapping, overrides: Mapping | None = None) -> dict:
    """``alpha`` read off the slot table: slot 0, 1, inf give 0, 1, infinity."""
    alpha = {}
    for v, tau in rigid.items():
        for slot, h in tau.items():
            alpha[HalfEdge(h.label, h.sign)] = SLOT_VALUES[slot]
    alpha.update(overrides or {})
    return alpha


def free_positions(graph: StableGraph, alpha: Mapping) -> dict:
    """Distinct points ``-1, 2, -2, 3, ...`` for half-edges missing from ``alpha``.

    Half-edges beyond the three rigidified ones at a vertex of valence four
    or more are genuine moduli; these fixed rational values keep reports
    reproducible.
    """
    taken = {p for p in alpha.values() if isinstance(p, (int, Fraction))}
    points = (Fraction(p) for n in itertools.count(1) for p in (n, -n) if p not in taken and p != 1)
    return {h: next(points) for h in graph.half_edges(include_tails=False) if h not in alpha}


def pointed_config(graph: StableGraph, order: int, alpha_overrides=None, ring=None, q=None) -> SchottkyConfig:
    """Configuration for a pointed graph via the tail extension.

    The deformation parameters of the added bridge and loop are fixed to 0
    so that the extension vertices collapse to marked points.  ``graph``
    must carry a rigidification; half-edges it leaves free get
    :func:`free_positions`.
    """
    if graph.rigid is None:
        raise GraphError("pointed_config needs a rigidified graph")
    ext = extend_tails(graph)
    alpha = alpha_from_rigidification(ext.rigid, alpha_overrides)
    free = free_positions(ext, alpha)
    if free:
        log.info("free half-edge positions %s", {str(h): str(p) for h, p in free.items()})
        alpha.update(free)
    if ring is None:
        ring = SeriesRing([q_name(e) for e in graph.edges], order)
    qs = dict(q or {})
    for e in graph.edges:
        if e not in qs:
            qs[e] = ring.gen(q_name(e))
    for t in graph.tails:
        qs[t] = ring.zero()
        qs[extension_loop(t)] = ring.zero()
    marked = {t: alpha[HalfEdge(t, 1)] for t in graph.tails}
    return SchottkyConfig(ext, alpha, qs, ring, marked)


# --------------------------------------------------------------------------
# Generators and words
# --------------------------------------------------------------------------


def phi(cfg: SchottkyConfig, h: HalfEdge) -> Moebius:
    """Generator attached to the half-edge ``h`` (unnormalised)."""
    if h.is_tail:
        raise GraphError("tails carry no generator")
    q = cfg.q[h.label]
    one = cfg.one()
    a, b = cfg.alpha[h], cfg.alpha[-h]
    if a is INF:
        return Moebius(one, -b * (one - q), one - one, q)
    if b is INF:
        return Moebius(q, a * (one - q), one - one, one)
    return Moebius(a - b * q, -(a * b) * (one - q), one - q, -b + a * q)


def identity(cfg: SchottkyConfig) -> Moebius:
    one = cfg.one()
    return Moebius(one, one - one, one - one, one)


def path_element(cfg: SchottkyConfig, path: Sequence[HalfEdge]) -> Moebius:
    """``phi_{h(l)} ... phi_{h(1)}`` for a reduced path ``h(1) ... h(l)``."""
    path = tuple(path)
    check_path(cfg.graph, path)
    g = identity(cfg)
    for h in path:
        g = phi(cfg, h) @ g
    return g


# --------------------------------------------------------------------------
# Multipliers and fixed points
# --------------------------------------------------------------------------


def _ratio_det_trace2(g: Moebius):
    det, tr = g.det(), g.trace()
    tr2 = tr * tr
    try:
        m, unit = tr2.split_monomial_unit()
    except NonUnit as exc:
        raise NotLoxodromic(f"trace squared is not a monomial times a unit: {exc}") from exc
    try:
        num = det.monomial_ratio(m)
    except NotDivisible as exc:
        raise NotLoxodromic("determinant not divisible by the trace monomial") from exc
    return num * unit.invert()


def multiplier(g: Moebius):
    """Eigenvalue ratio ``lambda`` lying in the deformation ideal.

    Solves ``lambda = r (1 + lambda)^2`` with ``r = det / trace^2`` by
    fixed-point iteration; in numeric mode the smaller-modulus ratio.
    """
    if not isinstance(g.a, TruncatedSeries):
        tr, det = g.trace(), g.det()
        disc = cmath.sqrt(tr * tr - 4 * det)
        m1, m2 = (tr + disc) / 2, (tr - disc) / 2
        if abs(m1) < abs(m2):
            m1, m2 = m2, m1
        if m1 == 0 or abs(abs(m2) - abs(m1)) <= 1e-14 * abs(m1):
            raise NotLoxodromic("eigenvalues have equal modulus")
        return m2 / m1
    r = _ratio_det_trace2(g)
    if r.constant_term() != 0:
        raise NotLoxodromic("det/trace^2 has a non-zero constant term")
    lam = r * 0
    for _ in range(r.order + 1):
        new = r * (1 + lam) ** 2
        if new == lam:
            break
        lam = new
    return lam


def _normalise(p: ProjectivePoint, at_infinity: bool) -> ProjectivePoint:
    """Rescale so the coordinate that should be a unit becomes 1."""
    u, v = p.u, p.v
    if not isinstance(u, TruncatedSeries):
        if at_infinity:
            return ProjectivePoint(complex(1), v / u) if u != 0 else p
        return ProjectivePoint(u / v, complex(1)) if v != 0 else p
    key = u if at_infinity else v
    try:
        m, unit = key.split_monomial_unit()
        u2, v2 = u.monomial_ratio(m), v.monomial_ratio(m)
    except (NonUnit, NotDivisible):
        return p
    inv = unit.invert()
    return ProjectivePoint(u2 * inv, v2 * inv)


def default_seed(cfg: SchottkyConfig, path: Sequence[HalfEdge]) -> HalfEdge:
    """Least half-edge ``h != -h(1)`` ending at the start of ``h(1)``."""
    first = path[0]
    start = cfg.graph.start(first)
    for h in cfg.graph.half_edges(include_tails=False):
        if cfg.graph.terminal(h) == start and h != -first:
            return h
    raise NoConvergence("no admissible seed")


def cyclic_core(path: Sequence[HalfEdge]) -> tuple:
    """Split ``path = p . core . p^-1`` with ``core`` cyclically reduced."""
    path = tuple(path)
    k = 0
    while 2 * k + 2 <= len(path) - 1 and path[k] == -path[len(path) - 1 - k]:
        k += 1
    return path[:k], path[k:len(path) - k]


def attractive_fixed_point(cfg: SchottkyConfig, path: Sequence[HalfEdge], seed: HalfEdge | ProjectivePoint | None = None,
                           max_iter: int | None = None, tol: float = 1e-14) -> ProjectivePoint:
    """Attractive fixed point of ``path_element(cfg, path)`` by iteration.

    A conjugating prefix is split off first: the fixed point of
    ``p . core . p^-1`` is the image of that of ``core`` under the element
    of ``p^-1``, which stays well defined when some parameters are 0.  The
    seed defaults to ``alpha_h`` for :func:`default_seed` of the core.  The
    result is normalised in the chart of the last half-edge of ``path``,
    near whose ``alpha`` the fixed point lies.
    """
    from .graphs import invert_path

    path = tuple(path)
    check_path(cfg.graph, path)
    prefix, core = cyclic_core(path)
    at_inf = cfg.alpha[path[-1]] is INF
    core_inf = cfg.alpha[core[-1]] is INF
    g = path_element(cfg, core)
    if seed is None or prefix:
        seed = default_seed(cfg, core)
    z = cfg.point(seed) if isinstance(seed, HalfEdge) else seed
    if cfg.numeric:
        limit = max_iter or 500
        for _ in range(limit):
            w = _normalise(g(z), core_inf)
            if w.same_as(z, tol):
                break
            z = w
        else:
            raise NoConvergence(f"no convergence after {limit} iterations")
    else:
        limit = max_iter or cfg.ring.order + 3
        for _ in range(limit):
            w = _normalise(g(z), core_inf)
            if w.same_as(z):
                break
            z = w
        else:
            raise NoConvergence(f"iteration did not stabilise within {limit} steps (inadmissible seed?)")
    if prefix:
        w = _normalise(path_element(cfg, invert_path(prefix))(w), at_inf)
    return w


def repelling_fixed_point(cfg: SchottkyConfig, path: Sequence[HalfEdge]) -> ProjectivePoint:
    from .graphs import invert_path

    return attractive_fixed_point(cfg, invert_path(path))


def cross_ratio(a: ProjectivePoint, b: ProjectivePoint, c: ProjectivePoint, d: ProjectivePoint):
    """``(a-c)(b-d) / ((a-d)(b-c))`` computed homogeneously; ``INF`` on a pole."""

    def w(p, r):
        return p.u * r.v - r.u * p.v

    num = w(a, c) * w(b, d)
    den = w(a, d) * w(b, c)
    if _is_zero(den):
        if _is_zero(num):
            raise Indeterminate("cross ratio is 0/0")
        return INF
    if isinstance(den, TruncatedSeries):
        return _divide(num, den)
    return num / den


# --------------------------------------------------------------------------
# Closed fibre
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedFiber:
    """Lines ``P_v`` with their special points and the gluing pairs."""

    points: Mapping[str, list]  # vertex -> [(label, value)]
    gluings: list  # (edge, (v_e, alpha_e), (v_-e, alpha_-e))

    def dual_graph(self) -> StableGraph:
        verts = list(self.points)
        edges, tails = {}, {}
        for e, (ve, _), (vme, _) in self.gluings:
            edges[e] = (vme, ve)
        i = 1
        for v, pts in self.points.items():
            for label, _ in pts:
                if label.startswith("marked:"):
                    tails[label[7:]] = (v, i)
                    i += 1
        return StableGraph(verts, edges, tails)

    def __str__(self):
        lines = []
        for v, pts in self.points.items():
            body = ", ".join(f"{lab}={_fmt(val)}" for lab, val in pts)
            lines.append(f"P_{v}: {body}")
        for e, (ve, ae), (vme, ame) in self.gluings:
            lines.append(f"glue {e}: {_fmt(ae)} on P_{ve} ~ {_fmt(ame)} on P_{vme}")
        return "\n".join(lines)


def _fmt(val):
    from .series import format_scalar

    if val is INF:
        return "inf"
    if isinstance(val, TruncatedSeries):
        return format_scalar(val.constant_term())
    return format_scalar(val)


def _point_value(p: ProjectivePoint):
    u, v = p.u, p.v
    if isinstance(u, TruncatedSeries):
        u, v = u.constant_term(), v.constant_term()
    if v == 0:
        return INF
    return u / v


def closed_fiber(cfg: SchottkyConfig, original: StableGraph | None = None) -> ClosedFiber:
    """Degenerate curve at ``q = 0``.

    At ``q_e = 0`` the generator of ``e`` has rank one: its image is
    ``alpha_e`` and its kernel ``alpha_-e``, which are the glued points.
    When ``original`` (a pointed graph) is given, extension vertices are
    replaced by the marked points they carry.
    """
    zero_q = {e: (0 if cfg.numeric else cfg.ring.zero()) for e in cfg.q}
    degenerate = SchottkyConfig(cfg.graph, cfg.alpha, zero_q, cfg.ring)
    keep = set(original.vertices) if original is not None else set(cfg.graph.vertices)
    keep_edges = set(original.edges) if original is not None else set(cfg.graph.edges)
    points = {v: [] for v in cfg.graph.vertices if v in keep}
    gluings = []
    for e in cfg.graph.edges:
        if e not in keep_edges:
            continue
        h = HalfEdge(e, 1)
        m = phi(degenerate, h)
        image = _point_value(ProjectivePoint(m.a, m.c)) if not _is_zero(m.a) or not _is_zero(m.c) else _point_value(ProjectivePoint(m.b, m.d))
        kernel = _point_value(ProjectivePoint(-m.b, m.a)) if not _is_zero(m.a) or not _is_zero(m.b) else _point_value(ProjectivePoint(-m.d, m.c))
        ve, vme = cfg.graph.terminal(h), cfg.graph.start(h)
        points[ve].append((str(h), image))
        points[vme].append((str(-h), kernel))
        gluings.append((e, (ve, image), (vme, kernel)))
    if original is not None:
        for t in original.tails:
            points[original.tails[t][0]].append((f"marked:{t}", _point_value(cfg.point(HalfEdge(t, 1)))))
    return ClosedFiber(points, gluings)


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


def word_report(cfg: SchottkyConfig, paths) -> list:
    """``(path, multiplier, fixed point)`` records for closed paths."""
    out = []
    for p in paths:
        g = path_element(cfg, p)
        try:
            lam = multiplier(g)
        except NotLoxodromic as exc:
            lam = exc
        try:
            fix = attractive_fixed_point(cfg, p).affine()
        except (NoConvergence, Indeterminate, NonUnit) as exc:
            fix = exc
        out.append((tuple(p), lam, fix))
    return out


def numeric_config(graph: StableGraph, alpha: Mapping, q: Mapping) -> SchottkyConfig:
    return SchottkyConfig(graph, alpha, q, None)


__all__ = [
    "INF", "ProjectivePoint", "Moebius", "SchottkyConfig", "generic_config", "alpha_from_rigidification",
    "pointed_config", "phi", "identity", "path_element", "multiplier", "attractive_fixed_point",
    "repelling_fixed_point", "cross_ratio", "closed_fiber", "ClosedFiber", "word_report", "numeric_config",
    "default_seed", "SLOTS", "as_coeff",
]
