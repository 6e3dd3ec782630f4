"""Configurations and independent checks shared by the Schottky tests."""

import random
from fractions import Fraction
from math import isqrt

from schottkycft.graphs import HalfEdge, build_graph, dumbbell, find_rigidification, he, theta, two_loops
from schottkycft.schottky import (INF, ProjectivePoint, generic_config, phi, pointed_config)
from schottkycft.series import LocalizedScalar, TruncatedSeries


def configurations(order=4):
    """Five configurations, three of them with a fixed point at infinity."""
    out = {}
    a, b, c = he("a"), he("b"), he("c")
    out["two-loops, -a at inf"] = generic_config(two_loops(), {a: 0, -a: INF, b: 1, -b: -1}, order)
    out["theta, finite"] = generic_config(theta(), {a: 0, -a: 2, b: 1, -b: 3, c: 5, -c: Fraction(1, 2)}, order)
    out["dumbbell, c at inf"] = generic_config(dumbbell(), {a: 0, -a: 1, -c: INF, c: 0, b: 1, -b: -1}, order)
    out["four tails, extended"] = _four_tails(order)
    x = LocalizedScalar.x()
    out["two-loops, alpha = x"] = generic_config(two_loops(), {a: x, -a: 0, b: 1, -b: INF}, order)
    return out


def _four_tails(order):
    g = build_graph(["v1", "v2"], {"e": ("v2", "v1")}, {"t1": "v1", "t2": "v1", "t3": "v2", "t4": "v2"})
    return pointed_config(g.replace(rigid=find_rigidification(g)), order)


def _homog(cfg, h):
    p = cfg.point(h)
    return p.u, p.v


def _poly_mul(p, r):
    out = [None] * (len(p) + len(r) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(r):
            t = x * y
            out[i + j] = t if out[i + j] is None else out[i + j] + t
    return out


def functional_equation_holds(cfg, h: HalfEdge) -> bool:
    """``(phi(z) - a_h)(z - a_-h) = q_h (phi(z) - a_-h)(z - a_h)`` as polynomials in ``z``.

    Points are homogeneous, ``[p1 : p0]``, so the same identity covers a
    fixed point at infinity; ``phi(z) = (A z + B) / (C z + D)`` enters
    through its numerator and denominator.
    """
    m = phi(cfg, h)
    (ph1, ph0), (pm1, pm0) = _homog(cfg, h), _homog(cfg, -h)
    q = cfg.q[h.label]

    def diff(p1, p0):  # (A z + B) p0 - p1 (C z + D), coefficients of z^0, z^1
        return [m.b * p0 - p1 * m.d, m.a * p0 - p1 * m.c]

    def lin(p1, p0):  # z p0 - p1
        return [-p1, p0]

    lhs = _poly_mul(diff(ph1, ph0), lin(pm1, pm0))
    rhs = [q * t for t in _poly_mul(diff(pm1, pm0), lin(ph1, ph0))]
    return all((l - r).is_zero() for l, r in zip(lhs, rhs))


def half_edges(cfg):
    return cfg.graph.half_edges(include_tails=False)


def random_reduced_path(graph, rng: random.Random, length: int, start=None):
    """Reduced edge path of ``length`` steps from ``start`` (random when ``None``)."""
    hs = graph.half_edges(include_tails=False)
    v = start if start is not None else rng.choice(graph.vertices)
    path = []
    for _ in range(length):
        options = [h for h in hs if graph.start(h) == v and (not path or h != -path[-1])]
        h = rng.choice(options)
        path.append(h)
        v = graph.terminal(h)
    return tuple(path)


def random_cyclically_reduced(graph, rng: random.Random, length: int, attempts: int = 500):
    """Random cyclically reduced closed walk; the length grows if none is found."""
    while True:
        for _ in range(attempts):
            v = rng.choice(graph.vertices)
            p = random_reduced_path(graph, rng, length, v)
            if graph.terminal(p[-1]) == v and p[0] != -p[-1]:
                return p
        length += 1


def is_square_of_unit(c) -> bool:
    """``c = r^2 x^(2i) (1-x)^(2j)`` with ``r`` a nonzero rational."""
    if isinstance(c, LocalizedScalar):
        split = c.unit_split()
        if split is None:
            return False
        r, i, j = split
        if (i - c.a) % 2 or (j - c.b) % 2:
            return False
        c = r
    c = Fraction(c)
    if c <= 0:
        return False
    n, d = c.numerator, c.denominator
    return isqrt(n) ** 2 == n and isqrt(d) ** 2 == d


def q_monomial(cfg, path):
    exps = {}
    for h in path:
        exps[f"q_{h.label}"] = exps.get(f"q_{h.label}", 0) + 1
    return exps


__all__ = ["configurations", "functional_equation_holds", "half_edges", "random_reduced_path",
           "random_cyclically_reduced", "is_square_of_unit", "q_monomial", "ProjectivePoint", "TruncatedSeries"]


def reduced_words(generators, max_length: int) -> list:
    """All reduced words of length <= ``max_length``, the empty word first."""
    words, frontier = [()], [()]
    for _ in range(max_length):
        frontier = [w + (h,) for w in frontier for h in generators if not (w and h == -w[-1])]
        words += frontier
    return words
