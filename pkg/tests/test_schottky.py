import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from schottkycft.errors import Indeterminate, NoConvergence, NotComposable, NotLoxodromic, NotReduced
from schottkycft.graphs import build_graph, dumbbell, he, invert_path, two_loops
from schottkycft.schottky import (INF, Moebius, ProjectivePoint, SchottkyConfig, attractive_fixed_point,
                                  closed_fiber, cross_ratio, generic_config, identity, multiplier, numeric_config,
                                  path_element, phi, pointed_config, repelling_fixed_point)
from schottkycft.schottky import free_positions
from schottkycft.series import LocalizedScalar, SeriesRing

from schottky_cases import (configurations, functional_equation_holds, half_edges, is_square_of_unit, q_monomial,
                            random_cyclically_reduced, random_reduced_path)

A, B, C = he("a"), he("b"), he("c")


def two_loop_cfg(order=4):
    return generic_config(two_loops(), {A: 0, -A: INF, B: 1, -B: -1}, order)


# phi ----------------------------------------------------------------------

@pytest.mark.parametrize("name", list(configurations()))
def test_functional_equation(name):
    cfg = configurations()[name]
    assert all(functional_equation_holds(cfg, h) for h in half_edges(cfg))


def test_functional_equation_detects_a_wrong_matrix(monkeypatch):
    import schottky_cases

    cfg = two_loop_cfg()
    real = schottky_cases.phi
    monkeypatch.setattr(schottky_cases, "phi", lambda c, h: real(c, h).map(lambda t: t) @ real(c, h))
    assert not functional_equation_holds(cfg, B)


def test_q_one_gives_identity():
    cfg = generic_config(two_loops(), {A: 0, -A: INF, B: 1, -B: -1}, 3)
    one = cfg.ring.one()
    unit_q = SchottkyConfig(cfg.graph, cfg.alpha, {"a": one, "b": one}, cfg.ring)
    assert phi(unit_q, A).is_scalar() and phi(unit_q, B).is_scalar()


def test_phi_fixes_its_point():
    cfg = two_loop_cfg()
    for h in half_edges(cfg):
        assert phi(cfg, h)(cfg.point(h)).same_as(cfg.point(h))


def test_zero_infinity_limit_is_scaling():
    cfg = two_loop_cfg()
    q = cfg.q["a"]
    assert phi(cfg, A).projectively_equal(Moebius(q, q - q, q - q, cfg.ring.one()))


# path elements --------------------------------------------------------------

def test_single_edge_path():
    cfg = two_loop_cfg()
    assert path_element(cfg, (B,)).projectively_equal(phi(cfg, B))


def test_path_times_inverse_is_identity():
    cfg = two_loop_cfg()
    p = (A, B, B, -A)
    g = path_element(cfg, invert_path(p)) @ path_element(cfg, p)
    assert g.is_scalar()


def test_two_edge_path_is_reversed_product():
    cfg = two_loop_cfg()
    assert path_element(cfg, (A, B)).projectively_equal(phi(cfg, B) @ phi(cfg, A))


def test_unreduced_and_uncomposable_paths_raise():
    cfg = two_loop_cfg()
    with pytest.raises(NotReduced):
        path_element(cfg, (A, -A))
    db = generic_config(dumbbell(), {A: 0, -A: 1, -C: INF, C: 0, B: 1, -B: -1}, 2)
    with pytest.raises(NotComposable):
        path_element(db, (A, B))


@given(st.integers(0, 10 ** 6), st.sampled_from(list(configurations(3))))
def test_anti_homomorphism(seed, name):
    cfg = configurations(3)[name]
    rng = random.Random(seed)
    g = cfg.graph
    p = random_reduced_path(g, rng, rng.randint(1, 3))
    while True:
        s = random_reduced_path(g, rng, rng.randint(1, 3), g.terminal(p[-1]))
        if s[0] != -p[-1]:
            break
    assert path_element(cfg, p + s).projectively_equal(path_element(cfg, s) @ path_element(cfg, p))


def test_short_words_are_distinct():
    from schottky_cases import reduced_words

    cfg = two_loop_cfg()
    words = reduced_words([A, -A, B, -B], 3)
    els = [path_element(cfg, w) if w else identity(cfg) for w in words]
    for i in range(len(els)):
        for j in range(i + 1, len(els)):
            assert not els[i].projectively_equal(els[j]), (words[i], words[j])


# multipliers ----------------------------------------------------------------

def test_generator_multiplier_is_q():
    cfg = two_loop_cfg()
    assert multiplier(phi(cfg, A)) == cfg.q["a"]
    assert multiplier(phi(cfg, B)) == cfg.q["b"]


def test_identity_is_not_loxodromic():
    with pytest.raises(NotLoxodromic):
        multiplier(identity(two_loop_cfg()))


def test_multiplier_of_square():
    cfg = two_loop_cfg(6)
    g = path_element(cfg, (A, B))
    assert multiplier(g @ g) == multiplier(g) ** 2


@given(st.integers(0, 10 ** 6), st.sampled_from(["two-loops, -a at inf", "theta, finite", "two-loops, alpha = x"]))
def test_multiplier_is_monomial_times_square_unit(seed, name):
    rng = random.Random(seed)
    base = configurations(1)[name]
    w = random_cyclically_reduced(base.graph, rng, rng.randint(1, 3))
    cfg = configurations(3 + len(w))[name]
    ratio = multiplier(path_element(cfg, w)).monomial_ratio(q_monomial(cfg, w))
    assert ratio.is_unit() and is_square_of_unit(ratio.constant_term())


# fixed points ---------------------------------------------------------------

def test_generator_fixed_point_is_alpha():
    cfg = two_loop_cfg()
    for h in (A, B, -B):
        assert attractive_fixed_point(cfg, (h,)).same_as(cfg.point(h))


def test_inverse_gives_repelling_point():
    cfg = two_loop_cfg(5)
    w = (B, A, B)
    rep = repelling_fixed_point(cfg, w)
    assert rep.same_as(attractive_fixed_point(cfg, invert_path(w)))
    c = rep.affine().constant_term()
    assert c == -1  # alpha of the inverse of the last half-edge
    g = path_element(cfg, w)
    assert g(rep).same_as(rep)


def test_fixed_point_is_seed_independent():
    cfg = two_loop_cfg(5)
    w = (A, B, -A, B)
    seeds = [h for h in half_edges(cfg) if cfg.graph.terminal(h) == "v" and h != -w[0]]
    points = [attractive_fixed_point(cfg, w, seed=h) for h in seeds]
    for p in points[1:]:
        assert p.same_as(points[0])


def test_fixed_point_is_fixed_exactly():
    cfg = two_loop_cfg(4)
    w = (A, -B, A)
    p = attractive_fixed_point(cfg, w)
    assert path_element(cfg, w)(p).same_as(p)


def test_non_convergence_is_reported():
    cfg = two_loop_cfg(4)
    with pytest.raises(NoConvergence):
        attractive_fixed_point(cfg, (A, B), max_iter=1)


@given(st.integers(0, 10 ** 6))
def test_numeric_fixed_point_matches_eigenvector(seed):
    rng = random.Random(seed)
    alpha = {A: complex(0), -A: INF, B: complex(1), -B: complex(-1)}
    q = {"a": complex(rng.uniform(0.01, 0.1), rng.uniform(-0.05, 0.05)),
         "b": complex(rng.uniform(0.01, 0.1), rng.uniform(-0.05, 0.05))}
    cfg = numeric_config(two_loops(), alpha, q)
    w = random_cyclically_reduced(cfg.graph, rng, rng.randint(1, 4))
    g = path_element(cfg, w)
    m = np.array([[g.a, g.b], [g.c, g.d]], dtype=complex)
    vals, vecs = np.linalg.eig(m)
    top = vecs[:, int(np.argmax(abs(vals)))]
    p = attractive_fixed_point(cfg, w)
    assert p.same_as(ProjectivePoint(complex(top[0]), complex(top[1])), 1e-9)


def test_numeric_agrees_with_exact_specialisation():
    cfg = two_loop_cfg(8)
    vals = {"q_a": Fraction(1, 50), "q_b": Fraction(-1, 40)}
    num = cfg.specialize(vals)
    for w in [(A,), (A, B), (B, -A, B)]:
        exact = multiplier(path_element(cfg, w)).substitute(vals)
        approx = multiplier(path_element(num, w))
        # truncation error of an order-8 series at |q| <= 1/40 is far below the tolerance
        assert abs(complex(exact) - approx) < 1e-9


# cross ratios ---------------------------------------------------------------

def pt(v):
    return ProjectivePoint(Fraction(v), Fraction(1))


def test_cross_ratio_examples():
    assert cross_ratio(pt(2), pt(3), pt(2), pt(5)) == 0
    assert cross_ratio(pt(2), pt(3), pt(4), pt(5)) == Fraction(4, 3)
    R = SeriesRing(["q"], 2)
    x = R.x()
    val = cross_ratio(ProjectivePoint(R(0), R(1)), ProjectivePoint(R(1), R(1)), ProjectivePoint(x, R(1)),
                      ProjectivePoint(R(1), R(0)))
    X = LocalizedScalar.x()
    assert val == R(X / (X - 1))


def test_cross_ratio_indeterminate():
    with pytest.raises(Indeterminate):
        cross_ratio(pt(1), pt(1), pt(1), pt(1))


@given(st.lists(st.fractions(-9, 9, max_denominator=7), min_size=4, max_size=4, unique=True),
       st.tuples(*[st.integers(-3, 3)] * 4).filter(lambda m: m[0] * m[3] != m[1] * m[2]))
def test_cross_ratio_is_projectively_invariant(vals, m):
    g = Moebius(*map(Fraction, m))
    pts = [pt(v) for v in vals]
    assert cross_ratio(*pts) == cross_ratio(*(g(p) for p in pts))


# closed fibre ---------------------------------------------------------------

def test_one_loop_fibre():
    g = build_graph(["v"], {"e": ("v", "v")}, {})
    cfg = generic_config(g, {he("e"): 0, he("-e"): INF}, 2)
    fib = closed_fiber(cfg)
    assert fib.gluings == [("e", ("v", 0), ("v", INF))]


@pytest.mark.parametrize("name", list(configurations(2)))
def test_fibre_incidence_is_the_dual_graph(name):
    cfg = configurations(2)[name]
    fib = closed_fiber(cfg)
    dual = fib.dual_graph()
    assert {e: set(ends) for e, ends in dual.edges.items()} == {e: set(ends) for e, ends in cfg.graph.edges.items()}


def test_dumbbell_fibre():
    cfg = generic_config(dumbbell(), {A: 0, -A: 1, -C: INF, C: 0, B: 1, -B: -1}, 2)
    fib = closed_fiber(cfg)
    for v in ("v1", "v2"):
        labels = {lab.lstrip("-") for lab, _ in fib.points[v]}
        assert len(fib.points[v]) == 3 and "c" in labels
    self_glued = [e for e, (v1, _), (v2, _) in fib.gluings if v1 == v2]
    assert sorted(self_glued) == ["a", "b"]


# free positions ---------------------------------------------------------------

def test_free_positions_are_distinct_and_avoid_slots():
    free = free_positions(two_loops(), {})
    assert list(free.values()) == [-1, 2, -2, 3]
    assert free_positions(two_loops(), {A: -1, -A: 2}) == {B: -2, -B: 3}


def test_pointed_config_fills_free_half_edges():
    from schottkycft.graphs import find_rigidification

    g = two_loops()
    cfg = pointed_config(g.replace(rigid=find_rigidification(g)), 2)
    pts = [cfg.point(h) for h in half_edges(cfg)]
    assert all(not p.same_as(r) for i, p in enumerate(pts) for r in pts[i + 1:])
