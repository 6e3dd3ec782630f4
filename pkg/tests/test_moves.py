"""Moves between pants decompositions and their action on blocks."""

import cmath
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from schottkycft.blocks import dumbbell_pants, four_point_block, four_point_pants, graph_block, pants_from_legs
from schottkycft.errors import MoveError
from schottkycft.graphs import is_isomorphic, theta
from schottkycft.moves import (
    RELATIONS,
    AnalyticContinuationRequired,
    Fusing,
    HalfDehn,
    MoveWord,
    Simple,
    TwistedBlock,
    compose,
    fusing_branches,
    fusing_state,
    half_dehn,
    parse_move,
    relation_word,
    returns_to_start,
)
from schottkycft.virasoro import VirasoroParams

C = Fraction(7, 3)
FIVE_TAILS = ["t1", "t2", "t3", "t4", "t5"]


def five_point():
    return pants_from_legs(["v1", "v2", "v3"],
                           {"v1": ["t1", "t2", "e1"], "v2": ["-e1", "t3", "e2"], "v3": ["-e2", "t4", "t5"]},
                           C, {k: Fraction(i + 1, 7) for i, k in enumerate(FIVE_TAILS + ["e1", "e2"])})


def splits(pants):
    """Per edge, the set of tails on its head side; an independent description of a genus-0 decomposition."""
    g = pants.graph
    out = set()
    for e, (u, w) in g.edges.items():
        side, frontier = {w}, [w]
        while frontier:
            x = frontier.pop()
            for f, (a, b) in g.edges.items():
                if f == e:
                    continue
                for y, z in ((a, b), (b, a)):
                    if y == x and z not in side:
                        side.add(z)
                        frontier.append(z)
        tails = frozenset(t for t, (v, _) in g.tails.items() if v in side)
        rest = frozenset(g.tails) - tails
        out.add(frozenset((tails, rest)))
    return out


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------


@pytest.mark.parametrize("token, move", [
    ("HD:a", HalfDehn("a")), ("F:e", Fusing("e", "13")), ("F:e:14", Fusing("e", "14")), ("S:a", Simple("a")),
])
def test_parse_round_trip(token, move):
    assert parse_move(token) == move
    assert parse_move(move.token()) == move


@pytest.mark.parametrize("token", ["HD", "HD:", "F:e:12", "X:a", "S:a:b", ""])
def test_parse_rejects(token):
    with pytest.raises(MoveError):
        parse_move(token)


def test_word_validation_reports_position():
    p = four_point_pants(C, 1, 2, 3, 4, 5)
    with pytest.raises(MoveError, match="move 2"):
        MoveWord.parse("HD:e HD:zz", p)
    with pytest.raises(MoveError, match="not a loop"):
        MoveWord.parse("S:e", p)


def test_empty_word():
    p = four_point_pants(C, 1, 2, 3, 4, 5)
    w = MoveWord.parse("", p)
    assert w.moves == () and w.final is p
    block = four_point_block(C, 1, 2, 3, 4, 5, 2)
    out = compose(w, block)
    assert isinstance(out, TwistedBlock)
    assert out.block.body == block.body and out.phase() == 1 and out.formal_phase() == "1"


# --------------------------------------------------------------------------
# Half-Dehn twists
# --------------------------------------------------------------------------


@pytest.mark.parametrize("delta", [Fraction(2, 5), Fraction(-7, 3), Fraction(1, 8)])
def test_double_half_twist_restores_body(delta):
    p = four_point_pants(C, 1, 2, 3, 4, delta)
    block = four_point_block(C, 1, 2, 3, 4, delta, 3)
    out = compose(MoveWord.parse("HD:e HD:e", p), block)
    assert out.block.body == block.body
    assert abs(out.phase() - cmath.exp(2j * cmath.pi * float(delta))) < 1e-12
    assert out.formal_phase() == "exp(i*pi*(2*Delta_e))"


def test_single_half_twist_flips_odd_terms():
    block = four_point_block(C, 1, 2, 3, 4, Fraction(2, 5), 3)
    tw = half_dehn(block, "e")
    assert tw.block.coefficients() == [c * (-1) ** k for k, c in enumerate(block.coefficients())]
    assert abs(tw.phase() - cmath.exp(1j * cmath.pi * 0.4)) < 1e-12


@given(st.integers(-6, 6), st.integers(0, 8))
def test_integer_weight_phase_is_sign(delta, n):
    block = four_point_block(C, 1, 2, 3, 4, delta if delta else 1, 1)
    tb = TwistedBlock(block)
    for _ in range(n):
        tb = half_dehn(tb, "e")
    d = delta if delta else 1
    assert abs(tb.phase() - (-1) ** (n * d)) < 1e-12


def test_half_twists_on_distinct_edges_commute():
    pants = dumbbell_pants(C, "2/5", "1/3", "3/7")
    block = graph_block(pants, 2)
    a = compose(MoveWord.parse("HD:a HD:b HD:c HD:a", pants), block)
    b = compose(MoveWord.parse("HD:c HD:a HD:a HD:b", pants), block)
    assert a.block.body == b.block.body
    assert a.twists == b.twists == {"a": 2, "b": 1, "c": 1}
    assert abs(a.phase() - b.phase()) < 1e-12


def test_half_twist_unknown_edge():
    with pytest.raises(MoveError):
        half_dehn(four_point_block(C, 1, 2, 3, 4, 5, 1), "zz")


# --------------------------------------------------------------------------
# Fusing
# --------------------------------------------------------------------------


def test_four_point_fusing_swaps_channels():
    p = four_point_pants(C, 1, 2, 3, 4, 5)
    assert splits(p) == {frozenset((frozenset({"t3", "t4"}), frozenset({"t1", "t2"})))}
    s13 = fusing_state(p, "e", "13", dictionary=False)
    s14 = fusing_state(p, "e", "14", dictionary=False)
    assert splits(s13.after) != splits(p) and splits(s14.after) != splits(p)
    assert splits(s13.after) != splits(s14.after)


def test_fusing_rejects_loops_and_bad_pairing():
    d = dumbbell_pants(C, "2/5", "1/3", "3/7")
    with pytest.raises(MoveError, match="loop"):
        fusing_branches(d, "a")
    with pytest.raises(MoveError):
        fusing_state(d, "c", "12")


def test_dumbbell_fusing_gives_theta_with_dictionary():
    d = dumbbell_pants(C, "2/5", "1/3", "3/7")
    s = fusing_state(d, "c")
    assert is_isomorphic(s.after.graph, theta())
    assert s.dictionary["x"] == ("x", "s_c", None)
    assert s.dictionary["1-x"] == ("1-x", None, "t_c")
    us = {k: v for k, v in s.dictionary.items() if k.startswith("u_")}
    assert {v[0] for v in us.values()} == {"y_a/(1-x)", "y_b/(1-x)"}
    for formula, before, after in us.values():
        edge = before.split("_", 1)[1]
        assert after == f"t_{edge}" and f"y_{edge}" in formula
    assert "fusing c" in s.table()


def test_fusing_keeps_weights_unless_given():
    p = four_point_pants(C, 1, 2, 3, 4, 5)
    assert fusing_state(p, "e", dictionary=False).after.internal["e"] == p.internal["e"]
    beta = VirasoroParams(C, 9)
    assert fusing_state(p, "e", beta=beta, dictionary=False).after.internal["e"] == beta


# --------------------------------------------------------------------------
# Relations
# --------------------------------------------------------------------------


def test_fusing_involution():
    p = four_point_pants(C, 1, 2, 3, 4, 5)
    w = relation_word("fusing-involution", p, e="e")
    assert returns_to_start(w) and splits(w.final) == splits(p)
    assert splits(w.states[1]) != splits(p)


def test_fusing_triangle():
    p = four_point_pants(C, 1, 2, 3, 4, 5)
    w = relation_word("fusing-triangle", p, e="e")
    seen = [splits(s) for s in w.states]
    assert seen[-1] == seen[0]
    assert len({frozenset(s) for s in seen[:-1]}) == 3


def test_pentagon():
    p = five_point()
    w = relation_word("pentagon", p, e1="e1", e2="e2")
    seen = [frozenset(splits(s)) for s in w.states]
    assert seen[-1] == seen[0]
    assert len(set(seen[:-1])) == 5
    assert returns_to_start(w)


def test_relation_errors():
    p = five_point()
    with pytest.raises(MoveError, match="unknown relation"):
        relation_word("hexagon", p)
    with pytest.raises(MoveError, match="needs edge"):
        relation_word("pentagon", p, e1="e1")
    assert set(RELATIONS) == {"fusing-involution", "fusing-triangle", "pentagon"}


@given(st.lists(st.sampled_from(["F:e1:13", "F:e1:14", "F:e2:13", "F:e2:14", "HD:e1", "HD:e2"]), max_size=6))
def test_prefix_monotonicity(tokens):
    # every prefix of a valid word is valid and visits the same decompositions
    p = five_point()
    full = MoveWord(tuple(tokens), p)
    for k in range(len(tokens) + 1):
        pre = MoveWord(tuple(tokens[:k]), p)
        assert [splits(s) for s in pre.states] == [splits(s) for s in full.states[:k + 1]]


# --------------------------------------------------------------------------
# Composition with blocks
# --------------------------------------------------------------------------


def test_compose_stops_at_fusing():
    delta = Fraction(2, 5)
    p = four_point_pants(C, 1, 2, 3, 4, delta)
    block = four_point_block(C, 1, 2, 3, 4, delta, 2)
    out = compose(MoveWord.parse("HD:e HD:e F:e:14 HD:e", p), block)
    assert isinstance(out, AnalyticContinuationRequired)
    assert out.position == 2 and out.move == Fusing("e", "14")
    assert out.partial.twists == {"e": 2}
    assert out.state is not None and out.state.branches[2].label == "t4"
    assert "fusing kernel" in str(out)


def test_compose_stops_at_simple_move():
    pants = dumbbell_pants(C, "2/5", "1/3", "3/7")
    block = graph_block(pants, 1)
    out = compose(MoveWord.parse("HD:c S:a", pants), block)
    assert isinstance(out, AnalyticContinuationRequired)
    assert out.state is None and out.position == 1 and "simple-move kernel" in str(out)


def test_compose_rejects_foreign_block():
    p = five_point()
    with pytest.raises(MoveError):
        compose(MoveWord.parse("HD:e1", p), four_point_block(C, 1, 2, 3, 4, 5, 1))


def test_dictionary_round_trip():
    # fusing back along the same pairing restores the coordinates' roles
    p = four_point_pants(C, 1, 2, 3, 4, 5)
    s1 = fusing_state(p, "e", "13")
    s2 = fusing_state(s1.after, "e", "13")
    assert splits(s2.after) == splits(p)
    assert s1.dictionary["x"][1] == s2.dictionary["x"][1] == "s_e"
    assert s1.dictionary["1-x"][2] == s2.dictionary["1-x"][2] == "t_e"
