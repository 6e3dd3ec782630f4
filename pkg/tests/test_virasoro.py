"""Verma modules, the invariant form and the three-point functional."""

from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from schottkycft.errors import DegenerateModule, SchottkyCFTError
from schottkycft.virasoro import (
    ThreePoint,
    VermaVector,
    VirasoroParams,
    apply_L,
    check_nondegenerate,
    dual_basis,
    gram_determinant,
    gram_matrix,
    module,
    partitions,
    rho_chi,
    spectrum_bound,
    three_point,
)

from strategies import small_fractions
from virasoro_oracle import gram as oracle_gram

C, D = sympy.symbols("c Delta")


def to_sympy(v):
    return sympy.Rational(v.numerator, v.denominator)


def params(c="7/3", delta="2/5"):
    return VirasoroParams(c, delta)


def generic_params():
    return st.builds(VirasoroParams, small_fractions, small_fractions)


def basis_vectors(max_level):
    return st.integers(0, max_level).flatmap(lambda n: st.sampled_from(partitions(n))).map(VermaVector.basis)


# --------------------------------------------------------------------------
# Partitions
# --------------------------------------------------------------------------


@pytest.mark.parametrize("n", range(8))
def test_partition_counts(n):
    ps = partitions(n)
    assert len(ps) == int(sympy.partition(n))
    assert list(ps) == sorted(ps, reverse=True)
    assert all(sum(p) == n for p in ps)


def test_level_two_basis_order():
    assert partitions(2) == ((2,), (1, 1))


def test_vector_validation():
    with pytest.raises(SchottkyCFTError):
        VermaVector.basis((1, 2))
    with pytest.raises(SchottkyCFTError):
        VermaVector({(1,): 1, (2,): 1})
    assert VermaVector({(2,): 1}) - VermaVector({(2,): 1}) == VermaVector()


# --------------------------------------------------------------------------
# Gram matrices
# --------------------------------------------------------------------------


def test_level_two_gram_symbolic():
    expected = sympy.Matrix([[4 * D + C / 2, 6 * D], [6 * D, 8 * D ** 2 + 4 * D]])
    assert sympy.simplify(oracle_gram(partitions(2), C, D) - expected) == sympy.zeros(2)


@given(generic_params())
def test_level_two_gram_closed_form(p):
    c, d = p.c, p.delta
    assert gram_matrix(p, 2) == [[4 * d + c / 2, 6 * d], [6 * d, 8 * d * d + 4 * d]]


@pytest.mark.parametrize("level", range(1, 6))
@pytest.mark.parametrize("c, delta", [("7/3", "2/5"), ("-11/2", "3"), ("26", "-5/7")])
def test_gram_matches_brute_force(level, c, delta):
    p = params(c, delta)
    ours = sympy.Matrix([[to_sympy(v) for v in row] for row in gram_matrix(p, level)])
    assert ours == oracle_gram(partitions(level), to_sympy(p.c), to_sympy(p.delta))


@given(generic_params(), st.integers(1, 5))
def test_gram_symmetric(p, level):
    g = gram_matrix(p, level)
    assert all(g[i][j] == g[j][i] for i in range(len(g)) for j in range(len(g)))


# --------------------------------------------------------------------------
# Action
# --------------------------------------------------------------------------


@given(generic_params(), basis_vectors(4), st.integers(-3, 3), st.integers(-3, 3))
def test_bracket_consistency(p, v, m, n):
    lhs = apply_L(m, apply_L(n, v, p), p) - apply_L(n, apply_L(m, v, p), p)
    rhs = apply_L(m + n, v, p).scale(m - n)
    if m + n == 0:
        rhs = rhs + v.scale(p.c * Fraction(m ** 3 - m, 12))
    assert lhs == rhs


@given(generic_params(), st.integers(1, 5), st.data())
def test_adjointness(p, level, data):
    n = data.draw(st.integers(1, level))
    v = VermaVector.basis(data.draw(st.sampled_from(partitions(level))))
    w = VermaVector.basis(data.draw(st.sampled_from(partitions(level - n))))
    mod = module(p)
    assert mod.inner(apply_L(n, v, p), w) == mod.inner(v, apply_L(-n, w, p))


def test_l0_eigenvalue():
    p = params()
    for lam in partitions(4):
        v = VermaVector.basis(lam)
        assert apply_L(0, v, p) == v.scale(p.delta + 4)


def test_positive_modes_kill_highest_weight():
    p = params()
    for n in (1, 2, 3):
        assert apply_L(n, VermaVector.highest(), p).is_zero()


# --------------------------------------------------------------------------
# Degenerate modules
# --------------------------------------------------------------------------


@pytest.mark.parametrize("delta, level", [("1/16", 2), ("1/2", 2), ("0", 1)])
def test_ising_degenerate(delta, level):
    p = params("1/2", delta)
    with pytest.raises(DegenerateModule) as exc:
        check_nondegenerate(p, 3, edge="e")
    assert exc.value.level == level
    assert exc.value.edge == "e"
    assert gram_determinant(p, level) == 0


def _rational_roots(c, level):
    det = sympy.Poly(oracle_gram(partitions(level), c, D).det(), D)
    return sorted({r for r in sympy.roots(det, filter="Q")})


@pytest.mark.parametrize("c", [sympy.Rational(1, 2), sympy.Rational(-22, 5), sympy.Integer(25)])
def test_degenerate_exactly_at_determinant_roots(c):
    for level in (1, 2, 3):
        roots = _rational_roots(c, level)
        for r in roots:
            p = VirasoroParams(Fraction(str(c)), Fraction(str(r)))
            with pytest.raises(DegenerateModule):
                dual_basis(p, level)
        # generic shifts of the roots are nondegenerate
        for r in roots:
            p = VirasoroParams(Fraction(str(c)), Fraction(str(r)) + Fraction(1, 97))
            dual_basis(p, level)


@given(generic_params(), st.integers(1, 4))
def test_dual_basis_inverts_gram(p, level):
    if gram_determinant(p, level) == 0:
        with pytest.raises(DegenerateModule):
            dual_basis(p, level)
        return
    g, h = gram_matrix(p, level), dual_basis(p, level)
    n = len(g)
    for i in range(n):
        for j in range(n):
            assert sum(g[i][k] * h[k][j] for k in range(n)) == (1 if i == j else 0)


def test_numeric_gram_agrees_with_exact():
    p = params()
    exact = gram_matrix(p, 4)
    num = gram_matrix(p.numeric(), 4)
    for r1, r2 in zip(exact, num):
        for a, b in zip(r1, r2):
            assert abs(complex(a) - b) < 1e-9


def test_parametrisations():
    p = VirasoroParams.from_momentum(2, Fraction(1, 3))
    assert p.c == 25 and p.delta == 1 + Fraction(1, 9)
    assert p.delta >= spectrum_bound(p.c)
    q = VirasoroParams.from_alpha(1, 2)
    assert q.c == 25 and q.delta == 1


# --------------------------------------------------------------------------
# Three-point functional
# --------------------------------------------------------------------------

TRIPLE = (params("7/3", "2/5"), params("7/3", "1/3"), params("7/3", "-3/4"))


def tensors(max_level):
    lam = st.integers(0, max_level).flatmap(lambda n: st.sampled_from(partitions(n)))
    return st.tuples(lam, lam, lam)


@given(tensors(2), st.integers(-2, 2), st.integers(-2, 2))
def test_ward_invariance(key, a, b):
    f = ThreePoint(TRIPLE)
    image = rho_chi([(1, a, b)], {key: Fraction(1)}, TRIPLE)
    assert f.on_tensor(image) == 0


@given(tensors(3))
def test_strategies_agree(key):
    a = ThreePoint(TRIPLE, "zero-first").basis_value(key)
    b = ThreePoint(TRIPLE, "inf-first").basis_value(key)
    assert a == b


def test_three_point_normalisation_and_level_one():
    p1, p2, p3 = TRIPLE
    assert three_point(p1, p2, p3) == 1
    # L_{-1} at 0 against highest weights elsewhere: d3 + d2 - d1 from L_{-1} = d/dz
    assert three_point(p1, p2, p3, mu3=(1,)) == p3.delta + p2.delta - p1.delta


def test_three_point_rejects_mixed_central_charge():
    with pytest.raises(SchottkyCFTError):
        ThreePoint((params("1", "0"), params("2", "0"), params("1", "0")))
    with pytest.raises(SchottkyCFTError):
        ThreePoint(TRIPLE, "sideways")
