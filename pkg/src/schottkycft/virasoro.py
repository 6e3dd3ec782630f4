"""Virasoro highest-weight modules, the invariant bilinear form and the
three-point functional on the sphere.

Vectors of the Verma module with highest-weight vector ``e`` are written in
the basis ``L_{-l1} L_{-l2} ... e`` indexed by partitions ``l1 >= l2 >= ...``.
Within a level, partitions are listed in reverse-lexicographic order, so at
level 2 the basis is ``(L_{-2} e, L_{-1}^2 e)``.

Scalars are exact rationals (:class:`fractions.Fraction`) or complex
numbers (numeric mode); the two may be mixed, giving complex results.

The three-point functional has its legs at ``inf, 1, 0`` with local
coordinates ``1/z, z - 1, z``; it is normalised to ``1`` on the three
highest-weight vectors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from sympy.utilities.iterables import partitions as _sympy_partitions

from . import linalg
from .errors import DegenerateModule, SchottkyCFTError

log = logging.getLogger(__name__)

Partition = tuple  # weakly decreasing positive integers


def scalar(v):
    """Coerce ``v`` to an exact rational or a complex number."""
    if isinstance(v, (Fraction, complex)):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return complex(v)
    if isinstance(v, str):
        return complex(v.replace("i", "j")) if ("j" in v or "i" in v) else Fraction(v)
    raise TypeError(f"unsupported scalar {v!r}")


# --------------------------------------------------------------------------
# Parameters
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class VirasoroParams:
    """Central charge and conformal weight of a highest-weight module."""

    c: object
    delta: object

    def __post_init__(self):
        object.__setattr__(self, "c", scalar(self.c))
        object.__setattr__(self, "delta", scalar(self.delta))

    @classmethod
    def from_alpha(cls, alpha, Q) -> "VirasoroParams":
        """Weight ``alpha (Q - alpha)`` and central charge ``1 + 6 Q^2``."""
        alpha, Q = scalar(alpha), scalar(Q)
        return cls(1 + 6 * Q * Q, alpha * (Q - alpha))

    @classmethod
    def from_momentum(cls, Q, p) -> "VirasoroParams":
        """``alpha = Q/2 + i p`` on the physical line; exact when ``Q, p`` are.

        The weight ``Q^2/4 + p^2`` is then real and at least ``(c - 1)/24``.
        """
        Q, p = scalar(Q), scalar(p)
        return cls(1 + 6 * Q * Q, Q * Q / 4 + p * p)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.c, Fraction) and isinstance(self.delta, Fraction)

    def with_delta(self, delta) -> "VirasoroParams":
        return VirasoroParams(self.c, delta)

    def numeric(self) -> "VirasoroParams":
        return VirasoroParams(complex(self.c), complex(self.delta))


def spectrum_bound(c) -> object:
    """Lower bound ``(c - 1)/24`` of weights on the physical line."""
    return (scalar(c) - 1) / 24


# --------------------------------------------------------------------------
# Partitions and vectors
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def partitions(level: int) -> tuple:
    """Partitions of ``level`` in reverse-lexicographic order."""
    if level < 0:
        return ()
    if level == 0:
        return ((),)
    out = []
    for p in _sympy_partitions(level):
        out.append(tuple(sorted((k for k, m in p.items() for _ in range(m)), reverse=True)))
    return tuple(sorted(out, reverse=True))


def check_partition(lam: Sequence[int]) -> Partition:
    lam = tuple(int(k) for k in lam)
    if any(k <= 0 for k in lam) or any(a < b for a, b in zip(lam, lam[1:])):
        raise SchottkyCFTError(f"{lam} is not a partition")
    return lam


class VermaVector:
    """Finite combination of basis vectors ``L_{-lam} e`` of one level."""

    __slots__ = ("level", "terms")

    def __init__(self, terms: Mapping | None = None, level: int | None = None):
        t = {}
        for lam, c in (terms or {}).items():
            lam = check_partition(lam)
            c = scalar(c)
            if c != 0:
                t[lam] = t.get(lam, 0) + c
                if t[lam] == 0:
                    del t[lam]
        levels = {sum(lam) for lam in t}
        if len(levels) > 1:
            raise SchottkyCFTError(f"mixed levels {sorted(levels)} in one vector")
        if levels:
            lv = levels.pop()
            if level is not None and level != lv:
                raise SchottkyCFTError(f"terms have level {lv}, not {level}")
            level = lv
        self.level = 0 if level is None else level
        self.terms = t

    @classmethod
    def basis(cls, lam: Sequence[int]) -> "VermaVector":
        lam = check_partition(lam)
        return cls({lam: 1})

    @classmethod
    def highest(cls) -> "VermaVector":
        return cls({(): 1})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "VermaVector") -> "VermaVector":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return VermaVector(t)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "VermaVector":
        c = scalar(c)
        return VermaVector({k: v * c for k, v in self.terms.items()}, self.level)

    def __eq__(self, other):
        return isinstance(other, VermaVector) and self.terms == other.terms and (
            self.level == other.level or not self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for lam in partitions(self.level):
            if lam in self.terms:
                word = "".join(f"L_{-k}" for k in lam) or "1"
                parts.append(f"({self.terms[lam]})*{word}.e")
        return " + ".join(parts)

    def coefficients(self) -> list:
        """Coefficient vector in the ordered basis of this level."""
        return [self.terms.get(lam, Fraction(0)) for lam in partitions(self.level)]


# --------------------------------------------------------------------------
# Action
# --------------------------------------------------------------------------


class VermaModule:
    """Memoised action of ``L_n`` on the Verma module of ``params``."""

    def __init__(self, params: VirasoroParams):
        self.params = params
        self._act = {}
        self._gram = {}
        self._dual = {}

    def act_basis(self, n: int, lam: Partition) -> dict:
        """``L_n L_{-lam} e`` as ``{partition: coefficient}``."""
        key = (n, lam)
        hit = self._act.get(key)
        if hit is not None:
            return hit
        res = self._compute(n, lam)
        self._act[key] = res
        return res

    def _compute(self, n: int, lam: Partition) -> dict:
        p = self.params
        level = sum(lam)
        if n == 0:
            return {lam: p.delta + level}
        if level - n < 0:
            return {}
        if not lam:
            return {(-n,): Fraction(1)}  # n < 0 here
        m, rest = lam[0], lam[1:]
        if n < 0 and -n >= m:
            return {(-n,) + lam: Fraction(1)}
        out = {}
        # L_n L_{-m} rest = L_{-m} L_n rest + [L_n, L_{-m}] rest
        for mu, c in self.act_basis(n, rest).items():
            for nu, d in self.act_basis(-m, mu).items():
                out[nu] = out.get(nu, 0) + c * d
        k = n + m
        for mu, c in self.act_basis(n - m, rest).items():
            out[mu] = out.get(mu, 0) + k * c
        if n == m:
            central = p.c * Fraction(n * (n * n - 1), 12)
            out[rest] = out.get(rest, 0) + central
        return {k_: v for k_, v in out.items() if v != 0}

    def apply(self, n: int, v: VermaVector) -> VermaVector:
        out = {}
        for lam, c in v.terms.items():
            for mu, d in self.act_basis(n, lam).items():
                out[mu] = out.get(mu, 0) + c * d
        return VermaVector(out, v.level - n)

    def inner(self, v: VermaVector, w: VermaVector):
        """Symmetric bilinear form with ``<L_n v, w> = <v, L_{-n} w>``."""
        if v.level != w.level:
            return Fraction(0)
        g = self.gram(v.level)
        basis = partitions(v.level)
        tot = Fraction(0)
        for i, a in enumerate(basis):
            if a in v.terms:
                for j, b in enumerate(basis):
                    if b in w.terms:
                        tot += v.terms[a] * g[i][j] * w.terms[b]
        return tot

    def gram(self, level: int) -> list:
        hit = self._gram.get(level)
        if hit is not None:
            return hit
        basis = partitions(level)
        rows = [[Fraction(0)] * len(basis) for _ in basis]
        for i, lam in enumerate(basis):
            for j, mu in enumerate(basis):
                if j < i:
                    rows[i][j] = rows[j][i]
                    continue
                # <L_{-lam} e, L_{-mu} e> = <e, L_{lam_k} ... L_{lam_1} L_{-mu} e>
                vec = {mu: Fraction(1)}
                for k in lam:
                    nxt = {}
                    for nu, c in vec.items():
                        for rho, d in self.act_basis(k, nu).items():
                            nxt[rho] = nxt.get(rho, 0) + c * d
                    vec = nxt
                rows[i][j] = vec.get((), Fraction(0))
        self._gram[level] = rows
        return rows

    def dual(self, level: int) -> list:
        """Inverse Gram matrix; raises :class:`DegenerateModule` if singular."""
        hit = self._dual.get(level)
        if hit is not None:
            return hit
        g = self.gram(level)
        what = f"Gram matrix at level {level} (c={self.params.c}, delta={self.params.delta})"
        if linalg.is_exact(g):
            inv = linalg.inverse(g, what)
        else:
            inv, cond = linalg.inverse(g, what)
            log.debug("level %d Gram condition number %.3g", level, cond)
        self._dual[level] = inv
        return inv


@lru_cache(maxsize=256)
def module(params: VirasoroParams) -> VermaModule:
    """Shared memoised module for ``params``."""
    return VermaModule(params)


def apply_L(n: int, v: VermaVector, params: VirasoroParams) -> VermaVector:
    """``L_n v`` in the Verma module of ``params``."""
    return module(params).apply(n, v)


def gram_matrix(params: VirasoroParams, level: int) -> list:
    """``<L_{-lam} e, L_{-mu} e>`` over the ordered basis of ``level``."""
    return [list(r) for r in module(params).gram(level)]


def gram_determinant(params: VirasoroParams, level: int):
    return linalg.determinant(module(params).gram(level))


def dual_basis(params: VirasoroParams, level: int) -> list:
    """Inverse Gram matrix: row ``l`` holds the coefficients of ``v_l^*``.

    Raises :class:`DegenerateModule` when the form is degenerate at
    ``level``, i.e. the Verma module is reducible there.
    """
    try:
        return [list(r) for r in module(params).dual(level)]
    except DegenerateModule as exc:
        raise DegenerateModule(str(exc), level=level) from None


def check_nondegenerate(params: VirasoroParams, max_level: int, edge: str | None = None) -> None:
    """Raise :class:`DegenerateModule` naming ``edge`` if any level is singular."""
    for n in range(1, max_level + 1):
        try:
            module(params).dual(n)
        except DegenerateModule as exc:
            raise DegenerateModule(str(exc), level=n, edge=edge) from None


# --------------------------------------------------------------------------
# Vector fields on the three-pointed sphere and the functional
# --------------------------------------------------------------------------

#: Leg positions; leg ``i`` carries the ``i``-th module.
LEGS = ("inf", "1", "0")


def _binom(top: int, j: int) -> Fraction:
    num = Fraction(1)
    for i in range(j):
        num *= Fraction(top - i, i + 1)
    return num


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def field_modes(terms: Iterable, leg: int, max_mode: int) -> dict:
    """Laurent modes at ``leg`` of ``sum s * z^a (z-1)^b d/dz``.

    Returns ``{k: chi_k}`` with ``chi = sum_k chi_k t^{k+1} d/dt`` in the
    local coordinate ``t`` of the leg, keeping ``k <= max_mode`` (higher
    modes annihilate the vectors involved).
    """
    out = {}

    def add(k, v):
        if k <= max_mode and v != 0:
            out[k] = out.get(k, 0) + v

    for s, a, b in terms:
        s = scalar(s)
        if leg == 2:  # t = z: (z-1)^b = (-1)^b (1-z)^b
            lo = a - 1
            for j in range(max(0, max_mode - lo) + 1):
                add(a + j - 1, s * _sign(b + j) * _binom(b, j))
        elif leg == 1:  # t = z - 1: z^a = (1+t)^a
            lo = b - 1
            for j in range(max(0, max_mode - lo) + 1):
                add(b + j - 1, s * _binom(a, j))
        elif leg == 0:  # t = 1/z, d/dz = -t^2 d/dt
            lo = 1 - a - b
            for j in range(max(0, max_mode - lo) + 1):
                add(1 - a - b + j, -s * _binom(b, j) * _sign(j))
        else:
            raise SchottkyCFTError(f"leg index {leg} out of range")
    return out


#: Vector field removing ``L_{-n}`` from each leg: ``[(s, a, b), ...]``.
def _reducer(leg: int, n: int) -> list:
    if leg == 2:  # at 0
        return [(1, 1 - n, 1)]
    if leg == 1:  # at 1
        return [(1, 1, 1 - n)]
    return [(-1, n, 1)]  # at infinity


TensorVector = dict  # {(lam1, lam2, lam3): coefficient}


def rho_chi(terms: Iterable, vector: Mapping, params: Sequence[VirasoroParams]) -> dict:
    """``rho_chi`` on a tensor of three basis combinations.

    ``chi = sum s z^a (z-1)^b d/dz``; the result is
    ``- sum_i sum_k chi_k^(i) (... L_k v_i ...)`` as a tensor vector.
    """
    terms = list(terms)
    mods = [module(p) for p in params]
    out = {}
    for key, coef in vector.items():
        for i in range(3):
            lam = key[i]
            for k, chi in field_modes(terms, i, sum(lam)).items():
                for mu, d in mods[i].act_basis(k, lam).items():
                    nk = key[:i] + (mu,) + key[i + 1:]
                    out[nk] = out.get(nk, 0) - chi * d * coef
    return {k: v for k, v in out.items() if v != 0}


class ThreePoint:
    """Invariant functional on three highest-weight modules, normalised to 1.

    ``strategy`` fixes which leg is reduced first by the Ward identities:
    ``"zero-first"`` works on the leg at ``0``, then ``1``, then ``inf``;
    ``"inf-first"`` uses the reverse order.  Both give the same values.
    """

    STRATEGIES = {"zero-first": (2, 1, 0), "inf-first": (0, 1, 2)}

    def __init__(self, params: Sequence[VirasoroParams], strategy: str = "zero-first"):
        if len(params) != 3:
            raise SchottkyCFTError("three modules are required")
        cs = {p.c for p in params}
        if len(cs) != 1:
            raise SchottkyCFTError("all legs must share the central charge")
        if strategy not in self.STRATEGIES:
            raise SchottkyCFTError(f"unknown strategy {strategy!r}")
        self.params = tuple(params)
        self.order = self.STRATEGIES[strategy]
        self.mods = [module(p) for p in self.params]
        self._cache = {((), (), ()): Fraction(1)}

    def basis_value(self, key: tuple):
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        leg = next(i for i in self.order if key[i])
        lam = key[leg]
        n, w = lam[0], lam[1:]
        base = key[:leg] + (w,) + key[leg + 1:]
        field = _reducer(leg, n)
        # sum_i sum_k chi_k^(i) F(... L_k v_i ...) = 0 on the tensor ``base``
        lead = None
        acc = 0
        for i in range(3):
            li = base[i]
            for k, chi in field_modes(field, i, sum(li)).items():
                if i == leg and k == -n:
                    lead = chi
                    continue
                for mu, d in self.mods[i].act_basis(k, li).items():
                    nk = base[:i] + (mu,) + base[i + 1:]
                    acc += chi * d * self.basis_value(nk)
        if lead is None:
            raise SchottkyCFTError("reduction field misses the leading mode")
        val = -acc / lead
        self._cache[key] = val
        return val

    def __call__(self, v1, v2, v3):
        vs = [v if isinstance(v, VermaVector) else VermaVector.basis(v) for v in (v1, v2, v3)]
        tot = Fraction(0)
        for a, ca in vs[0].terms.items():
            for b, cb in vs[1].terms.items():
                for c_, cc in vs[2].terms.items():
                    tot += ca * cb * cc * self.basis_value((a, b, c_))
        return tot

    def on_tensor(self, vector: Mapping):
        return sum((c * self.basis_value(k) for k, c in vector.items()), Fraction(0))


@lru_cache(maxsize=256)
def _three_point(params: tuple, strategy: str) -> ThreePoint:
    return ThreePoint(params, strategy)


def three_point(p1: VirasoroParams, p2: VirasoroParams, p3: VirasoroParams,
                mu1: Sequence[int] = (), mu2: Sequence[int] = (), mu3: Sequence[int] = (),
                strategy: str = "zero-first"):
    """Value on ``L_{-mu1} e1 (x) L_{-mu2} e2 (x) L_{-mu3} e3``, legs at ``inf, 1, 0``."""
    f = _three_point((p1, p2, p3), strategy)
    return f.basis_value((check_partition(mu1), check_partition(mu2), check_partition(mu3)))


def three_point_functional(params: Sequence[VirasoroParams], strategy: str = "zero-first") -> ThreePoint:
    return _three_point(tuple(params), strategy)
