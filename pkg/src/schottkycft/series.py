"""Exact truncated multivariate power series.

Coefficients live in one of three domains:

* exact rationals (``fractions.Fraction``);
* complex doubles (numeric specialisation only);
* :class:`LocalizedScalar`, i.e. elements of ``Q[x, 1/x, 1/(1-x)]``.

A :class:`TruncatedSeries` carries its *order* ``N``: every monomial of total
degree ``<= N`` is known exactly.  Products track precision the way p-adic
numbers do, so that dividing by a monomial (``monomial_ratio``) loses exactly
the degree of that monomial and nothing more::

    order(a * b) = min(N_a + val(b), N_b + val(a), max(N_a, N_b))

The last term is the ring-wide truncation; two series of order ``N`` multiply
to a series of order ``N``.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import NonUnit, NotDivisible, ParseError, SeriesError, VariableMismatch

logger = logging.getLogger(__name__)

#: Name of the distinguished coordinate housed in :class:`LocalizedScalar`.
X_NAME = "x"


def as_coeff(c):
    if isinstance(c, (Fraction, LocalizedScalar, complex)):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, float):
        return complex(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


def _is_zero(c) -> bool:
    return c == 0


# --------------------------------------------------------------------------
# Localized scalars
# --------------------------------------------------------------------------


def _poly_trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_mul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return _poly_trim(out)


def _poly_add(p, q):
    n = max(len(p), len(q))
    out = [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]
    return _poly_trim(out)


def _one_minus_x_pow(k):
    out = [Fraction(1)]
    for _ in range(k):
        out = _poly_mul(out, [Fraction(1), Fraction(-1)])
    return out


def _div_one_minus_x(p):
    # p(1) == 0 assumed; returns q with p = (1 - x) q
    n = len(p) - 1
    q = [0] * n
    acc = 0
    for k in range(n, 0, -1):
        acc = acc + p[k]
        q[k - 1] = -acc
    return _poly_trim(q)


class LocalizedScalar:
    """``P(x) / (x**a * (1-x)**b)`` kept in reduced form.

    >>> x = LocalizedScalar.x()
    >>> (x / (x * (1 - x))) == 1 / (1 - x)
    True
    """

    __slots__ = ("num", "a", "b")

    def __init__(self, num: Sequence = (), a: int = 0, b: int = 0):
        if a < 0 or b < 0:
            raise SeriesError("denominator exponents must be non-negative")
        p = _poly_trim(as_coeff(c) for c in num)
        if not p:
            a = b = 0
        while a > 0 and p and p[0] == 0:
            p.pop(0)
            a -= 1
        while b > 0 and p and sum(p) == 0:
            p = _div_one_minus_x(p)
            b -= 1
        self.num = tuple(p)
        self.a = a
        self.b = b

    @classmethod
    def x(cls) -> "LocalizedScalar":
        return cls((0, 1))

    @classmethod
    def const(cls, c) -> "LocalizedScalar":
        return cls((as_coeff(c),))

    @staticmethod
    def coerce(c) -> "LocalizedScalar":
        if isinstance(c, LocalizedScalar):
            return c
        return LocalizedScalar((as_coeff(c),))

    # arithmetic -----------------------------------------------------------
    def _lift(self, A, B):
        p = list(self.num)
        if A > self.a:
            p = [Fraction(0)] * (A - self.a) + p
        if B > self.b:
            p = _poly_mul(p, _one_minus_x_pow(B - self.b))
        return p

    def __add__(self, other):
        try:
            other = LocalizedScalar.coerce(other)
        except TypeError:
            return NotImplemented
        A, B = max(self.a, other.a), max(self.b, other.b)
        return LocalizedScalar(_poly_add(self._lift(A, B), other._lift(A, B)), A, B)

    __radd__ = __add__

    def __neg__(self):
        return LocalizedScalar([-c for c in self.num], self.a, self.b)

    def __sub__(self, other):
        try:
            other = LocalizedScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return LocalizedScalar.coerce(other) - self

    def __mul__(self, other):
        try:
            other = LocalizedScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return LocalizedScalar(_poly_mul(self.num, other.num), self.a + other.a, self.b + other.b)

    __rmul__ = __mul__

    def unit_split(self):
        """Return ``(c, i, j)`` with ``num = c * x**i * (1-x)**j`` or ``None``."""
        p = list(self.num)
        if not p:
            return None
        i = 0
        while p[0] == 0:
            p.pop(0)
            i += 1
        j = 0
        while len(p) > 1 and sum(p) == 0:
            p = _div_one_minus_x(p)
            j += 1
        if len(p) != 1:
            return None
        return p[0], i, j

    def is_unit(self) -> bool:
        return self.unit_split() is not None

    def inverse(self) -> "LocalizedScalar":
        split = self.unit_split()
        if split is None:
            raise NonUnit(f"{self} is not a unit of Z[x, 1/x, 1/(1-x)]")
        c, i, j = split
        num = [Fraction(0)] * max(self.a - i, 0) + [1 / c]
        num = _poly_mul(num, _one_minus_x_pow(max(self.b - j, 0)))
        return LocalizedScalar(num, max(i - self.a, 0), max(j - self.b, 0))

    def __truediv__(self, other):
        return self * LocalizedScalar.coerce(other).inverse()

    def __rtruediv__(self, other):
        return LocalizedScalar.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = LocalizedScalar.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            other = LocalizedScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return (self.num, self.a, self.b) == (other.num, other.a, other.b)

    def __hash__(self):
        if self.a == 0 and self.b == 0 and len(self.num) <= 1:
            return hash(self.num[0] if self.num else 0)
        return hash((self.num, self.a, self.b))

    def __bool__(self):
        return bool(self.num)

    # inspection -----------------------------------------------------------
    def is_constant(self) -> bool:
        return self.a == 0 and self.b == 0 and len(self.num) <= 1

    def constant(self):
        if not self.is_constant():
            raise SeriesError(f"{self} depends on x")
        return self.num[0] if self.num else Fraction(0)

    def evaluate(self, value):
        num = sum((c * value**k for k, c in enumerate(self.num)), Fraction(0))
        den = value**self.a * (1 - value) ** self.b
        if den == 0:
            raise ZeroDivisionError(f"{self} has a pole at x = {value}")
        return num / den

    def x_terms(self):
        """Yield ``(coeff, k)`` with ``self = sum coeff * x**k / (1-x)**b``."""
        for k, c in enumerate(self.num):
            if c != 0:
                yield c, k - self.a

    def __repr__(self):
        return f"LocalizedScalar({format_scalar(self)})"

    def __str__(self):
        return format_scalar(self)


def format_number(c) -> str:
    if isinstance(c, complex):
        return f"({c.real!r}{'+' if c.imag >= 0 else ''}{c.imag!r}j)"
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def format_scalar(c) -> str:
    if not isinstance(c, LocalizedScalar):
        return format_number(c)
    if c.is_constant():
        return format_number(c.constant())
    parts = []
    for coeff, k in c.x_terms():
        s = format_number(coeff)
        if k:
            s += f"*x^{k}"
        parts.append(s)
    out = " + ".join(parts) if parts else "0"
    if c.b:
        out = f"({out})*(1-x)^{{-{c.b}}}"
    return out


def _scalar_inverse(c):
    if isinstance(c, LocalizedScalar):
        if c.is_constant():
            v = c.constant()
            if v == 0:
                raise NonUnit("zero constant term")
            return LocalizedScalar.const(1 / v)
        return c.inverse()
    if c == 0:
        raise NonUnit("zero constant term")
    if isinstance(c, Fraction) and abs(c) != 1:
        logger.debug("rational fallback: inverting %s outside Z^x", c)
    return 1 / c


# --------------------------------------------------------------------------
# Truncated series
# --------------------------------------------------------------------------


def _deg(e):
    return sum(e)


class TruncatedSeries:
    """Element of ``K[[v_1, ..., v_k]]`` known up to total degree ``order``.

    Values are immutable; all arithmetic returns new objects.
    """

    __slots__ = ("variables", "order", "terms")

    def __init__(self, variables: Sequence[str], order: int, terms: Mapping | None = None):
        self.variables = tuple(variables)
        self.order = int(order)
        out = {}
        if terms:
            k = len(self.variables)
            for e, c in terms.items():
                e = tuple(e)
                if len(e) != k:
                    raise VariableMismatch(f"exponent {e} does not match {self.variables}")
                if sum(e) > self.order:
                    continue
                c = as_coeff(c)
                if c != 0:
                    out[e] = c
        self.terms = out

    @classmethod
    def _raw(cls, variables, order, terms):
        obj = object.__new__(cls)
        obj.variables = variables
        obj.order = order
        obj.terms = terms
        return obj

    # constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, variables, order, c):
        return cls(variables, order, {(0,) * len(variables): c})

    @classmethod
    def variable(cls, variables, order, name):
        variables = tuple(variables)
        if name not in variables:
            raise VariableMismatch(f"unknown variable {name!r}")
        e = tuple(1 if v == name else 0 for v in variables)
        return cls(variables, order, {e: 1})

    def _like(self, terms, order=None):
        return TruncatedSeries._raw(self.variables, self.order if order is None else order, terms)

    # inspection -----------------------------------------------------------
    @property
    def zero_exponent(self):
        return (0,) * len(self.variables)

    def constant_term(self):
        return self.terms.get(self.zero_exponent, Fraction(0))

    def coefficient(self, exps) -> object:
        if isinstance(exps, Mapping):
            exps = self._exps_from_mapping(exps)
        return self.terms.get(tuple(exps), Fraction(0))

    def _exps_from_mapping(self, m):
        unknown = set(m) - set(self.variables)
        if unknown:
            raise VariableMismatch(f"unknown variables {sorted(unknown)}")
        return tuple(int(m.get(v, 0)) for v in self.variables)

    def valuation(self) -> int:
        if not self.terms:
            return self.order + 1
        return min(_deg(e) for e in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_unit(self) -> bool:
        c = self.constant_term()
        if c == 0:
            return False
        if isinstance(c, LocalizedScalar):
            return c.is_unit()
        return True

    def degree_part(self, d):
        return {e: c for e, c in self.terms.items() if _deg(e) == d}

    def leading_monomial(self):
        """The unique monomial of minimal degree, or ``None`` if it is not unique."""
        if not self.terms:
            return None
        v = self.valuation()
        low = [e for e in self.terms if _deg(e) == v]
        if len(low) != 1:
            return None
        return low[0]

    def split_monomial_unit(self):
        """Write ``self = m * u`` with ``m`` a monomial and ``u`` a unit.

        Returns ``(m, u)``; raises :class:`NonUnit` when impossible.
        """
        m = self.leading_monomial()
        if m is None:
            raise NonUnit(f"{self.short()} is not a monomial times a unit")
        u = self.monomial_ratio(m)
        if not u.is_unit():
            raise NonUnit(f"{self.short()} is not a monomial times a unit")
        return m, u

    def is_polynomial_coefficients(self) -> bool:
        return not any(isinstance(c, LocalizedScalar) and not c.is_constant() for c in self.terms.values())

    # arithmetic -----------------------------------------------------------
    def _check(self, other):
        if self.variables != other.variables:
            raise VariableMismatch(f"variables {self.variables} != {other.variables}")

    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        return TruncatedSeries.constant(self.variables, self.order, other)

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            try:
                c = as_coeff(other)
            except TypeError:
                return NotImplemented
            terms = dict(self.terms)
            z = self.zero_exponent
            v = terms.get(z, 0) + c
            if v == 0:
                terms.pop(z, None)
            else:
                terms[z] = v
            return self._like(terms)
        self._check(other)
        order = min(self.order, other.order)
        terms = {e: c for e, c in self.terms.items() if _deg(e) <= order}
        for e, c in other.terms.items():
            if _deg(e) > order:
                continue
            v = terms.get(e, 0) + c
            if v == 0:
                terms.pop(e, None)
            else:
                terms[e] = v
        return self._like(terms, order)

    __radd__ = __add__

    def __neg__(self):
        return self._like({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, TruncatedSeries):
            return self + (-other)
        try:
            return self + (-as_coeff(other))
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = as_coeff(c)
        if c == 0:
            return self._like({})
        terms = {}
        for e, v in self.terms.items():
            w = v * c
            if w != 0:
                terms[e] = w
        return self._like(terms)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        self._check(other)
        order = min(
            self.order + other.valuation(),
            other.order + self.valuation(),
            max(self.order, other.order),
        )
        if not self.terms or not other.terms:
            return self._like({}, order)
        by_deg_b = {}
        for e, c in other.terms.items():
            by_deg_b.setdefault(_deg(e), []).append((e, c))
        degs_b = sorted(by_deg_b)
        out = {}
        for ea, ca in self.terms.items():
            da = _deg(ea)
            for db in degs_b:
                if da + db > order:
                    break
                for eb, cb in by_deg_b[db]:
                    e = tuple(x + y for x, y in zip(ea, eb))
                    out[e] = out.get(e, 0) + ca * cb
        return self._like({e: c for e, c in out.items() if c != 0}, order)

    __rmul__ = __mul__

    def invert(self) -> "TruncatedSeries":
        """Multiplicative inverse up to the series' order.

        >>> R = SeriesRing(["q"], 3)
        >>> print((1 - R.gen("q")).invert())
        1 + q + q^2 + q^3  (order 3)
        """
        c0 = self.constant_term()
        if c0 == 0:
            raise NonUnit(f"{self.short()} has zero constant term")
        inv0 = _scalar_inverse(c0)
        r = self.scale(inv0) - 1
        result = TruncatedSeries.constant(self.variables, self.order, 1)
        power = result
        neg_r = -r
        for _ in range(self.order):
            power = power * neg_r
            if power.is_zero():
                break
            result = result + power
        return result.scale(inv0)

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.invert()
        return self.scale(_scalar_inverse(as_coeff(other)))

    def __rtruediv__(self, other):
        return self.invert().scale(as_coeff(other))

    def __pow__(self, n: int):
        if n < 0:
            return self.invert() ** (-n)
        result = TruncatedSeries.constant(self.variables, self.order, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def monomial_ratio(self, m) -> "TruncatedSeries":
        """Exact division by a monomial ``m`` (exponent tuple or name->exp map)."""
        if isinstance(m, Mapping):
            m = self._exps_from_mapping(m)
        m = tuple(m)
        if len(m) != len(self.variables):
            raise VariableMismatch(f"monomial {m} does not match {self.variables}")
        terms = {}
        for e, c in self.terms.items():
            q = tuple(a - b for a, b in zip(e, m))
            if min(q, default=0) < 0:
                raise NotDivisible(
                    f"term {format_monomial(c, e, self.variables)} is not divisible by "
                    f"{format_monomial(1, m, self.variables)}",
                    term=(e, c),
                )
            terms[q] = c
        return self._like(terms, self.order - _deg(m))

    def truncate(self, order: int) -> "TruncatedSeries":
        order = min(order, self.order)
        return self._like({e: c for e, c in self.terms.items() if _deg(e) <= order}, order)

    def log1p(self) -> "TruncatedSeries":
        """``log(1 + self)`` for ``self`` with zero constant term."""
        if self.constant_term() != 0:
            raise SeriesError("log1p needs a series with zero constant term")
        result = self._like({})
        power = TruncatedSeries.constant(self.variables, self.order, 1)
        for k in range(1, self.order + 1):
            power = power * self
            if power.is_zero():
                break
            result = result + power.scale(Fraction((-1) ** (k + 1), k))
        return result

    def exp(self) -> "TruncatedSeries":
        """``exp(self)`` for ``self`` with zero constant term."""
        if self.constant_term() != 0:
            raise SeriesError("exp needs a series with zero constant term")
        result = TruncatedSeries.constant(self.variables, self.order, 1)
        power = result
        for k in range(1, self.order + 1):
            power = power * self
            if power.is_zero():
                break
            result = result + power.scale(Fraction(1, math.factorial(k)))
        return result

    # comparison -----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, TruncatedSeries):
            if self.variables != other.variables:
                return False
            order = min(self.order, other.order)
            return self.truncate(order).terms == other.truncate(order).terms
        try:
            other = as_coeff(other)
        except TypeError:
            return NotImplemented
        return self == TruncatedSeries.constant(self.variables, self.order, other)

    __hash__ = None

    # substitution ---------------------------------------------------------
    def substitute(self, assignment: Mapping, polynomial: bool = False):
        """Evaluate or compose.

        ``assignment`` maps variable names (and optionally ``"x"``) to numbers
        or to series.  If every variable occurring in ``self`` receives a
        number the result is a number; otherwise a series, living in the ring
        of the substituted series (or in ``self``'s ring when all values are
        numbers).  Series values must have zero constant term unless
        ``polynomial=True`` declares ``self`` to be an exact polynomial.
        """
        unknown = set(assignment) - set(self.variables) - {X_NAME}
        if unknown:
            raise VariableMismatch(f"cannot substitute unknown variables {sorted(unknown)}")
        series_vals = {k: v for k, v in assignment.items() if isinstance(v, TruncatedSeries)}
        numeric_vals = {k: as_coeff(v) for k, v in assignment.items() if not isinstance(v, TruncatedSeries)}

        used = set()
        needs_x = False
        for e, c in self.terms.items():
            used.update(v for v, k in zip(self.variables, e) if k)
            if isinstance(c, LocalizedScalar) and not c.is_constant():
                needs_x = True
        fully_numeric = all(v in numeric_vals for v in used) and (not needs_x or X_NAME in numeric_vals)
        if fully_numeric and not series_vals:
            return self._evaluate(numeric_vals)

        if series_vals:
            target = next(iter(series_vals.values()))
            tvars, torder = target.variables, target.order
            for s in series_vals.values():
                if s.variables != tvars:
                    raise VariableMismatch("substituted series must share one ring")
                torder = max(torder, s.order)
        else:
            tvars, torder = self.variables, self.order

        images = {}
        vmin = None
        for v in self.variables:
            if v in series_vals:
                img = series_vals[v]
                if img.constant_term() != 0 and not polynomial:
                    raise SeriesError(f"image of {v} has a constant term; pass polynomial=True")
                vv = img.valuation()
            elif v in numeric_vals:
                img = numeric_vals[v]
                vv = None
            else:
                if v not in tvars:
                    raise VariableMismatch(f"variable {v!r} missing from target ring {tvars}")
                img = TruncatedSeries.variable(tvars, torder, v)
                vv = 1
            images[v] = img
            if vv is not None and v in used:
                vmin = vv if vmin is None else min(vmin, vv)

        x_img = assignment.get(X_NAME)
        x_img_mu = None
        if isinstance(x_img, TruncatedSeries):
            x_img_mu = x_img.split_monomial_unit() if any(
                isinstance(c, LocalizedScalar) and c.a for c in self.terms.values()
            ) else None
        one = TruncatedSeries.constant(tvars, torder, 1)
        result = TruncatedSeries(tvars, torder)
        power_cache = {}

        def power(v, k):
            key = (v, k)
            if key not in power_cache:
                img = images[v]
                power_cache[key] = img**k if isinstance(img, TruncatedSeries) else img**k
            return power_cache[key]

        for e, c in self.terms.items():
            term = one
            scalar = Fraction(1)
            for v, k in zip(self.variables, e):
                if not k:
                    continue
                p = power(v, k)
                if isinstance(p, TruncatedSeries):
                    term = term * p
                else:
                    scalar = scalar * p
            if isinstance(c, LocalizedScalar) and not c.is_constant():
                if X_NAME in numeric_vals:
                    scalar = scalar * c.evaluate(numeric_vals[X_NAME])
                elif isinstance(x_img, TruncatedSeries):
                    term = term * _localized_image(c, x_img, x_img_mu, one)
                else:
                    term = term.scale(c)
            else:
                scalar = scalar * (c.constant() if isinstance(c, LocalizedScalar) else c)
            result = result + term.scale(scalar)
        if vmin is not None:
            cap = (self.order + 1) * vmin - 1
            if cap < result.order:
                result = result.truncate(cap)
        return result

    def _evaluate(self, values):
        total = 0
        for e, c in self.terms.items():
            t = c.evaluate(values[X_NAME]) if isinstance(c, LocalizedScalar) and not c.is_constant() else (
                c.constant() if isinstance(c, LocalizedScalar) else c
            )
            for v, k in zip(self.variables, e):
                if k:
                    t = t * values[v] ** k
            total = total + t
        return total if total != 0 or isinstance(total, complex) else Fraction(0)

    # presentation ---------------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda ec: (_deg(ec[0]), tuple(-k for k in ec[0])))

    def __str__(self):
        if not self.terms:
            return f"0  (order {self.order})"
        parts = [format_monomial(c, e, self.variables, pretty=True) for e, c in self.sorted_terms()]
        out = " + ".join(parts).replace("+ -", "- ")
        return f"{out}  (order {self.order})"

    def short(self, max_terms: int = 6) -> str:
        items = self.sorted_terms()
        parts = [format_monomial(c, e, self.variables, pretty=True) for e, c in items[:max_terms]]
        s = " + ".join(parts).replace("+ -", "- ") if parts else "0"
        if len(items) > max_terms:
            s += " + ..."
        return s

    def __repr__(self):
        return f"TruncatedSeries({self.variables}, {self.order}, {self.short()})"

    def to_text(self) -> str:
        return dumps(self)


def _localized_image(c: LocalizedScalar, x_img, x_mu, one):
    num = TruncatedSeries(one.variables, one.order)
    p = one
    for k, coeff in enumerate(c.num):
        if k:
            p = p * x_img
        if coeff != 0:
            num = num + p.scale(coeff)
    if c.b:
        num = num * (one - x_img) ** (-c.b)
    if c.a:
        m, u = x_mu
        num = num.monomial_ratio(tuple(k * c.a for k in m)) * u ** (-c.a)
    return num


def format_monomial(c, e, variables, pretty=False):
    factors = [f"{v}^{k}" for v, k in zip(variables, e) if k]
    if pretty:
        factors = [f if not f.endswith("^1") else f[:-2] for f in factors]
        cs = format_scalar(c)
        if not factors:
            return cs
        if cs == "1":
            return "*".join(factors)
        if cs == "-1":
            return "-" + "*".join(factors)
        return cs + "*" + "*".join(factors)
    return " * ".join([format_scalar(c)] + factors)


class SeriesRing:
    """Convenience factory for series in fixed variables and order."""

    def __init__(self, variables: Iterable[str], order: int):
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise VariableMismatch("duplicate variable names")
        if X_NAME in self.variables:
            raise VariableMismatch(f"{X_NAME!r} is reserved for the localized coordinate")
        self.order = int(order)

    def __call__(self, c=0) -> TruncatedSeries:
        if isinstance(c, TruncatedSeries):
            c._check(self.zero())
            return c
        return TruncatedSeries.constant(self.variables, self.order, c)

    def zero(self):
        return TruncatedSeries(self.variables, self.order)

    def one(self):
        return self(1)

    def gen(self, name: str) -> TruncatedSeries:
        return TruncatedSeries.variable(self.variables, self.order, name)

    def gens(self):
        return tuple(self.gen(v) for v in self.variables)

    def x(self) -> TruncatedSeries:
        """The localized coordinate ``x`` as a constant series."""
        return self(LocalizedScalar.x())

    def monomial(self, exps, c=1) -> TruncatedSeries:
        if isinstance(exps, Mapping):
            exps = tuple(int(exps.get(v, 0)) for v in self.variables)
        return TruncatedSeries(self.variables, self.order, {tuple(exps): c})

    def __repr__(self):
        return f"SeriesRing({list(self.variables)}, order={self.order})"


# --------------------------------------------------------------------------
# Text serialisation
# --------------------------------------------------------------------------


def dumps(s: TruncatedSeries) -> str:
    """Serialise ``s``; one line per (monomial, power of x) pair."""
    lines = [f"series vars={','.join(s.variables)} order={s.order}"]
    for e, c in s.sorted_terms():
        mono = [f"{v}^{k}" for v, k in zip(s.variables, e) if k]
        if isinstance(c, LocalizedScalar) and not c.is_constant():
            for coeff, k in c.x_terms():
                fac = [format_number(coeff)]
                if k:
                    fac.append(f"x^{k}")
                if c.b:
                    fac.append(f"(1-x)^{{-{c.b}}}")
                lines.append(" * ".join(fac + mono))
        else:
            if isinstance(c, LocalizedScalar):
                c = c.constant()
            lines.append(" * ".join([format_number(c)] + mono))
    return "\n".join(lines) + "\n"


def _parse_number(tok: str, lineno: int):
    tok = tok.strip()
    try:
        if tok.startswith("(") and tok.endswith("j)"):
            return complex(tok[1:-1])
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad coefficient {tok!r}", lineno) from exc


def loads(text: str) -> TruncatedSeries:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("series "):
        raise ParseError("missing 'series vars=... order=N' header", 1)
    header = dict(kv.split("=", 1) for kv in lines[0].split()[1:])
    try:
        variables = tuple(v for v in header["vars"].split(",") if v)
        order = int(header["order"])
    except (KeyError, ValueError) as exc:
        raise ParseError("malformed header", 1) from exc
    index = {v: i for i, v in enumerate(variables)}
    acc = {}
    for lineno, line in enumerate(lines[1:], start=2):
        toks = [t.strip() for t in line.split(" * ")]
        coeff = _parse_number(toks[0], lineno)
        e = [0] * len(variables)
        xk = 0
        b = 0
        for tok in toks[1:]:
            if tok.startswith("(1-x)^{-") and tok.endswith("}"):
                b = int(tok[len("(1-x)^{-"):-1])
            elif tok.startswith("x^"):
                xk = int(tok[2:])
            else:
                name, _, k = tok.partition("^")
                if name not in index:
                    raise ParseError(f"unknown variable {name!r}", lineno)
                e[index[name]] += int(k or 1)
        if xk or b:
            num = [Fraction(0)] * max(xk, 0) + [coeff]
            c = LocalizedScalar(num, max(-xk, 0), b)
        else:
            c = coeff
        key = tuple(e)
        acc[key] = acc[key] + c if key in acc else c
    return TruncatedSeries(variables, order, acc)
