"""Exact and numeric dense linear algebra for small Gram matrices.

Exact matrices are lists of lists of :class:`fractions.Fraction`; the work is
delegated to sympy's ``DomainMatrix`` over ``QQ``.  Complex matrices go to
numpy.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .errors import DegenerateModule


def is_exact(rows) -> bool:
    return all(not isinstance(v, complex) for row in rows for v in row)


def _to_dm(rows):
    n = len(rows)
    return DomainMatrix([[QQ(Fraction(v).numerator, Fraction(v).denominator) for v in row] for row in rows], (n, n), QQ)


def _from_q(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def determinant(rows):
    if not rows:
        return Fraction(1)
    if is_exact(rows):
        return _from_q(_to_dm(rows).det())
    return complex(np.linalg.det(np.array(rows, dtype=complex)))


def inverse(rows, what: str = "matrix"):
    """Exact inverse; raises :class:`DegenerateModule` when singular.

    Numeric matrices return ``(inverse, condition_number)``.
    """
    if not rows:
        return []
    if is_exact(rows):
        dm = _to_dm(rows)
        if dm.det() == 0:
            raise DegenerateModule(f"{what} is singular")
        inv = dm.inv().to_Matrix()
        n = len(rows)
        return [[Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(n)] for i in range(n)]
    a = np.array(rows, dtype=complex)
    cond = float(np.linalg.cond(a))
    if not np.isfinite(cond) or cond > 1e14:
        raise DegenerateModule(f"{what} is numerically singular (cond={cond:.3g})")
    return [[complex(v) for v in row] for row in np.linalg.inv(a)], cond


def matmul(a, b):
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0)) for j in range(len(b[0]))] for i in range(len(a))]


def transpose(a):
    return [list(r) for r in zip(*a)] if a else []


def identity(n: int):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
