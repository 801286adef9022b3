"""Exact rational linear algebra on lists of Fractions (thin wrappers over sympy)."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import sympy
from sympy.matrices.normalforms import smith_normal_decomp

Rows = list[list[Fraction]]


def frac(x) -> Fraction:
    """Parse ints, Fractions, sympy rationals and strings like ``"-3/4"``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, sympy.Rational):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact rationals")
    return Fraction(x)


def to_sympy(rows: Sequence[Sequence]) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(frac(x).numerator, frac(x).denominator) for x in r] for r in rows])


def from_sympy(m: sympy.Matrix) -> Rows:
    return [[frac(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]


def det(rows: Sequence[Sequence]) -> Fraction:
    if len(rows) == 0:
        return Fraction(1)
    return frac(to_sympy(rows).det(method="bareiss"))


def inverse(rows: Sequence[Sequence]) -> Rows:
    m = to_sympy(rows)
    if m.det() == 0:
        raise ZeroDivisionError("singular matrix")
    return from_sympy(m.inv())


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Rows:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(r, c)), Fraction(0)) for c in bt] for r in a]


def vecmat(v: Sequence, m: Sequence[Sequence]) -> list[Fraction]:
    cols = len(m[0]) if m else 0
    out = [Fraction(0)] * cols
    for x, row in zip(v, m):
        if x:
            for j in range(cols):
                out[j] += x * row[j]
    return out


def transpose(a: Sequence[Sequence]) -> Rows:
    return [list(r) for r in zip(*a)]


def is_integral(rows) -> bool:
    return all(frac(x).denominator == 1 for r in rows for x in r)


def smith(rows: Sequence[Sequence[int]]):
    """Return ``(diag, S, T)`` with ``S @ A @ T`` diagonal; S, T unimodular integer matrices."""
    m = sympy.Matrix([[int(x) for x in r] for r in rows])
    d, s, t = smith_normal_decomp(m, domain=sympy.ZZ)
    diag = [int(d[i, i]) for i in range(min(d.rows, d.cols))]
    s_rows = [[int(s[i, j]) for j in range(s.cols)] for i in range(s.rows)]
    t_rows = [[int(t[i, j]) for j in range(t.cols)] for i in range(t.rows)]
    return diag, s_rows, t_rows
