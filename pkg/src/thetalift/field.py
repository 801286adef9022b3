"""Exact arithmetic in a totally real number field given by an integral basis.

Elements are rational coordinate vectors on the integral basis. Real embeddings
are ordered with the designated sigma_1 first and the remaining roots ascending.
Signs of embeddings are certified by exact interval evaluation on rational
isolating intervals of the defining polynomial's roots.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import mpmath
import numpy as np
import sympy

from . import _exact


class FieldError(ValueError):
    pass


def _poly_mulmod(p: Sequence[Fraction], q: Sequence[Fraction], f: Sequence[int]) -> list[Fraction]:
    """Multiply power-basis coefficient lists modulo the monic polynomial f (constant first)."""
    d = len(f) - 1
    prod = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                if b:
                    prod[i + j] += a * b
    for k in range(len(prod) - 1, d - 1, -1):
        c = prod[k]
        if c:
            prod[k] = Fraction(0)
            for j in range(d):
                prod[k - d + j] -= c * f[j]
    out = prod[:d]
    return out + [Fraction(0)] * (d - len(out))


def _interval_horner(coeffs: Sequence[Fraction], lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    rlo = rhi = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        cands = (rlo * lo, rlo * hi, rhi * lo, rhi * hi)
        rlo, rhi = min(cands) + c, max(cands) + c
    return rlo, rhi


def _eval_exact(coeffs: Sequence, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class FracIdealBasis:
    """Z-basis of a fractional ideal, rows are coordinates on the integral basis."""

    field: "FieldSpec"
    basis: tuple[tuple[Fraction, ...], ...]

    @cached_property
    def _inv(self):
        return _exact.inverse(self.basis)

    def coordinates(self, x: "FieldElement") -> list[Fraction]:
        return _exact.vecmat(x.coords, self._inv)

    def contains(self, x: "FieldElement") -> bool:
        return all(c.denominator == 1 for c in self.coordinates(x))

    def reduce(self, x: "FieldElement") -> "FieldElement":
        """Canonical representative of x modulo the ideal (coordinates in [0, 1))."""
        c = [t - (t.numerator // t.denominator) for t in self.coordinates(x)]
        return FieldElement(self.field, tuple(_exact.vecmat(c, self.basis)))

    def elements(self) -> list["FieldElement"]:
        return [FieldElement(self.field, tuple(r)) for r in self.basis]

    def covolume(self) -> Fraction:
        """Index-normalised volume: |det(basis)| relative to O_F."""
        return abs(_exact.det(self.basis))


class FieldSpec:
    """A totally real field Q[x]/(poly) with an integral basis and ordered real embeddings."""

    def __init__(
        self,
        poly: Sequence[int],
        integral_basis: Sequence[Sequence] | None = None,
        sigma1_root_index: int = 0,
        precision_digits: int = 50,
    ):
        poly = [int(c) for c in poly]
        if len(poly) < 2 or poly[-1] != 1:
            raise FieldError("defining polynomial must be monic of degree >= 1 (constant term first)")
        d = len(poly) - 1
        if integral_basis is None:
            integral_basis = [[int(i == j) for j in range(d)] for i in range(d)]
        basis = tuple(tuple(_exact.frac(x) for x in row) for row in integral_basis)
        if len(basis) != d or any(len(r) != d for r in basis):
            raise FieldError("integral basis must be a d x d matrix")
        if _exact.det(basis) == 0:
            raise FieldError("integral basis is singular")
        self.poly = tuple(poly)
        self.degree = d
        self.integral_basis = basis
        self.precision_digits = int(precision_digits)
        self._basis_inv = _exact.inverse(basis)

        x = sympy.Symbol("x")
        sp = sympy.Poly(list(reversed(poly)), x)
        if sympy.discriminant(sp) == 0:
            raise FieldError("defining polynomial is not squarefree")

        # structure constants: table[i][j] = coords of b_i * b_j
        table = []
        for i in range(d):
            row = []
            for j in range(d):
                pw = _poly_mulmod(basis[i], basis[j], poly)
                row.append(tuple(_exact.vecmat(pw, self._basis_inv)))
            table.append(row)
        if not all(c.denominator == 1 for row in table for v in row for c in v):
            raise FieldError("integral basis does not span a ring (non-integral structure constants)")
        one = _exact.vecmat([Fraction(1)] + [Fraction(0)] * (d - 1), self._basis_inv)
        if any(c.denominator != 1 for c in one):
            raise FieldError("1 is not in the span of the integral basis")
        self._table = table
        self._one_coords = tuple(one)

        self._roots, self._intervals = self._isolate_roots()
        if not 0 <= sigma1_root_index < d:
            raise FieldError("sigma1_root_index out of range")
        self.sigma1_root_index = int(sigma1_root_index)
        self.embedding_order = tuple([sigma1_root_index] + [i for i in range(d) if i != sigma1_root_index])

    # -- construction helpers -------------------------------------------------
    def _isolate_roots(self):
        d = self.degree
        prec = self.precision_digits
        with mpmath.workdps(prec + 10):
            roots = mpmath.polyroots(list(reversed(self.poly)), maxsteps=200, extraprec=4 * prec)
            roots = roots if isinstance(roots, list) else [roots]
            tol = mpmath.mpf(10) ** (-(prec // 2))
            if any(abs(mpmath.im(r)) > tol for r in roots):
                raise FieldError("defining polynomial is not totally real")
            real = sorted(mpmath.re(r) for r in roots)
            intervals = []
            for k in range(8, prec, 4):
                delta = mpmath.mpf(10) ** (-k)
                intervals = [
                    (Fraction(mpmath.nstr(r - delta, prec + 5)), Fraction(mpmath.nstr(r + delta, prec + 5)))
                    for r in real
                ]
                disjoint = all(intervals[i][1] < intervals[i + 1][0] for i in range(d - 1))
                signs = all(
                    _eval_exact(self.poly, lo) * _eval_exact(self.poly, hi) < 0 for lo, hi in intervals
                )
                if disjoint and signs:
                    break
            else:
                raise FieldError("could not isolate real roots; raise precision_digits")
        return tuple(real), tuple(intervals)

    # -- elements -------------------------------------------------------------
    def element(self, coords: Iterable) -> "FieldElement":
        c = tuple(_exact.frac(x) for x in coords)
        if len(c) != self.degree:
            raise FieldError("element needs d coordinates")
        return FieldElement(self, c)

    def from_power(self, coeffs: Sequence) -> "FieldElement":
        """Element given by coefficients on the power basis 1, x, x^2, ... ."""
        p = [_exact.frac(c) for c in coeffs] + [Fraction(0)] * (self.degree - len(coeffs))
        return FieldElement(self, tuple(_exact.vecmat(p[: self.degree], self._basis_inv)))

    def __call__(self, x) -> "FieldElement":
        if isinstance(x, FieldElement):
            return x
        return self.from_power([x])

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, self._one_coords)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, (Fraction(0),) * self.degree)

    @property
    def gen(self) -> "FieldElement":
        """The class of x (the polynomial root)."""
        return self.from_power([0, 1])

    def basis_elements(self) -> list["FieldElement"]:
        return [
            FieldElement(self, tuple(Fraction(int(i == j)) for j in range(self.degree))) for i in range(self.degree)
        ]

    # -- invariants -----------------------------------------------------------
    @cached_property
    def trace_form(self) -> list[list[Fraction]]:
        bs = self.basis_elements()
        return [[(a * b).trace() for b in bs] for a in bs]

    @cached_property
    def discriminant(self) -> int:
        det = _exact.det(self.trace_form)
        assert det.denominator == 1
        return int(det)

    @cached_property
    def basis_embeddings(self) -> np.ndarray:
        """Float matrix E with E[a, i] = sigma_i(b_a)."""
        bs = self.basis_elements()
        return np.array([b.embed() for b in bs], dtype=float).reshape(self.degree, self.degree)

    def key(self):
        return (self.poly, self.integral_basis, self.sigma1_root_index)

    def __repr__(self):
        return f"FieldSpec(poly={list(self.poly)}, d={self.degree}, sigma1={self.sigma1_root_index})"


@dataclass(frozen=True)
class FieldElement:
    field: FieldSpec
    coords: tuple[Fraction, ...]

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field is not self.field and other.field.key() != self.field.key():
                raise FieldError("elements of different fields")
            return other
        return self.field(other)

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, tuple(a * other for a in self.coords))
        o = self._coerce(other)
        d = self.field.degree
        table = self.field._table
        out = [Fraction(0)] * d
        for i, a in enumerate(self.coords):
            if not a:
                continue
            for j, b in enumerate(o.coords):
                if not b:
                    continue
                ab = a * b
                for k, t in enumerate(table[i][j]):
                    if t:
                        out[k] += ab * t
        return FieldElement(self.field, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        m = self.regular_matrix()
        one = list(self.field.one.coords)
        inv = _exact.inverse(m)
        return FieldElement(self.field, tuple(sum((inv[i][j] * one[j] for j in range(len(one))), Fraction(0)) for i in range(len(one))))

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = self.field.one
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.field(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.field.key() == other.field.key() and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def power_coeffs(self) -> list[Fraction]:
        return _exact.vecmat(self.coords, self.field.integral_basis)

    def regular_matrix(self) -> list[list[Fraction]]:
        """Matrix of multiplication by self; column j holds coords of self * b_j."""
        cols = [(self * b).coords for b in self.field.basis_elements()]
        return [list(r) for r in zip(*cols)]

    def trace(self) -> Fraction:
        m = self.regular_matrix()
        return sum((m[i][i] for i in range(len(m))), Fraction(0))

    def norm(self) -> Fraction:
        return _exact.det(self.regular_matrix())

    def embed(self, mp: bool = False):
        """Real embeddings ordered (sigma_1, ..., sigma_d)."""
        f = self.field
        p = self.power_coeffs()
        with mpmath.workdps(f.precision_digits + 5):
            vals = []
            for idx in f.embedding_order:
                r = f._roots[idx]
                acc = mpmath.mpf(0)
                for c in reversed(p):
                    acc = acc * r + mpmath.mpf(c.numerator) / c.denominator
                vals.append(acc)
        if mp:
            return tuple(vals)
        return tuple(float(v) for v in vals)

    def sign(self, i: int) -> int:
        """Certified sign of sigma_i(self) (i is 0-based in embedding order)."""
        if self.is_zero():
            return 0
        f = self.field
        p = self.power_coeffs()
        lo, hi = f._intervals[f.embedding_order[i]]
        flo = _eval_exact(f.poly, lo)
        for _ in range(4000):
            vlo, vhi = _interval_horner(p, lo, hi)
            if vlo > 0:
                return 1
            if vhi < 0:
                return -1
            mid = (lo + hi) / 2
            fm = _eval_exact(f.poly, mid)
            if fm == 0:
                v = _eval_exact(p, mid)
                return 1 if v > 0 else -1
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        raise FieldError("sign could not be certified")  # pragma: no cover

    def signs(self) -> tuple[int, ...]:
        return tuple(self.sign(i) for i in range(self.field.degree))

    def __repr__(self):
        return "FieldElement(" + ", ".join(str(c) for c in self.coords) + ")"


# -- module-level operations --------------------------------------------------

def make_field(defining_poly, integral_basis=None, embedding_order: int = 0, precision_digits: int = 50) -> FieldSpec:
    """Validate and build a totally real field. ``embedding_order`` is the index of sigma_1 among ascending roots."""
    return FieldSpec(defining_poly, integral_basis, embedding_order, precision_digits)


def embed(elem: FieldElement, field: FieldSpec | None = None) -> tuple[float, ...]:
    return elem.embed()


def trace_norm(elem: FieldElement) -> tuple[Fraction, Fraction]:
    return elem.trace(), elem.norm()


def codifferent(field: FieldSpec) -> FracIdealBasis:
    """Trace dual of O_F: rows of the inverse trace form."""
    inv = _exact.inverse(field.trace_form)
    return FracIdealBasis(field, tuple(tuple(r) for r in inv))


def is_totally_positive(elem: FieldElement) -> bool:
    return all(s > 0 for s in elem.signs())
