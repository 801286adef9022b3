"""Even O_F-lattices: Gram data, signatures, Z-duals, discriminant groups, enumeration.

Vectors of V = F^l are stored in *F-coordinates*: a rational vector of length d*l whose
entry j*d + c is the coefficient of the c-th integral basis element in component j.
A lattice is a Z-basis (rows) in F-coordinates; *L-coordinates* of a vector are its
coefficients on that basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from . import _exact
from ._enum import NotPositiveDefinite, fincke_pohst
from .field import FieldElement, FieldSpec, FracIdealBasis, codifferent


class LatticeError(ValueError):
    pass


def _frac_floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _mod1(x: Fraction) -> Fraction:
    return x - _frac_floor(x)


class QuadraticSpace:
    """V = F^l with symmetric bilinear form given by an F-valued Gram matrix; Q(x) = (x,x)/2."""

    def __init__(self, field: FieldSpec, gram: Sequence[Sequence], admissible: bool = False):
        self.field = field
        rows = [[field.element(e) if not isinstance(e, FieldElement) else e for e in r] for r in gram]
        l = len(rows)
        if any(len(r) != l for r in rows):
            raise LatticeError("Gram matrix must be square")
        for i in range(l):
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise LatticeError("Gram matrix is not symmetric")
        self.gram = tuple(tuple(r) for r in rows)
        self.rank = l
        self._pivots = self._diagonalise()
        if any(p.is_zero() for p in self._pivots):
            raise LatticeError("Gram matrix is degenerate")
        self.admissible = admissible
        if admissible:
            sig = self.signatures()
            n = l - 2
            want = [(n, 2)] + [(l, 0)] * (field.degree - 1)
            if n < 1 or list(sig) != want:
                raise LatticeError(f"signatures {sig} are not admissible ((n,2),(n+2,0),...)")

    def _diagonalise(self) -> list[FieldElement]:
        """Diagonal entries of a congruence diagonalisation over F (exact)."""
        f = self.field
        m = [list(r) for r in self.gram]
        l = self.rank
        pivots = []
        for k in range(l):
            if m[k][k].is_zero():
                j = next((j for j in range(k + 1, l) if not m[j][j].is_zero()), None)
                if j is not None:
                    m[k], m[j] = m[j], m[k]
                    for r in m:
                        r[k], r[j] = r[j], r[k]
                else:
                    j = next((j for j in range(k + 1, l) if not m[k][j].is_zero()), None)
                    if j is None:
                        pivots.append(f.zero)
                        continue
                    # replace e_k by e_k + e_j: new diagonal 2 m[k][j] != 0
                    for c in range(l):
                        m[k][c] = m[k][c] + m[j][c]
                    for r in range(l):
                        m[r][k] = m[r][k] + m[r][j]
            piv = m[k][k]
            pivots.append(piv)
            inv = piv.inverse()
            for r in range(k + 1, l):
                if m[r][k].is_zero():
                    continue
                t = m[r][k] * inv
                for c in range(k, l):
                    m[r][c] = m[r][c] - t * m[k][c]
                m[r][k] = f.zero
            for c in range(k + 1, l):
                m[k][c] = f.zero
        return pivots

    def signatures(self) -> list[tuple[int, int]]:
        """(p_i, q_i) per embedding, from certified signs of an exact diagonalisation."""
        out = []
        for i in range(self.field.degree):
            s = [p.sign(i) for p in self._pivots]
            out.append((s.count(1), s.count(-1)))
        return out

    @property
    def n(self) -> int:
        return self.rank - 2

    def sig_vector(self) -> list[int]:
        return [p - q for p, q in self.signatures()]

    def tr_sig(self) -> int:
        return sum(self.sig_vector())

    def bilinear(self, x: Sequence[FieldElement], y: Sequence[FieldElement]) -> FieldElement:
        acc = self.field.zero
        for i, xi in enumerate(x):
            if xi.is_zero():
                continue
            for j, yj in enumerate(y):
                if not yj.is_zero() and not self.gram[i][j].is_zero():
                    acc = acc + xi * self.gram[i][j] * yj
        return acc

    def Q(self, x: Sequence[FieldElement]) -> FieldElement:
        return self.bilinear(x, x) * Fraction(1, 2)

    @cached_property
    def gram_embedded(self) -> tuple[np.ndarray, ...]:
        """Float Gram matrix at each embedding sigma_i."""
        l, d = self.rank, self.field.degree
        vals = [[self.gram[i][j].embed() for j in range(l)] for i in range(l)]
        return tuple(np.array([[vals[i][j][e] for j in range(l)] for i in range(l)]) for e in range(d))

    @cached_property
    def coord_forms(self) -> tuple[list[list[Fraction]], ...]:
        """Rational matrices G_c on F-coordinates with (x,y) = sum_c (x^T G_c y) b_c."""
        f = self.field
        d, l = f.degree, self.rank
        bs = f.basis_elements()
        forms = [[[Fraction(0)] * (d * l) for _ in range(d * l)] for _ in range(d)]
        for j in range(l):
            for k in range(l):
                g = self.gram[j][k]
                if g.is_zero():
                    continue
                for a in range(d):
                    ga = bs[a] * g
                    for e in range(d):
                        coords = (ga * bs[e]).coords
                        for c in range(d):
                            forms[c][j * d + a][k * d + e] = coords[c]
        return tuple(forms)

    @cached_property
    def trace_matrix(self) -> list[list[Fraction]]:
        """Rational matrix T on F-coordinates with tr (x,y) = x^T T y."""
        traces = [b.trace() for b in self.field.basis_elements()]
        nn = self.field.degree * self.rank
        return [[sum((traces[c] * self.coord_forms[c][r][s] for c in range(self.field.degree)), Fraction(0))
                 for s in range(nn)] for r in range(nn)]

    @cached_property
    def embed_matrices(self) -> tuple[np.ndarray, ...]:
        """Float (d*l, l) matrices sending F-coordinates to sigma_i-coordinates."""
        d, l = self.field.degree, self.rank
        e = self.field.basis_embeddings
        mats = []
        for i in range(d):
            m = np.zeros((d * l, l))
            for j in range(l):
                m[j * d : (j + 1) * d, j] = e[:, i]
            mats.append(m)
        return tuple(mats)

    def vector(self, fcoords: Sequence[Fraction]) -> list[FieldElement]:
        d = self.field.degree
        return [FieldElement(self.field, tuple(fcoords[j * d : (j + 1) * d])) for j in range(self.rank)]

    def fcoords(self, vec: Sequence[FieldElement]) -> list[Fraction]:
        return [c for x in vec for c in x.coords]

    def Q_fcoords(self, x: Sequence[Fraction]) -> FieldElement:
        coords = []
        for g in self.coord_forms:
            coords.append(sum((xi * gij * xj for i, xi in enumerate(x) if xi for j, xj in enumerate(x) if xj
                               for gij in (g[i][j],) if gij), Fraction(0)) / 2)
        return FieldElement(self.field, tuple(coords))

    def bilinear_fcoords(self, x, y) -> FieldElement:
        coords = []
        for g in self.coord_forms:
            coords.append(sum((xi * g[i][j] * yj for i, xi in enumerate(x) if xi for j, yj in enumerate(y) if yj),
                              Fraction(0)))
        return FieldElement(self.field, tuple(coords))


@dataclass(frozen=True)
class MajorantForm:
    """Positive definite form sum_i x_i^T P_i x_i on V, one l x l block per embedding."""

    blocks: tuple[np.ndarray, ...]

    @staticmethod
    def trace_form(space: QuadraticSpace) -> "MajorantForm":
        """The form tr Q, positive definite only for totally definite spaces."""
        return MajorantForm(tuple(0.5 * g for g in space.gram_embedded))

    def value(self, parts: Sequence[np.ndarray]) -> np.ndarray:
        return sum(np.einsum("...i,ij,...j->...", x, p, x) for x, p in zip(parts, self.blocks))


class OFLattice:
    """A Z-lattice in V of full rank d*l, stable under O_F, stored by a Z-basis in F-coordinates."""

    def __init__(self, space: QuadraticSpace, zbasis: Sequence[Sequence] | None = None, check_module: bool = True):
        self.space = space
        f = space.field
        nn = f.degree * space.rank
        if zbasis is None:
            zbasis = [[Fraction(int(i == j)) for j in range(nn)] for i in range(nn)]
        self.basis = tuple(tuple(_exact.frac(x) for x in r) for r in zbasis)
        if len(self.basis) != nn or any(len(r) != nn for r in self.basis):
            raise LatticeError(f"Z-basis must be {nn} x {nn}")
        if _exact.det(self.basis) == 0:
            raise LatticeError("Z-basis is singular")
        self._basis_inv = _exact.inverse(self.basis)
        if check_module and not self.is_of_module():
            raise LatticeError("lattice is not stable under O_F")

    # -- structure ------------------------------------------------------------
    @property
    def field(self) -> FieldSpec:
        return self.space.field

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _mult_matrix_f(self, o: FieldElement) -> list[list[Fraction]]:
        """Matrix (acting on F-coordinate row vectors) of multiplication by o."""
        d, l = self.field.degree, self.space.rank
        reg = o.regular_matrix()  # column j = o * b_j
        nn = d * l
        m = [[Fraction(0)] * nn for _ in range(nn)]
        for j in range(l):
            for a in range(d):
                for c in range(d):
                    m[j * d + a][j * d + c] = reg[c][a]
        return m

    def action_matrix(self, o: FieldElement) -> list[list[Fraction]]:
        """Multiplication by o in L-coordinates (row-vector convention)."""
        return _exact.matmul(_exact.matmul(self.basis, self._mult_matrix_f(o)), self._basis_inv)

    def is_of_module(self) -> bool:
        return all(_exact.is_integral(self.action_matrix(b)) for b in self.field.basis_elements())

    @cached_property
    def tr_gram(self) -> list[list[Fraction]]:
        """Gram matrix of the bilinear form tr (x,y) on the Z-basis."""
        return _exact.matmul(_exact.matmul(self.basis, self.space.trace_matrix), _exact.transpose(self.basis))

    @cached_property
    def codiff(self) -> FracIdealBasis:
        return codifferent(self.field)

    def is_even(self) -> bool:
        """Q(L) in the codifferent: checked on basis vectors and pairwise sums."""
        cd = self.codiff
        sp = self.space
        for i, bi in enumerate(self.basis):
            if not cd.contains(sp.Q_fcoords(bi)):
                return False
            for bj in self.basis[i + 1 :]:
                if not cd.contains(sp.bilinear_fcoords(bi, bj)):
                    return False
        return True

    @cached_property
    def even_flag(self) -> bool:
        return self.is_even()

    def to_fcoords(self, x: Sequence[Fraction]) -> list[Fraction]:
        return _exact.vecmat(x, self.basis)

    def to_lcoords(self, v: Sequence[Fraction]) -> list[Fraction]:
        return _exact.vecmat(v, self._basis_inv)

    def contains(self, v: Sequence[Fraction]) -> bool:
        return all(c.denominator == 1 for c in self.to_lcoords(v))

    def Q(self, x: Sequence[Fraction]) -> FieldElement:
        """Q of the vector with L-coordinates x."""
        return self.space.Q_fcoords(self.to_fcoords(x))

    def same_span(self, other: "OFLattice") -> bool:
        """Exact equality of Z-spans."""
        m = _exact.matmul(self.basis, other._basis_inv)
        n = _exact.matmul(other.basis, self._basis_inv)
        return _exact.is_integral(m) and _exact.is_integral(n)

    @cached_property
    def embedded_basis(self) -> tuple[np.ndarray, ...]:
        """Float (N, l) matrices: rows are sigma_i images of the Z-basis vectors."""
        bf = np.array([[float(x) for x in r] for r in self.basis])
        return tuple(bf @ m for m in self.space.embed_matrices)

    def embed_lcoords(self, x: np.ndarray) -> list[np.ndarray]:
        """sigma_i-images of (arrays of) vectors given in L-coordinates."""
        return [np.asarray(x, dtype=float) @ b for b in self.embedded_basis]

    def majorant_matrix(self, form: MajorantForm) -> np.ndarray:
        return sum(b @ p @ b.T for b, p in zip(self.embedded_basis, form.blocks))

    @cached_property
    def discriminant_group(self) -> "DiscriminantGroup":
        return discriminant_group(self)


@dataclass(frozen=True)
class DiscriminantGroup:
    lattice: OFLattice
    invariant_factors: tuple[int, ...]
    coset_reps: tuple[tuple[Fraction, ...], ...]  # L-coordinates, each in [0,1)
    q_values: tuple[FieldElement, ...]
    q_rat: tuple[Fraction, ...]  # tr Q(mu) mod 1
    order: int
    _index: dict = dc_field(repr=False, compare=False, hash=False, default_factory=dict)

    def index_of(self, x: Sequence[Fraction]) -> int:
        """Coset index of an element of L' given in L-coordinates."""
        key = tuple(_mod1(_exact.frac(c)) for c in x)
        try:
            return self._index[key]
        except KeyError:
            raise LatticeError("vector is not in L'") from None

    def tr_bilinear(self, i: int, j: int) -> Fraction:
        """tr (mu_i, mu_j) mod 1."""
        a = self.lattice.tr_gram
        x, y = self.coset_reps[i], self.coset_reps[j]
        return _mod1(sum((xi * a[r][s] * y[s] for r, xi in enumerate(x) if xi for s in range(len(y)) if y[s]),
                         Fraction(0)))

    @cached_property
    def neg_perm(self) -> tuple[int, ...]:
        return tuple(self.index_of([-c for c in mu]) for mu in self.coset_reps)

    def scale_perm(self, o: FieldElement) -> tuple[int, ...]:
        """Permutation mu -> o*mu (o in O_F)."""
        m = self.lattice.action_matrix(o)
        return tuple(self.index_of(_exact.vecmat(mu, m)) for mu in self.coset_reps)

    def fcoords(self, i: int) -> list[Fraction]:
        return self.lattice.to_fcoords(self.coset_reps[i])


def z_dual(lat: OFLattice) -> OFLattice:
    """L' = {x in V : tr(x, L) in Z}."""
    a = lat.tr_gram
    if _exact.det(a) == 0:
        raise LatticeError("degenerate trace form")
    dual = _exact.matmul(_exact.inverse(a), [list(r) for r in lat.basis])
    return OFLattice(lat.space, dual)


def pairing_in_codifferent(lat: OFLattice, other: OFLattice) -> bool:
    """Exact check (L, M) in the codifferent on basis pairs."""
    cd = lat.codiff
    return all(cd.contains(lat.space.bilinear_fcoords(x, y)) for x in lat.basis for y in other.basis)


def discriminant_group(lat: OFLattice) -> DiscriminantGroup:
    a = lat.tr_gram
    if not _exact.is_integral(a):
        raise LatticeError("trace Gram matrix is not integral; lattice is not even")
    diag, s, _t = _exact.smith(a)
    if any(x == 0 for x in diag):
        raise LatticeError("degenerate trace form")
    # L' = Z^N D^{-1} S in L-coordinates; generators g_i = S_i / d_i of order d_i
    gens = [(abs(d), [Fraction(x, abs(d)) for x in s[i]]) for i, d in enumerate(diag) if abs(d) > 1]
    factors = tuple(g[0] for g in gens)
    nn = lat.dim
    reps = []
    for coeffs in product(*[range(g[0]) for g in gens]):
        v = [Fraction(0)] * nn
        for c, (_, g) in zip(coeffs, gens):
            if c:
                v = [vi + c * gi for vi, gi in zip(v, g)]
        reps.append(tuple(_mod1(x) for x in v))
    index = {r: i for i, r in enumerate(reps)}
    if len(index) != len(reps):
        raise LatticeError("coset representatives are not distinct")  # pragma: no cover
    cd = lat.codiff
    qv = tuple(cd.reduce(lat.Q(r)) for r in reps)
    qr = tuple(_mod1(q.trace()) for q in qv)
    order = 1
    for x in factors:
        order *= x
    return DiscriminantGroup(lat, factors, tuple(reps), qv, qr, order, index)


def signatures(space: QuadraticSpace) -> list[tuple[int, int]]:
    return space.signatures()


def enumerate_ints(lat: OFLattice, mu: int, form: MajorantForm, bound: float, level=None) -> tuple[np.ndarray, np.ndarray]:
    """Integer parts x and the shift c = mu (L-coordinates) of all lambda = x + c in mu + L with majorant <= bound.

    ``level`` optionally restricts to tr Q(lambda) = level (a rational), confirmed exactly.
    """
    dg = lat.discriminant_group
    c = dg.coset_reps[mu]
    p = lat.majorant_matrix(form)
    cf = np.array([float(x) for x in c])
    lv = None
    if level is not None:
        a = np.array([[float(x) for x in r] for r in lat.tr_gram])
        lv = (a, float(level))
    x = fincke_pohst(p, cf, bound, level=lv)
    if level is not None and len(x):
        x = x[_exact_level_mask(lat, x, c, _exact.frac(level))]
    return x, cf


def _exact_level_mask(lat: OFLattice, x: np.ndarray, c: Sequence[Fraction], level: Fraction) -> np.ndarray:
    """Exact test 2 D^2 tr Q(x + c) == 2 D^2 level with integer arithmetic (D = common denominator of c)."""
    den = 1
    for ci in c:
        den = den * ci.denominator // np.gcd(den, ci.denominator)
    a = lat.tr_gram
    adenom = 1
    for r in a:
        for v in r:
            adenom = adenom * v.denominator // np.gcd(adenom, v.denominator)
    ai = [[int(v * adenom) for v in r] for r in a]
    ci = [int(v * den) for v in c]
    target = level * 2 * den * den * adenom
    mask = np.zeros(len(x), dtype=bool)
    for k, row in enumerate(x.tolist()):
        y = [den * xi + cc for xi, cc in zip(row, ci)]
        val = sum(y[i] * ai[i][j] * y[j] for i in range(len(y)) if y[i] for j in range(len(y)) if y[j])
        mask[k] = val == target
    return mask


def enumerate_majorant(lat: OFLattice, mu: int, form: MajorantForm, bound: float) -> Iterator[tuple[Fraction, ...]]:
    """Vectors of mu + L (L-coordinates, exact) with majorant value <= bound, lexicographic in x."""
    try:
        x, _ = enumerate_ints(lat, mu, form, bound)
    except NotPositiveDefinite as exc:
        raise LatticeError(str(exc)) from None
    c = lat.discriminant_group.coset_reps[mu]
    for row in x.tolist():
        yield tuple(Fraction(xi) + ci for xi, ci in zip(row, c))


def representation_count(lat: OFLattice, mu: int, m: FieldElement) -> int:
    """#{lambda in mu + L : Q(lambda) = m} for a totally definite lattice."""
    sig = lat.space.signatures()
    if any(q != 0 for _, q in sig):
        raise LatticeError("representation counts need a totally positive definite lattice")
    t = m.trace()
    x, _ = enumerate_ints(lat, mu, MajorantForm.trace_form(lat.space), float(t) + 1e-9, level=t)
    c = lat.discriminant_group.coset_reps[mu]
    count = 0
    for row in x.tolist():
        if lat.Q([Fraction(xi) + ci for xi, ci in zip(row, c)]) == m:
            count += 1
    return count


def lattice_from_gram(field: FieldSpec, gram, zbasis=None, admissible: bool = False) -> OFLattice:
    return OFLattice(QuadraticSpace(field, gram, admissible=admissible), zbasis)


def direct_sum(a: OFLattice, b: OFLattice) -> OFLattice:
    """Orthogonal direct sum; F-coordinates of the result are those of a followed by those of b."""
    f = a.field
    la, lb = a.space.rank, b.space.rank
    z = f.zero
    gram = [list(r) + [z] * lb for r in a.space.gram] + [[z] * la + list(r) for r in b.space.gram]
    na, nb = a.dim, b.dim
    basis = [list(r) + [Fraction(0)] * nb for r in a.basis] + [[Fraction(0)] * na + list(r) for r in b.basis]
    return OFLattice(QuadraticSpace(f, gram), basis)
