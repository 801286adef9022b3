"""Tube-domain geometry at sigma_1: isotropic frames, points, majorant splitting, automorphy factors."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

from . import _exact
from .field import FieldElement
from .lattice import MajorantForm, OFLattice, QuadraticSpace


class DomainError(ValueError):
    pass


def _fix_sign(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v if v[k] >= 0 else -v


@dataclass(frozen=True, eq=False)
class IsotropicFrame:
    """a, b isotropic at sigma_1 with (a,b) = 1; V0 spanned by columns of v0 with (v_i, v_j) = diag(eta)."""

    gram: np.ndarray  # sigma_1 Gram matrix
    a: np.ndarray
    b: np.ndarray
    v0: np.ndarray  # (l, l-2)
    eta: np.ndarray  # +-1 norms of the V0 basis, exactly one -1

    @staticmethod
    def from_vectors(gram: np.ndarray, a, b) -> "IsotropicFrame":
        gram = np.asarray(gram, dtype=float)
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        scale = max(1.0, float(np.max(np.abs(gram))))
        if abs(a @ gram @ a) > 1e-10 * scale or abs(b @ gram @ b) > 1e-10 * scale:
            raise DomainError("frame vectors are not isotropic")
        ab = a @ gram @ b
        if abs(ab) < 1e-12:
            raise DomainError("frame vectors are orthogonal")
        b = b / ab
        comp = null_space(np.vstack([a @ gram, b @ gram]))
        g0 = comp.T @ gram @ comp
        w, u = np.linalg.eigh(g0)
        cols = []
        eta = []
        for lam, vec in zip(w, u.T):
            v = _fix_sign(comp @ vec) / np.sqrt(abs(lam))
            cols.append(v)
            eta.append(np.sign(lam))
        eta = np.array(eta)
        if list(eta).count(-1) != 1:
            raise DomainError("complement of the frame must have signature (n-1, 1)")
        # negative vector first
        order = np.argsort(eta)
        return IsotropicFrame(gram, a, b, np.array(cols).T[:, order], eta[order])

    def bil(self, x, y):
        return x @ self.gram @ y

    def check(self, tol: float = 1e-10) -> dict:
        scale = max(1.0, float(np.max(np.abs(self.gram))))
        g0 = self.v0.T @ self.gram @ self.v0
        return {
            "Q(a)": abs(0.5 * self.bil(self.a, self.a)) / scale,
            "Q(b)": abs(0.5 * self.bil(self.b, self.b)) / scale,
            "(a,b)-1": abs(self.bil(self.a, self.b) - 1),
            "V0 orthogonality": float(np.max(np.abs(g0 - np.diag(self.eta)))),
            "V0 perp a,b": float(np.max(np.abs(self.v0.T @ self.gram @ np.vstack([self.a, self.b]).T))),
        }

    def to_json(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist(), "v0": self.v0.T.tolist(), "eta": self.eta.tolist()}


def find_frame(space: QuadraticSpace) -> IsotropicFrame:
    """Frame from a positive and a negative eigenvector of the sigma_1 Gram matrix."""
    g = space.gram_embedded[0]
    w, u = np.linalg.eigh(g)
    if w[0] >= 0 or w[-1] <= 0:
        raise DomainError("the space is definite at sigma_1; no isotropic vectors")
    neg = int(np.sum(w < 0))
    if neg != 2 or space.rank < 3:
        raise DomainError(f"sigma_1 signature must be (n,2) with n >= 1, got ({space.rank - neg},{neg})")
    e_minus = _fix_sign(u[:, 0]) / np.sqrt(-w[0])
    e_plus = _fix_sign(u[:, -1]) / np.sqrt(w[-1])
    a = (e_plus + e_minus) / np.sqrt(2)
    b = (e_plus - e_minus) / np.sqrt(2)
    return IsotropicFrame.from_vectors(g, a, b)


@dataclass(frozen=True, eq=False)
class DomainPoint:
    frame: IsotropicFrame
    z: np.ndarray  # complex coordinates on frame.v0

    def __post_init__(self):
        z = np.asarray(self.z, dtype=complex)
        object.__setattr__(self, "z", z)
        if z.shape != (self.frame.v0.shape[1],):
            raise DomainError("point has the wrong number of coordinates")
        y = z.imag
        qy = 0.5 * np.sum(self.frame.eta * y * y)
        if not qy < 0:
            raise DomainError("Q(Im z) must be negative")
        if y[0] <= 0:
            raise DomainError("Im z lies in the opposite cone (component not supported)")

    @staticmethod
    def from_vector(frame: IsotropicFrame, zvec) -> "DomainPoint":
        zvec = np.asarray(zvec, dtype=complex)
        coords = (frame.v0.T @ frame.gram @ zvec) * frame.eta
        return DomainPoint(frame, coords)

    @staticmethod
    def from_isotropic(frame: IsotropicFrame, w) -> "DomainPoint":
        """The point of the domain represented by an isotropic vector w (up to scaling)."""
        w = np.asarray(w, dtype=complex)
        j = frame.bil(w, frame.b)
        if abs(j) < 1e-14:
            raise DomainError("isotropic vector is orthogonal to b")
        w = w / j
        zvec = w - frame.a - frame.bil(w, frame.a) * frame.b
        return DomainPoint.from_vector(frame, zvec)

    @cached_property
    def zvec(self) -> np.ndarray:
        return self.frame.v0 @ self.z

    @cached_property
    def q_z(self) -> complex:
        return 0.5 * complex(np.sum(self.frame.eta * self.z * self.z))

    @cached_property
    def w(self) -> np.ndarray:
        return self.zvec + self.frame.a - self.q_z * self.frame.b

    @cached_property
    def X(self) -> np.ndarray:
        return self.w.real

    @cached_property
    def Y(self) -> np.ndarray:
        return self.w.imag

    @cached_property
    def y_norm2(self) -> float:
        return float(-self.frame.bil(self.Y, self.Y))

    def check(self) -> dict:
        f = self.frame
        scale = max(1.0, float(np.max(np.abs(self.w))) ** 2)
        return {
            "Q(w)": abs(0.5 * (self.w @ f.gram @ self.w)) / scale,
            "(w,conj w)": float((self.w @ f.gram @ self.w.conj()).real),
            "|Y|^2": self.y_norm2,
        }


@dataclass(frozen=True)
class MajorantSplit:
    q_perp: np.ndarray  # (..., d)
    q_neg: np.ndarray  # (...)


def neg_projection_q(parts1: np.ndarray, z: DomainPoint) -> np.ndarray:
    """Q(lambda_z) = -((lambda, X)^2 + (lambda, Y)^2) / (2 |Y|^2) for sigma_1-images (..., l)."""
    g = z.frame.gram
    lx = parts1 @ (g @ z.X)
    ly = parts1 @ (g @ z.Y)
    return -(lx * lx + ly * ly) / (2 * z.y_norm2)


def majorant_split_parts(parts: Sequence[np.ndarray], z: DomainPoint, space: QuadraticSpace) -> MajorantSplit:
    """Vectorised split for sigma_i-images of vectors, parts[i] of shape (..., l)."""
    grams = space.gram_embedded
    q = [0.5 * np.einsum("...i,ij,...j->...", x, g, x) for x, g in zip(parts, grams)]
    qneg = neg_projection_q(parts[0], z)
    q_perp = np.stack([q[0] - qneg] + q[1:], axis=-1)
    return MajorantSplit(q_perp, qneg)


def majorant_split(lam_fcoords: Sequence, z: DomainPoint, space: QuadraticSpace) -> MajorantSplit:
    """Split of a single vector given in F-coordinates (exact rationals or floats)."""
    v = np.array([float(x) for x in lam_fcoords])
    parts = [v @ m for m in space.embed_matrices]
    return majorant_split_parts(parts, z, space)


def majorant_form(space: QuadraticSpace, z: DomainPoint, weights: Sequence[float] | None = None) -> MajorantForm:
    """sum_i w_i (Q(lambda_{z perp})_i) - w_1 Q(lambda_z) as per-embedding blocks (w_i = 1 by default)."""
    d = space.field.degree
    weights = np.ones(d) if weights is None else np.asarray(weights, dtype=float)
    g1 = space.gram_embedded[0]
    u = g1 @ z.X
    t = g1 @ z.Y
    p1 = 0.5 * g1 + (np.outer(u, u) + np.outer(t, t)) / z.y_norm2
    blocks = [weights[0] * p1] + [weights[i] * 0.5 * space.gram_embedded[i] for i in range(1, d)]
    return MajorantForm(tuple(blocks))


# -- isometries -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Isometry:
    """An F-linear isometry of V acting on column vectors: x -> g x."""

    space: QuadraticSpace
    matrix: tuple  # l x l FieldElements

    def __post_init__(self):
        g = self.matrix
        l = self.space.rank
        if len(g) != l or any(len(r) != l for r in g):
            raise DomainError("isometry must be l x l")
        gram = self.space.gram
        f = self.space.field
        for i in range(l):
            for j in range(l):
                acc = f.zero
                for r in range(l):
                    if g[r][i].is_zero():
                        continue
                    for s in range(l):
                        if not g[s][j].is_zero() and not gram[r][s].is_zero():
                            acc = acc + g[r][i] * gram[r][s] * g[s][j]
                if acc != gram[i][j]:
                    raise DomainError("matrix does not preserve the quadratic form")

    @staticmethod
    def from_rational(space: QuadraticSpace, rows) -> "Isometry":
        f = space.field
        return Isometry(space, tuple(tuple(f(_exact.frac(x)) if not isinstance(x, FieldElement) else x for x in r)
                                     for r in rows))

    @cached_property
    def embedded(self) -> tuple[np.ndarray, ...]:
        l = self.space.rank
        vals = [[self.matrix[i][j].embed() for j in range(l)] for i in range(l)]
        return tuple(np.array([[vals[i][j][e] for j in range(l)] for i in range(l)]) for e in range(self.space.field.degree))

    def fcoord_matrix(self) -> list[list]:
        """Matrix acting on F-coordinate row vectors."""
        f = self.space.field
        d, l = f.degree, self.space.rank
        bs = f.basis_elements()
        nn = d * l
        m = [[0] * nn for _ in range(nn)]
        for k in range(l):  # source component
            for a in range(d):
                for j in range(l):
                    img = (self.matrix[j][k] * bs[a]).coords
                    for c in range(d):
                        m[k * d + a][j * d + c] = img[c]
        return m

    def preserves(self, lat: OFLattice) -> bool:
        m = _exact.matmul(_exact.matmul(lat.basis, self.fcoord_matrix()), lat._basis_inv)
        return _exact.is_integral(m) and abs(_exact.det(m)) == 1

    def act_lcoords(self, lat: OFLattice, x):
        m = _exact.matmul(_exact.matmul(lat.basis, self.fcoord_matrix()), lat._basis_inv)
        return _exact.vecmat(x, m)


def automorphy_j(gamma: Isometry, z: DomainPoint) -> tuple[complex, DomainPoint]:
    """j(gamma, z) = (gamma w(z), b) and the image point gamma z with gamma w(z) = j w(gamma z)."""
    g1 = gamma.embedded[0]
    gw = g1 @ z.w
    j = complex(z.frame.bil(gw, z.frame.b))
    try:
        gz = DomainPoint.from_isotropic(z.frame, gw)
    except DomainError as exc:
        raise DomainError(f"gamma does not preserve the chosen component: {exc}") from None
    return j, gz


def petersson_factor(z: DomainPoint, weight: float) -> float:
    """|Y|^weight = (|Y|^2)^(weight/2)."""
    return z.y_norm2 ** (weight / 2)


def point_on_divisor(frame: IsotropicFrame, lam1: np.ndarray) -> DomainPoint:
    """A point z with lambda_z = 0, for a sigma_1-image lam1 with Q(lam1) > 0."""
    g = frame.gram
    lam1 = np.asarray(lam1, dtype=float)
    if lam1 @ g @ lam1 <= 0:
        raise DomainError("the divisor of lambda is empty unless Q(lambda_1) > 0")
    comp = null_space((g @ lam1)[None, :])
    w, u = np.linalg.eigh(comp.T @ g @ comp)
    x = comp @ u[:, 0] / np.sqrt(-w[0])
    y = comp @ u[:, 1] / np.sqrt(-w[1])
    for cand in (x + 1j * y, x - 1j * y):
        try:
            return DomainPoint.from_isotropic(frame, cand)
        except DomainError:
            continue
    raise DomainError("no point of the chosen component lies on this divisor")
