"""Vector-valued Siegel theta functions and a numerical check of their transformation law."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .domain import DomainPoint, majorant_form, majorant_split_parts
from .lattice import LatticeError, MajorantForm, OFLattice, enumerate_ints
from .specfun import DEFAULT, EvalPolicy
from .weilrep import Letter, word_matrix


class ThetaError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SiegelPoint:
    tau: tuple[complex, ...]

    def __post_init__(self):
        t = tuple(complex(x) for x in self.tau)
        if any(x.imag <= 0 for x in t):
            raise ValueError("all Im tau_i must be positive")
        object.__setattr__(self, "tau", t)

    @property
    def u(self) -> np.ndarray:
        return np.array([t.real for t in self.tau])

    @property
    def v(self) -> np.ndarray:
        return np.array([t.imag for t in self.tau])


@dataclass(frozen=True)
class ThetaValue:
    components: np.ndarray
    tail_estimate: float
    truncation_radius: float
    n_terms: int


def _count_bound(p: np.ndarray, t: float) -> float:
    """Upper bound for #{x in c + Z^N : x^T p x <= t} by packing unit cubes into an enlarged ellipsoid."""
    n = p.shape[0]
    lam = np.linalg.eigvalsh(p)
    rho = 0.5 * math.sqrt(n * lam[-1])
    log_vn = (n / 2) * math.log(math.pi) - gammaln(n / 2 + 1)
    r = math.sqrt(max(t, 0.0)) + rho
    return math.exp(log_vn + n * math.log(r) - 0.5 * float(np.sum(np.log(lam))))


def tail_bound(p: np.ndarray, radius: float) -> float:
    """Bound for sum over points with majorant > radius of exp(-2 pi majorant)."""
    total = 0.0
    for j in range(10_000):
        shell = _count_bound(p, radius + j + 1) * math.exp(-2 * math.pi * (radius + j))
        total += shell
        if shell < 1e-3 * total or shell < 1e-300:
            break
    return total


def choose_radius(p: np.ndarray, tol: float, start: float = 1.0, max_radius: float = 1e4) -> float:
    r = start
    while tail_bound(p, r) > tol:
        r *= 1.25
        if r > max_radius:
            raise ThetaError("tail bound not achievable within the radius budget")
    return r


def _weighted_majorant(lat: OFLattice, z: DomainPoint | None, v: np.ndarray) -> MajorantForm:
    if z is None:
        sig = lat.space.signatures()
        if any(q for _, q in sig):
            raise ThetaError("a domain point is required for indefinite lattices")
        return MajorantForm(tuple(vi * 0.5 * g for vi, g in zip(v, lat.space.gram_embedded)))
    return majorant_form(lat.space, z, v)


def siegel_theta(lat: OFLattice, z: DomainPoint | None, tau: SiegelPoint, policy: EvalPolicy = DEFAULT,
                 radius: float | None = None, tol: float | None = None) -> ThetaValue:
    """Theta_mu(tau, z) = v_1 sum_{lambda in mu+L} e(tr Q(lambda_{z perp}) tau + tr Q(lambda_z) conj tau).

    The truncation radius bounds the v-weighted majorant sum_i v_i (majorant_i); terms beyond it
    are controlled by a lattice-point counting bound.
    """
    if not lat.even_flag:
        raise ThetaError("theta functions need an even lattice")
    dg = lat.discriminant_group
    u, v = tau.u, tau.v
    form = _weighted_majorant(lat, z, v)
    p = lat.majorant_matrix(form)
    tol = policy.rel_tol if tol is None else tol
    if radius is None:
        radius = choose_radius(p, tol / (v[0] * dg.order))
    tail = v[0] * dg.order * tail_bound(p, radius)
    comps = np.zeros(dg.order, dtype=complex)
    nterms = 0
    for mu in range(dg.order):
        x, c = enumerate_ints(lat, mu, form, radius)
        if len(x) == 0:
            continue
        parts = lat.embed_lcoords(x + c)
        if z is None:
            grams = lat.space.gram_embedded
            q_perp = np.stack([0.5 * np.einsum("...i,ij,...j->...", y, g, y) for y, g in zip(parts, grams)], axis=-1)
            q_neg = np.zeros(len(x))
        else:
            sp = majorant_split_parts(parts, z, lat.space)
            q_perp, q_neg = sp.q_perp, sp.q_neg
        tau_arr = np.array(tau.tau)
        expo = q_perp @ tau_arr + q_neg * np.conj(tau_arr[0])
        terms = np.exp(2j * np.pi * expo)
        comps[mu] = v[0] * np.sum(terms)
        nterms += len(x)
    return ThetaValue(comps, float(tail), float(radius), nterms)


# -- transformation law -----------------------------------------------------------

def _act(letter: Letter, tau: np.ndarray) -> np.ndarray:
    if letter.kind == "T":
        return tau + np.array(letter.arg.embed())
    if letter.kind == "S":
        return -1 / tau
    raise ThetaError("transformation checks support only T_b and S letters")


def _letter_factor(letter: Letter, tau: np.ndarray, rank: int) -> complex:
    """(c_1 tau_1 + d_1)^{-2} phi(tau)^l for one letter, phi the principal branch of prod sqrt(c_i tau_i + d_i)."""
    if letter.kind == "T":
        return 1.0
    phi = 1.0 + 0j
    for t in tau:
        phi *= cmath.sqrt(t)
    return tau[0] ** -2 * phi**rank


def transform_factor(word: Sequence[Letter], tau: SiegelPoint, rank: int) -> tuple[SiegelPoint, complex]:
    """gamma tau for gamma = w_1 w_2 ... w_k and the composed factor, built right to left as a cocycle."""
    cur = np.array(tau.tau)
    factor = 1.0 + 0j
    for letter in reversed(list(word)):
        f = _letter_factor(letter, cur, rank)
        # |phi|^2 = |N(c tau + d)| guards the square-root bookkeeping
        if letter.kind == "S":
            if abs(abs(f) - abs(cur[0]) ** -2 * abs(np.prod(cur)) ** (rank / 2)) > 1e-9 * abs(f):
                raise ThetaError("branch tracking failed")
        factor *= f
        cur = _act(letter, cur)
    return SiegelPoint(tuple(cur)), factor


def transform_residual(lat: OFLattice, word: Sequence[Letter], z: DomainPoint | None, tau: SiegelPoint,
                       policy: EvalPolicy = DEFAULT, tol: float = 1e-10) -> dict:
    """max_mu |Theta(gamma tau) - (c_1 tau_1 + d_1)^{-2} phi(tau)^l rho(gamma) Theta(tau)|."""
    dg = lat.discriminant_group
    gtau, factor = transform_factor(word, tau, lat.space.rank)
    lhs = siegel_theta(lat, z, gtau, policy, tol=tol)
    rhs_theta = siegel_theta(lat, z, tau, policy, tol=tol)
    rho = word_matrix(dg, word).entries
    rhs = factor * (rho @ rhs_theta.components)
    res = float(np.max(np.abs(lhs.components - rhs)))
    return {
        "residual": res,
        "tail_lhs": lhs.tail_estimate,
        "tail_rhs": rhs_theta.tail_estimate * abs(factor) * float(np.max(np.sum(np.abs(rho), axis=1))),
        "radius_lhs": lhs.truncation_radius,
        "radius_rhs": rhs_theta.truncation_radius,
        "gamma_tau": [complex(t) for t in gtau.tau],
        "factor": complex(factor),
    }
