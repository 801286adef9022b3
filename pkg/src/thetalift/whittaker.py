"""Harmonic Whittaker forms: evaluation, the delta_k operator, pairings and the B(f) constant.

Storage convention: a form stores *totally positive* indices m and represents
f = sum c(m, mu) f_{-m, mu}, i.e. every stored m stands for the index -m << 0 of the
basic function. Index compatibility is m - Q(mu) in the codifferent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import mpmath
import numpy as np
from scipy.special import gamma

from .field import FieldElement, codifferent, is_totally_positive
from .lattice import OFLattice
from .specfun import DEFAULT, EvalPolicy, m_cal, upper_gamma
from .theta import SiegelPoint


class WhittakerError(ValueError):
    pass


@dataclass(frozen=True)
class WeightVector:
    k: tuple[Fraction, ...]

    def __post_init__(self):
        k = tuple(Fraction(x) for x in self.k)
        if any((2 * x).denominator != 1 for x in k):
            raise WhittakerError("weights must be half-integers")
        object.__setattr__(self, "k", k)

    @staticmethod
    def for_lift(n: int, d: int) -> "WeightVector":
        """k = ((2-n)/2, (2+n)/2, ..., (2+n)/2)."""
        return WeightVector((Fraction(2 - n, 2),) + (Fraction(2 + n, 2),) * (d - 1))

    @property
    def s0(self) -> Fraction:
        return 1 - self.k[0]

    @property
    def kappa(self) -> tuple[Fraction, ...]:
        return (2 - self.k[0],) + self.k[1:]

    def check_rank(self, rank: int) -> None:
        half = Fraction(rank, 2)
        if any((x - half).denominator != 1 for x in self.k):
            raise WhittakerError(f"weight {self.k} is not congruent to l/2 = {half} mod Z")


def index_compatible(lat: OFLattice, m: FieldElement, mu: int) -> bool:
    dg = lat.discriminant_group
    return codifferent(lat.field).contains(m - dg.q_values[mu])


@dataclass(frozen=True)
class WhittakerForm:
    weight: WeightVector
    terms: Mapping  # (m, mu) -> coefficient

    def validate(self, lat: OFLattice) -> None:
        self.weight.check_rank(lat.space.rank)
        for (m, mu) in self.terms:
            if not is_totally_positive(m):
                raise WhittakerError(f"index {m} is not totally positive")
            if not 0 <= mu < lat.discriminant_group.order:
                raise WhittakerError(f"coset index {mu} out of range")
            if not index_compatible(lat, m, mu):
                raise WhittakerError(f"m - Q(mu) is not in the codifferent for (m, mu) = ({m}, {mu})")

    def __add__(self, other: "WhittakerForm") -> "WhittakerForm":
        if other.weight != self.weight:
            raise WhittakerError("weights differ")
        t = dict(self.terms)
        for key, c in other.terms.items():
            t[key] = t.get(key, 0) + c
        return WhittakerForm(self.weight, t)

    def scale(self, c) -> "WhittakerForm":
        return WhittakerForm(self.weight, {key: c * v for key, v in self.terms.items()})


@dataclass(frozen=True)
class CuspFormData:
    weight: tuple[Fraction, ...]
    coeffs: Mapping  # (n, nu) -> b(n, nu)


@dataclass(frozen=True)
class EisensteinData:
    coeffs: Mapping  # (m, mu) -> B(m, mu)


def _norm_const(m_emb: Sequence[float], k: Sequence[Fraction], s: float) -> float:
    """C(-m, k, s) = prod_{j>=2} |4 pi m_j|^{k_j - 1} / (Gamma(s+1) prod_{j>=2} Gamma(k_j - 1))."""
    num = 1.0
    den = float(gamma(s + 1))
    for mj, kj in zip(m_emb[1:], k[1:]):
        kj = float(kj)
        if kj - 1 <= 0 and abs(kj - 1 - round(kj - 1)) < 1e-14:
            raise WhittakerError("Gamma(k_j - 1) has a pole")
        num *= abs(4 * math.pi * mj) ** (kj - 1)
        den *= float(gamma(kj - 1))
    if den == 0 or not math.isfinite(den):
        raise WhittakerError("normalising constant has a Gamma pole")
    return num / den


def _phase(m_emb, tau: SiegelPoint) -> complex:
    return complex(np.exp(-2j * math.pi * float(np.dot(m_emb, tau.u))))


def eval_f(lat_or_order, m: FieldElement, mu: int, tau: SiegelPoint, s: float, weight: WeightVector,
           policy: EvalPolicy = DEFAULT) -> np.ndarray:
    """f_{-m,mu}(tau, s) = C(-m,k,s) M_s(-4 pi m v) e(-tr(m u)) chi_mu as a coset vector."""
    order = lat_or_order.discriminant_group.order if isinstance(lat_or_order, OFLattice) else int(lat_or_order)
    k = weight.k
    if s < float(weight.s0) - 1e-12:
        raise WhittakerError("s must satisfy s >= s0")
    m_emb = np.array(m.embed())
    vv = -4 * math.pi * m_emb * tau.v
    val = _norm_const(m_emb, k, s) * m_cal(s, vv, float(k[0]), policy) * _phase(m_emb, tau)
    out = np.zeros(order, dtype=complex)
    out[mu] = val
    return out


def eval_f_closed(lat_or_order, m: FieldElement, mu: int, tau: SiegelPoint, weight: WeightVector,
                  policy: EvalPolicy = DEFAULT) -> np.ndarray:
    """The harmonic case s = s0 through the incomplete gamma function."""
    order = lat_or_order.discriminant_group.order if isinstance(lat_or_order, OFLattice) else int(lat_or_order)
    k = weight.k
    k1 = float(k[0])
    s0 = float(weight.s0)
    m_emb = np.array(m.embed())
    v = tau.v
    x = 4 * math.pi * m_emb[0] * v[0]
    bracket = 1 - upper_gamma(1 - k1, x, policy) / float(gamma(1 - k1))
    expo = 2 * math.pi * m_emb[0] * v[0] - 2 * math.pi * float(np.dot(m_emb[1:], v[1:]))
    val = _norm_const(m_emb, k, s0) * float(gamma(2 - k1)) * bracket * math.exp(expo) * _phase(m_emb, tau)
    out = np.zeros(order, dtype=complex)
    out[mu] = val
    return out


def eval_form(f: WhittakerForm, order: int, tau: SiegelPoint, s: float | None = None,
              policy: EvalPolicy = DEFAULT) -> np.ndarray:
    s = float(f.weight.s0) if s is None else s
    out = np.zeros(order, dtype=complex)
    for (m, mu), c in f.terms.items():
        out += complex(c) * eval_f(order, m, mu, tau, s, f.weight, policy)
    return out


def delta_k_closed(lat_or_order, m: FieldElement, mu: int, tau: SiegelPoint, weight: WeightVector) -> np.ndarray:
    """delta_k(f_{-m,mu}) = prod_j |4 pi m_j|^{kappa_j - 1} / Gamma(kappa_j - 1) e(tr(m tau)) chi_mu."""
    order = lat_or_order.discriminant_group.order if isinstance(lat_or_order, OFLattice) else int(lat_or_order)
    m_emb = np.array(m.embed())
    const = 1.0
    for mj, kj in zip(m_emb, weight.kappa):
        kj = float(kj)
        const *= abs(4 * math.pi * mj) ** (kj - 1) / float(gamma(kj - 1))
    t = np.array(tau.tau)
    out = np.zeros(order, dtype=complex)
    out[mu] = const * np.exp(2j * math.pi * float(np.dot(m_emb, t.real))) * math.exp(-2 * math.pi * float(np.dot(m_emb, t.imag)))
    return out


def delta_k_numeric(lat_or_order, m: FieldElement, mu: int, tau: SiegelPoint, weight: WeightVector,
                    dps: int = 40) -> np.ndarray:
    """v_1^{k_1-2} conj(-2 i v_1^2 df/d conj(tau_1)) by numerical differentiation at s = s0.

    The tau_1-dependent factor of f_{-m,mu} is re-evaluated with mpmath at ``dps`` digits so that
    the large holomorphic part of f cancels without loss; the remaining factors are constants.
    """
    order = lat_or_order.discriminant_group.order if isinstance(lat_or_order, OFLattice) else int(lat_or_order)
    k = weight.k
    k1 = float(k[0])
    s0 = float(weight.s0)
    m_emb = np.array(m.embed())
    with mpmath.workdps(dps):
        m1 = mpmath.mpf(m_emb[0])
        kk = mpmath.mpf(k1)

        def g(u, v):
            x = 4 * mpmath.pi * m1 * v
            return x ** (-kk / 2) * mpmath.whitm(-kk / 2, mpmath.mpf(s0) / 2, x) * mpmath.expjpi(-2 * m1 * u)

        u1, v1 = mpmath.mpf(tau.u[0]), mpmath.mpf(tau.v[0])
        d_u = mpmath.diff(lambda t: g(t, v1), u1)
        d_v = mpmath.diff(lambda t: g(u1, t), v1)
        dbar = (d_u + 1j * d_v) / 2
        inner = complex(v1 ** (kk - 2) * mpmath.conj(-2j * v1**2 * dbar))
    rest = -2 * math.pi * float(np.dot(m_emb[1:], tau.v[1:]))
    const = _norm_const(m_emb, k, s0) * math.exp(rest)
    phase_rest = np.exp(-2j * math.pi * float(np.dot(m_emb[1:], tau.u[1:])))
    out = np.zeros(order, dtype=complex)
    out[mu] = inner * np.conj(const * phase_rest)
    return out


def pairing(g: CuspFormData, f: WhittakerForm):
    """{g, f} = sum c(m, mu) b(m, mu) (missing coefficients of g count as zero)."""
    if tuple(Fraction(x) for x in g.weight) != f.weight.kappa:
        raise WhittakerError(f"cusp form weight {g.weight} is not the dual weight {f.weight.kappa}")
    total = 0
    for key, c in f.terms.items():
        b = g.coeffs.get(key, 0)
        total = total + c * b
    return total


@dataclass(frozen=True)
class ObstructionReport:
    values: list
    weakly_holomorphic: bool
    assumption: str = "the supplied cusp forms span the full space of cusp forms of dual weight"


def weak_holomorphy_obstruction(f: WhittakerForm, basis: Sequence[CuspFormData], tol: float = 0.0) -> ObstructionReport:
    vals = [pairing(g, f) for g in basis]
    return ObstructionReport(vals, all(abs(v) <= tol for v in vals))


@dataclass(frozen=True)
class BfReport:
    b_of_f: object
    weight_of_psi: object
    a_of_f: object


def b_of_f(f: WhittakerForm, eis: EisensteinData) -> BfReport:
    """B(f) = sum c(m,mu) B(m,mu); the Borcherds-type product has weight -B(f) and A(f) = -2 B(f)."""
    missing = [key for key in f.terms if key not in eis.coeffs]
    if missing:
        raise WhittakerError("missing Eisenstein coefficients for " + ", ".join(f"(m={m}, mu={mu})" for m, mu in missing))
    total = 0
    for key, c in f.terms.items():
        total = total + c * eis.coeffs[key]
    return BfReport(total, -total, -2 * total)


def a_relation_deviation(f: WhittakerForm, eis: EisensteinData, a_data: Mapping):
    """A(f) - (-2 B(f)) computed from supplied residue data A(m, mu)."""
    a_total = sum((c * a_data[key] for key, c in f.terms.items()), 0)
    return a_total - b_of_f(f, eis).a_of_f
