"""Automorphic Green functions: lattice sums of hypergeometric kernels and their behaviour at s0.

Phi_{m,mu}(z, s) = sum over lambda in mu + L with Q(lambda) = m of phi(lambda, z, s), where

    phi = Gamma(a)/Gamma(s+1) w^a F(a, b, s+1; w),  a = s/2 + n/4,  b = s/2 - n/4 + 1,
    w = Q(lambda_1) / Q(lambda_{1 z perp}) in (0, 1].

The sum is taken with a smooth cutoff psi(Q(lambda_{1z perp}) / R); the remainder is modelled by
the comparison integral against the count growth N(X) ~ kappa X^{n/2}, with kappa fitted from the
enumerated vectors. The model is explicit in s, so its Laurent expansion at s0 = n/2 is
available in closed form; this gives both the residue 2 kappa m_1^{n/2} and the constant term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import digamma, gammaln

from .domain import DomainPoint, majorant_form, majorant_split_parts
from .field import FieldElement, codifferent, is_totally_positive
from .lattice import OFLattice, enumerate_ints
from .specfun import DEFAULT, _f21_log_case, reglift_g


class GreenError(ArithmeticError):
    pass


@dataclass(frozen=True)
class GreenParams:
    s: float
    truncation_radius: float = 2.0e5
    singular_threshold: float = 1e-6
    pole_steps: tuple[float, ...] = (0.1, 0.05, 0.025)
    cutoff_start: float = 0.5  # psi = 1 below cutoff_start * R
    tail_correction: bool = True

    def __post_init__(self):
        if not 0 < self.singular_threshold < 1e-2:
            raise ValueError("singular_threshold must lie in (0, 1e-2)")
        if self.truncation_radius <= 0:
            raise ValueError("truncation_radius must be positive")
        if not 0 < self.cutoff_start < 1:
            raise ValueError("cutoff_start must lie in (0, 1)")


@dataclass
class GreenValue:
    value: float
    tail_estimate: float
    singular_terms: list = dc_field(default_factory=list)
    regularization_applied: bool = False
    partial_sum: float = 0.0
    truncation_radius: float = 0.0
    n_terms: int = 0
    kappa: float = 0.0


# -- kernel -----------------------------------------------------------------------

def _f21_series_vec(a: float, b: float, c: float, w: np.ndarray, tol: float = 1e-16) -> np.ndarray:
    """Vectorised Gauss series for 0 <= w <= 1/2."""
    total = np.ones_like(w)
    term = np.ones_like(w)
    for k in range(200):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1))) * w
        total += term
        if np.all(np.abs(term) <= tol * np.abs(total)):
            break
    return total


def phi_values(w: np.ndarray, one_minus_w: np.ndarray, s: float, n: int, route: str = "auto") -> np.ndarray:
    """phi for arrays of w (with 1 - w supplied separately to keep precision near the divisor).

    route "series": Gauss series for w <= 1/2 and the logarithmic connection formula above.
    route "closed" (s = s0 only): reglift_g(n, w) - log(1 - w) for every w.
    route "auto": the series, except that w > 1/2 at s = s0 uses the closed form.
    The closed form loses relative accuracy as w -> 0 (phi ~ w^{n/2} is a difference of O(w) terms).
    """
    w = np.asarray(w, dtype=float)
    x = np.asarray(one_minus_w, dtype=float)
    if np.any(w > 1 + 1e-10) or np.any(w <= 0):
        raise GreenError("kernel argument outside (0, 1]: enumeration or geometry bug")
    if route not in ("auto", "series", "closed"):
        raise GreenError(f"unknown route {route!r}")
    at_s0 = s == n / 2
    if route == "closed" and not at_s0:
        raise GreenError("the closed form holds only at s = s0 = n/2")
    closed = np.zeros(w.shape, dtype=bool)
    if at_s0 and route != "series":
        closed = np.ones(w.shape, dtype=bool) if route == "closed" else w > 0.5
    a = s / 2 + n / 4
    b = s / 2 - n / 4 + 1
    c = s + 1
    pre = math.exp(gammaln(a) - gammaln(s + 1))
    out = np.empty_like(w)
    for i in np.nonzero(closed)[0]:
        out[i] = reglift_g(n, min(float(w[i]), 1.0)) - math.log(x[i]) if x[i] > 0 else math.inf
    small = (w <= 0.5) & ~closed
    if np.any(small):
        ws = w[small]
        out[small] = pre * ws**a * _f21_series_vec(a, b, c, ws)
    for i in np.nonzero(~small & ~closed)[0]:
        xi = float(x[i])
        out[i] = pre * float(w[i]) ** a * _f21_log_case(a, b, xi, DEFAULT) if xi > 0 else math.inf
    return out


def phi_term(w: float, s: float, n: int, one_minus_w: float | None = None) -> float:
    """phi(lambda, z, s) as a function of w = Q(lambda_1)/Q(lambda_{1 z perp}).

    At s = s0 = n/2 the kernel equals reglift_g(n, w) - log(1 - w).
    """
    x = 1 - w if one_minus_w is None else one_minus_w
    return float(phi_values(np.array([w]), np.array([x]), s, n)[0])


# -- smooth cutoff and the count model ------------------------------------------------

def _smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f = np.where(x > 0, np.exp(-1 / np.where(x > 0, x, 1)), 0.0)
        g = np.where(x < 1, np.exp(-1 / np.where(x < 1, 1 - x, 1)), 0.0)
        return f / (f + g)


def cutoff(t, start: float) -> np.ndarray:
    """psi(t): 1 for t <= start, 0 for t >= 1, smooth in between."""
    return _smooth_step((1 - np.asarray(t, dtype=float)) / (1 - start))


@lru_cache(maxsize=64)
def _cutoff_moment(start: float, p: float) -> float:
    """int_0^1 psi(t) t^{p-1} dt."""
    head = start**p / p
    body, _ = quad(lambda t: float(cutoff(t, start)) * t ** (p - 1), start, 1, epsabs=1e-14, epsrel=1e-13)
    return head + body


@lru_cache(maxsize=256)
def _tail_kernel(start: float, eps: float) -> float:
    """K(eps) = int_start^1 t^{-1-eps} (1 - psi(t)) dt."""
    val, _ = quad(lambda t: (1 - float(cutoff(t, start))) * t ** (-1 - eps), start, 1, epsabs=1e-14, epsrel=1e-13)
    return val


def fit_kappa(q_perp: np.ndarray, radius: float, n: int, start: float) -> float:
    """kappa in N(X) ~ kappa X^{n/2} from the smoothed count sum psi(X/R).

    Using every enumerated vector keeps the relative noise near the lattice-count error of the
    whole ball; the bias from the non-asymptotic region is O(1 / N(R)).
    """
    p = n / 2
    return float(np.sum(cutoff(q_perp / radius, start))) / (radius**p * p * _cutoff_moment(start, p))


def tail_model(s: float, n: int, m1: float, kappa: float, radius: float, start: float) -> float:
    """Modelled remainder int phi(X) (1 - psi(X/R)) dN(X) with N(X) = kappa X^{n/2}, for s > s0."""
    a = s / 2 + n / 4
    eps = (s - n / 2) / 2
    h = math.exp(gammaln(a) - gammaln(s + 1) + a * math.log(m1) - eps * math.log(radius)) * kappa * n / 2
    return h * (1 / eps + _tail_kernel(start, eps))


def tail_laurent(n: int, m1: float, kappa: float, radius: float, start: float) -> tuple[float, float]:
    """(residue, constant term) of tail_model at s = s0 = n/2."""
    a0 = n / 2
    s0 = n / 2
    h0 = math.exp(gammaln(a0) - gammaln(s0 + 1) + a0 * math.log(m1)) * kappa * n / 2
    dlog = 0.5 * math.log(m1) + 0.5 * float(digamma(a0)) - float(digamma(s0 + 1)) - 0.5 * math.log(radius)
    return 2 * h0, 2 * h0 * dlog + h0 * _tail_kernel(start, 0.0)


# -- enumeration ------------------------------------------------------------------

@dataclass
class _Terms:
    lcoords: np.ndarray  # float L-coordinates of the vectors
    q_perp1: np.ndarray
    q_neg: np.ndarray
    m1: float
    n: int
    radius: float
    start: float

    @property
    def w(self) -> np.ndarray:
        return self.m1 / self.q_perp1

    @property
    def one_minus_w(self) -> np.ndarray:
        return -self.q_neg / self.q_perp1

    @property
    def weights(self) -> np.ndarray:
        return cutoff(self.q_perp1 / self.radius, self.start)


def check_index(lat: OFLattice, m: FieldElement, mu: int) -> None:
    if not is_totally_positive(m):
        raise GreenError("m must be totally positive")
    dg = lat.discriminant_group
    if not codifferent(lat.field).contains(m - dg.q_values[mu]):
        raise GreenError("m - Q(mu) is not in the codifferent")


def enumerate_terms(lat: OFLattice, mu: int, m: FieldElement, z: DomainPoint, radius: float,
                    start: float = 0.5) -> _Terms:
    """All lambda in mu + L with Q(lambda) = m and Q(lambda_{1 z perp}) <= radius."""
    check_index(lat, m, mu)
    sp = lat.space
    m_emb = m.embed()
    m1 = m_emb[0]
    trm = m.trace()
    bound = float(trm) + 2 * (radius - m1)
    form = majorant_form(sp, z)
    x, c = enumerate_ints(lat, mu, form, bound, level=trm)
    if lat.field.degree > 1 and len(x):
        reps = lat.discriminant_group.coset_reps[mu]
        keep = [lat.Q([Fraction(int(xi)) + ci for xi, ci in zip(row, reps)]) == m for row in x.tolist()]
        x = x[np.array(keep, dtype=bool)]
    y = x + c
    if len(y) == 0:
        return _Terms(y, np.zeros(0), np.zeros(0), m1, sp.n, radius, start)
    parts = lat.embed_lcoords(y)
    split = majorant_split_parts(parts, z, sp)
    q1 = split.q_perp[:, 0]
    keep = q1 <= radius
    return _Terms(y[keep], q1[keep], split.q_neg[keep], m1, sp.n, radius, start)


# -- evaluation -------------------------------------------------------------------------

def _evaluate(terms: _Terms, s: float, params: GreenParams, at_s0: bool = False) -> GreenValue:
    n = terms.n
    w = terms.w
    if np.any(w > 1 + 1e-10):
        raise GreenError("found w > 1 (violates m_1 <= Q(lambda_{1z perp}))")
    x = terms.one_minus_w
    phis = phi_values(np.minimum(w, 1.0), x, s, n)
    wts = terms.weights
    partial = float(np.sum(wts * phis)) if len(phis) else 0.0
    kappa = fit_kappa(terms.q_perp1, terms.radius, n, terms.start) if len(phis) else 0.0
    if at_s0:
        residue, const = tail_laurent(n, terms.m1, kappa, terms.radius, terms.start) if kappa > 0 else (0.0, 0.0)
        tail = const
    else:
        tail = tail_model(s, n, terms.m1, kappa, terms.radius, terms.start) if kappa > 0 else 0.0
    singular = [
        (terms.lcoords[i].tolist(), float(w[i]), float(wts[i] * phis[i]))
        for i in np.nonzero(x < params.singular_threshold)[0]
    ]
    value = partial + (tail if params.tail_correction else 0.0)
    return GreenValue(value, abs(tail), singular, False, partial, terms.radius, len(phis), kappa)


def green_eval(lat: OFLattice, mu: int, m: FieldElement, z: DomainPoint, params: GreenParams,
               terms: _Terms | None = None) -> GreenValue:
    """Phi_{m,mu}(z, s) for s > s0 (series with modelled remainder)."""
    n = lat.space.n
    if params.s <= n / 2:
        raise GreenError(f"the series needs s > s0 = {n / 2}")
    if terms is None:
        terms = enumerate_terms(lat, mu, m, z, params.truncation_radius, params.cutoff_start)
    return _evaluate(terms, params.s, params)


def green_constant_term(lat: OFLattice, mu: int, m: FieldElement, z: DomainPoint, params: GreenParams,
                        terms: _Terms | None = None) -> GreenValue:
    """Constant term of the Laurent expansion at s0: sum of phi(., s0) plus the model's constant."""
    if terms is None:
        terms = enumerate_terms(lat, mu, m, z, params.truncation_radius, params.cutoff_start)
    return _evaluate(terms, lat.space.n / 2, params, at_s0=True)


def green_regularized_at_point(lat: OFLattice, mu: int, m: FieldElement, z: DomainPoint, params: GreenParams,
                               terms: _Terms | None = None) -> tuple[float, int, GreenValue]:
    """(regular part, number of stripped log terms, raw value) at s0.

    The regular part replaces phi(lambda, z, s0) for every lambda within the singular window by
    reglift_g(n, w) + log Q(lambda_{1 z perp}), i.e. adds log|Q(lambda_{1z})| for each such term.
    """
    if terms is None:
        terms = enumerate_terms(lat, mu, m, z, params.truncation_radius, params.cutoff_start)
    raw = green_constant_term(lat, mu, m, z, params, terms)
    x = terms.one_minus_w
    idx = np.nonzero(x < params.singular_threshold)[0]
    if len(idx) > 64:
        raise GreenError("too many near-singular terms; the singular window is not local")
    reg = raw.value
    for i in idx:
        wt = float(cutoff(terms.q_perp1[i] / terms.radius, terms.start))
        reg += wt * math.log(abs(terms.q_neg[i]))
    raw.regularization_applied = len(idx) > 0
    return reg, len(idx), raw


def fit_pole(eps: Sequence[float], values: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares fit values ~ c + A/eps; returns (c, A, max residual)."""
    e = np.asarray(eps, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(e) < 2:
        raise GreenError("need at least two steps for the pole fit")
    design = np.stack([np.ones_like(e), 1 / e], axis=1)
    coef, *_ = np.linalg.lstsq(design, v, rcond=None)
    resid = float(np.max(np.abs(design @ coef - v)))
    return float(coef[0]), float(coef[1]), resid


@dataclass
class PoleEstimate:
    constant_term: float
    residue: float
    fit_residual: float
    steps: list
    values: list
    laurent_residue: float
    laurent_constant: float


def pole_extrapolate(lat: OFLattice, mu: int, m: FieldElement, z: DomainPoint, params: GreenParams,
                     residual_threshold: float | None = None) -> PoleEstimate:
    """Fit Phi(s0 + eps) ~ c + A/eps over params.pole_steps; also report the model's exact Laurent data."""
    n = lat.space.n
    s0 = n / 2
    terms = enumerate_terms(lat, mu, m, z, params.truncation_radius, params.cutoff_start)
    if np.any(terms.one_minus_w < params.singular_threshold):
        raise GreenError("z lies within the singular window of the divisor")
    vals = [_evaluate(terms, s0 + e, params).value for e in params.pole_steps]
    c, a, resid = fit_pole(params.pole_steps, vals)
    if residual_threshold is not None and resid > residual_threshold:
        raise GreenError(f"pole fit residual {resid:.3e} above threshold")
    const = green_constant_term(lat, mu, m, z, params, terms)
    kappa = const.kappa
    lres = tail_laurent(n, terms.m1, kappa, terms.radius, terms.start)[0] if kappa > 0 else 0.0
    return PoleEstimate(c, a, resid, list(params.pole_steps), vals, lres, const.value)


def green_linear(f, lat: OFLattice, z: DomainPoint, params: GreenParams, at_s0: bool = False) -> GreenValue:
    """Phi(z, s, f) = sum c(m, mu) Phi_{m,mu}(z, s)."""
    total = GreenValue(0.0, 0.0)
    for (m, mu), c in f.terms.items():
        c = float(c.real) if isinstance(c, complex) else float(c)
        if c == 0:
            continue
        g = green_constant_term(lat, mu, m, z, params) if at_s0 else green_eval(lat, mu, m, z, params)
        total.value += c * g.value
        total.partial_sum += c * g.partial_sum
        total.tail_estimate += abs(c) * g.tail_estimate
        total.singular_terms.extend(g.singular_terms)
        total.n_terms += g.n_terms
        total.truncation_radius = max(total.truncation_radius, g.truncation_radius)
    total.regularization_applied = bool(total.singular_terms)
    return total
