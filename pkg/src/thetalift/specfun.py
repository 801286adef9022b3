"""Confluent and Gauss hypergeometric functions, Whittaker functions and the regularised kernel.

Everything is double precision. Series are summed until the next term falls below
``rel_tol`` times the running sum (with a geometric tail bound where terms are
eventually monotone).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import digamma, exp1, gamma, gammaln


class SpecFunError(ArithmeticError):
    pass


@dataclass(frozen=True)
class EvalPolicy:
    rel_tol: float = 1e-12
    max_terms: int = 1_000_000
    near_one_threshold: float = 1 - 1e-8

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-6:
            raise ValueError("rel_tol must lie in (0, 1e-6]")
        if not 0 < self.near_one_threshold < 1:
            raise ValueError("near_one_threshold must lie in (0, 1)")
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")


DEFAULT = EvalPolicy()


def _is_nonpos_int(x: float) -> bool:
    return x <= 0 and abs(x - round(x)) < 1e-14


def _series(term_ratio, policy: EvalPolicy, first: float = 1.0) -> float:
    """Sum t_0 = first, t_{n+1} = t_n * term_ratio(n) with a ratio-based stopping rule."""
    total = first
    t = first
    tol = policy.rel_tol * 1e-2
    for n in range(policy.max_terms):
        r = term_ratio(n)
        t *= r
        total += t
        if t == 0.0:
            return total
        if abs(t) <= tol * abs(total):
            # remaining terms form a (roughly) geometric series with ratio r
            if abs(r) < 0.9 or abs(t) <= 1e-3 * tol * abs(total):
                return total
    raise SpecFunError("series did not converge within max_terms")


# -- Kummer M -----------------------------------------------------------------

def kummer_m(a: float, b: float, z: float, policy: EvalPolicy = DEFAULT) -> float:
    """Kummer's function M(a, b, z) = sum (a)_n / (b)_n z^n / n! for real arguments."""
    if _is_nonpos_int(b):
        raise SpecFunError("M(a,b,z) has a pole at nonpositive integer b")
    if z == 0 or a == 0:
        return 1.0
    if a == b:
        return math.exp(z)
    if z < 0:
        # Kummer's transformation keeps the series free of cancellation
        return math.exp(z) * kummer_m(b - a, b, -z, policy)
    if z > 60 and not _is_nonpos_int(a):
        val = _kummer_asymptotic(a, b, z, policy)
        if val is not None:
            return val
    return _series(lambda n: (a + n) / (b + n) * z / (n + 1), policy)


def _kummer_asymptotic(a: float, b: float, z: float, policy: EvalPolicy):
    """Leading large-z expansion Gamma(b)/Gamma(a) e^z z^(a-b) sum (b-a)_n (1-a)_n / n! z^-n."""
    total, t = 1.0, 1.0
    prev = math.inf
    for n in range(200):
        t *= (b - a + n) * (1 - a + n) / ((n + 1) * z)
        if abs(t) >= prev:
            return None
        total += t
        prev = abs(t)
        if abs(t) <= policy.rel_tol * 1e-2 * abs(total):
            sign = np.sign(gamma(b)) * np.sign(gamma(a))
            logmag = gammaln(b) - gammaln(a) + z + (a - b) * math.log(z)
            return float(sign * math.exp(logmag) * total)
    return None


# -- Whittaker functions ------------------------------------------------------

def whittaker_m(nu: float, mu: float, z: float, policy: EvalPolicy = DEFAULT) -> float:
    """M_{nu,mu}(z) = e^{-z/2} z^{1/2+mu} M(1/2+mu-nu, 1+2mu, z), z > 0."""
    if z <= 0:
        raise SpecFunError("Whittaker M needs z > 0")
    a, b = 0.5 + mu - nu, 1 + 2 * mu
    if z > 60:
        # combine exponentials before they overflow
        val = _kummer_asymptotic(a, b, z, policy) if not _is_nonpos_int(a) else None
        if val is not None:
            sign = np.sign(gamma(b)) * np.sign(gamma(a))
            logmag = gammaln(b) - gammaln(a) + z / 2 + (a - b + 0.5 + mu) * math.log(z)
            return float(sign * math.exp(logmag) * (val / (sign * math.exp(gammaln(b) - gammaln(a) + z + (a - b) * math.log(z)))))
    return math.exp(-z / 2) * z ** (0.5 + mu) * kummer_m(a, b, z, policy)


def _whittaker_w_direct(nu: float, mu: float, z: float, policy: EvalPolicy) -> float:
    t1 = 0.0 if _is_nonpos_int(0.5 - mu - nu) else gamma(-2 * mu) / gamma(0.5 - mu - nu) * whittaker_m(nu, mu, z, policy)
    t2 = 0.0 if _is_nonpos_int(0.5 + mu - nu) else gamma(2 * mu) / gamma(0.5 + mu - nu) * whittaker_m(nu, -mu, z, policy)
    return float(t1 + t2)


def _whittaker_w_asymptotic(nu: float, mu: float, z: float):
    """W ~ e^{-z/2} z^nu sum (1/2+mu-nu)_n (1/2-mu-nu)_n / n! (-z)^{-n}, truncated at the smallest term."""
    total, t = 1.0, 1.0
    prev = math.inf
    for n in range(400):
        t *= -(0.5 + mu - nu + n) * (0.5 - mu - nu + n) / ((n + 1) * z)
        if t == 0.0:
            break
        if abs(t) >= prev:
            break
        total += t
        prev = abs(t)
    return math.exp(-z / 2) * z**nu * total, prev


def _whittaker_w_integral(nu: float, mu: float, z: float, policy: EvalPolicy) -> float:
    """W = e^{-z/2} z^{mu+1/2} U(a, 1+2mu, z) with U from its Laplace integral (a = 1/2+mu-nu > 0).

    The substitution t = u^(1/a) removes the endpoint singularity of t^(a-1).
    """
    a = 0.5 + mu - nu
    b = 1 + 2 * mu

    def integrand(u):
        t = u ** (1 / a)
        return math.exp(-z * t + (b - a - 1) * math.log1p(t))

    upper = (60.0 / z) ** a
    val, err = quad(integrand, 0, upper, epsabs=0, epsrel=max(policy.rel_tol * 1e-2, 2e-14), limit=400)
    u_val = val / (a * float(gamma(a)))
    return math.exp(-z / 2 + (mu + 0.5) * math.log(z)) * u_val


def whittaker_w(nu: float, mu: float, z: float, policy: EvalPolicy = DEFAULT) -> float:
    """W_{nu,mu}(z), z > 0: connection formula for non-integer 2mu, large-z expansion, or a
    Richardson-extrapolated symmetric limit in mu at integer 2mu."""
    if z <= 0:
        raise SpecFunError("Whittaker W needs z > 0")
    if z > 25:
        val, err = _whittaker_w_asymptotic(nu, mu, z)
        if err <= policy.rel_tol:
            return val
    a = 0.5 + mu - nu
    if z >= 2 and a > 0:
        return _whittaker_w_integral(nu, mu, z, policy)
    if z >= 2 and 0.5 - mu - nu > 0:
        return _whittaker_w_integral(nu, -mu, z, policy)
    two_mu = 2 * mu
    if abs(two_mu - round(two_mu)) > 1e-6:
        return _whittaker_w_direct(nu, mu, z, policy)
    h = 1e-4

    def sym(step):
        return 0.5 * (_whittaker_w_direct(nu, mu + step, z, policy) + _whittaker_w_direct(nu, mu - step, z, policy))

    return (4 * sym(h / 2) - sym(h)) / 3


# -- incomplete gamma ---------------------------------------------------------

def upper_gamma(a: float, x: float, policy: EvalPolicy = DEFAULT) -> float:
    """Upper incomplete gamma Gamma(a, x).

    x > 0: series for the lower function when x < a + 1, Lentz continued fraction otherwise.
    x <= 0 is accepted for positive integer a (finite closed form).
    """
    if x <= 0:
        if a >= 1 and abs(a - round(a)) < 1e-14:
            ai = int(round(a))
            s = sum(x**j / math.factorial(j) for j in range(ai))
            return math.factorial(ai - 1) * math.exp(-x) * s
        if x == 0 and a > 0:
            return float(gamma(a))
        raise SpecFunError("Gamma(a, x) with x <= 0 is only supported for positive integer a")
    k = round(a)
    if k <= 0 and abs(a - k) < 1e-14 and x < 1:
        # Gamma(0, x) = E_1(x), then Gamma(j-1, x) = (Gamma(j, x) - x^{j-1} e^{-x}) / (j-1) downwards
        g = float(exp1(x))
        for j in range(0, int(k), -1):
            g = (g - math.exp(-x + (j - 1) * math.log(x))) / (j - 1)
        return g
    if k <= 0 and abs(a - k) < 1e-3 and x < max(1.0, a + 1):
        # Gamma(a) and the lower function both blow up like 1/(a - k) here; integrate directly,
        # with t = e^u on [x, 1] so the t^{a-1} end becomes smooth
        head, _ = quad(lambda u: math.exp(a * u - math.exp(u)), math.log(min(x, 1.0)), 0.0, epsabs=0, epsrel=1e-13,
                       limit=200)
        tail, _ = quad(lambda t: t ** (a - 1) * math.exp(-t), max(x, 1.0), np.inf, epsabs=0, epsrel=1e-13, limit=200)
        return head + tail
    if x < a + 1 and a > 0:
        # lower gamma: e^{-x} x^a sum x^n / (a (a+1) ... (a+n))
        s = _series(lambda n: x / (a + n + 1), policy, first=1.0 / a)
        lower = math.exp(-x + a * math.log(x)) * s
        return float(gamma(a)) - lower
    if a <= 0 and x < 1:
        # Gamma(a, x) = (Gamma(a+1, x) - x^a e^{-x}) / a, raising a into the positive range
        return (upper_gamma(a + 1, x, policy) - math.exp(-x + a * math.log(x))) / a
    # modified Lentz on the continued fraction Gamma(a,x) = e^{-x} x^a / (x + 1 - a - 1(1-a)/(x + 3 - a - ...))
    tiny = 1e-300
    b = x + 1 - a
    c = 1 / tiny
    d = 1 / b
    h = d
    for i in range(1, policy.max_terms):
        an = -i * (i - a)
        b += 2
        d = an * d + b
        d = tiny if abs(d) < tiny else d
        c = b + an / c
        c = tiny if abs(c) < tiny else c
        d = 1 / d
        delta = d * c
        h *= delta
        if abs(delta - 1) < policy.rel_tol * 1e-3:
            return math.exp(-x + a * math.log(x)) * h
    raise SpecFunError("continued fraction for Gamma(a, x) did not converge")


# -- Gauss 2F1 ----------------------------------------------------------------

def _f21_series(a, b, c, w, policy):
    return _series(lambda n: (a + n) * (b + n) / ((c + n) * (n + 1)) * w, policy)


def gauss_2f1(a: float, b: float, c: float, w: float, policy: EvalPolicy = DEFAULT) -> float:
    """F(a, b, c; w) for 0 <= w <= near_one_threshold."""
    if _is_nonpos_int(c):
        raise SpecFunError("2F1 has a pole at nonpositive integer c")
    if w < 0 or w > policy.near_one_threshold:
        raise SpecFunError(f"2F1 argument {w} outside [0, {policy.near_one_threshold}]; use reglift_g near 1")
    if w == 0 or a == 0 or b == 0:
        return 1.0
    if w <= 0.5 or _is_nonpos_int(a) or _is_nonpos_int(b):
        return _f21_series(a, b, c, w, policy)
    m = c - a - b
    x = 1 - w
    if abs(m) < 1e-14:
        return _f21_log_case(a, b, x, policy)
    if abs(m - round(m)) > 1e-8:
        t1 = gamma(c) * gamma(m) / (gamma(c - a) * gamma(c - b)) * _f21_series(a, b, 1 - m, x, policy)
        t2 = x**m * gamma(c) * gamma(-m) / (gamma(a) * gamma(b)) * _f21_series(c - a, c - b, m + 1, x, policy)
        return float(t1 + t2)
    return _f21_series(a, b, c, w, policy)


def _f21_log_case(a: float, b: float, x: float, policy: EvalPolicy) -> float:
    """F(a, b; a+b; 1-x) via the logarithmic connection formula, 0 < x <= 1/2."""
    pre = math.exp(gammaln(a + b) - gammaln(a) - gammaln(b)) * np.sign(gamma(a + b) / (gamma(a) * gamma(b)))
    lx = math.log(x)
    psi1, psia, psib = float(digamma(1.0)), float(digamma(a)), float(digamma(b))
    coef = 1.0
    total = 0.0
    for n in range(policy.max_terms):
        term = coef * (2 * psi1 - psia - psib - lx)
        total += term
        if n > 2 and abs(term) <= policy.rel_tol * 1e-2 * abs(total):
            return float(pre * total)
        coef *= (a + n) * (b + n) / ((n + 1) ** 2) * x
        psi1 += 1 / (n + 1)
        psia += 1 / (a + n)
        psib += 1 / (b + n)
    raise SpecFunError("log-case 2F1 did not converge")


# -- calligraphic M and W -------------------------------------------------------

def _split(v):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    v1 = float(v[0])
    if v1 == 0:
        raise SpecFunError("v_1 must be nonzero")
    return v1, float(np.sum(v[1:]))


def m_cal(s: float, v, k1: float, policy: EvalPolicy = DEFAULT) -> float:
    """|v_1|^{-k_1/2} M_{sgn(v_1) k_1/2, s/2}(|v_1|) e^{(v_2+...+v_d)/2}."""
    v1, rest = _split(v)
    x = abs(v1)
    return x ** (-k1 / 2) * whittaker_m(math.copysign(1.0, v1) * k1 / 2, s / 2, x, policy) * math.exp(rest / 2)


def w_cal(s: float, v, k1: float, policy: EvalPolicy = DEFAULT) -> float:
    v1, rest = _split(v)
    x = abs(v1)
    s0 = 1 - k1
    if abs(s - s0) < 1e-15 and abs(s - round(s)) < 1e-12:
        return w_special(v, k1, policy)
    return x ** (-k1 / 2) * whittaker_w(math.copysign(1.0, v1) * k1 / 2, s / 2, x, policy) * math.exp(rest / 2)


def m_special(v, k1: float, policy: EvalPolicy = DEFAULT) -> float:
    """Closed form of m_cal at s_0 = 1 - k_1 through the incomplete gamma function."""
    v1, rest = _split(v)
    tr = v1 + rest
    base = -math.copysign(1.0, v1)
    if base < 0:
        e = k1 - 1
        if abs(e - round(e)) > 1e-14:
            raise SpecFunError("(-1)^(k_1 - 1) is not real for non-integral k_1")
        sign = -1.0 if int(round(e)) % 2 else 1.0
    else:
        sign = 1.0
    return sign * math.exp(tr / 2 - v1) * (float(gamma(2 - k1)) - (1 - k1) * upper_gamma(1 - k1, -v1, policy))


def w_special(v, k1: float, policy: EvalPolicy = DEFAULT) -> float:
    v1, rest = _split(v)
    tr = v1 + rest
    if v1 > 0:
        return math.exp(tr / 2 - v1)
    return math.exp(tr / 2 - v1) * upper_gamma(1 - k1, -v1, policy)


# -- the regularised kernel ---------------------------------------------------

def reglift_g(n: int, w: float) -> float:
    """g_n(w) = (2/n) w^{n/2} F(n/2, 1, n/2+1; w) + log(1-w) = int_0^w (t^{n/2-1} - 1)/(1-t) dt.

    Evaluated in closed form after t = u^2, which stays smooth up to and including w = 1.
    """
    if n < 1 or int(n) != n:
        raise SpecFunError("reglift_g needs an integer n >= 1")
    if not 0 <= w <= 1:
        raise SpecFunError("reglift_g needs w in [0, 1]")
    n = int(n)
    r = math.sqrt(w)
    if n == 2 or w == 0:
        return 0.0
    if n == 1:
        return 2 * math.log1p(r)
    # -2 sum_{j=1}^{n-2} I_j with I_j = int_0^r u^j/(1+u) du
    if r < 0.5:
        # the upward recurrence cancels for small r; sum sum_k (-1)^k r^{j+k+1}/(j+k+1) instead
        total = 0.0
        for j in range(1, n - 1):
            term_sum, k = 0.0, 0
            while True:
                term = (-1) ** k * r ** (j + k + 1) / (j + k + 1)
                term_sum += term
                if abs(term) <= 1e-17 * abs(term_sum):
                    break
                k += 1
            total += term_sum
        return -2 * total
    # I_j = r^j / j - I_{j-1}, I_0 = log(1+r): stable for r >= 1/2
    ints = [math.log1p(r)]
    for j in range(1, n - 1):
        ints.append(r**j / j - ints[-1])
    return -2 * sum(ints[1 : n - 1])


def reglift_g_series(n: int, w: float, policy: EvalPolicy = DEFAULT) -> float:
    """The defining expression of reglift_g through the Gauss series (for cross-checks, w < 1)."""
    return 2 / n * w ** (n / 2) * gauss_2f1(n / 2, 1, n / 2 + 1, w, policy) + math.log1p(-w)
