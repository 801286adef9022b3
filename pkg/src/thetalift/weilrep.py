"""The finite Weil representation on the group algebra of L'/L.

Matrices act on coefficient vectors in the basis chi_mu: column mu holds the image of chi_mu.
Phases are computed from exact rational traces reduced mod 1 before exponentiation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .field import FieldElement, is_totally_positive
from .lattice import DiscriminantGroup


class WeilRepError(ValueError):
    pass


def e(x) -> complex:
    """exp(2 pi i x) for an exact rational, reduced mod 1 first."""
    x = Fraction(x) if not isinstance(x, float) else x
    if isinstance(x, Fraction):
        x = x - (x.numerator // x.denominator)
        # exact values at multiples of 1/4 keep the relations free of rounding noise
        quarter = {Fraction(0): 1, Fraction(1, 4): 1j, Fraction(1, 2): -1, Fraction(3, 4): -1j}
        if x in quarter:
            return complex(quarter[x])
        x = float(x)
    return complex(np.exp(2j * np.pi * x))


@dataclass(frozen=True)
class Letter:
    kind: str  # "T", "S", "N", "Z", "M"
    arg: FieldElement | None = None

    def __post_init__(self):
        if self.kind not in ("T", "S", "N", "Z", "M"):
            raise WeilRepError(f"unknown generator {self.kind!r}")
        if self.kind in ("T", "M") and self.arg is None:
            raise WeilRepError(f"generator {self.kind} needs a field element")
        if self.kind == "T" and not self.arg.is_integral():
            raise WeilRepError("T_b needs b in O_F")
        if self.kind == "M":
            eps = self.arg
            if not eps.is_integral() or abs(eps.norm()) != 1 or not eps.inverse().is_integral():
                raise WeilRepError("M(eps) needs a unit of O_F")
            if not is_totally_positive(eps):
                raise WeilRepError("M(eps) needs a totally positive unit")

    def __str__(self):
        if self.kind == "T":
            return f"T[{','.join(str(c) for c in self.arg.coords)}]"
        if self.kind == "M":
            return f"M[{','.join(str(c) for c in self.arg.coords)}]"
        return self.kind


GeneratorWord = tuple  # tuple[Letter, ...]


def T(b: FieldElement) -> Letter:
    return Letter("T", b)


S = Letter("S")
N = Letter("N")
Z = Letter("Z")


def M(eps: FieldElement) -> Letter:
    return Letter("M", eps)


@dataclass(frozen=True)
class WeilRepMatrix:
    dim: int
    entries: np.ndarray
    word: tuple

    def __matmul__(self, other: "WeilRepMatrix") -> "WeilRepMatrix":
        return WeilRepMatrix(self.dim, self.entries @ other.entries, self.word + other.word)

    def word_str(self) -> str:
        return "".join(str(x) for x in self.word) or "1"


def generator_matrix(dg: DiscriminantGroup, letter: Letter) -> WeilRepMatrix:
    n = dg.order
    space = dg.lattice.space
    trsig = Fraction(space.tr_sig())
    m = np.zeros((n, n), dtype=complex)
    if letter.kind == "T":
        b = letter.arg
        for i, q in enumerate(dg.q_values):
            m[i, i] = e((q * b).trace())
    elif letter.kind == "S":
        scale = e(-trsig / 8) / np.sqrt(n)
        for nu in range(n):
            for mu in range(n):
                m[nu, mu] = scale * e(-dg.tr_bilinear(mu, nu))
    elif letter.kind == "N":
        np.fill_diagonal(m, (-1) ** space.rank)
    elif letter.kind == "Z":
        ph = e(-trsig / 4)
        for mu, nu in enumerate(dg.neg_perm):
            m[nu, mu] = ph
    else:
        perm = dg.scale_perm(letter.arg.inverse())
        if sorted(perm) != list(range(n)):
            raise WeilRepError("mu -> eps^-1 mu is not a permutation of cosets")
        for mu, nu in enumerate(perm):
            m[nu, mu] = 1.0
    return WeilRepMatrix(n, m, (letter,))


def word_matrix(dg: DiscriminantGroup, word: Sequence[Letter]) -> WeilRepMatrix:
    """rho(w_1 w_2 ... w_k) = rho(w_1) rho(w_2) ... rho(w_k)."""
    out = WeilRepMatrix(dg.order, np.eye(dg.order, dtype=complex), ())
    cache: dict = {}
    for letter in word:
        if letter not in cache:
            cache[letter] = generator_matrix(dg, letter)
        out = out @ cache[letter]
    return out


def _dev(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def relation_report(dg: DiscriminantGroup, tol: float = 1e-12) -> dict:
    """Maximal entrywise deviation for each defining relation, with pass/fail at ``tol``."""
    f = dg.lattice.field
    one = f.one
    n = dg.order
    eye = np.eye(n)
    s = generator_matrix(dg, S).entries
    t1 = generator_matrix(dg, T(one)).entries
    z = generator_matrix(dg, Z).entries
    nn = generator_matrix(dg, N).entries
    trsig = Fraction(dg.lattice.space.tr_sig())
    z_formula = np.zeros((n, n), dtype=complex)
    for mu, nu in enumerate(dg.neg_perm):
        z_formula[nu, mu] = e(-trsig / 4)
    st = s @ t1
    devs = {
        "S^2=Z": _dev(s @ s, z),
        "(ST)^3=Z": _dev(st @ st @ st, z),
        "Z formula": _dev(s @ s, z_formula),
    }
    if f.degree % 2:
        devs["Z^2=N"] = _dev(z @ z, nn)
    else:
        devs["Z^2=1"] = _dev(z @ z, eye)
    for name, mat in (("S", s), ("T", t1), ("N", nn), ("Z", z)):
        devs[f"unitary {name}"] = _dev(mat.conj().T @ mat, eye)
    gauss = sum(e(q) for q in dg.q_rat)
    devs["Milgram |sum e(Q)| = sqrt|D|"] = abs(abs(gauss) - np.sqrt(n))
    return {
        "order": n,
        "tol": tol,
        "relations": {k: {"deviation": v, "pass": v <= tol} for k, v in devs.items()},
        "all_pass": all(v <= tol for v in devs.values()),
    }
