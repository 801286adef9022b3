"""Ready-made fields and lattices used by the examples, scripts and tests."""

from __future__ import annotations

from fractions import Fraction as Fr

from .field import FieldElement, FieldSpec, make_field
from .lattice import OFLattice, QuadraticSpace, direct_sum, lattice_from_gram


def rationals() -> FieldSpec:
    return make_field([-1, 1])


def sqrt3_field() -> FieldSpec:
    """Q(sqrt 3) with basis {1, sqrt 3}; sigma_1 sends sqrt 3 to +1.732..."""
    return make_field([-3, 0, 1], [[1, 0], [0, 1]], embedding_order=1)


def sqrt2_field() -> FieldSpec:
    return make_field([-2, 0, 1], [[1, 0], [0, 1]], embedding_order=1)


def cubic_field() -> FieldSpec:
    """Q(theta), theta^3 + theta^2 - 2 theta - 1 = 0 (theta = 2 cos(2 pi / 7)); sigma_1 is the largest root."""
    return make_field([-1, -2, 1, 1], embedding_order=2)


def _q3(a, b) -> tuple[Fr, Fr]:
    return (Fr(a), Fr(b))


def sqrt3_L0() -> OFLattice:
    """Even unimodular O_F-lattice of signature ((4,0),(4,0)) over Q(sqrt 3); its trace form is E8."""
    f = sqrt3_field()
    g = [
        [_q3(2, -1), _q3(Fr(-1, 2), Fr(1, 2)), _q3(Fr(1, 2), Fr(-1, 6)), _q3(0, Fr(1, 6))],
        [_q3(Fr(-1, 2), Fr(1, 2)), _q3(3, 0), _q3(0, Fr(1, 2)), _q3(Fr(-1, 2), Fr(-1, 6))],
        [_q3(Fr(1, 2), Fr(-1, 6)), _q3(0, Fr(1, 2)), _q3(1, 0), _q3(Fr(1, 2), Fr(1, 2))],
        [_q3(0, Fr(1, 6)), _q3(Fr(-1, 2), Fr(-1, 6)), _q3(Fr(1, 2), Fr(1, 2)), _q3(2, 1)],
    ]
    return lattice_from_gram(f, g)


def sqrt3_L1(alpha=(0, 1), beta=(1, 0)) -> OFLattice:
    """-(1/sqrt D) [[2, alpha], [alpha, 2 beta]] over Q(sqrt 3), D = 12; default alpha = sqrt 3, beta = 1."""
    f = sqrt3_field()
    s = f.gen
    scale = -(2 * s).inverse()
    a = f.element(alpha)
    b = f.element(beta)
    g = [[scale * 2, scale * a], [scale * a, scale * b * 2]]
    return lattice_from_gram(f, g)


def sqrt3_L() -> OFLattice:
    """L0 + L1: even unimodular of signature ((4,2),(6,0))."""
    return direct_sum(sqrt3_L0(), sqrt3_L1())


def diag_lattice(field: FieldSpec, entries, admissible: bool = False) -> OFLattice:
    z = field.zero
    es = [e if isinstance(e, FieldElement) else field(e) for e in entries]
    g = [[es[i] if i == j else z for j in range(len(es))] for i in range(len(es))]
    return lattice_from_gram(field, g, admissible=admissible)


def a1() -> OFLattice:
    return diag_lattice(rationals(), [2])


def hyperbolic_plane() -> OFLattice:
    f = rationals()
    return lattice_from_gram(f, [[f(0), f(1)], [f(1), f(0)]])


def d1_signature_12() -> OFLattice:
    """Z^3 with Q = x^2 - y^2 - z^2: signature (1,2), discriminant group (Z/2)^3."""
    return diag_lattice(rationals(), [2, -2, -2], admissible=True)


def d1_signature_12_alt() -> OFLattice:
    """Z^3 with Q = x^2 - y^2 - 3 z^2: signature (1,2), discriminant group Z/2 x Z/2 x Z/6."""
    return diag_lattice(rationals(), [2, -2, -6], admissible=True)


def d2_mixed() -> OFLattice:
    """Rank 3 over Q(sqrt 2), Gram diag(1 + sqrt2/2, -sqrt2/2, -sqrt2/2): signature ((1,2),(3,0)), |L'/L| = 64."""
    f = sqrt2_field()
    g1 = f.element([1, Fr(1, 2)])
    g2 = f.element([0, Fr(-1, 2)])
    return diag_lattice(f, [g1, g2, g2], admissible=True)


def codifferent_generator_positive_away(field: FieldSpec) -> FieldElement:
    """A generator delta of the codifferent with sigma_i(delta) > 0 for i >= 2 (monogenic fields only).

    The codifferent of Z[theta] is generated by 1/f'(theta); a small unit search fixes the signs.
    """
    from itertools import product as _product

    th = field.gen
    d = field.degree
    fprime = sum((th ** (j - 1) * (j * field.poly[j]) for j in range(1, d + 1)), field.zero)
    base = fprime.inverse()
    units = [th, th + 1, th - 1]
    units = [u for u in units if abs(u.norm()) == 1]
    for exps in _product(range(-2, 3), repeat=len(units)):
        u = field.one
        for e, v in zip(exps, units):
            u = u * v**e
        for sgn in (1, -1):
            cand = base * u * sgn
            if all(s > 0 for s in cand.signs()[1:]):
                return cand
    raise ValueError("no suitable codifferent generator found")


def shimura_curve_data() -> dict:
    """Data of the cubic-field Shimura curve example (n = 2, unimodular, trivial Weil representation).

    The maximal-order lattice itself is not built: cusp forms of parallel weight 2 vanish, so the
    weak holomorphy certificate only needs the (empty) cusp form basis.
    """
    f = cubic_field()
    return {
        "field": f,
        "n": 2,
        "delta": codifferent_generator_positive_away(f),
        "k": (Fr(0), Fr(2), Fr(2)),
        "kappa": (Fr(2), Fr(2), Fr(2)),
        "cusp_basis": [],
    }
