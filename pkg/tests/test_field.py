from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, strategies as st

from thetalift import catalog
from thetalift.field import FieldError, codifferent, embed, is_totally_positive, make_field, trace_norm

from oracles import field_discriminant, roots

coords = st.fractions(min_value=-50, max_value=50, max_denominator=7)


def elems(field):
    return st.lists(coords, min_size=field.degree, max_size=field.degree).map(field.element)


Q3 = catalog.sqrt3_field()
CUBIC = catalog.cubic_field()


@pytest.mark.parametrize(
    "poly, basis, disc",
    [([-1, 1], None, 1), ([-3, 0, 1], [[1, 0], [0, 1]], 12), ([-1, -2, 1, 1], None, 49),
     ([-5, 0, 1], [[1, 0], [Fr(1, 2), Fr(1, 2)]], 5), ([-2, 0, 1], None, 8)],
)
def test_discriminant_matches_sympy(poly, basis, disc):
    f = make_field(poly, basis)
    assert f.discriminant == disc
    assert field_discriminant(poly, basis) == disc


def test_trace_norm_examples():
    s = Q3.gen
    assert trace_norm(s) == (0, -3)
    assert trace_norm(2 + s) == (4, 1)
    assert CUBIC.gen.trace() == -1


def test_embeddings_follow_sigma1_choice():
    assert embed(Q3.gen) == pytest.approx((3**0.5, -(3**0.5)), rel=1e-15)
    assert embed(Q3.one) == (1.0, 1.0)
    vals = embed(CUBIC.gen)
    assert sorted(vals) == pytest.approx(roots([-1, -2, 1, 1]), rel=1e-14)
    assert vals[0] == pytest.approx(2 * np.cos(2 * np.pi / 7))
    other = make_field([-3, 0, 1], embedding_order=0)
    assert embed(other.gen)[0] == pytest.approx(-(3**0.5))


def test_codifferent_examples():
    assert [b.coords for b in codifferent(catalog.rationals()).elements()] == [(1,)]
    cd = codifferent(Q3)
    assert {b.coords for b in cd.elements()} == {(Fr(1, 2), 0), (0, Fr(1, 6))}
    assert codifferent(CUBIC).covolume() == Fr(1, 49)


@pytest.mark.parametrize("field", [Q3, CUBIC, catalog.sqrt2_field()])
def test_codifferent_trace_duality_exact(field):
    for b in codifferent(field).elements():
        for o in field.basis_elements():
            assert (b * o).trace().denominator == 1


def test_total_positivity_examples():
    s = Q3.gen
    assert is_totally_positive(2 + s)
    assert not is_totally_positive(Q3(-1))
    assert not is_totally_positive(1 + s)


def test_sign_certified_near_zero():
    # 1351^2 = 3 * 780^2 + 1 and 265^2 = 3 * 153^2 - 2: convergents just above and below sqrt 3
    assert (Q3.gen - Fr(1351, 780)).signs() == (-1, -1)
    assert (Q3.gen - Fr(265, 153)).signs() == (1, -1)


@pytest.mark.parametrize("poly", [[1, 0, 1], [0, 0, 1], [-1, 0, 0, 1]])
def test_invalid_polynomials_rejected(poly):
    with pytest.raises(FieldError):
        make_field(poly)


def test_non_ring_basis_rejected():
    with pytest.raises(FieldError):
        make_field([-3, 0, 1], [[1, 0], [Fr(1, 2), Fr(1, 2)]])


@given(elems(CUBIC), elems(CUBIC))
def test_field_axioms_cubic(x, y):
    assert (x + y) * (x - y) == x * x - y * y
    assert (x * y).norm() == x.norm() * y.norm()
    assert (x + y).trace() == x.trace() + y.trace()
    if not x.is_zero():
        assert x * x.inverse() == CUBIC.one


@given(elems(Q3))
def test_trace_norm_match_embeddings(x):
    e = np.array(x.embed())
    assert float(x.trace()) == pytest.approx(e.sum(), abs=1e-10)
    assert float(x.norm()) == pytest.approx(np.prod(e), rel=1e-10, abs=1e-10)


@given(elems(CUBIC), elems(CUBIC))
def test_total_positivity_closed(x, y):
    if is_totally_positive(x) and is_totally_positive(y):
        assert is_totally_positive(x * y)
        assert is_totally_positive(x + y)
