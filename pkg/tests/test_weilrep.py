from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, strategies as st

from thetalift import catalog
from thetalift.weilrep import M, N, S, T, WeilRepError, Z, e, generator_matrix, relation_report, word_matrix

from batteries import weil_lattices
from conftest import cached
from oracles import a1_weil


def test_phase_helper_exact_quarters():
    assert e(Fr(1, 4)) == 1j and e(Fr(-1, 2)) == -1 and e(Fr(7, 4)) == -1j
    assert e(Fr(1, 8)) == pytest.approx(np.exp(1j * np.pi / 4), abs=1e-15)


def test_a1_generators_match_hand_computation():
    dg = catalog.a1().discriminant_group
    one = catalog.rationals().one
    np.testing.assert_allclose(generator_matrix(dg, T(one)).entries, a1_weil("T"), atol=1e-15)
    np.testing.assert_allclose(generator_matrix(dg, S).entries, a1_weil("S"), atol=1e-15)
    assert generator_matrix(dg, T(one)).entries[1, 1] == 1j


def test_n_is_sign_of_rank_and_unimodular_s_scalar(sqrt3_L):
    d1 = cached("d1_signature_12")
    np.testing.assert_array_equal(generator_matrix(d1.discriminant_group, N).entries, -np.eye(8))
    s = generator_matrix(sqrt3_L.discriminant_group, S).entries
    assert s.shape == (1, 1)
    # tr sig V = (4 - 2) + (6 - 0) = 8, so the scalar is e(-8/8) = 1
    assert sqrt3_L.space.tr_sig() == 8
    assert s[0, 0] == pytest.approx(1, abs=1e-15)


@pytest.mark.parametrize("name", list(weil_lattices()))
def test_relations_hold(name):
    lat = weil_lattices()[name]
    assert lat.discriminant_group.order <= 256
    rep = relation_report(lat.discriminant_group)
    bad = {k: v for k, v in rep["relations"].items() if not v["pass"]}
    assert rep["all_pass"], bad
    assert rep["tol"] == 1e-12


def test_trivial_group_relations_exact():
    rep = relation_report(catalog.hyperbolic_plane().discriminant_group)
    assert all(v["deviation"] < 1e-15 for v in rep["relations"].values())


def test_st_cubed_word_equals_z():
    dg = cached("d1_signature_12_alt").discriminant_group
    one = dg.lattice.field.one
    lhs = word_matrix(dg, [S, T(one)] * 3).entries
    np.testing.assert_allclose(lhs, generator_matrix(dg, Z).entries, atol=1e-12)


def test_word_composition_and_labels():
    dg = catalog.a1().discriminant_group
    one = dg.lattice.field.one
    w = word_matrix(dg, [S, T(one), S])
    assert w.word_str() == "ST[1]S"
    assert word_matrix(dg, []).word_str() == "1"
    np.testing.assert_allclose(w.entries, a1_weil("S") @ a1_weil("T") @ a1_weil("S"), atol=1e-15)


def test_unit_conjugation_scales_translation():
    q3 = catalog.sqrt3_field()
    lat = weil_lattices()["sqrt3 diag(1,-2-sqrt3)"]
    dg = lat.discriminant_group
    eps = q3.gen + 2  # totally positive unit, norm 1
    m = generator_matrix(dg, M(eps)).entries
    for b in (q3.one, q3.gen, q3.gen * 3 - 1):
        lhs = m @ generator_matrix(dg, T(b)).entries @ np.linalg.inv(m)
        np.testing.assert_allclose(lhs, generator_matrix(dg, T(eps * eps * b)).entries, atol=1e-12)


def test_letter_validation():
    q3 = catalog.sqrt3_field()
    with pytest.raises(WeilRepError):
        T(q3.element([Fr(1, 2), 0]))
    with pytest.raises(WeilRepError):
        M(q3.gen)  # not a unit
    with pytest.raises(WeilRepError):
        M(q3.gen - 2)  # unit but not totally positive
    with pytest.raises(WeilRepError):
        from thetalift.weilrep import Letter

        Letter("X")


@given(st.integers(-6, 6), st.integers(-6, 6))
def test_translations_are_a_group_action(b1, b2):
    dg = cached("d2_mixed").discriminant_group
    f = dg.lattice.field
    x, y = f.element([b1, b2]), f.element([b2, -b1])
    lhs = generator_matrix(dg, T(x)).entries @ generator_matrix(dg, T(y)).entries
    np.testing.assert_allclose(lhs, generator_matrix(dg, T(x + y)).entries, atol=1e-12)


@given(st.lists(st.sampled_from(["S", "T", "Z", "N"]), max_size=8))
def test_random_words_unitary(letters):
    dg = cached("d1_signature_12_alt").discriminant_group
    one = dg.lattice.field.one
    table = {"S": S, "T": T(one), "Z": Z, "N": N}
    w = word_matrix(dg, [table[c] for c in letters]).entries
    np.testing.assert_allclose(w.conj().T @ w, np.eye(dg.order), atol=1e-12)
