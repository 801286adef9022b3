import math
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, strategies as st

from thetalift import catalog
from thetalift.theta import SiegelPoint
from thetalift.whittaker import (CuspFormData, EisensteinData, WeightVector, WhittakerError, WhittakerForm,
                                 a_relation_deviation, b_of_f, delta_k_closed, delta_k_numeric, eval_f,
                                 eval_f_closed, eval_form, index_compatible, pairing, weak_holomorphy_obstruction)

from batteries import M_D2, Q, Q2, delta_cases, s0_grid



def test_weight_vector():
    k = WeightVector.for_lift(1, 2)
    assert k.k == (Fr(1, 2), Fr(3, 2))
    assert k.s0 == Fr(1, 2)
    assert k.kappa == (Fr(3, 2), Fr(3, 2))
    k.check_rank(3)
    with pytest.raises(WhittakerError):
        k.check_rank(4)
    with pytest.raises(WhittakerError):
        WeightVector((Fr(1, 3),))


def test_s0_two_path_grid():
    cases = s0_grid()
    assert len(cases) == 100
    for m, tau, k in cases:
        a = eval_f(1, m, 0, tau, float(k.s0), k)[0]
        b = eval_f_closed(1, m, 0, tau, k)[0]
        assert abs(a - b) <= 1e-10 * abs(b), (m, tau, k)


def test_growth_as_v1_grows():
    k = WeightVector.for_lift(1, 1)
    m = Q(1)
    ratios = []
    for v in (1.0, 3.0, 6.0, 10.0):
        val = abs(eval_f(1, m, 0, SiegelPoint((1j * v,)), float(k.s0), k)[0])
        ratios.append(val / math.exp(2 * math.pi * v))
    assert max(ratios) < 10 * min(ratios)


@given(st.integers(-20, 20), st.integers(-20, 20))
def test_translation_equivariance(b1, b2):
    k = WeightVector.for_lift(1, 2)
    tau = SiegelPoint((0.1 + 0.6j, -0.3 + 0.9j))
    b = Q2.element([b1, b2])
    shifted = SiegelPoint(tuple(t + e for t, e in zip(tau.tau, b.embed())))
    lhs = eval_f(1, M_D2, 0, shifted, float(k.s0), k)[0]
    rhs = eval_f(1, M_D2, 0, tau, float(k.s0), k)[0] * np.exp(-2j * np.pi * float((M_D2 * b).trace()))
    assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


def test_laplacian_annihilates_at_s0():
    """Delta_k = -v^2 (d_uu + d_vv) + i k v (d_u + i d_v) on tau_1."""
    k = WeightVector.for_lift(1, 1)
    kk = float(k.k[0])
    m = Q(Fr(1, 2))
    f = lambda u, v: eval_f(1, m, 0, SiegelPoint((u + 1j * v,)), float(k.s0), k)[0]
    h = 1e-3
    for u, v in ((0.1, 0.5), (-0.3, 1.2)):
        c = f(u, v)
        fu = (f(u + h, v) - f(u - h, v)) / (2 * h)
        fv = (f(u, v + h) - f(u, v - h)) / (2 * h)
        fuu = (f(u + h, v) - 2 * c + f(u - h, v)) / h**2
        fvv = (f(u, v + h) - 2 * c + f(u, v - h)) / h**2
        lap = -v * v * (fuu + fvv) + 1j * kk * v * (fu + 1j * fv)
        assert abs(lap) <= 1e-4 * v * v * (abs(fuu) + abs(fvv))


def test_antiholomorphic_in_later_variables():
    k = WeightVector.for_lift(1, 2)
    h = 1e-5
    u2, v2 = 0.2, 0.8
    f = lambda u, v: eval_f(1, M_D2, 0, SiegelPoint((0.1 + 0.7j, u + 1j * v)), float(k.s0), k)[0]
    d_tau = ((f(u2 + h, v2) - f(u2 - h, v2)) - 1j * (f(u2, v2 + h) - f(u2, v2 - h))) / (4 * h)
    assert abs(d_tau) <= 1e-6 * abs(f(u2, v2)) * 2 * math.pi


def test_delta_example():
    k = WeightVector((Fr(0),))
    val = delta_k_closed(1, Q(1), 0, SiegelPoint((1j,)), k)[0]
    assert val == pytest.approx(4 * math.pi * math.exp(-2 * math.pi), rel=1e-14)


def test_delta_closed_vs_numeric_random_points():
    cases = delta_cases()
    for k, m, tau in cases:
        a = delta_k_closed(1, m, 0, tau, k)[0]
        b = delta_k_numeric(1, m, 0, tau, k)[0]
        assert abs(a - b) <= 1e-6 * abs(a), (k, m, tau)


def test_delta_output_holomorphic_and_decaying():
    k = WeightVector.for_lift(1, 2)
    g = lambda u, v: delta_k_closed(1, M_D2, 0, SiegelPoint((u + 1j * v, 0.3 + 0.5j)), k)[0]
    h = 1e-5
    u, v = 0.2, 0.6
    dbar = ((g(u + h, v) - g(u - h, v)) + 1j * (g(u, v + h) - g(u, v - h))) / (4 * h)
    assert abs(dbar) <= 1e-6 * abs(g(u, v)) * 2 * math.pi
    logs = [math.log(abs(g(0.0, t))) for t in (0.5, 1.0, 1.5, 2.0)]
    steps = np.diff(logs)
    assert np.all(steps < 0) and np.allclose(steps, steps[0], rtol=1e-10)


def test_eval_errors():
    k = WeightVector.for_lift(1, 1)
    with pytest.raises(WhittakerError):
        eval_f(1, Q(1), 0, SiegelPoint((1j,)), 0.2, k)
    with pytest.raises(WhittakerError):
        eval_f(1, M_D2, 0, SiegelPoint((1j, 1j)), 0.5, WeightVector((Fr(1, 2), Fr(1))))


def test_index_compatibility_and_validation(d1_lat):
    dg = d1_lat.discriminant_group
    k = WeightVector.for_lift(1, 1)
    # m - Q(mu) must be integral: Q(0) = 0, so m = 1 pairs with mu = 0 but m = 1/4 does not
    assert index_compatible(d1_lat, Q(1), 0)
    assert not index_compatible(d1_lat, Q(Fr(1, 4)), 0)
    mu = next(i for i, q in enumerate(dg.q_values) if q == Q(Fr(1, 4)))
    assert index_compatible(d1_lat, Q(Fr(1, 4)), mu)
    WhittakerForm(k, {(Q(1), 0): 1, (Q(Fr(1, 4)), mu): 2}).validate(d1_lat)
    with pytest.raises(WhittakerError):
        WhittakerForm(k, {(Q(Fr(1, 4)), 0): 1}).validate(d1_lat)
    with pytest.raises(WhittakerError):
        WhittakerForm(k, {(Q(-1), 0): 1}).validate(d1_lat)
    with pytest.raises(WhittakerError):
        WhittakerForm(WeightVector((Fr(1),)), {(Q(1), 0): 1}).validate(d1_lat)


def test_eval_form_linear():
    k = WeightVector.for_lift(1, 1)
    tau = SiegelPoint((0.2 + 0.9j,))
    f1 = WhittakerForm(k, {(Q(1), 0): 2})
    f2 = WhittakerForm(k, {(Q(2), 3): -1j})
    both = eval_form(f1 + f2, 8, tau)
    np.testing.assert_allclose(both, eval_form(f1, 8, tau) + eval_form(f2, 8, tau), rtol=1e-15)
    np.testing.assert_allclose(eval_form(f1.scale(3), 8, tau), 3 * eval_form(f1, 8, tau), rtol=1e-15)


def test_pairing_identities():
    k = WeightVector.for_lift(1, 1)
    key = (Q(1), 0)
    g = CuspFormData(k.kappa, {key: Fr(7, 3), (Q(2), 0): 5})
    assert pairing(g, WhittakerForm(k, {key: 1})) == Fr(7, 3)
    assert pairing(g, WhittakerForm(k, {})) == 0
    f1 = WhittakerForm(k, {key: 2})
    f2 = WhittakerForm(k, {(Q(2), 0): -1, (Q(3), 0): 4})
    assert pairing(g, f1 + f2) == pairing(g, f1) + pairing(g, f2)
    with pytest.raises(WhittakerError):
        pairing(CuspFormData(k.k, {}), f1)


def test_obstruction_reports():
    k = WeightVector.for_lift(1, 1)
    key = (Q(1), 0)
    f = WhittakerForm(k, {key: 3})
    empty = weak_holomorphy_obstruction(f, [])
    assert empty.values == [] and empty.weakly_holomorphic
    g = CuspFormData(k.kappa, {key: 1})
    rep = weak_holomorphy_obstruction(f, [g])
    assert rep.values == [3] and not rep.weakly_holomorphic
    assert weak_holomorphy_obstruction(f.scale(2), [g]).values == [6]


def test_b_of_f():
    k = WeightVector.for_lift(1, 1)
    key = (Q(1), 0)
    eis = EisensteinData({key: Fr(-1, 2), (Q(2), 0): Fr(3, 4)})
    rep = b_of_f(WhittakerForm(k, {key: 5}), eis)
    assert rep.b_of_f == Fr(-5, 2) and rep.weight_of_psi == Fr(5, 2) and rep.a_of_f == 5
    assert b_of_f(WhittakerForm(k, {}), eis).b_of_f == 0
    f = WhittakerForm(k, {key: 2, (Q(2), 0): 1})
    a_data = {key: 1, (Q(2), 0): Fr(-3, 2)}
    assert a_relation_deviation(f, eis, a_data) == 0
    with pytest.raises(WhittakerError):
        b_of_f(WhittakerForm(k, {(Q(3), 0): 1}), eis)
