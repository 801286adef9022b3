"""Acceptance suite: one test per primary criterion, each timed and reported on its own line."""

import math
import time
from fractions import Fraction as Fr

import numpy as np
import pytest

from thetalift import _exact, catalog
from thetalift.cli import examples_shimura
from thetalift.domain import DomainPoint, find_frame, point_on_divisor
from thetalift.field import codifferent
from thetalift.green import (GreenParams, enumerate_terms, fit_pole, green_regularized_at_point, phi_values,
                             pole_extrapolate)
from thetalift.lattice import MajorantForm, enumerate_ints
from thetalift.specfun import m_cal, m_special, reglift_g, w_special, whittaker_w
from thetalift.theta import SiegelPoint, transform_residual
from thetalift.weilrep import S, T, relation_report
from thetalift.whittaker import (CuspFormData, EisensteinData, WeightVector, WhittakerForm, a_relation_deviation,
                                 b_of_f, delta_k_closed, delta_k_numeric, eval_f, eval_f_closed, pairing)

from batteries import (Q, check_lattice_proposition, d1_theta_cases, delta_cases, random_even_lattices, s0_grid,
                       weil_lattices)
from conftest import cached

pytestmark = pytest.mark.acceptance


def report(capsys, number, title, checks, elapsed, limit, detail=""):
    ok = all(checks.values()) and elapsed < limit
    failed = [k for k, v in checks.items() if not v]
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({elapsed:.2f} s, limit {limit:g} s)"
    if detail:
        line += f" {detail}"
    if failed:
        line += f" failed: {', '.join(failed)}"
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def test_1_field_examples(capsys):
    t0 = time.perf_counter()
    fields = {1: catalog.rationals(), 12: catalog.sqrt3_field(), 49: catalog.cubic_field()}
    checks = {f"disc {d}": f.discriminant == d for d, f in fields.items()}
    for d, f in fields.items():
        checks[f"codifferent duality {d}"] = all(
            (b * o).trace().denominator == 1 for b in codifferent(f).elements() for o in f.basis_elements())
        checks[f"codifferent covolume {d}"] = codifferent(f).covolume() == Fr(1, d)
    report(capsys, 1, "field discriminants 1, 12, 49 and codifferent duality", checks, time.perf_counter() - t0, 1)


def test_2_lattice_proposition(capsys):
    t0 = time.perf_counter()
    lats = [cached("sqrt3_L0"), catalog.sqrt3_L1(), cached("sqrt3_L")] + random_even_lattices()
    checks = {}
    for i, lat in enumerate(lats):
        try:
            check_lattice_proposition(lat)
            checks[f"lattice {i}"] = True
        except AssertionError:
            checks[f"lattice {i}"] = False
    report(capsys, 2, "dual lattice properties and |L'/L| = |det| on 23 lattices", checks,
           time.perf_counter() - t0, 10)


def test_3_e8_trace_form(capsys):
    t0 = time.perf_counter()
    lat = cached("sqrt3_L0")
    a = lat.tr_gram
    x, _ = enumerate_ints(lat, 0, MajorantForm.trace_form(lat.space), 1.0)
    gram = np.array(a, dtype=float)
    roots = sum(1 for v in x.astype(float) if round(v @ gram @ v) == 2)
    checks = {
        "rank 8": len(a) == 8,
        "even": _exact.is_integral(a) and all(a[i][i] % 2 == 0 for i in range(8)),
        "unimodular": abs(_exact.det(a)) == 1,
        "240 roots": roots == 240,
    }
    report(capsys, 3, "trace form of L0 is E8", checks, time.perf_counter() - t0, 30, f"roots={roots}")


def test_4_weil_relations(capsys):
    t0 = time.perf_counter()
    checks, worst = {}, 0.0
    for name, lat in weil_lattices().items():
        dg = lat.discriminant_group
        rep = relation_report(dg)
        worst = max([worst] + [v["deviation"] for v in rep["relations"].values()])
        checks[name] = dg.order <= 256 and rep["all_pass"] and rep["tol"] <= 1e-12
    report(capsys, 4, "Weil representation relations <= 1e-12", checks, time.perf_counter() - t0, 10,
           f"max deviation={worst:.1e}")


@pytest.mark.slow
def test_5_theta_transformation(capsys):
    t0 = time.perf_counter()
    lat, cases = d1_theta_cases()
    one = lat.field.one
    checks, worst = {}, 0.0
    for label, word in {"S": [S], "T1": [T(one)], "ST1": [S, T(one)]}.items():
        for i, (z, tau) in enumerate(cases):
            rep = transform_residual(lat, word, z, tau, tol=1e-10)
            worst = max(worst, rep["residual"])
            checks[f"d1 {label} #{i}"] = rep["residual"] <= 1e-7 and rep["tail_lhs"] <= 1e-10
    d2 = cached("d2_mixed")
    z = DomainPoint(find_frame(d2.space), [0.2 + 0.9j])
    tau = SiegelPoint((0.1 + 1.1j, -0.2 + 0.8j))
    for label, word in {"S": [S], "T(sqrt2)": [T(d2.field.gen)]}.items():
        checks[f"d2 {label}"] = transform_residual(d2, word, z, tau)["residual"] <= 1e-6
    report(capsys, 5, "theta transformation law (d=1 <= 1e-7, d=2 <= 1e-6)", checks, time.perf_counter() - t0, 300,
           f"max d1 residual={worst:.1e}")


def test_6_special_functions(capsys):
    t0 = time.perf_counter()
    grid = s0_grid()
    worst = max(abs(eval_f(1, m, 0, tau, float(k.s0), k)[0] - eval_f_closed(1, m, 0, tau, k)[0])
                / abs(eval_f_closed(1, m, 0, tau, k)[0]) for m, tau, k in grid)
    v1s = np.concatenate([-np.geomspace(10, 0.1, 25), np.geomspace(0.1, 10, 25)])
    w_dev = m_dev = 0.0
    for k1 in (0.5, -0.5, -1.5):
        for v1 in v1s:
            x = abs(v1)
            general = x ** (-k1 / 2) * whittaker_w(math.copysign(1, v1) * k1 / 2, (1 - k1) / 2, x) * math.exp(0.15)
            closed = w_special([v1, 0.3], k1)
            w_dev = max(w_dev, abs(general - closed) / abs(closed))
            if v1 < 0:
                m_dev = max(m_dev, abs(m_cal(1 - k1, [v1], k1) - m_special([v1], k1)) / abs(m_special([v1], k1)))
    checks = {
        "100-point two-path": len(grid) == 100 and worst <= 1e-10,
        "W special": w_dev <= 1e-10,
        "M special": m_dev <= 1e-10,
        "g_2 = 0": all(abs(reglift_g(2, w)) <= 1e-12 for w in np.linspace(0, 1, 11)),
        "g_1(1) = 2 log 2": abs(reglift_g(1, 1.0) - 2 * math.log(2)) <= 1e-6,
    }
    report(capsys, 6, "Whittaker functions at s0 and the regularized lift kernel", checks,
           time.perf_counter() - t0, 5, f"grid max rel={worst:.1e}")


def test_7_delta_operator(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    for k, m, tau in delta_cases():
        a = delta_k_closed(1, m, 0, tau, k)[0]
        b = delta_k_numeric(1, m, 0, tau, k)[0]
        worst = max(worst, abs(a - b) / abs(a))
    report(capsys, 7, "delta_k closed form vs numerical derivative at 20 points", {"<= 1e-6": worst <= 1e-6},
           time.perf_counter() - t0, 5, f"max rel={worst:.1e}")


@pytest.mark.slow
def test_8_green_function(capsys):
    t0 = time.perf_counter()
    lat = cached("d1_signature_12")
    fr, one = find_frame(lat.space), lat.field.one
    points = (0.3 + 1.2j, -0.7 + 0.5j, 0.1 + 2.0j, 1.3 + 0.8j, 0.05 + 0.3j)
    radius = 2.0e4
    checks = {}
    # (a) every enumerated term satisfies w <= 1
    checks["(a) w <= 1"] = all(
        np.all(enumerate_terms(lat, 0, one, DomainPoint(fr, [zc]), radius).w <= 1 + 1e-12) for zc in points)
    # (b) series vs closed form of the kernel at s0
    dev = 0.0
    for n in range(1, 9):
        w = np.linspace(0.01, 1 - 1e-6, 200)
        dev = max(dev, float(np.max(np.abs(phi_values(w, 1 - w, n / 2, n, route="series")
                                           - phi_values(w, 1 - w, n / 2, n, route="closed")))))
    checks["(b) two-path <= 1e-9"] = dev <= 1e-9
    # (c) logarithmic singularity along a path to the divisor of lambda_0
    z0 = point_on_divisor(fr, np.array([1.0, 0.0, 0.0]))
    params = GreenParams(s=0.5, truncation_radius=radius, singular_threshold=5e-3)
    raws, regs = [], []
    for t in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7):
        reg, _, raw = green_regularized_at_point(lat, 0, one, DomainPoint(fr, [z0.z[0] + t * (0.37 + 0.21j)]), params)
        raws.append(raw.value)
        regs.append(reg)
    band = max(regs) - min(regs)
    checks["(c) regular part band <= 1e-3"] = band <= 1e-3
    checks["(c) raw growth >= 5"] = raws[-1] - raws[0] >= 5
    # (d) pole extraction: synthetic fit and z-independence of the residue
    eps = [0.1, 0.05, 0.025, 0.0125]
    c, a, _ = fit_pole(eps, [3 + 0.7 / e for e in eps])
    checks["(d) synthetic fit"] = abs(c - 3) <= 1e-8 and abs(a - 0.7) <= 1e-8
    res = [pole_extrapolate(lat, 0, one, DomainPoint(fr, [zc]), GreenParams(s=0.5, truncation_radius=radius)).residue
           for zc in points]
    spread = (max(res) - min(res)) / np.mean(res)
    checks["(d) residue spread <= 5%"] = spread <= 0.05
    report(capsys, 8, "Green function: local finiteness, kernel, singularity, pole", checks,
           time.perf_counter() - t0, 600, f"kernel dev={dev:.1e} band={band:.1e} residue spread={spread:.1%}")


def test_9_pairing_and_examples(capsys):
    t0 = time.perf_counter()
    k = WeightVector.for_lift(1, 1)
    key = (Q(1), 0)
    g = CuspFormData(k.kappa, {key: Fr(7, 3), (Q(2), 0): 5})
    f1 = WhittakerForm(k, {key: 2})
    f2 = WhittakerForm(k, {(Q(2), 0): -1, (Q(3), 0): 4})
    eis = EisensteinData({key: Fr(-1, 2), (Q(2), 0): Fr(3, 4)})
    rep = b_of_f(WhittakerForm(k, {key: 5}), eis)
    shimura = examples_shimura(None)
    checks = {
        "single-term pairing": pairing(g, WhittakerForm(k, {key: 1})) == Fr(7, 3),
        "pairing additive": pairing(g, f1 + f2) == pairing(g, f1) + pairing(g, f2),
        "empty cusp basis certificate": shimura["all_pass"] and shimura["cusp_basis_size"] == 0
        and shimura["certificate"] is not None,
        "B(f) exact": rep.b_of_f == Fr(-5, 2) and rep.a_of_f == 5,
        "A = -2B": rep.a_of_f == -2 * rep.b_of_f,
        "A-relation deviation 0": a_relation_deviation(f1 + WhittakerForm(k, {(Q(2), 0): 1}), eis,
                                                       {key: 1, (Q(2), 0): Fr(-3, 2)}) == 0,
    }
    report(capsys, 9, "pairing identities, Shimura-curve certificate, B(f) and A = -2B", checks,
           time.perf_counter() - t0, 1)
