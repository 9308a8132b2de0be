import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import minimize

from kinlab.families import make_shell, make_two_bump
from kinlab.homogeneous import (blowup_scan, evolve_explicit, scan_regression, weighted_lp_norm_maxwellian,
                                weighted_sup_norm_maxwellian)
from kinlab.kinetic import MacroFields, Maxwellian, Weight, maxwellian_density, raw_moments, weighted_lp_norm


def _m(rho=1.0, u=(0, 0, 0), temp=1.0):
    return Maxwellian(MacroFields.make(rho, list(u), temp))


# ---------------------------------------------------------------- explicit solution

def test_evolve_t0_and_large_t():
    fam = make_shell(1, 2, math.inf, 3)
    v = np.array([[3.2, 0, 0], [0, 3.5, 1.0], [1.0, 1.0, 1.0]])
    sol0 = evolve_explicit(fam, 0.0)
    assert np.array_equal(sol0.log_eval(v), fam.density().log_eval(v))
    sol = evolve_explicit(fam, 10.0)
    meq = np.exp(sol.equilibrium.log_eval(v))
    mix = math.exp(-10) * fam.density()(v) - math.expm1(-10) * meq
    assert np.allclose(sol(v), mix, rtol=1e-12, atol=0)


@pytest.mark.parametrize("t", [0.0, 0.5, 3.0])
def test_moments_conserved(t):
    fam = make_shell(1, 2, 1, 10)
    base = raw_moments(fam.density())
    got = raw_moments(evolve_explicit(fam, t).density())
    assert got[0] == pytest.approx(base[0], rel=1e-8)
    assert np.allclose(got[1], base[1], atol=1e-8 * base[0])
    assert got[2] == pytest.approx(base[2], rel=1e-8)


# ---------------------------------------------------------------- sup norm

def test_sup_norm_examples():
    val, arg = weighted_sup_norm_maxwellian(_m(), 0.25, 2)
    assert val.value == pytest.approx((2 * math.pi) ** -1.5, rel=1e-12)
    assert np.allclose(arg, 0)
    inf, _ = weighted_sup_norm_maxwellian(_m(), 0.5, 2)
    assert inf.is_infinite and inf.witness == "α′ ≥ 1/(2T)"
    val, arg = weighted_sup_norm_maxwellian(_m(temp=100), 1, 1)
    assert np.linalg.norm(arg) == pytest.approx(100, rel=1e-12)
    assert val.log_value == pytest.approx(-1.5 * math.log(200 * math.pi) + 50, rel=1e-12)
    assert weighted_sup_norm_maxwellian(_m(), 1, 3)[0].witness == "β > 2"


def test_sup_norm_equality_case_option():
    val, _ = weighted_sup_norm_maxwellian(_m(), 0.5, 2, equality_finite=True)
    assert val.log_value == pytest.approx(_m().log_prefactor)
    shifted, _ = weighted_sup_norm_maxwellian(_m(u=(1, 0, 0)), 0.5, 2, equality_finite=True)
    assert shifted.is_infinite


@given(st.floats(0.05, 0.9), st.floats(0.2, 5), st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_argmax_formula(crit, temp, u):
    ap = crit / (2 * temp)
    m = _m(u=u, temp=temp)
    val, arg = weighted_sup_norm_maxwellian(m, ap, 2)
    expect = np.array(u) / (1 - 2 * temp * ap)
    assert np.allclose(arg, expect, rtol=1e-6, atol=1e-6 * max(1, np.linalg.norm(expect)))
    res = minimize(lambda v: -(ap * v @ v + float(m.log_eval(v))), np.zeros(3), method="BFGS",
                   jac="3-point", options={"gtol": 1e-10})
    assert np.allclose(res.x, expect, rtol=1e-6, atol=1e-6 * max(1, np.linalg.norm(expect)))


@given(st.floats(0.2, 3), st.floats(0.5, 50), st.floats(0.3, 1.7))
def test_beta_lt2_closed_form_against_grid(ap, temp, beta):
    m = _m(temp=temp)
    val, arg = weighted_sup_norm_maxwellian(m, ap, beta)
    r0 = float(np.linalg.norm(arg))
    r = np.linspace(max(r0 - 1, 0), r0 + 1, 200001)
    grid = (ap * r ** beta - r * r / (2 * temp)).max() + m.log_prefactor
    assert val.log_value == pytest.approx(grid, rel=1e-12, abs=1e-6)


# ---------------------------------------------------------------- L^p norms

def test_lp_examples():
    assert weighted_lp_norm_maxwellian(_m(), 0.0, 1).value == pytest.approx(1.0, rel=1e-10)
    assert weighted_lp_norm_maxwellian(_m(), 0.0, 2).value == pytest.approx(0.14982786878830593648, rel=1e-10)
    one = weighted_lp_norm_maxwellian(_m(u=(1, 0, 0)), 0.1, 3)
    two = weighted_lp_norm_maxwellian(_m(rho=2, u=(1, 0, 0)), 0.1, 3)
    assert two.value == pytest.approx(2 * one.value, rel=1e-10)
    inf = weighted_lp_norm_maxwellian(_m(), 0.5, 2)
    assert inf.is_infinite and inf.witness == "p − 2pα′T ≤ 0"


@given(st.floats(0.01, 0.4), st.floats(1, 6), st.floats(0, 2))
def test_lp_closed_form_cross_check(ap, p, speed):
    quad, closed = weighted_lp_norm_maxwellian(_m(u=(speed, 0, 0)), ap, p, cross_check=True)
    assert quad.log_value == pytest.approx(closed.log_value, abs=1e-7)


def test_lp_approaches_sup():
    m = _m(u=(0.5, 0, 0), temp=1.0)
    sup = weighted_sup_norm_maxwellian(m, 0.2, 2)[0].log_value
    crit = 1 - 2 * 0.2
    gaps = []
    for p in (4, 16, 64, 256, 1024):
        gap = weighted_lp_norm_maxwellian(m, 0.2, p).log_value - sup
        assert gap == pytest.approx(1.5 / p * math.log(2 * math.pi / (p * crit)), abs=1e-8)
        gaps.append(abs(gap))
    assert gaps[2] > gaps[3] > gaps[4]


# ---------------------------------------------------------------- sandwich

@pytest.mark.parametrize("fam,ap,p", [(make_shell(1, 2, math.inf, 3), 1.0, math.inf),
                                      (make_shell(1, 2, 2, 3), 0.05, 2),
                                      (make_shell(1, 2, 1, 4), 0.5, 1)])
@pytest.mark.parametrize("t", [0.1, 1.0, 5.0])
def test_weighted_norm_sandwich(fam, ap, p, t):
    sol = evolve_explicit(fam, t)
    w = Weight(ap, 2.0, 0.0)
    total = weighted_lp_norm(sol.density(), w, p, 3)
    meq = weighted_lp_norm(maxwellian_density(sol.equilibrium), w, p, 3)
    lower = meq * (-math.expm1(-t))
    assert not total < lower
    if meq.is_infinite:
        assert total.is_infinite


# ---------------------------------------------------------------- scans

def test_scan_beta_gt2():
    rows = blowup_scan("beta_gt2", [2, 5, 10])
    assert all(r["log_value_or_bound"] == "inf" and r["witness"] == "β > 2" for r in rows)


def test_scan_beta_eq2_shell():
    rows = blowup_scan("beta_eq2_shell", [2, 3, 5, 8], {"alpha": 1, "alpha_prime": 1})
    for r in rows:
        assert r["hyp_alpha_prime_gt_N_over_n2"]
        assert r["log_value_or_bound"] == "inf"


def test_scan_beta_lt2_regression():
    rows = blowup_scan("beta_lt2", range(20, 61, 5), {"alpha": 1, "alpha_prime": 1, "beta": 1})
    coef = scan_regression(rows, 2, 1)
    assert abs(coef[0] / rows[0]["lead_coefficient"] - 1) <= 0.1
    vals = [float(r["log_value_or_bound"]) for r in rows]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert all(r["bound_below_true"] for r in rows)


def test_scan_two_bump_growth():
    rows = blowup_scan("beta_eq2_twobump", [10, 20, 30], {"alpha": 1, "alpha_prime": 2, "T": 0.2, "p": 2})
    vals = [float(r["log_value_or_bound"]) for r in rows]
    assert vals[0] < vals[1] < vals[2]
    assert all(r["hyp_u_in_bracket"] for r in rows)
