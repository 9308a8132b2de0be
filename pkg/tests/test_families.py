import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kinlab.errors import BadGamma, BadShell, BadTemperature, ConfigError
from kinlab.families import (family_from_dict, family_macro_fields, make_inhomogeneous, make_shell,
                             make_two_bump, omega_threshold)
from kinlab.kinetic import Weight, weighted_lp_norm
from kinlab.kinetic.moments import component_moments


def test_shell_normalisation_examples():
    assert make_shell(1, 2, math.inf, 4).a_np == 1.0
    assert make_shell(1, 2, 1, 2).a_np == pytest.approx(3 / (224 * math.pi), rel=1e-13)
    assert make_shell(1, 2, 2, 5).weighted_norm().value == pytest.approx(1.0, abs=1e-12)


def test_bad_shell():
    with pytest.raises(BadShell):
        make_shell(1, 2, 1, 1.5)
    with pytest.raises(BadShell):
        make_shell(1, 2, 2, 4, half_infinite=True)


@given(st.floats(2, 40), st.floats(1, 8), st.sampled_from([1, 2, 3]))
def test_shell_normalisation_property(n, p, dim):
    assert make_shell(1, 2, p, n, dim).weighted_norm().log_value == pytest.approx(0.0, abs=1e-10)


def test_shell_weighted_norm_by_quadrature():
    fam = make_shell(1, 2, 2, 3)
    got = weighted_lp_norm(fam.density(), Weight(1, 2, 0), 2, 3)
    assert got.value == pytest.approx(1.0, rel=1e-7)


def test_shell_evaluator_and_support():
    fam = make_shell(1, 2, math.inf, 3)
    assert fam.log_eval(np.array([4.0, 0, 0])) == pytest.approx(-16.0)
    assert fam.log_eval(np.array([2.0, 0, 0])) == -math.inf
    assert fam.isotropic


def test_two_bump_preconditions():
    with pytest.raises(BadTemperature):
        make_two_bump(1, 0.3, 2, 2, 30)   # alpha' T = 0.6
    with pytest.raises(BadTemperature):
        make_two_bump(20, 0.2, 2, 2, 30)  # alpha'/(1 - 2 T alpha') = 10 < 20


def test_two_bump_flat_part_isotropic():
    fam = make_two_bump(1, 0.2, 2, 2, 30)
    flat = component_moments(fam.density().components[0])
    assert np.allclose(flat.mean_offset, 0.0)


def test_two_bump_fields():
    rep = family_macro_fields(make_two_bump(1, 0.2, 2, 2, 30))
    assert abs(rep.fields.temp / 0.2 - 1) <= 0.10
    lo, hi = rep.deviations["u_lower"], rep.deviations["u_upper"]
    assert lo <= rep.fields.speed <= hi
    rep50 = family_macro_fields(make_two_bump(1, 0.2, 2, 2, 50))
    assert rep50.deviations["u_in_bracket"]


@given(st.floats(5, 40), st.floats(1, 6))
def test_two_bump_weighted_norm_bound(n, p):
    fam = make_two_bump(1, 0.2, 2, p, n)
    norm = weighted_lp_norm(fam.density(), Weight(1, 2, 0), p, 3)
    assert norm.value <= fam.weighted_norm_bound() * (1 + 1e-8)


def test_shell_fields_radial():
    rep = family_macro_fields(make_shell(1, 2, 1, 30))
    assert rep.fields.speed == 0.0
    assert abs(3 * rep.fields.temp / 900 - 1) <= 0.03


def test_inhomogeneous_examples():
    fam = make_inhomogeneous(1, 2, 1 / 3)
    v = np.array([[0.5, 0.2, 0.1], [3.0, 4.0, 0.0], [10.0, 0.0, 0.0], [10.5, 0.0, 0.0]])
    x0 = np.zeros(3)
    expect = np.where(np.linalg.norm(v, axis=1) <= 10, -np.sum(v * v, axis=1), -np.inf)
    got = fam.log_eval(x0, v)
    assert np.array_equal(np.isinf(got), np.isinf(expect))
    assert np.allclose(got[:3], expect[:3], rtol=1e-14)
    assert fam(np.array([2.0, 1.0, 0.0]), np.zeros(3)) == 0.0
    rng = np.random.default_rng(1)
    q = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    x, vv = np.array([3.0, -1.0, 2.0]), np.array([2.0, 1.0, 0.5])
    assert fam.log_eval(x, vv) == fam.log_eval(q @ x, q @ vv)


def test_gamma_range():
    with pytest.raises(BadGamma):
        make_inhomogeneous(1, 2, 0.5)
    fam = make_inhomogeneous(1, 2, 0.5, enforce_gamma_range=False)
    assert not fam.gamma_admissible
    assert make_inhomogeneous(1, 1, 0.5).gamma_admissible


def test_finiteness_table():
    gamma, dim, p, q = 0.5, 3, 2.0, 2.0
    thr, strict = omega_threshold(p, q, dim, gamma)
    assert strict and thr == pytest.approx(dim * (gamma / q + 1 / p))
    good = make_inhomogeneous(1, 1, gamma, 0, thr + 0.5)
    vals = [good.log_truncated_mixed_norm(p, q, r) for r in (1e2, 1e4, 1e6)]
    assert abs(vals[2] - vals[1]) < 1e-3 * max(1, abs(vals[1])) + 1e-3
    bad = make_inhomogeneous(1, 1, gamma, 0, thr - 0.5)
    grow = [bad.log_truncated_mixed_norm(p, q, r) for r in (1e2, 1e4, 1e6)]
    assert grow[2] - grow[1] > 1.0 and grow[1] - grow[0] > 1.0


@pytest.mark.parametrize("fam", [make_shell(1, 2, math.inf, 3), make_two_bump(1, 0.2, 2, 2, 30),
                                 make_inhomogeneous(1, 1, 0.4, 1, 2)])
def test_json_round_trip(fam):
    again = family_from_dict(json.loads(json.dumps(fam.to_dict())))
    assert again == fam


def test_json_unknown_kind():
    with pytest.raises(ConfigError):
        family_from_dict({"kind": "torus"})
