import math

import pytest
from hypothesis import given, strategies as st

from kinlab.families import make_shell
from kinlab.kinetic import moments
from kinlab.kinetic.extreal import ExtReal
from kinlab.tails import (TailIntegralQuery, max3_gap, segment_integral, shell_macro_asymptotics,
                          tail_integral, tricomi_ratio)

# log of the tail and its Tricomi ratio, frozen from mpmath.gammainc at 30 digits
MPMATH_TAILS = [
    ((1.0, 2.0, 3.0, 200.0), -39990.096487447776367, 1.000025),
    ((0.5, 1.0, 2.0, 40.0), -11.829248576242465946, 1.105),
    ((2.0, 0.5, 5.0, 900.0), -22.388664740195402497, 1.2191623950516832419),
    ((1.0, 2.0, 0.0, 30.0), -904.0948993482791233, 0.99944536780830648771),
]


def test_tail_closed_forms():
    assert tail_integral(TailIntegralQuery(1, 1, 0, 2)).value == pytest.approx(math.exp(-2), rel=1e-10)
    assert tail_integral(TailIntegralQuery(1, 2, 1, 0)).value == pytest.approx(0.5, rel=1e-10)
    assert tail_integral(TailIntegralQuery(1, 2, 3, 1)).value == pytest.approx(math.exp(-1), rel=1e-10)


@pytest.mark.parametrize("query,log_tail,ratio", MPMATH_TAILS)
def test_tail_against_mpmath(query, log_tail, ratio):
    q = TailIntegralQuery(*query)
    assert tail_integral(q).log_value == pytest.approx(log_tail, rel=1e-10, abs=1e-8)
    assert tricomi_ratio(q) == pytest.approx(ratio, rel=1e-8)


def test_tricomi_examples():
    for x in (0.1, 1.0, 3.3, 50.0, 1000.0):
        assert tricomi_ratio(TailIntegralQuery(1, 2, 1, x)) == pytest.approx(1.0, abs=1e-12)
    assert tricomi_ratio(TailIntegralQuery(1, 1, 2, 100)) == pytest.approx(1.0202, rel=1e-10)
    assert abs(tricomi_ratio(TailIntegralQuery(1, 2, 3, 200)) - 1) <= 1e-3


def test_tricomi_needs_positive_x():
    with pytest.raises(ValueError):
        tricomi_ratio(TailIntegralQuery(1, 2, 1, 0))


@given(st.sampled_from([0.5, 1.0, 2.0]), st.sampled_from([0.5, 1.0, 2.0]), st.sampled_from([0, 1, 2, 3, 5]),
       st.floats(100, 1e5))
def test_first_order_envelope(alpha, beta, n, target):
    x = (target / alpha) ** (1 / beta)
    r = tricomi_ratio(TailIntegralQuery(alpha, beta, n, x))
    assert abs(r - 1) <= 5 * abs(n + 1 - beta) / target + 1e-12


@given(st.floats(0, 5), st.floats(0.01, 5))
def test_tail_additivity(x, gap):
    q = (1.0, 2.0, 2.0)
    y = x + gap
    whole = tail_integral(TailIntegralQuery(*q, x))
    parts = segment_integral(*q, x, y) + tail_integral(TailIntegralQuery(*q, y))
    assert parts.log_value == pytest.approx(whole.log_value, abs=1e-8)


def test_shell_asymptotics_examples():
    mf = shell_macro_asymptotics(1, 2, 3, 1, 10)
    assert mf.temp == pytest.approx(100 / 3, rel=1e-14)
    assert mf.log_rho == pytest.approx(math.log(20 * math.pi) - 100, rel=1e-14)
    assert mf.speed == 0.0


@pytest.mark.parametrize("n", [20, 30, 50])
def test_shell_asymptotics_against_quadrature(n):
    fam = make_shell(1, 2, 1, n)
    quad = moments(fam.density())
    pred = shell_macro_asymptotics(1, 2, 3, fam.a_np, n)
    assert abs(3 * quad.temp / n ** 2 - 1) <= 0.05
    assert abs(quad.log_rho - pred.log_rho) <= 0.05


def test_max3_gap_values():
    # maximiser v_T = alpha' beta T = 10, so g(11) - g(10) = -1/(2T); evaluating at 5 instead gives 0.45
    g = lambda x: x - x * x / 20
    assert g(11) - g(10) == pytest.approx(-0.05, abs=1e-14)
    assert max3_gap(1, 1, 10) == pytest.approx(-0.05, abs=1e-14)
    gaps = [abs(max3_gap(1, 1, t)) for t in (1e2, 1e3, 1e4)]
    assert gaps[0] > gaps[1] > gaps[2]
    for p in (1, 2):
        assert math.exp(p * max3_gap(1, 1, 1e6)) == pytest.approx(1, abs=1e-5)


def test_max3_gap_domain():
    with pytest.raises(ValueError):
        max3_gap(1, 2, 10)
