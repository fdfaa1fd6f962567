import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import erfcx

from subdiff.special import (
    DomainError, FractionalOrder, log_mainardi, mainardi, ml_asymptotic, ml_asymptotic_switch, ml_neg,
    ml_series, ml_spectral, ml_switch, recip_gamma,
)

# E_a(-x) by series summation at 600 digits (mpmath), frozen
ML_ORACLE = {
    (0.3, 0.5): 0.63264900594359902246,
    (0.3, 2.0): 0.29023222616787535504,
    (0.3, 8.0): 0.089493095818620724136,
    (0.8, 0.5): 0.60302371586280369995,
    (0.8, 2.0): 0.18979669236370564843,
    (0.8, 8.0): 0.032273828446835791389,
}


def test_fractional_order_rejects_outside_unit_interval():
    for a in (0.0, 1.0, -0.2, 1.5, float("nan")):
        with pytest.raises(ValueError, match="alpha must lie in"):
            FractionalOrder(a)
    assert FractionalOrder(0.5).alpha == 0.5


def test_ml_at_zero():
    assert ml_neg(0.7, 0.0) == 1.0


def test_ml_half_closed_form():
    assert ml_neg(0.5, 1.0) == pytest.approx(0.427584, abs=1e-6)
    x = np.linspace(0.0, 50.0, 501)
    np.testing.assert_allclose(ml_neg(0.5, x), erfcx(x), rtol=1e-12, atol=1e-15)


def test_ml_alpha_one_is_exponential():
    assert ml_neg(1.0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-14)


@pytest.mark.parametrize("key", sorted(ML_ORACLE))
def test_ml_against_high_precision_series(key):
    a, x = key
    assert ml_neg(a, x) == pytest.approx(ML_ORACLE[key], rel=1e-12)


def test_ml_rejects_negative_argument():
    with pytest.raises(DomainError):
        ml_neg(0.5, -1.0)


@pytest.mark.parametrize("a", [0.1, 0.3, 0.5, 0.8, 0.95])
def test_ml_branches_agree_at_switches(a):
    xs = ml_switch(a)
    assert ml_series(a, xs) == pytest.approx(float(ml_spectral(a, xs)), rel=1e-12)
    xa = ml_asymptotic_switch(a)
    assert float(ml_asymptotic(a, xa, 12)) == pytest.approx(float(ml_spectral(a, xa)), rel=1e-13)


def test_ml_large_argument_tail():
    # E_a(-x) ~ x^-1 / Gamma(1 - a)
    a, x = 0.4, 1e8
    assert ml_neg(a, x) == pytest.approx(1.0 / (x * math.gamma(1.0 - a)), rel=1e-7)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.05, 0.99), x=st.floats(0.0, 200.0))
def test_ml_completely_monotone_bounds(a, x):
    v = float(ml_neg(a, x))
    assert 0.0 < v <= 1.0
    assert float(ml_neg(a, x + 1.0)) < v


def test_mainardi_examples():
    assert mainardi(0.5, 0.0) == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-14)
    assert mainardi(0.5, 1.0) == pytest.approx(math.exp(-0.25) / math.sqrt(math.pi), rel=1e-13)
    tau = np.linspace(0.0, 30.0, 61)
    np.testing.assert_allclose(mainardi(0.5, tau), np.exp(-tau ** 2 / 4) / math.sqrt(math.pi), rtol=1e-10, atol=1e-300)


def test_mainardi_moment_identity():
    # int tau^s M_a = Gamma(s + 1) / Gamma(a s + 1) at s = -1/2
    val, _ = quad(lambda t: t ** -0.5 * mainardi(0.5, t), 0, np.inf, limit=200)
    assert val == pytest.approx(math.gamma(0.5) / math.gamma(0.75), rel=1e-9)


@pytest.mark.parametrize("a", [0.2, 0.5, 0.8])
def test_mainardi_is_a_density(a):
    val, _ = quad(lambda t: mainardi(a, t), 0, np.inf, limit=200)
    assert val == pytest.approx(1.0, abs=1e-9)


def test_log_mainardi_far_tail_finite():
    v = log_mainardi(0.3, 200.0)
    assert np.isfinite(v) and v < -100


def test_recip_gamma():
    assert recip_gamma(1.0) == 1.0
    assert recip_gamma(0.0) == 0.0
    assert recip_gamma(-3.0) == 0.0
    assert recip_gamma(0.5) == pytest.approx(0.564190, abs=1e-6)
