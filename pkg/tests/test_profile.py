import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subdiff.profile import (
    ProfileTable, build_profile, estimate_kappa, eval_profile, fit_tail, fundamental_solution, kappa_exact,
    profile_mass, profile_oracle_fourier, read_table, saddle_sigma, second_moment, subordination,
    tail_exponent, write_table,
)
from subdiff.solver import profile_table

# F_1 = M_{a/2}/2 and F_3 = -F_1'/(2 pi r) from the Wright series at 600 digits (mpmath), frozen
F_ORACLE = {
    (0.5, 0.5): (0.28398440942038478813, 0.068412895395471951505),
    (0.5, 1.0): (0.19166770828534176789, 0.024852423879502757748),
    (0.5, 2.0): (0.080625541727292927953, 0.0058646783651077995427),
    (0.8, 0.5): (0.27333194066484792571, 0.043098562023887732013),
    (0.8, 1.0): (0.20511679702191341008, 0.021247625402819683693),
    (0.8, 2.0): (0.092791137255054575387, 0.0068636749892062204717),
}


@pytest.mark.parametrize("key", sorted(F_ORACLE))
def test_profile_against_wright_series(key):
    a, r = key
    f1, f3 = F_ORACLE[key]
    assert eval_profile(profile_table(1, a), r) == pytest.approx(f1, rel=1e-9)
    assert eval_profile(profile_table(3, a), r) == pytest.approx(f3, rel=1e-9)


def test_f_zero_one_dimension():
    t = profile_table(1, 0.5)
    assert eval_profile(t, 0.0) == t.f_zero
    f0 = 1.0 / (2.0 * math.gamma(0.75))
    assert t.f_zero == pytest.approx(f0, rel=1e-12)
    assert fundamental_solution(t, 0.0, 16.0) == pytest.approx(0.5 * f0, rel=1e-12)


def test_near_origin_laws():
    t3 = profile_table(3, 0.5)
    assert eval_profile(t3, 1e-4) == pytest.approx(0.044897 / 1e-4, rel=1e-3)
    assert eval_profile(profile_table(2, 0.5), 0.0) == math.inf


def test_kappa_values():
    assert profile_table(3, 0.5).kappa == pytest.approx(0.044897, abs=1e-4)
    assert profile_table(2, 0.5).kappa == pytest.approx(0.089795, abs=1e-4)
    assert kappa_exact(3, 0.5) == pytest.approx(1 / (4 * math.pi ** 1.5), rel=1e-14)


def test_kappa_of_exact_power_law():
    r = np.geomspace(1e-6, 30, 800)
    fit = estimate_kappa(ProfileTable(3, 0.5, r, 0.07 / r))
    assert fit.kappa == pytest.approx(0.07, rel=1e-12)


def test_tail_fit_recovers_exact_model():
    r = np.geomspace(1e-6, 30, 800)
    fit = fit_tail(ProfileTable(1, 0.5, r, 3 * np.exp(-2 * r ** (4 / 3))), prefactor=False)
    assert tail_exponent(0.5) == pytest.approx(4 / 3)
    assert fit.kappa_hat == pytest.approx(3.0, rel=1e-10)
    assert fit.sigma_hat == pytest.approx(2.0, rel=1e-10)


def test_fitted_sigma_near_saddle_value():
    t = profile_table(1, 0.5)
    assert t.sigma_hat == pytest.approx(saddle_sigma(0.5), rel=1e-3)


def test_fourier_oracle_cross_route():
    f0 = 1.0 / (2.0 * math.gamma(0.75))
    assert profile_oracle_fourier(1, 0.5, np.array([0.0]))[0] == pytest.approx(f0, abs=1e-7)
    r = np.array([1.0])
    assert profile_oracle_fourier(3, 0.5, r)[0] == pytest.approx(subordination(3, 0.5, r)[0], rel=1e-6)
    r = np.array([0.5])
    assert profile_oracle_fourier(2, 0.3, r)[0] == pytest.approx(subordination(2, 0.3, r)[0], rel=1e-6)


def test_second_moments():
    assert second_moment(profile_table(1, 0.5)) == pytest.approx(2 / math.gamma(1.5), rel=1e-6)
    assert second_moment(profile_table(3, 0.5)) == pytest.approx(6 / math.gamma(1.5), rel=1e-6)


def test_near_classical_limit():
    t = build_profile(1, 0.99)
    assert profile_mass(t) == pytest.approx(1.0, abs=1e-6)
    assert second_moment(t) == pytest.approx(2.0, rel=1e-2)


def test_table_round_trip():
    t = profile_table(3, 0.5)
    buf = io.StringIO()
    text = write_table(t, buf)
    assert text.splitlines()[-len(t.radii) - 1] == "r,F,patch_flag,dlogF_dlogr"
    back = read_table(io.StringIO(text))
    np.testing.assert_array_equal(back.values, t.values)
    assert back.kappa == t.kappa and back.sigma_hat == t.sigma_hat
    r = np.array([1e-5, 0.3, 5.0, 60.0])
    np.testing.assert_array_equal(eval_profile(back, r), eval_profile(t, r))
    assert write_table(back, io.StringIO()) == text


@settings(max_examples=30, deadline=None)
@given(a=st.sampled_from([0.3, 0.5, 0.8]), dim=st.sampled_from([1, 2, 3]),
       r=st.floats(1e-3, 40.0), k=st.floats(1.01, 2.0))
def test_profile_positive_and_decreasing(a, dim, r, k):
    t = profile_table(dim, a)
    f0, f1 = eval_profile(t, r), eval_profile(t, k * r)
    assert 0 < f1 < f0


@settings(max_examples=20, deadline=None)
@given(t=st.floats(1e-2, 1e6), x=st.floats(0.0, 3.0))
def test_self_similarity(t, x):
    # Z(x, t) = t^(-aN/2) F(|x| t^(-a/2))
    tab = profile_table(3, 0.5)
    z = fundamental_solution(tab, x * t ** 0.25, t)
    if x > 0:
        assert z == pytest.approx(t ** -0.75 * eval_profile(tab, x), rel=1e-12)
