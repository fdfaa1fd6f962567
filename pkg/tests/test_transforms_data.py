import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from subdiff.data import ball_indicator, gaussian, parse_datum, power_tail, smooth_bump
from subdiff.special import DomainError
from subdiff.transforms import RadialGrid, radial_fourier, radial_inverse, sphere_area


def test_sphere_area():
    assert sphere_area(1) == 2.0
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_gaussian_transform_pair_3d():
    g = RadialGrid.log_linear(r_cut=40.0)
    f = lambda r: (4 * math.pi) ** -1.5 * np.exp(-r ** 2 / 4)
    assert radial_fourier(3, f, np.array([1.0]), g)[0] == pytest.approx(math.exp(-1.0), rel=1e-10)


def test_indicator_transforms():
    grid = RadialGrid.from_edges(np.linspace(0, 1, 9))
    one = lambda r: np.ones_like(r)
    v = radial_fourier(1, one, np.array([math.pi, 0.0]), grid)
    assert abs(v[0]) < 1e-12
    assert v[1] == pytest.approx(2.0, rel=1e-13)
    assert radial_fourier(3, one, np.array([0.0]), grid)[0] == pytest.approx(4 * math.pi / 3, rel=1e-13)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_inverse_recovers_gaussian(dim):
    g = RadialGrid.log_linear(r_cut=12.0)
    r = np.array([0.0, 0.5, 2.0])
    u = radial_inverse(dim, lambda k: np.exp(-k ** 2), r, g)
    exact = (4 * math.pi) ** (-dim / 2) * np.exp(-r ** 2 / 4)
    np.testing.assert_allclose(u, exact, rtol=1e-8)


def test_masses():
    assert gaussian(3).mass == pytest.approx(1.0, rel=1e-14)
    assert ball_indicator(3, 1.0, 3 / (4 * math.pi)).mass == pytest.approx(1.0, rel=1e-14)
    # direct radial quadrature of the power tail, split at the core transition
    p = power_tail(3, 1.0, 5.0)
    f = lambda r: 4 * math.pi * r ** 2 * p.eval(r)
    ref = sum(quad(f, a, b, epsabs=0, epsrel=1e-13, limit=200)[0] for a, b in ((0, 1), (1, 2), (2, np.inf)))
    assert p.mass == pytest.approx(ref, rel=1e-8)


def test_pointwise_values():
    b = ball_indicator(3, 1.0, 2.0)
    assert b.eval(0.5) == 2.0
    assert b.eval(2.0) == 0.0
    assert power_tail(3, 1.0, 5.0).eval(10.0) == pytest.approx(1e-5, rel=1e-12)


def test_datum_transforms():
    assert gaussian(1).radial_transform(1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)
    b = ball_indicator(3, 1.0, 2.0)
    assert b.radial_transform(math.pi) == pytest.approx(2.0 * 4 / math.pi, rel=1e-12)
    for d in (gaussian(2), b, smooth_bump(3), power_tail(1, 1.0, 3.0)):
        assert d.radial_transform(0.0) == pytest.approx(d.mass, rel=1e-10)


def test_power_tail_needs_integrability():
    with pytest.raises(DomainError):
        power_tail(3, 1.0, 3.0)


def test_parse_datum_round_trip():
    d = parse_datum("ball_indicator(radius=2, height=0.5)", 2)
    assert d.params == {"radius": 2.0, "height": 0.5}
    assert parse_datum(d.name, 2).params == d.params
    with pytest.raises(DomainError):
        parse_datum("cauchy", 1)


def test_tail_classes():
    assert gaussian(3).in_d_beta(10.0)
    assert power_tail(1, 1.0, 3.0).tail_class.kind == "exact_power"
    assert not power_tail(1, 1.0, 3.0).in_d_beta(4.0)
    assert smooth_bump(2).tail_class.kind == "compact"


@settings(max_examples=25, deadline=None)
@given(dim=st.sampled_from([1, 2, 3]), r=st.floats(0.0, 6.0), rho=st.floats(0.05, 3.0))
def test_sphere_mean_bounded_by_extremes(dim, r, rho):
    # a spherical mean of a nonnegative radially decreasing datum lies in [0, u0(0)]
    d = gaussian(dim)
    m = float(d.sphere_mean(r, rho))
    assert -1e-15 <= m <= float(d.eval(0.0)) * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(scale=st.floats(0.2, 4.0), mass=st.floats(0.1, 10.0))
def test_gaussian_mass_property(scale, mass):
    assert gaussian(2, scale, mass).mass == pytest.approx(mass, rel=1e-12)
