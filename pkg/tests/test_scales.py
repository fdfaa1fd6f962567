import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subdiff.scales import (
    CoverageError, GFamily, NormSpec, UnsupportedRate, critical_exponent, lp_region_norm, parse_norm,
    parse_scale, region_at, theoretical_rate, weak_pc_norm,
)
from subdiff.solver import Snapshot, region_grid
from subdiff.transforms import RadialGrid


def snap(dim, lo, hi, fn):
    g = region_grid(lo, hi)
    g = RadialGrid.from_edges(np.union1d(g.edges, np.linspace(lo, hi, 65)))
    return Snapshot(dim, 0.5, "synthetic", 1.0, g.nodes, fn(g.nodes), "synthetic", g.weights, (lo, hi))


def test_regions():
    assert region_at(parse_scale("compact(1)"), 5.0, 0.5) == (0.0, 1.0)
    assert region_at(parse_scale("characteristic(1,2)"), 1e4, 0.5) == pytest.approx((10.0, 20.0))
    lo, hi = region_at(parse_scale("intermediate(t^0.1,1,2)"), 1e4, 0.5)
    assert (lo, hi) == pytest.approx((10 ** 0.4, 2 * 10 ** 0.4))


def test_intermediate_scale_must_be_slower_than_characteristic():
    with pytest.raises(ValueError):
        parse_scale("intermediate(t^0.3,0,1)").check(0.5)
    parse_scale("intermediate(t^0.2,0,1)").check(0.5)
    with pytest.raises(ValueError):
        parse_scale("characteristic(2,1)")


@pytest.mark.parametrize("text", ["compact(1.5)", "characteristic(1,2)", "intermediate(t^0.1,1,2)",
                                  "intermediate(t^(a/2)/log^2,0,1)", "fast(t*log^((2-a)/a),1,3)",
                                  "moderately_fast(1,0.5)", "very_fast(3)", "very_fast(3,24)"])
def test_scale_text_round_trip(text):
    s = parse_scale(text)
    assert parse_scale(s.text()) == s


def test_g_families():
    g = GFamily.parse("t^(a/2)/log^2")
    assert g.is_intermediate(0.5)
    assert GFamily.parse(g.text()) == g
    assert not GFamily.parse("t^(a/2)*log^2").is_intermediate(0.5)
    assert g(np.e ** 4, 0.5) == pytest.approx(np.e ** 1 / 16)


def test_critical_exponents():
    assert critical_exponent(3) == 3.0
    assert critical_exponent(2) == math.inf
    assert critical_exponent(1) is None


def test_norm_parsing():
    assert parse_norm("p=inf") == NormSpec(math.inf)
    assert parse_norm("p=2") == NormSpec(2.0)
    assert parse_norm("weak-pc").weak
    with pytest.raises(ValueError):
        parse_norm("weak-pc").check(1)


def test_constant_norms():
    c = 2.0
    s = snap(3, 0.0, 1.0, lambda r: np.full_like(r, c))
    assert lp_region_norm(s, (0.0, 1.0), 1.0) == pytest.approx(c * 4 * math.pi / 3, rel=1e-12)
    assert lp_region_norm(s, (0.0, 1.0), math.inf) == pytest.approx(c, rel=1e-14)
    assert lp_region_norm(s, (0.0, 1.0), 64.0) == pytest.approx(c, rel=5e-2)
    assert weak_pc_norm(s, (0.0, 1.0)) == pytest.approx(c * (4 * math.pi / 3) ** (1 / 3), rel=1e-10)


def test_inverse_radius_norms():
    s = snap(3, 1.0, 2.0, lambda r: 1.0 / r)
    assert lp_region_norm(s, (1.0, 2.0), 2.0) == pytest.approx(math.sqrt(4 * math.pi), rel=1e-12)
    w = snap(3, 0.0, 2.0, lambda r: 1.0 / np.maximum(r, 1e-300))
    assert weak_pc_norm(w, (0.0, 2.0)) == pytest.approx((4 * math.pi / 3) ** (1 / 3), rel=2e-2)


def test_region_outside_snapshot_is_rejected():
    s = snap(3, 0.0, 1.0, np.cos)
    with pytest.raises(CoverageError):
        lp_region_norm(s, (0.0, 2.0), 2.0)


def test_theoretical_rates():
    a = 0.5
    law = theoretical_rate(3, NormSpec(2.0), parse_scale("characteristic(1,2)"), a)
    assert law.power == pytest.approx(-3 * a / 4) and law.log_power == 0
    law = theoretical_rate(2, NormSpec(), parse_scale("compact(1)"), a)
    assert (law.power, law.log_power) == (-a, 1.0)
    law = theoretical_rate(3, NormSpec(), parse_scale("intermediate(t^0.1,1,2)"), a)
    assert (law.power, law.scale_power) == (-a, -1.0)
    with pytest.raises(UnsupportedRate):
        theoretical_rate(3, NormSpec(weak=True), parse_scale("characteristic(1,2)"), a)


@settings(max_examples=30, deadline=None)
@given(lo=st.floats(0.0, 0.5), hi=st.floats(0.6, 1.0), p=st.sampled_from([1.0, 2.0, 3.0, math.inf]))
def test_norm_monotone_in_region(lo, hi, p):
    s = snap(3, 0.0, 1.0, lambda r: np.exp(-r) * (1 + r))
    assert lp_region_norm(s, (lo, hi), p) <= lp_region_norm(s, (0.0, 1.0), p) * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(c=st.floats(-10.0, 10.0), p=st.sampled_from([1.0, 2.0, 3.0, math.inf]), dim=st.sampled_from([1, 2, 3]))
def test_norm_homogeneous(c, p, dim):
    s = snap(dim, 0.0, 2.0, lambda r: np.cos(r))
    sc = snap(dim, 0.0, 2.0, lambda r: c * np.cos(r))
    assert lp_region_norm(sc, (0.0, 2.0), p) == pytest.approx(abs(c) * lp_region_norm(s, (0.0, 2.0), p),
                                                              rel=1e-12, abs=1e-300)
