import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subdiff.data import gaussian, smooth_bump
from subdiff.l1 import L1Grid, ResourceError, backward_euler, l1_weights, solve_l1
from subdiff.solver import profile_table
from subdiff.special import DomainError, ml_neg


def test_weights():
    b = l1_weights(0.5, 4)
    assert b[0] == 1.0
    assert b[1] == pytest.approx(0.414214, abs=1e-6)
    assert np.all(np.diff(b) < 0)


def test_cost_cap():
    g = L1Grid(1, 0.5, 10.0, 1000, 1.0, 10000)
    with pytest.raises(ResourceError):
        solve_l1(gaussian(1), g, cap=1e9)


def test_requested_times_must_be_mesh_times():
    g = L1Grid(1, 0.5, 10.0, 50, 1.0, 10)
    with pytest.raises(ValueError):
        solve_l1(gaussian(1), g, times=[0.55])
    snaps = solve_l1(gaussian(1), g, times=[0.5, 1.0])
    assert [s.t for s in snaps] == [0.5, 1.0]


def test_truncation_guard():
    g = L1Grid(1, 0.5, 3.0, 60, 10.0, 10)
    with pytest.raises(DomainError):
        solve_l1(smooth_bump(1), g, table=profile_table(1, 0.5))


def test_periodic_eigenmode():
    # u0 = cos x decays as E_a(-lambda_h t^a) with the discrete eigenvalue
    m, a = 64, 0.5
    g = L1Grid(1, a, 2 * math.pi, m, 1.0, 512, grading=2.0, boundary="periodic")
    h = g.h
    lam = (2 - 2 * math.cos(h)) / h ** 2
    u = solve_l1(np.cos(g.nodes), g)[-1]
    amp = float(np.dot(u.values, np.cos(g.nodes)) * 2 / m)
    assert amp == pytest.approx(ml_neg(a, lam), rel=2e-3)


def test_near_classical_order_matches_backward_euler():
    g = L1Grid(1, 0.99, 20.0, 200, 1.0, 200)
    u = solve_l1(gaussian(1), g)[-1].values
    v = backward_euler(gaussian(1), g).values
    assert np.max(np.abs(u - v)) / np.max(np.abs(v)) <= 2e-2


@settings(max_examples=10, deadline=None)
@given(a=st.floats(0.1, 0.95), n=st.integers(5, 60))
def test_discrete_maximum_principle(a, n):
    g = L1Grid(1, a, 8.0, 80, 2.0, n)
    u = solve_l1(smooth_bump(1), g)[-1].values
    assert np.all(u >= -1e-13)
    assert np.all(u <= 1.0 + 1e-13)


@settings(max_examples=10, deadline=None)
@given(c=st.floats(0.1, 10.0))
def test_linearity(c):
    g = L1Grid(2, 0.5, 10.0, 60, 1.0, 20)
    u = solve_l1(gaussian(2), g)[-1].values
    v = solve_l1(gaussian(2, 1.0, c), g)[-1].values
    np.testing.assert_allclose(v, c * u, rtol=1e-12, atol=1e-300)
