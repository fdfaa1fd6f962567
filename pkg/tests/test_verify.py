import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subdiff.data import gaussian, smooth_bump
from subdiff.scales import NormSpec, RateLaw, parse_scale
from subdiff.verify import (
    Comparand, DegenerateFit, Experiment, HypothesisError, Series, Verdict, default_experiments, fit_rate, judge,
    mu_beta, run_experiment, verify, write_report,
)

T5 = np.logspace(2, 6, 5)


def test_fit_exact_power():
    f = fit_rate(T5, 5 * T5 ** -0.35)
    assert f.power == pytest.approx(-0.35, abs=1e-12)
    assert f.r2 == pytest.approx(1.0)


def test_fit_with_log_term():
    t = np.logspace(2, 8, 7)
    f = fit_rate(t, t ** -0.5 * np.log(t), log_term=True)
    assert f.power == pytest.approx(-0.5, abs=0.02)
    assert f.log_power == pytest.approx(1.0, abs=0.1)


def test_fit_constant_series():
    assert fit_rate(T5, np.full(5, 3.0)).power == pytest.approx(0.0, abs=1e-12)


def test_fit_rejects_bad_series():
    with pytest.raises(DegenerateFit):
        fit_rate(T5, np.array([1.0, 0.5, 0.0, 0.1, 0.1]))
    with pytest.raises(DegenerateFit):
        fit_rate(T5[:3], np.ones(3))


@settings(max_examples=50, deadline=None)
@given(p=st.floats(-3.0, 1.0), c=st.floats(1e-6, 1e6))
def test_fit_recovers_any_power(p, c):
    assert fit_rate(T5, c * T5 ** p).power == pytest.approx(p, abs=1e-9)


def _exp(rule="to_zero", threshold=0.1):
    return Experiment("X", 1, 0.5, gaussian(1), parse_scale("compact(1)"), NormSpec(), tuple(T5),
                      rule=rule, threshold=threshold)


def test_judge_to_zero():
    e = _exp()
    assert judge(e, Series("X", T5, T5 ** -0.5, T5 * np.nan))[0]
    assert not judge(e, Series("X", T5, 1 + 0 * T5, T5 * np.nan))[0]
    bump = np.array([1.0, 0.5, 0.6, 0.05, 0.01])
    assert not judge(e, Series("X", T5, bump, T5 * np.nan))[0]


def test_judge_bound_and_rate():
    e = _exp("bound", 0.05)
    assert judge(e, Series("X", T5, np.array([0.5, 0.2, 0.1, 0.06, 0.04]), T5 * np.nan))[0]
    assert not judge(e, Series("X", T5, np.array([0.5, 0.2, 0.1, 0.07, 0.06]), T5 * np.nan))[0]
    e = _exp("rate", 0.02)
    # N = 1, compact, p = inf: t^(-a/2)
    assert judge(e, Series("X", T5, T5 ** -0.25, T5 * np.nan))[0]
    assert not judge(e, Series("X", T5, T5 ** -0.3, T5 * np.nan))[0]


def test_experiment_validation():
    with pytest.raises(ValueError):
        Experiment("X", 1, 0.5, gaussian(1), parse_scale("compact(1)"), NormSpec(), (10.0, 1.0))
    with pytest.raises(ValueError):
        Experiment("X", 2, 0.5, gaussian(1), parse_scale("compact(1)"), NormSpec(), (1.0, 10.0))
    with pytest.raises(ValueError):
        Experiment("X", 1, 0.5, gaussian(1), parse_scale("compact(1)"), NormSpec(weak=True), (1.0, 10.0))


def test_linearity_control():
    # the error series of u - M Z is linear in the datum
    sc = parse_scale("characteristic(0,30)")
    t = (1e2, 1e3)
    e1 = Experiment("a", 1, 0.5, gaussian(1), sc, NormSpec(), t, Comparand("MZ"), RateLaw(0.25))
    e2 = Experiment("b", 1, 0.5, gaussian(1, 1.0, 2.0), sc, NormSpec(), t, Comparand("MZ"), RateLaw(0.25))
    s1, s2 = run_experiment(e1), run_experiment(e2)
    np.testing.assert_allclose(s2.measured, 2 * s1.measured, rtol=1e-9)


def test_synthetic_snapshots_can_replace_the_solver():
    from subdiff.solver import Snapshot, region_grid

    def fake(t, region):
        g = region_grid(*region)
        return Snapshot(1, 0.5, "fake", t, g.nodes, np.full(g.nodes.size, t ** -0.25), "fake", g.weights, region)

    s = run_experiment(_exp("rate", 0.02), snapshot_fn=fake)
    np.testing.assert_allclose(s.measured, T5 ** -0.25, rtol=1e-12)


def test_hypotheses_are_enforced():
    bad = [Experiment("X", 2, 0.5, smooth_bump(2), parse_scale("compact(1)"), NormSpec(), tuple(T5))]
    with pytest.raises(HypothesisError):
        verify("V6", experiments=bad)
    bad = [Experiment("X", 1, 0.5, gaussian(1), parse_scale("very_fast(3)"), NormSpec(), tuple(T5))]
    with pytest.raises(HypothesisError):
        verify("V12", experiments=bad)
    with pytest.raises(ValueError):
        verify("V13")


def test_default_suite_shapes():
    ids = [e.id for e in default_experiments("V1")]
    assert ids == ["V1-N1", "V1-N2", "V1-N3"]
    v12 = default_experiments("V12")[0]
    assert v12.datum.tail_class.kind == "exact_power"
    assert mu_beta(0.5, 3.0, 1, 1.0) == pytest.approx(0.5 ** 0.75)


def test_write_report(tmp_path):
    s = Series("X1", T5, T5 ** -0.5, T5 ** -0.5)
    v = Verdict("X", True, [s], fit_rate(T5, T5 ** -0.5), "rule")
    write_report([v], tmp_path)
    rows = list(csv.reader(open(tmp_path / "X1.csv")))
    assert rows[0] == ["t", "measured", "theoretical"]
    assert float(rows[1][1]) == 0.1
    summary = list(csv.reader(open(tmp_path / "summary.csv")))
    assert summary[1][:2] == ["X", "pass"]
    assert not list(tmp_path.glob("*.tmp"))
