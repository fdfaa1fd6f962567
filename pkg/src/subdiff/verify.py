"""Time sweeps, decay-law fits and convergence verdicts V1..V12."""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import data as _data
from .data import Datum
from .profile import ProfileTable, fundamental_solution
from .scales import (
    NormSpec, RateLaw, ScaleSpec, UnsupportedRate, critical_exponent, lp_region_norm, parse_scale,
    region_at, theoretical_rate, weak_pc_norm,
)
from .solver import Snapshot, newtonian_potential, profile_table, solve

__all__ = [
    "Comparand", "Experiment", "Series", "RateFit", "Verdict", "DegenerateFit", "HypothesisError",
    "run_experiment", "fit_rate", "verify", "default_experiments", "negative_control",
    "mu_beta", "write_report", "THEOREMS",
]

THEOREMS = tuple("V%d" % k for k in range(1, 13))


class DegenerateFit(ValueError):
    """Rate fit on non-positive or too few values."""


class HypothesisError(ValueError):
    """The experiment violates the hypotheses of the theorem it checks."""


@dataclass(frozen=True)
class Comparand:
    """What u is compared with.

    none          s(t) u
    MZ            s(t) (u - M Z)
    kappa_Phi     s(t) u - factor kappa Phi          (N = 3)
    kappa_E       s(t) u - M kappa |x|^(2-N)         (N = 3)
    constant      s(t) u - value
    relative_MZ   u / (M Z) - 1
    power_tail    |x|^beta u / A - 1
    """

    kind: str = "none"
    value: float = 0.0
    factor: float = 1.0
    A: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "MZ", "kappa_Phi", "kappa_E", "constant", "relative_MZ", "power_tail"):
            raise ValueError("unknown comparand %r" % self.kind)

    @property
    def relative(self):
        return self.kind in ("relative_MZ", "power_tail")


@dataclass(frozen=True)
class Experiment:
    id: str
    dim: int
    alpha: float
    datum: Datum
    scale: ScaleSpec
    norm: NormSpec
    times: tuple
    comparand: Comparand = Comparand()
    scaling: RateLaw | None = None
    weight: RateLaw | None = None
    rule: str = "to_zero"
    threshold: float = 0.1
    method: str = "auto"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size < 2 or np.any(np.diff(t) <= 0) or t[0] <= 0:
            raise ValueError("time grid must be positive and strictly increasing")
        if self.datum.dim != self.dim:
            raise ValueError("datum dimension differs from experiment dimension")
        if self.rule not in ("to_zero", "log_to_zero", "bound", "rate", "report"):
            raise ValueError("unknown verdict rule %r" % self.rule)
        self.norm.check(self.dim)
        self.scale.check(self.alpha)


@dataclass
class Series:
    experiment: str
    t: np.ndarray
    measured: np.ndarray
    theoretical: np.ndarray


@dataclass(frozen=True)
class RateFit:
    power: float
    log_power: float | None
    r2: float
    residuals: np.ndarray

    def law(self):
        s = "t^%.4f" % self.power
        return s if self.log_power is None else s + " (log t)^%.3f" % self.log_power


@dataclass
class Verdict:
    id: str
    passed: bool
    series: list
    fit: RateFit | None
    threshold: str
    notes: dict = field(default_factory=dict)

    def summary(self):
        law = self.fit.law() if self.fit is not None else ""
        return "%s %s %s [%s]" % (self.id, "PASS" if self.passed else "FAIL", law, self.threshold)


# ---------------------------------------------------------------- sweeps

def _scale_fn(scale):
    return scale.g if scale.g is not None else None


def _law(law, t, alpha, scale):
    return 1.0 if law is None else float(law(t, alpha, _scale_fn(scale)))


def comparand_values(e: Experiment, snap: Snapshot, table: ProfileTable | None):
    r, u = snap.radii, snap.values
    c = e.comparand
    s = _law(e.scaling, snap.t, e.alpha, e.scale)
    m = e.datum.mass
    if c.kind == "none":
        return s * u
    if c.kind == "constant":
        return s * u - c.value
    if c.kind == "kappa_Phi":
        return s * u - c.factor * table.kappa * newtonian_potential(e.datum, r)
    if c.kind == "kappa_E":
        return s * u - m * table.kappa * r ** (2.0 - e.dim)
    mz = m * fundamental_solution(table, r, snap.t)
    if c.kind == "MZ":
        return s * (u - mz)
    if c.kind == "relative_MZ":
        return u / mz - 1.0
    return r ** c.beta * u / c.A - 1.0


def measure(e: Experiment, snap: Snapshot, table, region):
    v = comparand_values(e, snap, table)
    w = snap.with_values(v)
    if e.norm.weak:
        val = weak_pc_norm(w, region)
    else:
        val = lp_region_norm(w, region, e.norm.p)
    return _law(e.weight, snap.t, e.alpha, e.scale) * val


def _needs_table(e):
    return e.comparand.kind in ("MZ", "kappa_Phi", "kappa_E", "relative_MZ") or e.method == "convolution" or (
        e.method == "auto" and e.datum.variant != "gaussian")


def run_experiment(e: Experiment, snapshot_fn=None, table=None) -> Series:
    """Measured value at every time of the experiment's grid.

    snapshot_fn(t, region) may replace the solver (synthetic snapshots).
    """
    if table is None and _needs_table(e):
        table = profile_table(e.dim, e.alpha)
    out = []
    for t in e.times:
        region = region_at(e.scale, t, e.alpha)
        if snapshot_fn is None:
            snap = solve(e.datum, e.alpha, t, method=e.method, table=table, span=region)
        else:
            snap = snapshot_fn(t, region)
        out.append(measure(e, snap, table, region))
    t = np.asarray(e.times, dtype=float)
    vals = np.asarray(out)
    theo = np.full(t.size, np.nan)
    if e.comparand.kind == "none":
        try:
            law = theoretical_rate(e.dim, e.norm, e.scale, e.alpha)
            lv = law(t, e.alpha, _scale_fn(e.scale))
            theo = lv * vals[0] / lv[0]
        except UnsupportedRate:
            pass
    return Series(e.id, t, vals, theo)


def fit_rate(t, v, log_term=False) -> RateFit:
    """Least squares of ln v on ln t (and ln ln t when log_term)."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    if t.size < 4:
        raise DegenerateFit("need at least four points")
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise DegenerateFit("rate fit needs positive finite values")
    cols = [np.ones_like(t), np.log(t)]
    if log_term:
        if np.any(t <= 1):
            raise DegenerateFit("log term needs t > 1")
        cols.append(np.log(np.log(t)))
    a = np.column_stack(cols)
    y = np.log(v)
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    res = y - a @ coef
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss == 0.0 else max(0.0, 1.0 - float(np.sum(res ** 2)) / ss)
    return RateFit(float(coef[1]), float(coef[2]) if log_term else None, r2, res)


def _decreasing_tail(s: Series, decades=4):
    t, v = s.t, s.measured
    sel = t >= t[-1] / 10.0 ** decades * (1 - 1e-12)
    tail = v[sel]
    return bool(np.all(np.diff(tail) < 0))


def judge(e: Experiment, s: Series):
    """(passed, fit, threshold text) under the experiment's rule."""
    v = s.measured
    if np.any(~np.isfinite(v)):
        return False, None, "finite values"
    fit = None
    if np.all(v > 0) and v.size >= 4:
        fit = fit_rate(s.t, v)
    if e.rule == "to_zero":
        ok = _decreasing_tail(s) and v[-1] <= e.threshold * v[0]
        return ok, fit, "decreasing over last 4 decades and final <= %g x initial" % e.threshold
    if e.rule == "log_to_zero":
        ok = fit is not None and fit.power < 0 and np.all(np.diff(v) < 0) and v[-1] <= e.threshold * v[0]
        return ok, fit, "decreasing and final <= %g x initial" % e.threshold
    if e.rule == "bound":
        ok = _decreasing_tail(s) and v[-1] <= e.threshold
        return ok, fit, "decreasing and final <= %g" % e.threshold
    if e.rule == "rate":
        law = theoretical_rate(e.dim, e.norm, e.scale, e.alpha)
        fit = fit_rate(s.t, v, log_term=bool(law.log_power))
        ok = abs(fit.power - law.power) <= e.threshold
        if law.log_power:
            ok = ok and abs(fit.log_power - law.log_power) <= 0.2
        return ok, fit, "fitted power within %g of %g" % (e.threshold, law.power)
    return True, fit, "report only"


# ---------------------------------------------------------------- the suite

def mu_beta(alpha, beta, dim, sigma):
    """(alpha (beta - N) / (2 sigma))^((2 - alpha)/2)."""
    return (alpha * (beta - dim) / (2.0 * sigma)) ** ((2.0 - alpha) / 2.0)


def _decades(lo, hi):
    return tuple(10.0 ** k for k in range(lo, hi + 1))


def _g_text(alpha):
    return "t^%r" % (alpha / 10.0)


def default_experiments(theorem, alpha=0.5):
    """The experiments encoding one theorem (several for multi-dimension statements).

    Data: the gaussian is the default; compact-set limits with a Newtonian or
    constant profile use the smooth bump (radius 1), V10 the ball indicator and
    V11/V12 the power tail.
    """
    a = alpha
    g = _g_text(a)
    if theorem == "V1":
        out = []
        for n, p in ((1, math.inf), (2, 2.0), (3, 2.0)):
            inv = 0.0 if math.isinf(p) else 1.0 / p
            out.append(Experiment("V1-N%d" % n, n, a, _data.gaussian(n), parse_scale("characteristic(0,30)"),
                                  NormSpec(p), _decades(2, 8), Comparand("MZ"),
                                  RateLaw(0.5 * a * n * (1.0 - inv))))
        return out
    if theorem == "V2":
        return [Experiment("V2-N%d" % n, n, a, _data.gaussian(n), parse_scale("characteristic(1,30)"),
                           NormSpec(), _decades(2, 8), Comparand("MZ"), RateLaw(0.5 * a * n))
                for n in (2, 3)]
    if theorem == "V3":
        return [Experiment("V3", 3, a, _data.gaussian(3), parse_scale("intermediate(%s,1,2)" % g), NormSpec(),
                           _decades(2, 8), Comparand("kappa_E"), RateLaw(a), RateLaw(0.0, 0.0, 1.0))]
    if theorem == "V4":
        d = _data.gaussian(2)
        k = profile_table(2, a).kappa
        return [Experiment("V4", 2, a, d, parse_scale("intermediate(%s,1,2)" % g), NormSpec(), _decades(2, 8),
                           Comparand("constant", d.mass * k), RateLaw(a, -1.0, 0.0, "g_ratio"),
                           rule="log_to_zero", threshold=0.35)]
    if theorem == "V5":
        d = _data.gaussian(1)
        f0 = profile_table(1, a).f_zero
        return [Experiment("V5", 1, a, d, parse_scale("intermediate(%s,0,1)" % g), NormSpec(), _decades(1, 7),
                           Comparand("constant", d.mass * f0), RateLaw(0.5 * a))]
    if theorem == "V6":
        d = _data.smooth_bump(3)
        return [Experiment("V6", 3, a, d, parse_scale("compact(1)"), NormSpec(), _decades(2, 8),
                           Comparand("kappa_Phi"), RateLaw(a)),
                Experiment("V6-p2", 3, a, d, parse_scale("compact(1)"), NormSpec(2.0), _decades(2, 8),
                           Comparand("kappa_Phi"), RateLaw(a))]
    if theorem == "V7":
        d = _data.smooth_bump(3)
        sc = parse_scale("intermediate(%s,0,1)" % g)
        return [Experiment("V7-weak", 3, a, d, sc, NormSpec(weak=True), _decades(2, 8), Comparand("kappa_Phi"), RateLaw(a)),
                Experiment("V7-Lpc", 3, a, d, sc, NormSpec(critical_exponent(3)), _decades(2, 8),
                           Comparand("kappa_Phi"), RateLaw(a))]
    if theorem == "V8":
        d = _data.gaussian(2)
        k = profile_table(2, a).kappa
        return [Experiment("V8", 2, a, d, parse_scale("compact(1)"), NormSpec(), _decades(2, 8),
                           Comparand("constant", d.mass * k * a / 2.0), RateLaw(a, -1.0),
                           rule="log_to_zero", threshold=0.35)]
    if theorem == "V9":
        d = _data.smooth_bump(1)
        f0 = profile_table(1, a).f_zero
        return [Experiment("V9", 1, a, d, parse_scale("compact(1)"), NormSpec(), _decades(1, 7),
                           Comparand("constant", d.mass * f0), RateLaw(0.5 * a))]
    if theorem == "V10":
        return [Experiment("V10", 1, a, _data.ball_indicator(1), parse_scale("characteristic(1,5)"), NormSpec(),
                           _decades(2, 6), Comparand("relative_MZ"), rule="bound", threshold=0.05)]
    if theorem == "V11":
        d = _data.power_tail(1, A=1.0, beta=3.0)
        mub = mu_beta(a, 3.0, 1, profile_table(1, a).sigma_hat)
        return [Experiment("V11", 1, a, d, parse_scale("moderately_fast(1,%r)" % (0.5 * mub)), NormSpec(),
                           _decades(2, 8), Comparand("relative_MZ"))]
    if theorem == "V12":
        d = _data.power_tail(1, A=1.0, beta=3.0)
        mub = mu_beta(a, 3.0, 1, profile_table(1, a).sigma_hat)
        return [Experiment("V12", 1, a, d, parse_scale("very_fast(%r,%r)" % (3.0 * mub, 24.0 * mub)), NormSpec(),
                           _decades(2, 6), Comparand("power_tail", A=1.0, beta=3.0), rule="bound", threshold=0.05)]
    raise ValueError("unknown theorem id %r" % theorem)


def _check_hypotheses(e: Experiment, theorem):
    tc = e.datum.tail_class
    if theorem == "V2" and not e.datum.in_d_beta(e.dim):
        raise HypothesisError("V2 needs a datum in D_N (decay |x|^-N or faster)")
    if theorem in ("V3", "V6", "V7") and e.dim < 3:
        raise HypothesisError("%s needs dim >= 3" % theorem)
    if theorem in ("V4", "V8") and e.dim != 2:
        raise HypothesisError("%s needs dim = 2" % theorem)
    if theorem in ("V5", "V9") and e.dim != 1:
        raise HypothesisError("%s needs dim = 1" % theorem)
    if theorem == "V10" and not math.isfinite(e.datum.support_radius):
        raise HypothesisError("V10 needs compactly supported data")
    if theorem == "V11" and not (tc.kind in ("exact_power", "d_beta") and e.dim < tc.beta < math.inf):
        raise HypothesisError("V11 needs a datum in D_beta with N < beta < inf")
    if theorem == "V12" and tc.kind != "exact_power":
        raise HypothesisError("V12 needs an exact power tail |x|^beta u0 -> A")


def _run_all(exps, workers):
    if workers <= 1 or len(exps) <= 1:
        return [run_experiment(e) for e in exps]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(run_experiment, exps))


def verify(theorem, alpha=0.5, experiments=None, workers=None) -> Verdict:
    """Run and judge one theorem; passes when every sub-experiment passes."""
    if theorem not in THEOREMS:
        raise ValueError("unknown theorem id %r" % theorem)
    exps = experiments if experiments is not None else default_experiments(theorem, alpha)
    for e in exps:
        _check_hypotheses(e, theorem)
    workers = workers or int(os.environ.get("SUBDIFF_THREADS", "1") or 1)
    series = _run_all(exps, workers)
    passed, fit, thr, notes = True, None, [], {}
    for e, s in zip(exps, series):
        ok, f, text = judge(e, s)
        passed &= ok
        fit = fit or f
        thr.append("%s: %s" % (e.id, text))
        notes[e.id] = {"passed": ok, "final": float(s.measured[-1]), "initial": float(s.measured[0]),
                       "fit": f.law() if f else ""}
    if theorem == "V9":
        # Newtonian potential at infinity, N = 3: |x| Phi(x) -> M
        b = _data.ball_indicator(3)
        val = 100.0 * newtonian_potential(b, 100.0)
        ok = abs(val / b.mass - 1.0) <= 0.01
        notes["Phi-infinity"] = {"passed": ok, "value": val, "mass": b.mass}
        passed &= ok
    return Verdict(theorem, bool(passed), series, fit, "; ".join(thr), notes)


def negative_control(alpha=0.5, factor=2.0) -> Verdict:
    """V6 against the wrong limit factor kappa Phi; expected to fail."""
    exps = [replace(e, id=e.id + "-x%g" % factor, comparand=replace(e.comparand, factor=factor))
            for e in default_experiments("V6", alpha)[:1]]
    return verify("V6", alpha, exps)


# ---------------------------------------------------------------- reports

def write_report(verdicts, out_dir):
    """One CSV per experiment (t, measured, theoretical) and summary.csv."""
    os.makedirs(out_dir, exist_ok=True)
    for v in verdicts:
        for s in v.series:
            path = os.path.join(out_dir, "%s.csv" % s.experiment)
            tmp = path + ".tmp"
            with open(tmp, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["t", "measured", "theoretical"])
                for row in zip(s.t, s.measured, s.theoretical):
                    w.writerow([repr(float(x)) for x in row])
            os.replace(tmp, path)
    path = os.path.join(out_dir, "summary.csv")
    with open(path + ".tmp", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "verdict", "fitted_law", "threshold"])
        for v in verdicts:
            w.writerow([v.id, "pass" if v.passed else "fail", v.fit.law() if v.fit else "", v.threshold])
    os.replace(path + ".tmp", path)
