"""Space-time scales, region norms of snapshots and the tabulated decay laws."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import minimize_scalar

from .special import DomainError, gauss_panels
from .transforms import sphere_area

__all__ = [
    "CoverageError", "UnsupportedRate", "GFamily", "ScaleSpec", "NormSpec", "RateLaw",
    "critical_exponent", "region_at", "lp_region_norm", "weak_pc_norm", "theoretical_rate",
    "parse_scale", "parse_norm",
]


class CoverageError(ValueError):
    """The region is not covered by the snapshot grid."""


class UnsupportedRate(ValueError):
    """No universal decay law is tabulated for this combination."""


_NUM = r"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"


@dataclass(frozen=True)
class GFamily:
    """Named scale function g(t).

    power      t^gamma
    log_up     t^(a/2) (log t)^theta
    log_down   t^(a/2) / (log t)^theta
    superfast  t (log t)^((2-a)/a)
    """

    name: str
    param: float = 0.0

    def __post_init__(self):
        if self.name not in ("power", "log_up", "log_down", "superfast"):
            raise ValueError("unknown scale family %r" % self.name)

    def __call__(self, t, alpha):
        t = np.asarray(t, dtype=float)
        lg = np.log(t)
        if self.name == "power":
            return t ** self.param
        if self.name == "log_up":
            return t ** (0.5 * alpha) * lg ** self.param
        if self.name == "log_down":
            return t ** (0.5 * alpha) / lg ** self.param
        return t * lg ** ((2.0 - alpha) / alpha)

    def is_intermediate(self, alpha):
        """g -> inf and g = o(t^(a/2))."""
        if self.name == "power":
            return 0.0 < self.param < 0.5 * alpha
        return self.name == "log_down" and self.param > 0

    def is_fast(self, alpha):
        """g t^(-a/2) -> inf."""
        if self.name == "power":
            return self.param > 0.5 * alpha
        if self.name == "log_up":
            return self.param > 0
        return self.name == "superfast"

    def text(self):
        return {"power": "t^%r" % self.param, "log_up": "t^(a/2)*log^%r" % self.param,
                "log_down": "t^(a/2)/log^%r" % self.param, "superfast": "t*log^((2-a)/a)"}[self.name]

    @classmethod
    def parse(cls, s):
        s = s.replace(" ", "")
        if s == "t*log^((2-a)/a)":
            return cls("superfast")
        m = re.fullmatch(r"t\^\(a/2\)([*/])log\^" + _NUM, s)
        if m:
            return cls("log_up" if m.group(1) == "*" else "log_down", float(m.group(2)))
        m = re.fullmatch(r"t\^" + _NUM, s)
        if m:
            return cls("power", float(m.group(1)))
        raise ValueError("cannot parse scale function %r" % s)


_KINDS = ("compact", "intermediate", "characteristic", "fast", "moderately_fast", "very_fast")


@dataclass(frozen=True)
class ScaleSpec:
    kind: str
    nu: float | None = None
    mu: float | None = None
    g: GFamily | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError("unknown scale kind %r" % self.kind)
        if self.kind in ("intermediate", "fast") and self.g is None:
            raise ValueError("%s scale needs a scale function" % self.kind)
        if self.kind == "compact" and not (self.mu and self.mu > 0):
            raise ValueError("compact scale needs mu > 0")
        if self.kind in ("intermediate", "characteristic", "fast"):
            if not (self.nu is not None and self.mu is not None and 0 <= self.nu < self.mu):
                raise ValueError("need 0 <= nu < mu")
        if self.kind == "moderately_fast" and not (self.nu is not None and self.mu is not None
                                                   and self.nu >= 0 and self.mu > 0):
            raise ValueError("need nu >= 0 and mu > 0")
        if self.kind == "very_fast" and not (self.nu and self.nu > 0):
            raise ValueError("very_fast scale needs nu > 0")

    def check(self, alpha):
        """Raise if the scale function does not fit the kind at this alpha."""
        if self.kind == "intermediate" and not self.g.is_intermediate(alpha):
            raise DomainError("%s is not an intermediate scale at alpha=%g (need g -> inf, g = o(t^(a/2)))"
                              % (self.g.text(), alpha))
        if self.kind == "fast" and not self.g.is_fast(alpha):
            raise DomainError("%s is not a fast scale at alpha=%g" % (self.g.text(), alpha))

    def text(self):
        f = lambda v: repr(float(v))
        if self.kind == "compact":
            return "compact(%s)" % f(self.mu)
        if self.kind in ("characteristic", "moderately_fast"):
            return "%s(%s,%s)" % (self.kind, f(self.nu), f(self.mu))
        if self.kind == "very_fast":
            return "very_fast(%s)" % f(self.nu) if self.mu is None else "very_fast(%s,%s)" % (f(self.nu), f(self.mu))
        return "%s(%s,%s,%s)" % (self.kind, self.g.text(), f(self.nu), f(self.mu))


def parse_scale(text) -> ScaleSpec:
    """'compact(1)', 'characteristic(1,2)', 'intermediate(t^0.1,1,2)', 'very_fast(2)', ...

    moderately_fast(nu, mu) is {nu t^(a/2) <= |x| <= mu G(t)} and very_fast(nu[, mu])
    is {nu G(t) <= |x| [<= mu G(t)]}, with G(t) = t^(a/2) (log t)^((2-a)/2).
    """
    m = re.fullmatch(r"\s*(\w+)\s*\((.*)\)\s*", text)
    if not m or m.group(1) not in _KINDS:
        raise ValueError("cannot parse scale %r" % text)
    kind, args = m.group(1), [a.strip() for a in m.group(2).split(",")] if m.group(2).strip() else []
    try:
        if kind == "compact" and len(args) == 1:
            return ScaleSpec(kind, mu=float(args[0]))
        if kind in ("characteristic", "moderately_fast") and len(args) == 2:
            return ScaleSpec(kind, float(args[0]), float(args[1]))
        if kind == "very_fast" and len(args) in (1, 2):
            return ScaleSpec(kind, float(args[0]), float(args[1]) if len(args) == 2 else None)
        if kind in ("intermediate", "fast") and len(args) == 3:
            return ScaleSpec(kind, float(args[1]), float(args[2]), GFamily.parse(args[0]))
    except ValueError as exc:
        raise ValueError("cannot parse scale %r: %s" % (text, exc)) from None
    raise ValueError("wrong number of arguments in scale %r" % text)


@dataclass(frozen=True)
class NormSpec:
    """p in [1, inf] or the weak (Marcinkiewicz) norm at p_c."""

    p: float = math.inf
    weak: bool = False

    def __post_init__(self):
        if not self.weak and not (self.p >= 1):
            raise ValueError("p must lie in [1, inf]")

    def check(self, dim):
        if self.weak and dim < 3:
            raise DomainError("the weak p_c norm needs dim >= 3")

    def exponent(self, dim):
        return critical_exponent(dim) if self.weak else self.p

    def text(self):
        return "weak-pc" if self.weak else "p=%s" % ("inf" if math.isinf(self.p) else repr(float(self.p)))


def parse_norm(text) -> NormSpec:
    s = text.strip().lower()
    if s in ("weak-pc", "weak_pc"):
        return NormSpec(weak=True)
    m = re.fullmatch(r"p\s*=\s*(inf|" + _NUM + ")", s)
    if not m:
        raise ValueError("cannot parse norm %r" % text)
    return NormSpec(math.inf if m.group(1) == "inf" else float(m.group(1)))


@dataclass(frozen=True)
class RateLaw:
    """t^power (log X)^log_power g(t)^scale_power with X = t or g t^(-a/2)."""

    power: float
    log_power: float = 0.0
    scale_power: float = 0.0
    log_of: str = "t"

    def __call__(self, t, alpha=None, g=None):
        t = np.asarray(t, dtype=float)
        v = t ** self.power
        if self.log_power:
            x = np.log(t) if self.log_of == "t" else np.abs(np.log(g(t, alpha) * t ** (-0.5 * alpha)))
            v = v * x ** self.log_power
        if self.scale_power:
            v = v * g(t, alpha) ** self.scale_power
        return v


def critical_exponent(dim):
    """p_c = N/(N-2) for N >= 3, inf for N = 2, None for N = 1 (every p subcritical)."""
    if dim == 1:
        return None
    if dim == 2:
        return math.inf
    return dim / (dim - 2.0)


def region_at(scale: ScaleSpec, t, alpha):
    """Concrete radii (r_lo, r_hi) of the scale's region at time t."""
    sc = t ** (0.5 * alpha)
    if scale.kind == "compact":
        lo, hi = 0.0, scale.mu
    elif scale.kind == "characteristic":
        lo, hi = scale.nu * sc, scale.mu * sc
    elif scale.kind in ("moderately_fast", "very_fast"):
        # G(t) = t^(a/2) (log t)^((2-a)/2)
        gv = sc * math.log(t) ** ((2.0 - alpha) / 2.0) if t > 1 else 0.0
        if scale.kind == "moderately_fast":
            lo, hi = scale.nu * sc, scale.mu * gv
        else:
            lo, hi = scale.nu * gv, (scale.mu * gv if scale.mu is not None else math.inf)
    else:
        g = float(scale.g(t, alpha))
        lo, hi = scale.nu * g, scale.mu * g
    if not lo < hi:
        raise DomainError("degenerate region (%g, %g) at t=%g" % (lo, hi, t))
    return float(lo), float(hi)


# ---------------------------------------------------------------- norms

def _interpolant(snap, region, monotone=False):
    lo, hi = region
    r = snap.radii
    if r.size < 2:
        raise CoverageError("snapshot has fewer than two radii")
    slack = 1e-3 * (hi - lo)
    span = getattr(snap, "span", None)
    if span is not None and span[0] <= lo + 1e-12 * hi and span[1] >= hi * (1 - 1e-12):
        slack = math.inf
    if not math.isfinite(hi) or r[0] > lo + slack or r[-1] < hi - slack:
        raise CoverageError("region (%g, %g) exceeds snapshot grid (%g, %g)" % (lo, hi, r[0], r[-1]))
    inside = np.count_nonzero((r >= lo) & (r <= hi))
    if inside < 64:
        raise CoverageError("region holds %d snapshot nodes, need >= 64" % inside)
    cs = PchipInterpolator(r, snap.values) if monotone else CubicSpline(r, snap.values)
    return lambda x: cs(np.clip(x, r[0], r[-1]))


def _region_rule(lo, hi, panels=64, n=16):
    if lo > 0 and hi / lo > 10.0:
        e = np.geomspace(lo, hi, panels + 1)
    else:
        e = np.linspace(lo, hi, panels + 1)
    return gauss_panels(e, n)


def _own_rule(snap, region):
    span = getattr(snap, "span", None)
    if snap.weights is None or span is None:
        return False
    scale = max(abs(region[1]), 1e-300)
    return abs(span[0] - region[0]) <= 1e-12 * scale and abs(span[1] - region[1]) <= 1e-12 * scale


def lp_region_norm(snap, region, p):
    """||u||_{L^p} over the annulus region = (r_lo, r_hi); p may be inf."""
    f = _interpolant(snap, region)
    lo, hi = region
    if math.isinf(p):
        r = snap.radii
        m = (r >= lo) & (r <= hi)
        rr = np.concatenate([[lo], r[m], [hi]])
        v = np.abs(f(rr))
        k = int(np.argmax(v))
        a, b = rr[max(k - 1, 0)], rr[min(k + 1, rr.size - 1)]
        best = v[k]
        if b > a:
            res = minimize_scalar(lambda x: -abs(float(f(x))), bounds=(a, b), method="bounded",
                                  options={"xatol": 1e-10 * max(b, 1e-300)})
            best = max(best, -res.fun)
        return float(best)
    if _own_rule(snap, region):
        x, w, v = snap.radii, snap.weights, np.abs(snap.values)
    else:
        x, w = _region_rule(lo, hi)
        v = np.abs(f(x))
    top = float(np.max(v)) if v.size else 0.0
    if top == 0.0:
        return 0.0
    # scaled by the maximum so v^p neither underflows nor overflows
    return top * float((sphere_area(snap.dim) * np.sum(w * x ** (snap.dim - 1) * (v / top) ** p)) ** (1.0 / p))


def _monotone_runs(x, v):
    d = np.sign(np.diff(v))
    cut = np.nonzero(d[1:] * d[:-1] < 0)[0] + 1
    bounds = np.concatenate([[0], cut, [x.size - 1]])
    return [(x[a : b + 1], v[a : b + 1]) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _crossings(lam, xr, vr):
    """Abscissae where the run (vr increasing along xr) reaches each level.

    Piecewise power law between nodes when both ends are positive, exact
    for |x|^-k profiles; linear on segments touching r = 0 or u <= 0.
    """
    k = np.clip(np.searchsorted(vr, lam), 1, vr.size - 1)
    x0, x1, v0, v1 = xr[k - 1], xr[k], vr[k - 1], vr[k]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(v1 > v0, (lam - v0) / (v1 - v0), 0.0)
        pos = (x0 > 0) & (x1 > 0) & (v0 > 0) & (v1 > v0)
        q = np.log(np.where(pos, lam, 1.0) / np.where(pos, v0, 1.0)) / np.log(np.where(pos, v1 / v0, 2.0))
        q = np.clip(q, 0.0, 1.0)
        out = np.where(pos, x0 * np.abs(x1 / np.where(pos, x0, 1.0)) ** q, x0 + (x1 - x0) * s)
    return out


def weak_pc_norm(snap, region):
    """sup_lambda lambda |{x in region: |u| >= lambda}|^(1/p_c), N >= 3.

    Level sets come from the grid nodes in the region: on each monotone run
    the super-level set is an interval found by inverting the run.
    """
    if snap.dim < 3:
        raise DomainError("the weak p_c norm needs dim >= 3")
    pc = critical_exponent(snap.dim)
    f = _interpolant(snap, region, monotone=True)
    lo, hi = region
    r = snap.radii
    inner = (r > lo) & (r < hi)
    x = np.concatenate([[lo], r[inner], [hi]])
    v = np.abs(np.concatenate([[float(f(lo))], snap.values[inner], [float(f(hi))]]))
    runs = _monotone_runs(x, v)
    c = sphere_area(snap.dim) / snap.dim
    lam = np.unique(v[v > 0])
    meas = np.zeros(lam.size)
    for xr, vr in runs:
        if vr[-1] < vr[0]:
            xr, vr = xr[::-1], vr[::-1]
        # vr increasing along xr (which may run inward); {u >= lam} runs from
        # the crossing to the top end.  The sup is the same with >= and >.
        inside = (lam > vr[0]) & (lam <= vr[-1])
        cross = np.where(lam <= vr[0], xr[0], _crossings(lam, xr, vr))
        top = xr[-1]
        a = np.minimum(cross, top)
        b = np.maximum(cross, top)
        seg = np.where(inside | (lam <= vr[0]), c * (b ** snap.dim - a ** snap.dim), 0.0)
        meas += seg
    return float(np.max(lam * meas ** (1.0 / pc)))


# ---------------------------------------------------------------- decay laws

def theoretical_rate(dim, norm: NormSpec, scale: ScaleSpec, alpha):
    """Decay law of ||u(., t)|| in the given scale."""
    norm.check(dim)
    p = norm.exponent(dim)
    inv = 0.0 if (p is None or math.isinf(p)) else 1.0 / p
    if scale.kind == "characteristic":
        if norm.weak:
            raise UnsupportedRate("weak norm in the characteristic scale is not tabulated")
        return RateLaw(-0.5 * alpha * dim * (1.0 - inv))
    if scale.kind == "compact":
        if dim >= 3:
            return RateLaw(-alpha)
        if dim == 2:
            return RateLaw(-alpha, 1.0)
        return RateLaw(-0.5 * alpha)
    if scale.kind == "intermediate":
        scale.check(alpha)
        if dim >= 3:
            return RateLaw(-alpha, 0.0, 2.0 - dim * (1.0 - inv))
        if dim == 2:
            return RateLaw(-alpha, 1.0, 2.0 * inv, "g_ratio")
        return RateLaw(-0.5 * alpha, 0.0, inv)
    raise UnsupportedRate("no universal decay law in %s scales" % scale.kind)
