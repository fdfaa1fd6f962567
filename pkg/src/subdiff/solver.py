"""Mild solution u(., t) = Z(., t) * u0 and the Newtonian potential of u0.

Two independent routes:

spectral     u(r) = (2 pi)^-N  inverse radial transform of E(-rho^2 t^a) u0^(rho).
             With rho = s t^(-a/2) the integrand lives on an s-range that
             does not collapse as t grows.
convolution  u(r) = |S| int eta^(N-1) F(eta) A(r, t^(a/2) eta) d eta,
             where A(r, rho) is the mean of u0 over the sphere of radius rho
             centred at a point of norm r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .data import Datum
from .kernels import hankel_sum
from .profile import ProfileTable, eval_profile
from .special import DomainError, FractionalOrder, as_alpha, gauss_panels, ml_neg
from .transforms import RadialGrid, sphere_area

__all__ = [
    "Snapshot", "mild_solution_spectral", "mild_solution_convolution", "mild_solution",
    "newtonian_potential", "solve", "snapshot_radii", "region_grid", "profile_table",
    "choose_method", "spectral_cost",
]


@dataclass(frozen=True, eq=False)
class Snapshot:
    """u(., t) sampled at ascending radii."""

    dim: int
    alpha: float
    datum: str
    t: float
    radii: np.ndarray
    values: np.ndarray
    method: str
    weights: np.ndarray | None = None
    span: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "radii", np.asarray(self.radii, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.radii.shape != self.values.shape:
            raise ValueError("radii and values differ in shape")
        if np.any(np.diff(self.radii) <= 0):
            raise ValueError("snapshot radii must be strictly increasing")

    def mass(self):
        """int u over R^N; needs quadrature weights for the radii."""
        if self.weights is None:
            raise ValueError("snapshot has no quadrature weights")
        return sphere_area(self.dim) * float(np.sum(self.weights * self.radii ** (self.dim - 1) * self.values))

    def scaled(self, factor, values=None):
        v = self.values * factor if values is None else values
        return Snapshot(self.dim, self.alpha, self.datum, self.t, self.radii, v, self.method, self.weights, self.span)

    def with_values(self, values):
        return self.scaled(1.0, np.asarray(values, dtype=float))

    @property
    def order(self):
        return self.alpha


# ---------------------------------------------------------------- spectral route

def _freq_cut(datum: Datum, tol=1e-18):
    """rho beyond which |u0^| < tol M (sampled on a geometric grid)."""
    key = (datum.variant, datum.dim, tuple(sorted(datum.params.items())))
    return _freq_cut_cached(key, datum, tol)


@lru_cache(maxsize=64)
def _freq_cut_cached(key, datum, tol):
    if datum.variant == "gaussian":
        return math.sqrt(-math.log(tol)) / datum.params["scale"]
    m = datum.mass
    if datum.variant == "ball_indicator":
        # envelope of the ball transform decays like rho^(-(N+1)/2)
        rr = datum.params["radius"]
        env = lambda k: 2.0 * sphere_area(datum.dim) * rr ** ((datum.dim - 1) / 2.0) * k ** (-(datum.dim + 1) / 2.0)
        k = 1.0 / rr
        while env(k) > 1e-9 * m and k < 1e5 / rr:
            k *= 2.0
        return k
    ell = datum.length_scale
    k = np.geomspace(1.0 / ell, 5e3 / ell, 400)
    v = np.abs(datum.radial_transform(k))
    big = np.nonzero(v > tol * m)[0]
    return float(k[big[-1] + 1]) if big.size and big[-1] + 1 < k.size else float(k[-1])


@lru_cache(maxsize=64)
def _s_rule(alpha, h_cap, s_max, n):
    # panels of width min(h_cap, max(0.5, s/4)): resolves E(-s^2) (scale ~ s) and
    # the kernel/datum oscillation (period >= h_cap)
    edges = [0.0]
    s = 0.0
    while s < s_max:
        s += min(h_cap, max(0.5, s / 4.0))
        edges.append(s)
    x, w = gauss_panels(np.array(edges), n)
    return x, w, ml_neg(alpha, x * x)


def _spectral_plan(datum, a, t, r_max):
    sc = t ** (0.5 * a)
    ext = datum.length_scale if datum.variant in ("ball_indicator", "smooth_bump") else 0.0
    omega = (r_max + ext) / sc
    # a 16-point panel holding a phase of 2 pi is exact to ~1e-20
    h_cap = 64.0 if omega <= 0 else 2.0 ** math.floor(math.log2(max(min(2.0 * math.pi / omega, 64.0), 1e-6)))
    s_max = 2.0 ** math.ceil(math.log2(max(_freq_cut(datum) * sc, 1.0)))
    return sc, h_cap, s_max


def spectral_cost(datum, order, t, r_max):
    """Number of s-panels the spectral route needs up to radius r_max."""
    sc, h_cap, s_max = _spectral_plan(datum, as_alpha(order), float(t), r_max)
    return int(s_max / h_cap + 4.0 * math.log(max(s_max, 1.0))) + 1


def mild_solution_spectral(datum: Datum, order, dim, t, r, nodes=16):
    """u(r, t) by inverse radial Fourier transform of E(-rho^2 t^a) u0^(rho)."""
    a = as_alpha(order)
    if dim != datum.dim:
        raise DomainError("datum dimension %d differs from dim %d" % (datum.dim, dim))
    t = float(t)
    if not t > 0:
        raise DomainError("t must be positive")
    r = np.asarray(r, dtype=float)
    flat = np.atleast_1d(r).ravel()
    sc, h_cap, s_max = _spectral_plan(datum, a, t, float(flat.max(initial=0.0)))
    s, w, e = _s_rule(a, h_cap, s_max, nodes)
    keep = s <= s_max
    s, w, e = s[keep], w[keep], e[keep]
    wf = w * s ** (dim - 1) * e * datum.radial_transform(s / sc)
    xi = np.ascontiguousarray(flat / sc)
    out = hankel_sum(dim, xi, np.ascontiguousarray(s), np.ascontiguousarray(wf))
    out *= sc ** (-dim) / (2.0 * math.pi) ** dim
    return out.reshape(r.shape) if r.ndim else float(out[0])


# ---------------------------------------------------------------- convolution route

def _eta_edges(datum, table, r, sc, eta_max):
    lo = np.exp(np.arange(math.log(1e-9), 0.0, 0.5))
    lin = np.arange(1.0, eta_max + 0.25, 0.25)
    pts = [np.array([0.0]), lo, lin]
    ell = datum.length_scale / sc
    marks = list(datum.breaks)
    if datum.variant == "gaussian":
        marks = [k * datum.params["scale"] for k in (1.0, 2.0, 4.0, 8.0)]
    d = ell / 16.0
    grade = d * 2.0 ** np.arange(0, 12)
    for b in marks:
        for c in (r + b, abs(r - b)):
            c /= sc
            pts.append(np.array([c]))
            pts.append(c + grade)
            pts.append(c - grade)
    # A(r, .) has structure on the datum scale around rho = r
    pts.append(r / sc + np.array([-1.0, 1.0])[:, None].dot(grade[None, :]).ravel())
    e = np.unique(np.concatenate(pts))
    return e[(e >= 0.0) & (e <= eta_max)]


def _eta_max(table, r, sc, datum):
    # F(eta) below 1e-40 of F(1) and past the far edge of the datum's structure
    eta = 2.0
    f1 = eval_profile(table, 1.0)
    while eval_profile(table, eta) > 1e-40 * f1 and eta < 1e4:
        eta *= 1.25
    far = (r + (max(datum.breaks) if datum.breaks else 8.0 * datum.length_scale)) / sc + 1.0
    return max(eta, far)


def mild_solution_convolution(datum: Datum, table: ProfileTable, t, r, nodes=16):
    """u(r, t) by real-space convolution with the tabulated kernel."""
    if datum.dim != table.dim:
        raise DomainError("datum and table dimensions differ")
    t = float(t)
    if not t > 0:
        raise DomainError("t must be positive")
    r = np.asarray(r, dtype=float)
    flat = np.atleast_1d(r).ravel()
    n = table.dim
    sc = t ** (0.5 * table.alpha)
    out = np.empty(flat.size)
    for i, ri in enumerate(flat):
        eta_max = _eta_max(table, ri, sc, datum)
        eta, w = gauss_panels(_eta_edges(datum, table, ri, sc, eta_max), nodes)
        f = eval_profile(table, eta)
        a = datum.sphere_mean(ri, sc * eta)
        out[i] = sphere_area(n) * np.sum(w * eta ** (n - 1) * f * a)
    return out.reshape(r.shape) if r.ndim else float(out[0])


_TABLES = {}


def profile_table(dim, alpha):
    """Profile table for (dim, alpha), built once per process."""
    from .profile import build_profile

    key = (dim, float(alpha))
    if key not in _TABLES:
        _TABLES[key] = build_profile(dim, alpha)
    return _TABLES[key]


def choose_method(datum):
    """Spectral for data with closed-form, Gaussian-decaying transforms, else convolution.

    The spectral cost of a datum whose transform decays only like
    exp(-c sqrt(rho)) grows with the product of its frequency cut and the
    number of s-nodes; the convolution route has no such dependence.
    """
    return "spectral" if datum.variant == "gaussian" else "convolution"


def mild_solution(datum, order, t, r, method="auto", table=None):
    a = as_alpha(order)
    if method == "auto":
        method = choose_method(datum)
    if method == "spectral":
        return mild_solution_spectral(datum, a, datum.dim, t, r)
    if method == "convolution":
        table = table if table is not None else profile_table(datum.dim, a)
        return mild_solution_convolution(datum, table, t, r)
    raise ValueError("unknown method %r" % method)


def snapshot_radii(dim, alpha, t, datum, r_max=None, per_panel=16):
    """Composite Gauss-Legendre radii covering the bulk of u(., t)."""
    sc = t ** (0.5 * alpha)
    ell = datum.length_scale
    if r_max is None:
        r_max = 30.0 * sc + (datum.support_radius if math.isfinite(datum.support_radius) else 8.0 * ell)
    inner = min(ell, r_max)
    # datum scale near the origin, geometric growth to the kernel scale, then linear
    mid = np.geomspace(inner, max(sc, inner), max(2, int(math.log(max(sc, inner) / inner) / math.log(1.25)) + 1))
    lin = np.arange(max(sc, inner), r_max, 0.25 * max(sc, inner))
    e = np.concatenate([np.linspace(0.0, inner, 9), mid, lin, [r_max]])
    e = np.concatenate([e, list(datum.breaks)])
    e = np.unique(e[(e >= 0) & (e <= r_max)])
    return RadialGrid.from_edges(e, per_panel)


def region_grid(lo, hi, datum=None, per_panel=16):
    """Composite Gauss-Legendre radii on [lo, hi], graded toward r = 0 when lo = 0."""
    if not hi > lo >= 0:
        raise DomainError("need 0 <= lo < hi")
    if lo == 0.0:
        e = np.concatenate([[0.0], np.geomspace(1e-6 * hi, 0.05 * hi, 13), np.linspace(0.05 * hi, hi, 21)])
    elif hi / lo > 10.0:
        e = np.geomspace(lo, hi, 33)
    else:
        e = np.linspace(lo, hi, 25)
    if datum is not None:
        e = np.concatenate([e, [b for b in datum.breaks if lo < b < hi]])
    return RadialGrid.from_edges(np.unique(e), per_panel)


def solve(datum: Datum, order, t, radii=None, method="auto", table=None, span=None) -> Snapshot:
    """Snapshot of u(., t) at the given radii.

    Without radii a covering grid of the whole bulk is used; with span=(lo, hi)
    the quadrature grid of that annulus.
    """
    a = as_alpha(order)
    weights = None
    if radii is None:
        g = snapshot_radii(datum.dim, a, t, datum) if span is None else region_grid(*span, datum)
        radii, weights = g.nodes, g.weights
        span = (float(g.edges[0]), float(g.edges[-1]))
    if method == "auto":
        method = choose_method(datum)
    vals = mild_solution(datum, a, t, radii, method, table)
    return Snapshot(datum.dim, a, datum.name, float(t), radii, vals, method, weights, span)


# ---------------------------------------------------------------- potential

def newtonian_potential(datum: Datum, x_norm):
    """Phi(x) = int u0(x - y) |y|^(2-N) dy for N = 3, by the shell theorem:

    Phi(r) = (4 pi / r) int_0^r s^2 u0 ds + 4 pi int_r^inf s u0 ds.
    """
    if datum.dim != 3:
        raise DomainError("the Newtonian potential is implemented for dim 3 only")
    x = np.asarray(x_norm, dtype=float)
    flat = np.atleast_1d(x).ravel()
    if np.any(flat < 0):
        raise DomainError("radius must be nonnegative")
    total1 = datum.shell_integral(np.inf, 1)
    inner = datum.shell_integral(flat, 2)
    outer = total1 - datum.shell_integral(flat, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 4.0 * math.pi * (np.where(flat > 0, inner / np.where(flat > 0, flat, 1.0), 0.0) + outer)
    return out.reshape(x.shape) if x.ndim else float(out[0])
