"""Mittag-Leffler and Mainardi functions on the real half-line.

E_alpha(-x) is evaluated by its power series for small x and by the
completely monotone spectral integral otherwise.  The Mainardi function
M_alpha(tau) is evaluated by its series while cancellation is mild and by
a positive integral representation (one-sided stable density) beyond.
Gamma, log-gamma and reciprocal gamma come from scipy.special and are
treated as trusted primitives (accuracy of a few ulp).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaln, gammasgn, logsumexp, rgamma

__all__ = [
    "DomainError", "QuadratureError", "FractionalOrder", "as_alpha",
    "ml_neg", "ml_series", "ml_spectral", "ml_asymptotic", "ml_switch",
    "mainardi", "log_mainardi", "recip_gamma", "gauss_panels",
]


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach its tolerance."""


@dataclass(frozen=True)
class FractionalOrder:
    """Order alpha of the Caputo derivative, strictly inside (0, 1)."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (math.isfinite(a) and 0.0 < a < 1.0):
            raise DomainError(f"alpha must lie in (0,1), got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    def __float__(self):
        return self.alpha


def as_alpha(order, allow_one=False) -> float:
    """Return alpha as a float from a FractionalOrder or a number."""
    if isinstance(order, FractionalOrder):
        return order.alpha
    a = float(order)
    if allow_one and a == 1.0:
        return a
    return FractionalOrder(a).alpha


@lru_cache(maxsize=None)
def _gl(n):
    return leggauss(n)


def gauss_panels(edges, n=16):
    """Composite Gauss-Legendre nodes and weights on consecutive panels."""
    x, w = _gl(n)
    e = np.asarray(edges, dtype=float)
    a, b = e[:-1], e[1:]
    half = 0.5 * (b - a)
    nodes = (half[:, None] * x[None, :] + (0.5 * (a + b))[:, None]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return nodes, wts


def recip_gamma(z):
    """1/Gamma(z); zero at the poles z = 0, -1, -2, ..."""
    return rgamma(z)


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("argument must be finite")
    if np.any(x < 0):
        raise DomainError("argument must be nonnegative")
    return x


def ml_switch(alpha) -> float:
    """Largest x handled by the power series in ml_neg.

    At x**(1/alpha) = 3 the largest series term is below e^3 times the
    result, so at most two digits are lost to cancellation.
    """
    return 3.0 ** alpha


def ml_series(alpha, x, tol=1e-16, max_terms=4000):
    """E_alpha(-x) by direct summation of sum (-x)^k / Gamma(1 + k alpha)."""
    a = as_alpha(alpha, allow_one=True)
    x = np.asarray(x, dtype=float)
    s = np.ones_like(x)
    # log-space terms avoid overflow of x^k before the reciprocal gamma
    with np.errstate(divide="ignore"):
        lx = np.log(x)
    for k in range(1, max_terms):
        mag = np.exp(k * lx - gammaln(1.0 + k * a))
        s = s + (-1.0) ** k * mag
        if k > 4 and np.all(mag <= tol * np.abs(s)):
            break
    else:
        raise QuadratureError("Mittag-Leffler series did not converge")
    return s


def _ml_integrand_ref(a):
    # integrand of the spectral form in v = log w:
    # E_a(-x) = sin(a pi)/(a pi) int exp(-(x w)^(1/a)) w / (w^2 + 2 w cos(a pi) + 1) dv
    # w^2 + 2 w cos(a pi) + 1 = (w - 1)^2 + 4 w cos(a pi / 2)^2, free of cancellation
    c2 = 4.0 * math.cos(0.5 * a * math.pi) ** 2
    pref = math.sin(a * math.pi) / (a * math.pi)
    return c2, pref


def _ml_spectral_chunk(a, x, panels, n_lo=12, n_hi=20):
    c2, pref = _ml_integrand_ref(a)
    lx = np.log(x)
    est = 0.5 / (1.0 + x * math.gamma(1.0 - a))
    lo = np.log(1e-17 * est)
    hi = a * math.log(40.0) - lx
    hi = np.minimum(hi, 40.0)
    hi = np.maximum(hi, lo + 2.0)
    out = []
    for n in (n_lo, n_hi):
        xs, ws = gauss_panels(np.linspace(0.0, 1.0, panels + 1), n)
        span = (hi - lo)[:, None]
        v = lo[:, None] + span * xs[None, :]
        ev = np.exp(v)
        em = np.expm1(v)
        with np.errstate(over="ignore"):
            f = np.exp(-np.exp((lx[:, None] + v) / a)) * ev / (em * em + c2 * ev)
        out.append(pref * (span[:, 0] * (f @ ws)))
    return out[1], np.abs(out[1] - out[0])


def ml_spectral(alpha, x, rtol=1e-14, max_panels=16384):
    """E_alpha(-x) from the completely monotone spectral integral.

    The panel count doubles for every point whose two embedded
    Gauss-Legendre rules disagree by more than rtol.
    """
    a = as_alpha(alpha)
    x = _check_x(x)
    flat = np.atleast_1d(x).ravel()
    res = np.ones_like(flat)
    todo = np.nonzero(flat > 0)[0]
    panels = 96
    while todo.size:
        if panels > max_panels:
            raise QuadratureError("spectral Mittag-Leffler integral did not converge")
        vals = np.empty(todo.size)
        errs = np.empty(todo.size)
        step = max(1, 400_000 // (panels * 32))
        for i in range(0, todo.size, step):
            sl = slice(i, i + step)
            vals[sl], errs[sl] = _ml_spectral_chunk(a, flat[todo[sl]], panels)
        ok = errs <= rtol * np.abs(vals)
        res[todo[ok]] = vals[ok]
        todo = todo[~ok]
        panels *= 2
    return res.reshape(np.shape(x)) if np.ndim(x) else float(res[0])


def ml_asymptotic(alpha, x, terms=8):
    """Large-x expansion sum_k (-1)^(k+1) x^(-k) / Gamma(1 - k alpha)."""
    a = as_alpha(alpha)
    x = np.asarray(x, dtype=float)
    k = np.arange(1, terms + 1)
    return np.sum((-1.0) ** (k + 1) * rgamma(1.0 - k * a) * x[..., None] ** (-k), axis=-1)


@lru_cache(maxsize=64)
def ml_asymptotic_switch(alpha, terms=12):
    """x beyond which the truncated large-x expansion is exact to double precision.

    The first two omitted terms are held below 1e-17 of the leading one.
    """
    k = np.array([terms + 1, terms + 2])
    lead = abs(float(rgamma(1.0 - alpha)))
    c = np.abs(rgamma(1.0 - k * alpha)) / (1e-17 * lead)
    return float(np.max(np.where(c > 0, c ** (1.0 / (k - 1)), 0.0)))


def ml_neg(order, x):
    """E_alpha(-x) for x >= 0, alpha in (0, 1); alpha = 1 gives exp(-x)."""
    a = as_alpha(order, allow_one=True)
    x = _check_x(x)
    if a == 1.0:
        r = np.exp(-x)
        return float(r) if np.ndim(r) == 0 else r
    flat = np.atleast_1d(x).ravel()
    out = np.empty_like(flat)
    small = flat <= ml_switch(a)
    if np.any(small):
        out[small] = ml_series(a, flat[small])
    far = flat > max(ml_asymptotic_switch(a), ml_switch(a))
    if np.any(far):
        out[far] = ml_asymptotic(a, flat[far], 12)
    mid = ~small & ~far
    if np.any(mid):
        out[mid] = ml_spectral(a, flat[mid])
    return out.reshape(np.shape(x)) if np.ndim(x) else float(out[0])


def _mainardi_series(a, tau, max_terms):
    n = np.arange(max_terms, dtype=float)[:, None]
    z = 1.0 - a - a * n
    pole = (z <= 0) & (z == np.round(z))
    zz = np.where(pole, 0.5, z)
    lrg = np.where(pole, -np.inf, -gammaln(zz))
    sg = np.where(pole, 0.0, gammasgn(zz))
    with np.errstate(divide="ignore"):
        lt = np.where(n == 0, 0.0, n * np.log(tau)[None, :])
    terms = sg * (-1.0) ** n * np.exp(lt - gammaln(n + 1.0) + lrg)
    s = terms.sum(axis=0)
    tail = np.abs(terms[-20:]).max(axis=0)
    return s, np.abs(terms).sum(axis=0), tail


@lru_cache(maxsize=64)
def _stable_nodes(a):
    # Gauss-Legendre nodes on [0, pi], clustered geometrically toward both ends;
    # the clustering is refined as alpha -> 1 where the integrand sharpens
    c = 1.0 / (1.0 - a)
    ng = int(30 + 4 * max(0.0, c - 5.0))
    g = np.geomspace(1e-10, 1.0, ng)
    edges = np.unique(np.concatenate([[0.0], g * np.pi / 2, np.pi - g[::-1] * np.pi / 2, [np.pi]]))
    phi, w = gauss_panels(edges, 24)
    la = c * (np.log(np.sin(a * phi)) - np.log(np.sin(phi))) \
        + np.log(np.sin((1.0 - a) * phi)) - np.log(np.sin(a * phi))
    return la, np.log(w)


def _log_mainardi_integral(a, tau):
    # M_a(tau) = tau^(a/(1-a)) / (pi (1-a)) int_0^pi A(phi) exp(-tau^(1/(1-a)) A(phi)) dphi
    c = 1.0 / (1.0 - a)
    la, lw = _stable_nodes(a)
    lt = np.log(tau)
    out = np.empty_like(tau)
    step = 256
    for i in range(0, tau.size, step):
        with np.errstate(over="ignore", invalid="ignore"):
            tc = np.exp(c * lt[i:i + step])
            ex = la[None, :] - tc[:, None] * np.exp(la)[None, :] + lw[None, :]
        ex[np.isnan(ex)] = -np.inf
        out[i:i + step] = logsumexp(ex, axis=1)
    return a * c * lt - math.log(math.pi * (1.0 - a)) + out


def log_mainardi(order, tau):
    """Natural log of M_alpha(tau) for tau > 0 (array valued)."""
    a = as_alpha(order)
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(tau < 0) or not np.all(np.isfinite(tau)):
        raise DomainError("tau must be finite and nonnegative")
    out = np.empty_like(tau)
    max_terms = 300 if a < 0.9 else 1200
    cand = np.nonzero(tau <= 1.2)[0]
    use_series = np.zeros(tau.size, dtype=bool)
    if cand.size:
        s, sabs, tail = _mainardi_series(a, tau[cand], max_terms)
        good = (s > 0) & (sabs <= 1e3 * s) & (tail <= 1e-17 * s)
        idx = cand[good]
        out[idx] = np.log(s[good])
        use_series[idx] = True
    rest = np.nonzero(~use_series)[0]
    if rest.size:
        out[rest] = _log_mainardi_integral(a, tau[rest])
    return out


def mainardi(order, tau):
    """Mainardi-Wright function M_alpha(tau) for tau >= 0."""
    a = as_alpha(order)
    t = _check_x(tau)
    flat = np.atleast_1d(t).ravel()
    out = np.empty_like(flat)
    zero = flat == 0
    out[zero] = rgamma(1.0 - a)
    if np.any(~zero):
        out[~zero] = np.exp(log_mainardi(a, flat[~zero]))
    return out.reshape(np.shape(t)) if np.ndim(t) else float(out[0])
