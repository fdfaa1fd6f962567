"""Self-similar profile F of the fractional heat kernel.

Z(x, t) = t^(-alpha N/2) F(|x| t^(-alpha/2)), with Fourier symbol
E_alpha(-|w|^2 t^alpha).  F is computed by subordination to the Gaussian
heat kernel,

    F(r) = int_0^inf M_alpha(tau) (4 pi tau)^(-N/2) exp(-r^2 / (4 tau)) dtau,

on a fixed composite Gauss-Legendre grid in log(tau), in log space so that
values far in the stretched-exponential tail keep full relative accuracy.
An independent route (inverse radial Fourier transform of E_alpha(-rho^2))
serves as validation oracle.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.special import comb, gamma, kv, logsumexp, rgamma

from .kernels import hankel_sum
from .special import DomainError, FractionalOrder, QuadratureError, as_alpha, gauss_panels, log_mainardi, ml_neg
from .transforms import RadialGrid, sphere_area

__all__ = [
    "ProfileOptions", "ProfileTable", "KappaFit", "TailFit", "ToleranceError", "FitError",
    "build_profile", "eval_profile", "fundamental_solution", "estimate_kappa", "fit_tail",
    "profile_oracle_fourier", "second_moment", "profile_mass", "subordination",
    "laplace_kernel", "kappa_exact", "f_zero_exact", "tail_exponent", "saddle_sigma",
    "write_table", "read_table",
]


class ToleranceError(ArithmeticError):
    """A computed quantity failed its validation tolerance."""


class FitError(ValueError):
    """A least-squares model did not describe the data."""


def tail_exponent(alpha) -> float:
    """q = 2/(2 - alpha), the stretched-exponential power of the far field."""
    return 2.0 / (2.0 - alpha)


def saddle_sigma(alpha) -> float:
    """Rate of the far-field decay from a saddle-point analysis of the
    subordination integral; used only to size quadrature ranges and in tests.
    """
    a = alpha
    return (2.0 - a) * a ** (a / (2.0 - a)) * 2.0 ** (-2.0 / (2.0 - a))


def kappa_exact(dim, alpha) -> float:
    """Near-origin constant: F ~ kappa |x|^(2-N) (N=3), F ~ kappa (-log|x|) (N=2)."""
    if dim == 3:
        return 1.0 / (4.0 * math.pi * math.gamma(1.0 - alpha))
    if dim == 2:
        return 1.0 / (2.0 * math.pi * math.gamma(1.0 - alpha))
    raise DomainError("kappa is defined for dim 2 and 3")


def f_zero_exact(alpha) -> float:
    """F(0) in dimension one."""
    return 0.5 / math.gamma(1.0 - 0.5 * alpha)


def laplace_kernel(dim, r):
    """E_N: |x|^(2-N) for N=3, -log|x| for N=2."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        if dim == 3:
            return 1.0 / r
        if dim == 2:
            return -np.log(r)
    raise DomainError("laplace kernel defined for dim 2 and 3")


# ---------------------------------------------------------------- subordination

@lru_cache(maxsize=32)
def _tau_grid(alpha, r_top):
    a = alpha
    b = (1.0 - a) * a ** (a / (1.0 - a))
    tmax = 1.3 * ((saddle_sigma(a) * r_top ** tail_exponent(a) + 80.0) / b) ** (1.0 - a)
    umax = max(math.log(tmax), 1.0)
    # the right flank steepens like exp(-b tau^(1/(1-a))) as a -> 1
    h = min(0.1, 4.0 * (1.0 - a))
    edges = np.concatenate([np.arange(-70.0, -2.0, 0.5), np.arange(-2.0, umax + h, h)])
    u, w = gauss_panels(edges, 16)
    tau = np.exp(u)
    base = log_mainardi(a, tau) + u + np.log(w)
    return tau, base


def subordination(dim, order, r, slope=False):
    """F(r) by the subordination integral; optionally d log F / d log r."""
    a = as_alpha(order)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    r_top = float(2.0 ** math.ceil(math.log2(max(float(r.max()), 1.0))))
    tau, base = _tau_grid(a, r_top)
    base = base - 0.5 * dim * np.log(4.0 * math.pi * tau)
    lf = np.empty(r.size)
    sl = np.zeros(r.size)
    ltau = np.log(2.0 * tau)
    step = 128
    for i in range(0, r.size, step):
        rr = r[i:i + step]
        ex = base[None, :] - (rr * rr)[:, None] / (4.0 * tau)[None, :]
        lf[i:i + step] = logsumexp(ex, axis=1)
        if slope:
            with np.errstate(divide="ignore"):
                ld = logsumexp(ex - ltau[None, :], axis=1) + 2.0 * np.log(rr)
            sl[i:i + step] = np.where(rr > 0, -np.exp(ld - lf[i:i + step]), 0.0)
    with np.errstate(divide="ignore"):
        f = np.exp(lf)
    return (f, sl) if slope else f


# ---------------------------------------------------------------- Fourier oracle

def _asymptotic_coeffs(a, k_terms):
    c = np.array([(-1.0) ** (m + 1) * rgamma(1.0 - m * a) for m in range(1, k_terms + 1)])
    d = np.array([sum(c[m - 1] * comb(k - 1, m - 1) for m in range(1, k + 1))
                  for k in range(1, k_terms + 1)])
    return d


@lru_cache(maxsize=16)
def _oracle_remainder(a, width, rho_max, k_terms):
    # E_a(-rho^2) minus its large-argument expansion rewritten in powers of 1/(1+rho^2)
    rho, w = gauss_panels(np.arange(0.0, rho_max + 0.5 * width, width), 16)
    s = rho * rho
    d = _asymptotic_coeffs(a, k_terms)
    rem = ml_neg(a, s) - sum(d[k - 1] * (1.0 + s) ** (-k) for k in range(1, k_terms + 1))
    return rho, w, rem, d


def _matern(dim, k, r):
    # inverse transform of (1 + rho^2)^(-k) in R^N
    nu = k - 0.5 * dim
    pref = (2.0 * math.pi) ** (-0.5 * dim) / (2.0 ** (k - 1) * math.gamma(k))
    out = np.empty_like(r)
    pos = r > 0
    out[pos] = pref * r[pos] ** nu * kv(abs(nu), r[pos])
    if np.any(~pos):
        if nu <= 0:
            out[~pos] = np.inf
        else:
            out[~pos] = pref * 2.0 ** (nu - 1.0) * math.gamma(nu)
    return out


def profile_oracle_fourier(dim, order, r, k_terms=3, rho_max=100.0):
    """F(r) by inverse radial Fourier transform of rho -> E_alpha(-rho^2).

    The slowly decaying large-rho part of the symbol is removed as a finite
    sum of (1 + rho^2)^(-k) terms whose transforms are Matern functions in
    closed form; the smooth remainder is integrated on panels fine enough to
    resolve the kernel oscillation.
    """
    a = as_alpha(order)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if dim > 1 and np.any(r <= 0):
        raise DomainError("oracle requires r > 0 for dim >= 2")
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    width = min(0.05, 2.0 ** math.floor(math.log2(0.5 / max(float(r.max()), 1e-3))))
    rho, w, rem, d = _oracle_remainder(a, width, rho_max, k_terms)
    wf = w * rho ** (dim - 1) * rem
    fr = hankel_sum(dim, np.ascontiguousarray(r), np.ascontiguousarray(rho), np.ascontiguousarray(wf))
    fr /= (2.0 * math.pi) ** dim
    fm = sum(d[k - 1] * _matern(dim, k, r) for k in range(1, k_terms + 1))
    return fr + fm


# ---------------------------------------------------------------- table

@dataclass(frozen=True)
class ProfileOptions:
    r_max: float = 30.0
    r_min: float = 1e-6
    log_step: float = 0.25
    lin_step: float = 0.25
    nodes: int = 16
    kappa_window: tuple = (1e-5, 1e-2)
    tail_window: tuple = (2.0, None)
    patch_rtol: float = 1e-3
    validate: bool = True
    validate_radii: tuple = (0.1, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0)
    cross_rtol: float = 1e-6
    mass_tol: float = 1e-6
    moment_rtol: float = 1e-5


@dataclass(frozen=True)
class KappaFit:
    kappa: float
    slope: float
    residual: float


@dataclass(frozen=True)
class TailFit:
    kappa_hat: float
    sigma_hat: float
    gamma_hat: float
    correction: float
    exponent: float
    r2: float
    rms: float
    window: tuple


@dataclass(frozen=True, eq=False)
class ProfileTable:
    """Tabulated F for one (dim, alpha) with asymptotic patches.

    radii/values/slopes are the interpolation nodes (slopes are
    d log F / d log r); weights, when present, integrate radial functions
    against dr on [0, radii-range].
    """

    dim: int
    order: FractionalOrder
    radii: np.ndarray
    values: np.ndarray
    slopes: np.ndarray | None = None
    weights: np.ndarray | None = None
    kappa: float = float("nan")
    kappa_slope: float = 0.0
    f_zero: float = float("nan")
    kappa_hat: float = float("nan")
    sigma_hat: float = float("nan")
    gamma_hat: float = 0.0
    tail_correction: float = 0.0
    r_inner: float = 0.0
    r_outer: float = float("inf")
    options: ProfileOptions = field(default_factory=ProfileOptions)

    def __post_init__(self):
        if not isinstance(self.order, FractionalOrder):
            object.__setattr__(self, "order", FractionalOrder(self.order))
        object.__setattr__(self, "radii", np.asarray(self.radii, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if np.any(np.diff(self.radii) <= 0):
            raise ValueError("radii must be strictly increasing")

    @property
    def alpha(self):
        return self.order.alpha

    @property
    def exponent(self):
        return tail_exponent(self.alpha)

    def __call__(self, r):
        return eval_profile(self, r)

    @property
    def interpolant(self):
        sp = self.__dict__.get("_spline")
        if sp is None:
            lr = np.log(self.radii)
            with np.errstate(divide="ignore"):
                lf = np.log(self.values)
            if self.slopes is None:
                d = np.gradient(lf, lr)
            else:
                d = self.slopes
            sp = CubicHermiteSpline(lr, lf, d, extrapolate=False)
            object.__setattr__(self, "_spline", sp)
        return sp

    def patch_flags(self):
        flags = np.zeros(self.radii.size, dtype=int)
        flags[self.radii <= self.r_inner] = 1
        flags[self.radii >= self.r_outer] = 2
        return flags


def _table_grid(opts):
    return RadialGrid.log_linear(r_cut=opts.r_max, r_min=opts.r_min, log_step=opts.log_step,
                                 lin_step=opts.lin_step, n=opts.nodes)


def build_profile(dim, order, opts: ProfileOptions | None = None) -> ProfileTable:
    """Tabulate F for (dim, alpha) and fit its asymptotic constants."""
    if dim not in (1, 2, 3):
        raise DomainError("dim must be 1, 2 or 3")
    order = order if isinstance(order, FractionalOrder) else FractionalOrder(order)
    opts = opts or ProfileOptions()
    grid = _table_grid(opts)
    f, sl = subordination(dim, order, grid.nodes, slope=True)
    if not np.all(f > 0):
        raise ToleranceError("profile underflowed to zero inside the table")
    table = ProfileTable(dim, order, grid.nodes, f, sl, grid.weights, options=opts)
    if dim == 1:
        table = replace(table, f_zero=float(subordination(1, order, [0.0])[0]))
    else:
        kf = estimate_kappa(table)
        table = replace(table, kappa=kf.kappa, kappa_slope=kf.slope)
    tf = fit_tail(table)
    table = replace(table, kappa_hat=tf.kappa_hat, sigma_hat=tf.sigma_hat, gamma_hat=tf.gamma_hat,
                    tail_correction=tf.correction)
    table = replace(table, r_inner=_inner_radius(table), r_outer=_outer_radius(table))
    mass = profile_mass(table)
    if abs(mass - 1.0) > opts.mass_tol:
        raise ToleranceError("profile mass %.3e off by more than %g" % (mass - 1.0, opts.mass_tol))
    m2 = second_moment(table)
    exact = 2.0 * dim / math.gamma(1.0 + order.alpha)
    if abs(m2 / exact - 1.0) > opts.moment_rtol:
        raise ToleranceError("second moment %.10g differs from %.10g" % (m2, exact))
    if opts.validate:
        rr = np.asarray(opts.validate_radii, dtype=float)
        rr = rr[rr <= opts.r_max]
        dev = np.max(np.abs(eval_profile(table, rr) / profile_oracle_fourier(dim, order, rr) - 1.0))
        if dev > opts.cross_rtol:
            raise ToleranceError("subordination and Fourier routes differ by %.2e" % dev)
    return table


def _near_model(table, r):
    with np.errstate(divide="ignore", over="ignore"):
        if table.dim == 3:
            return table.kappa / r + table.kappa_slope
        return -table.kappa * np.log(r) + table.kappa_slope


def _tail_model(table, r):
    q = table.exponent
    return np.exp(math.log(table.kappa_hat) - table.gamma_hat * np.log(r)
                  - table.sigma_hat * r ** q + table.tail_correction * r ** (-q))


def _inner_radius(table):
    if table.dim == 1:
        return 0.0
    ok = np.abs(_near_model(table, table.radii) / table.values - 1.0) <= table.options.patch_rtol
    bad = np.nonzero(~ok)[0]
    last = bad[0] - 1 if bad.size else table.radii.size - 1
    return float(table.radii[last]) if last >= 0 else 0.0


def _outer_radius(table):
    r = table.radii
    sel = r >= 1.0
    ok = np.abs(_tail_model(table, r[sel]) / table.values[sel] - 1.0) <= table.options.patch_rtol
    bad = np.nonzero(~ok)[0]
    if not bad.size:
        return float(r[sel][0])
    if bad[-1] + 1 >= ok.size:
        return float("inf")
    return float(r[sel][bad[-1] + 1])


def eval_profile(table: ProfileTable, r):
    """F at radii r >= 0.

    Hermite interpolation in (log r, log F) inside the tabulated range, the
    near-origin law kappa E_N(r) + c below it (N >= 2; +inf at r = 0), linear
    interpolation to F(0) below it for N = 1, and the fitted far-field law
    beyond the last node.
    """
    r = np.asarray(r, dtype=float)
    flat = np.atleast_1d(r).ravel()
    if np.any(flat < 0):
        raise DomainError("radius must be nonnegative")
    out = np.empty_like(flat)
    r0, r1 = table.radii[0], table.radii[-1]
    mid = (flat >= r0) & (flat <= r1)
    if np.any(mid):
        out[mid] = np.exp(table.interpolant(np.log(flat[mid])))
    low = flat < r0
    if np.any(low):
        if table.dim == 1:
            out[low] = table.f_zero + (table.values[0] - table.f_zero) * flat[low] / r0
        else:
            with np.errstate(divide="ignore"):
                out[low] = np.where(flat[low] > 0, _near_model(table, flat[low]), np.inf)
    high = flat > r1
    if np.any(high):
        out[high] = _tail_model(table, flat[high])
    return out.reshape(r.shape) if r.ndim else float(out[0])


def fundamental_solution(table: ProfileTable, x_norm, t):
    """Z(x, t) = t^(-alpha N/2) F(|x| t^(-alpha/2))."""
    t = float(t)
    if not t > 0:
        raise DomainError("t must be positive")
    a = table.alpha
    return t ** (-0.5 * a * table.dim) * eval_profile(table, np.asarray(x_norm, dtype=float) * t ** (-0.5 * a))


def _window(table, lo, hi):
    hi = table.radii[-1] if hi is None else hi
    sel = (table.radii >= lo) & (table.radii <= hi)
    if sel.sum() < 3:
        raise FitError("fewer than three nodes in window [%g, %g]" % (lo, hi))
    return table.radii[sel], table.values[sel]


def estimate_kappa(table: ProfileTable, window=None) -> KappaFit:
    """Near-origin constant by a linear fit in the window [1e-5, 1e-2].

    N=3: r F(r) = kappa + c r.  N=2: F(r) = kappa (-log r) + c.
    The returned slope is c; the residual is the largest relative misfit.
    """
    if table.dim < 2:
        raise DomainError("kappa is defined for dim >= 2")
    lo, hi = window or table.options.kappa_window
    r, f = _window(table, lo, hi)
    if table.dim == 3:
        y = r * f
        a = np.column_stack([np.ones_like(r), r])
        (k, c), *_ = np.linalg.lstsq(a, y, rcond=None)
        res = float(np.max(np.abs(a @ np.array([k, c]) - y) / np.abs(y)))
    else:
        a = np.column_stack([-np.log(r), np.ones_like(r)])
        (k, c), *_ = np.linalg.lstsq(a, f, rcond=None)
        res = float(np.max(np.abs(a @ np.array([k, c]) - f) / f))
    if res > 1e-3:
        raise FitError("near-origin linear model residual %.2e exceeds 1e-3" % res)
    return KappaFit(float(k), float(c), res)


def fit_tail(table: ProfileTable, window=None, exponent=None, prefactor=True) -> TailFit:
    """Least-squares far-field law

        log F = log kh - g log r - s r^q + c r^(-q)

    over the window (default r in [2, r_max]).  With prefactor=False only
    log kh - s r^q is fitted (g = c = 0).  exponent defaults to
    q = 2/(2 - alpha).
    """
    lo, hi = window or table.options.tail_window
    r, f = _window(table, lo, hi)
    q = table.exponent if exponent is None else exponent
    y = np.log(f)
    cols = [np.ones_like(r), -r ** q]
    if prefactor:
        cols[1:1] = [-np.log(r), r ** (-q)]
    a = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    fit = a @ coef
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    if r2 < 0.999:
        raise FitError("tail fit R^2 = %.6f below 0.999" % r2)
    g, c = (float(coef[1]), float(coef[2])) if prefactor else (0.0, 0.0)
    return TailFit(float(math.exp(coef[0])), float(coef[-1]), g, c, q, r2,
                   math.sqrt(ss_res / r.size), (float(r[0]), float(r[-1])))


def _radial_moment(table, power):
    if table.weights is None:
        raise ValueError("table carries no quadrature weights")
    w = table.weights
    return sphere_area(table.dim) * float(np.sum(w * table.radii ** (table.dim - 1 + power) * table.values))


def profile_mass(table: ProfileTable) -> float:
    """int_{R^N} F over the tabulated range."""
    return _radial_moment(table, 0)


def second_moment(table: ProfileTable) -> float:
    """int_{R^N} |xi|^2 F(xi) dxi; equals 2N / Gamma(1 + alpha)."""
    return _radial_moment(table, 2)


# ---------------------------------------------------------------- CSV

_HEADER_KEYS = ("dim", "alpha", "kappa", "kappa_slope", "f_zero", "kappa_hat", "sigma_hat",
                "gamma_hat", "tail_correction", "r_inner", "r_outer", "r_min", "r_max", "log_step", "lin_step", "nodes")


def write_table(table: ProfileTable, path_or_buf):
    """CSV with '# key=value' header rows and columns r, F, patch_flag, dlogF_dlogr."""
    o = table.options
    meta = dict(dim=table.dim, alpha=table.alpha, kappa=table.kappa, kappa_slope=table.kappa_slope,
                f_zero=table.f_zero, kappa_hat=table.kappa_hat, sigma_hat=table.sigma_hat,
                gamma_hat=table.gamma_hat, tail_correction=table.tail_correction, r_inner=table.r_inner, r_outer=table.r_outer,
                r_min=o.r_min, r_max=o.r_max, log_step=o.log_step, lin_step=o.lin_step, nodes=o.nodes)
    buf = io.StringIO()
    buf.write("# subdiff profile table v1\n")
    for k in _HEADER_KEYS:
        buf.write("# %s=%r\n" % (k, meta[k]))
    buf.write("r,F,patch_flag,dlogF_dlogr\n")
    flags = table.patch_flags()
    sl = table.slopes if table.slopes is not None else np.full(table.radii.size, np.nan)
    for r, f, p, s in zip(table.radii, table.values, flags, sl):
        buf.write("%r,%r,%d,%r\n" % (float(r), float(f), p, float(s)))
    text = buf.getvalue()
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w") as fh:
            fh.write(text)
    return text


def read_table(path_or_buf) -> ProfileTable:
    text = path_or_buf.read() if hasattr(path_or_buf, "read") else open(path_or_buf).read()
    meta = {}
    rows = []
    for line in text.splitlines():
        if line.startswith("#"):
            if "=" in line:
                k, v = line[1:].strip().split("=", 1)
                meta[k] = float(v) if k != "dim" and k != "nodes" else int(v)
        elif line and not line.startswith("r,"):
            rows.append([float(x) for x in line.split(",")])
    arr = np.array(rows)
    opts = ProfileOptions(r_max=meta["r_max"], r_min=meta["r_min"], log_step=meta["log_step"],
                          lin_step=meta["lin_step"], nodes=meta["nodes"])
    grid = _table_grid(opts)
    weights = grid.weights if grid.nodes.size == arr.shape[0] else None
    slopes = arr[:, 3] if not np.any(np.isnan(arr[:, 3])) else None
    return ProfileTable(meta["dim"], FractionalOrder(meta["alpha"]), arr[:, 0], arr[:, 1], slopes,
                        weights, meta["kappa"], meta["kappa_slope"], meta["f_zero"], meta["kappa_hat"],
                        meta["sigma_hat"], meta["gamma_hat"], meta["tail_correction"], meta["r_inner"], meta["r_outer"], opts)
