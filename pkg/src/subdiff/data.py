"""Radial initial data: masses, pointwise values, Fourier transforms and
tail classes.

Variants
--------
gaussian(scale, mass)        M (4 pi s^2)^(-N/2) exp(-r^2 / 4 s^2)
ball_indicator(R, height)    h 1{r < R}
smooth_bump(R, height)       h exp(1 - 1/(1 - (r/R)^2)) for r < R
power_tail(A, beta, core)    A c^-beta on r <= c, A r^-beta on r >= 2c,
                             joined by a C-infinity monotone blend
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import gammainc, hankel1, j1, ive

from .kernels import DATUM_KIND, circle_mean, datum_values, hankel_sum
from .special import DomainError, gauss_panels
from .transforms import RadialGrid, radial_kernel, sphere_area

__all__ = ["Datum", "TailClass", "gaussian", "ball_indicator", "smooth_bump", "power_tail", "parse_datum"]


@dataclass(frozen=True)
class TailClass:
    """compact(radius) | d_beta(beta, constant, radius) | exact_power(constant=A, beta)."""

    kind: str
    radius: float = float("nan")
    beta: float = float("nan")
    constant: float = float("nan")


def _ball_volume(dim, r):
    return sphere_area(dim) * r ** dim / dim


@dataclass(frozen=True, eq=False)
class Datum:
    variant: str
    dim: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError("dim must be 1, 2 or 3")
        if self.variant not in DATUM_KIND:
            raise DomainError("unknown datum variant %r" % self.variant)
        p = self.params
        if self.variant == "power_tail" and not p["beta"] > self.dim:
            raise DomainError("power_tail needs beta > dim for integrability")
        for k, v in p.items():
            if not (math.isfinite(v) and v > 0):
                raise DomainError("datum parameter %s must be positive and finite" % k)

    # ------------------------------------------------------------ identity
    @property
    def name(self):
        args = ",".join("%s=%r" % (k, v) for k, v in self.params.items())
        return "%s(%s)" % (self.variant, args)

    def __repr__(self):
        return "Datum(%s, dim=%d)" % (self.name, self.dim)

    @property
    def _kind(self):
        return DATUM_KIND[self.variant]

    @cached_property
    def _cparams(self):
        p = self.params
        if self.variant == "gaussian":
            v = [p["mass"], p["scale"], float(self.dim)]
        elif self.variant == "smooth_bump":
            v = [p["height"], p["radius"]]
        elif self.variant == "power_tail":
            v = [p["A"], p["beta"], p["core"]]
        else:
            v = [p["height"], p["radius"]]
        return np.array(v, dtype=float)

    @property
    def breaks(self):
        """Radii where u0 is not smooth or changes form."""
        p = self.params
        if self.variant in ("ball_indicator", "smooth_bump"):
            return (p["radius"],)
        if self.variant == "power_tail":
            return (p["core"], 2.0 * p["core"])
        return ()

    @property
    def support_radius(self):
        if self.variant in ("ball_indicator", "smooth_bump"):
            return self.params["radius"]
        return math.inf

    @property
    def length_scale(self):
        p = self.params
        return {"gaussian": p.get("scale"), "ball_indicator": p.get("radius"),
                "smooth_bump": p.get("radius"), "power_tail": p.get("core")}[self.variant]

    # ------------------------------------------------------------ values
    def __call__(self, r):
        return self.eval(r)

    def eval(self, r):
        """u0 at radius r."""
        r = np.asarray(r, dtype=float)
        out = datum_values(self._kind, self._cparams, np.ascontiguousarray(np.atleast_1d(r).ravel()))
        return out.reshape(r.shape) if r.ndim else float(out[0])

    @cached_property
    def _cumulative(self):
        # cumulative panel integrals of r^k u0 on [0, extent] for k = 0..3
        ext = {"smooth_bump": self.params.get("radius"), "power_tail": 2.0 * self.params.get("core", 0.0)}
        b = ext.get(self.variant)
        if b is None:
            return None
        edges = np.linspace(0.0, b, 257)
        if self.variant == "power_tail":
            c = self.params["core"]
            edges = np.union1d(np.linspace(0.0, c, 9), np.linspace(c, b, 257))
        x, w = gauss_panels(edges, 16)
        u = self.eval(x)
        cums = []
        for k in range(4):
            pan = (w * x ** k * u).reshape(-1, 16).sum(axis=1)
            cums.append(np.concatenate([[0.0], np.cumsum(pan)]))
        return edges, cums

    def shell_integral(self, s, k):
        """int_0^s r^k u0(r) dr for k in 0..3 (s may be inf)."""
        s = np.asarray(s, dtype=float)
        flat = np.atleast_1d(s).ravel()
        p = self.params
        if self.variant == "gaussian":
            c = p["mass"] * (4.0 * math.pi * p["scale"] ** 2) ** (-0.5 * self.dim)
            a = 2.0 * p["scale"]
            h = 0.5 * (k + 1)
            out = c * 0.5 * a ** (k + 1) * math.gamma(h) * gammainc(h, (flat / a) ** 2)
        elif self.variant == "ball_indicator":
            out = p["height"] * np.minimum(flat, p["radius"]) ** (k + 1) / (k + 1)
        else:
            edges, cums = self._cumulative
            cum = cums[k]
            b = edges[-1]
            sc = np.minimum(flat, b)
            j = np.clip(np.searchsorted(edges, sc, side="right") - 1, 0, edges.size - 2)
            lo = edges[j]
            out = cum[j].copy()
            inside = sc > lo
            if np.any(inside):
                gx, gw = gauss_panels(np.array([0.0, 1.0]), 16)
                h = (sc - lo)[inside]
                nodes = lo[inside, None] + h[:, None] * gx[None, :]
                out[inside] += (h[:, None] * gw[None, :] * nodes ** k * self.eval(nodes)).sum(axis=1)
            if self.variant == "power_tail":
                e = k + 1.0 - p["beta"]
                with np.errstate(over="ignore", invalid="ignore"):
                    far = p["A"] * np.where(flat > b, (np.where(np.isinf(flat), 0.0, flat ** e) - b ** e) / e, 0.0)
                if e >= 0:
                    far = np.where(np.isinf(flat), np.inf, far)
                out = out + far
        return out.reshape(s.shape) if s.ndim else float(out[0])

    @cached_property
    def mass(self):
        """M = int u0 over R^N."""
        p = self.params
        if self.variant == "gaussian":
            return float(p["mass"])
        if self.variant == "ball_indicator":
            return float(p["height"] * _ball_volume(self.dim, p["radius"]))
        return float(sphere_area(self.dim) * self.shell_integral(np.inf, self.dim - 1))

    # ------------------------------------------------------------ transform
    def radial_transform(self, rho):
        """Fourier transform u0^(rho) (u0^(0) = M)."""
        rho = np.asarray(rho, dtype=float)
        flat = np.atleast_1d(rho).ravel()
        if np.any(flat < 0):
            raise DomainError("rho must be nonnegative")
        p, n = self.params, self.dim
        if self.variant == "gaussian":
            out = p["mass"] * np.exp(-(p["scale"] * flat) ** 2)
        elif self.variant == "ball_indicator":
            out = p["height"] * _ball_transform(n, p["radius"], flat)
        else:
            out = self._numeric_transform(flat)
        return out.reshape(rho.shape) if rho.ndim else float(out[0])

    def _numeric_transform(self, rho):
        p = self.params
        b = self.params["radius"] if self.variant == "smooth_bump" else 2.0 * p["core"]
        kmax = float(rho.max()) if rho.size else 0.0
        npan = int(max(64, math.ceil(kmax * b / math.pi) * 2))
        edges = np.linspace(0.0, b, npan + 1)
        if self.variant == "power_tail":
            edges = np.union1d(edges, [p["core"]])
        grid = RadialGrid.from_edges(edges, 16)
        wf = grid.weights * grid.nodes ** (self.dim - 1) * self.eval(grid.nodes)
        out = hankel_sum(self.dim, np.ascontiguousarray(rho), grid.nodes, np.ascontiguousarray(wf))
        if self.variant == "power_tail":
            out = out + p["A"] * _power_far(self.dim, p["beta"], b, rho)
        return out

    # ------------------------------------------------------------ spherical means
    def sphere_mean(self, r, rho):
        """Mean of u0 over the sphere of radius rho centred at a point of norm r.

        r is a scalar, rho an array.  In one dimension the 'sphere' is the
        pair of points r +- rho.
        """
        rho = np.asarray(rho, dtype=float)
        flat = np.atleast_1d(rho).ravel()
        r = float(r)
        if self.dim == 1:
            out = 0.5 * (self.eval(np.abs(r - flat)) + self.eval(r + flat))
        elif self.dim == 3:
            out = self._sphere_mean3(r, flat)
        else:
            out = self._circle_mean(r, flat)
        out = np.asarray(out, dtype=float)
        return out.reshape(rho.shape) if rho.ndim else float(out[0])

    def _sphere_mean3(self, r, rho):
        # (1/(2 r rho)) int_{|r-rho|}^{r+rho} s u0(s) ds
        if r == 0.0:
            return self.eval(rho)
        lo, hi = np.abs(r - rho), r + rho
        with np.errstate(invalid="ignore", divide="ignore"):
            out = (self.shell_integral(hi, 1) - self.shell_integral(lo, 1)) / (2.0 * r * rho)
        short = 2.0 * np.minimum(r, rho) < 1e-2 * np.maximum(r, rho)
        if np.any(short):
            out[short] = self._short_shell(lo[short], hi[short]) / (2.0 * r * rho[short])
        return out

    def _short_shell(self, lo, hi):
        # int_lo^hi s u0(s) ds on short intervals, split at the datum breaks
        gx, gw = gauss_panels(np.array([0.0, 1.0]), 16)
        cuts = np.array([0.0, *self.breaks, np.inf])
        acc = np.zeros_like(lo)
        for c0, c1 in zip(cuts[:-1], cuts[1:]):
            a = np.clip(lo, c0, c1)
            b = np.clip(hi, c0, c1)
            m = b > a
            if not np.any(m):
                continue
            x = a[m, None] + (b - a)[m, None] * gx[None, :]
            acc[m] += ((b - a)[m, None] * gw[None, :] * x * self.eval(x)).sum(axis=1)
        return acc

    def _circle_mean(self, r, rho):
        p = self.params
        if r == 0.0:
            return self.eval(rho)
        if self.variant == "gaussian":
            c = p["mass"] / (4.0 * math.pi * p["scale"] ** 2)
            s2 = 4.0 * p["scale"] ** 2
            z = 2.0 * r * rho / s2
            return c * np.exp(-(r - rho) ** 2 / s2) * ive(0, z)
        if self.variant == "ball_indicator":
            rr = p["radius"]
            with np.errstate(invalid="ignore", divide="ignore"):
                cth = (r * r + rho * rho - rr * rr) / (2.0 * r * rho)
            frac = np.where(cth >= 1.0, 0.0, np.where(cth <= -1.0, 1.0, np.arccos(np.clip(cth, -1, 1)) / math.pi))
            return p["height"] * frac
        gx, gw = gauss_panels(np.array([-1.0, 1.0]), 24)
        res = circle_mean(self._kind, self._cparams, np.array(self.breaks, dtype=float),
                          np.array([float(r)]), np.ascontiguousarray(rho), gx, gw)
        return res[0]

    # ------------------------------------------------------------ classification
    @property
    def tail_class(self) -> TailClass:
        p = self.params
        if self.variant in ("ball_indicator", "smooth_bump"):
            return TailClass("compact", radius=p["radius"])
        if self.variant == "power_tail":
            return TailClass("exact_power", radius=2.0 * p["core"], beta=p["beta"], constant=p["A"])
        # gaussian: |x|^beta u0 is bounded for every beta
        return TailClass("d_beta", radius=0.0, beta=math.inf, constant=math.nan)

    def in_d_beta(self, beta) -> bool:
        """Whether |x|^beta u0(x) stays bounded at infinity."""
        tc = self.tail_class
        if tc.kind == "compact":
            return True
        return beta <= tc.beta

    def d_beta_constant(self, beta, radius=None):
        """sup over |x| > radius of |x|^beta u0(x), on a fine radial sample."""
        if not self.in_d_beta(beta):
            return math.inf
        r0 = radius if radius is not None else 2.0 * (self.length_scale or 1.0)
        r = r0 * np.geomspace(1.0, 1e4, 4001)
        return float(np.max(r ** beta * self.eval(r)))


def _ball_transform(dim, radius, rho):
    out = np.empty_like(rho)
    z = rho * radius
    small = z < 1e-3
    big = ~small
    vol = _ball_volume(dim, radius)
    # series 1 - z^2/(2(N+2)) for the normalised ball transform
    out[small] = vol * (1.0 - z[small] ** 2 / (2.0 * (dim + 2)))
    zb, rb = z[big], rho[big]
    if dim == 1:
        out[big] = 2.0 * np.sin(zb) / rb
    elif dim == 2:
        out[big] = 2.0 * math.pi * radius * j1(zb) / rb
    else:
        out[big] = 4.0 * math.pi * (np.sin(zb) - zb * np.cos(zb)) / rb ** 3
    return out


def _power_far(dim, beta, a, rho):
    """int_a^inf K_N(rho r) r^(N-1-beta) dr, by rotating the contour to
    r = a + i w / rho where the kernel decays like exp(-w)."""
    out = np.empty_like(rho)
    zero = rho == 0
    out[zero] = sphere_area(dim) * a ** (dim - beta) / (beta - dim)
    lw = np.arange(math.log(1e-12), math.log(60.0) + 0.5, 0.5)
    w, wt = gauss_panels(np.concatenate([[0.0], np.exp(lw)]), 16)
    for i in np.nonzero(~zero)[0]:
        k = rho[i]
        z = a + 1j * w / k
        if dim == 2:
            g = hankel1(0, k * z) * z ** (1.0 - beta)
            out[i] = 2.0 * math.pi * np.real(1j * np.sum(wt * g) / k)
        else:
            # r^2 sinc(k r) = r sin(k r) / k, so dim 3 carries r^(1 - beta)
            g = np.exp(1j * k * a) * np.exp(-w) * z ** ((0.0 if dim == 1 else 1.0) - beta)
            val = 1j * np.sum(wt * g) / k
            out[i] = 2.0 * np.real(val) if dim == 1 else 4.0 * math.pi * np.imag(val) / k
    return out


# ---------------------------------------------------------------- constructors

def gaussian(dim, scale=1.0, mass=1.0):
    return Datum("gaussian", dim, {"scale": float(scale), "mass": float(mass)})


def ball_indicator(dim, radius=1.0, height=None, mass=None):
    if height is None:
        height = 1.0 if mass is None else mass / _ball_volume(dim, radius)
    return Datum("ball_indicator", dim, {"radius": float(radius), "height": float(height)})


def smooth_bump(dim, radius=1.0, height=1.0):
    return Datum("smooth_bump", dim, {"radius": float(radius), "height": float(height)})


def power_tail(dim, A=1.0, beta=None, core=1.0):
    beta = dim + 2.0 if beta is None else beta
    return Datum("power_tail", dim, {"A": float(A), "beta": float(beta), "core": float(core)})


_CONSTRUCTORS = {"gaussian": gaussian, "ball_indicator": ball_indicator,
                 "smooth_bump": smooth_bump, "power_tail": power_tail}


def parse_datum(text, dim):
    """Datum from 'name' or 'name(key=value, ...)'."""
    text = text.strip()
    name, _, rest = text.partition("(")
    name = name.strip()
    if name not in _CONSTRUCTORS:
        raise DomainError("unknown datum %r; expected one of %s" % (name, ", ".join(_CONSTRUCTORS)))
    kwargs = {}
    rest = rest.rstrip(")").strip()
    if rest:
        for item in rest.split(","):
            k, _, v = item.partition("=")
            if not _:
                raise DomainError("datum argument %r is not key=value" % item.strip())
            kwargs[k.strip()] = float(v)
    try:
        return _CONSTRUCTORS[name](dim, **kwargs)
    except TypeError as exc:
        raise DomainError("bad arguments for %s: %s" % (name, exc)) from None
