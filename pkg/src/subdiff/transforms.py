"""Radial Fourier transforms in dimensions 1, 2 and 3.

For a radial f the transform is again radial:

    N=1:  2 int_0^inf cos(rho r) f(r) dr
    N=2:  2 pi int_0^inf r J0(rho r) f(r) dr
    N=3:  4 pi int_0^inf r^2 sinc(rho r) f(r) dr

and the inverse is (2 pi)^(-N) times the same operator.  Panels are split
at the zeros of the kernel so that every panel holds at most half an
oscillation; the panel sums use numpy's pairwise summation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import jn_zeros

from .kernels import hankel_sum
from .special import QuadratureError, gauss_panels

__all__ = [
    "RadialGrid", "radial_fourier", "radial_inverse", "radial_kernel",
    "sphere_area", "cut_radius", "fixed_transform", "QuadratureError",
]


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere S^(N-1)."""
    return {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}[dim]


def radial_kernel(dim, z):
    """Kernel K_N with f^(rho) = int K_N(rho r) f(r) r^(N-1) dr."""
    z = np.asarray(z, dtype=float)
    if dim == 1:
        return 2.0 * np.cos(z)
    if dim == 2:
        from scipy.special import j0
        return 2.0 * np.pi * j0(z)
    if dim == 3:
        return 4.0 * np.pi * np.sinc(z / np.pi)
    raise ValueError("dim must be 1, 2 or 3")


@dataclass(frozen=True)
class RadialGrid:
    """Composite Gauss-Legendre rule on [edges[0], edges[-1]]."""

    edges: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "linear"

    def __post_init__(self):
        if np.any(np.diff(self.nodes) <= 0) or np.any(self.nodes <= 0):
            raise ValueError("grid nodes must be positive and strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("grid weights must be positive")

    @classmethod
    def from_edges(cls, edges, n=16, kind="linear"):
        e = np.unique(np.asarray(edges, dtype=float))
        x, w = gauss_panels(e, n)
        return cls(e, x, w, kind)

    @classmethod
    def log_linear(cls, r_cut, r_min=1e-6, r_split=1.0, log_step=0.25, lin_step=0.25, n=16):
        """Log-spaced panels on [r_min, r_split] glued to linear panels up to r_cut.

        A single panel covers [0, r_min].
        """
        if r_cut <= r_split:
            e = np.exp(np.arange(math.log(r_min), math.log(r_cut), log_step))
            return cls.from_edges(np.concatenate([[0.0], e, [r_cut]]), n, "log-linear")
        lg = np.exp(np.arange(math.log(r_min), math.log(r_split), log_step))
        m = max(1, int(math.ceil((r_cut - r_split) / lin_step)))
        lin = np.linspace(r_split, r_cut, m + 1)
        return cls.from_edges(np.concatenate([[0.0], lg, lin]), n, "log-linear")

    @property
    def r_cut(self):
        return float(self.edges[-1])

    def integrate(self, values, dim=1):
        """int f(r) |S^(N-1)| r^(N-1) dr from samples at the nodes."""
        return sphere_area(dim) * np.sum(self.weights * self.nodes ** (dim - 1) * values)


def cut_radius(tail_bound, target, r0=1.0, r_hi=1e6):
    """Smallest power-of-two multiple of r0 with tail_bound(r) <= target."""
    r = r0
    while tail_bound(r) > target:
        r *= 2.0
        if r > r_hi:
            raise QuadratureError("no certified cut radius below %g" % r_hi)
    return r


@lru_cache(maxsize=8)
def _j0_zeros(n):
    return jn_zeros(0, n)


def _kernel_zeros(dim, rho, a, b):
    """Zeros of r -> K_N(rho r) inside (a, b)."""
    if rho <= 0 or b <= a:
        return np.empty(0)
    if dim == 1:
        k0 = math.ceil(a * rho / math.pi - 0.5)
        k1 = math.floor(b * rho / math.pi - 0.5)
        z = (np.arange(k0, k1 + 1) + 0.5) * math.pi / rho
    elif dim == 3:
        k0 = max(1, math.ceil(a * rho / math.pi))
        k1 = math.floor(b * rho / math.pi)
        z = np.arange(k0, k1 + 1) * math.pi / rho
    else:
        nz = int(b * rho / math.pi) + 2
        if nz <= 20000:
            z = _j0_zeros(max(nz, 16))[:nz] / rho
        else:
            k = np.arange(1, nz + 1)
            beta = (k - 0.25) * math.pi
            z = (beta + 1.0 / (8 * beta) - 124.0 / (3 * (8 * beta) ** 3)) / rho
    return z[(z > a) & (z < b)]


def _panel_sum(dim, f, rho, edges, n):
    x, w = gauss_panels(edges, n)
    vals = w * radial_kernel(dim, rho * x) * x ** (dim - 1) * f(x)
    return np.sum(vals), np.sum(np.abs(vals))


def radial_fourier(dim, f, rho, grid: RadialGrid, rtol=1e-9, max_levels=6):
    """Radial Fourier transform of f at frequency rho (scalar or array).

    f is a vectorised callable of r.  Integration runs over the grid's
    support; the grid's panels are split at kernel zeros and bisected until
    two embedded Gauss-Legendre rules agree to rtol relative to
    int |f K| r^(N-1) dr.
    """
    if dim not in (1, 2, 3):
        raise ValueError("dim must be 1, 2 or 3")
    rhos = np.atleast_1d(np.asarray(rho, dtype=float))
    if np.any(rhos < 0):
        raise ValueError("rho must be nonnegative")
    out = np.empty(rhos.size)
    base = grid.edges
    for i, r in enumerate(rhos):
        edges = np.union1d(base, _kernel_zeros(dim, r, base[0], base[-1]))
        for _ in range(max_levels + 1):
            hi, scale = _panel_sum(dim, f, r, edges, 24)
            lo, _ = _panel_sum(dim, f, r, edges, 16)
            if abs(hi - lo) <= rtol * scale or scale == 0.0:
                break
            edges = np.union1d(edges, 0.5 * (edges[1:] + edges[:-1]))
        else:
            raise QuadratureError("radial transform did not reach rtol=%g at rho=%g" % (rtol, r))
        out[i] = hi
    return out if np.ndim(rho) else float(out[0])


def radial_inverse(dim, fhat, r, grid: RadialGrid, rtol=1e-9):
    """Inverse radial Fourier transform, (2 pi)^(-N) times the forward operator."""
    return radial_fourier(dim, fhat, r, grid, rtol) / (2.0 * math.pi) ** dim


def fixed_transform(dim, values, grid: RadialGrid, k):
    """Transform of samples at the grid nodes, on a fixed rule, at many k.

    Accurate only when the grid resolves the kernel oscillation for every k;
    this is the compiled hot path used by the solver.
    """
    wf = grid.weights * grid.nodes ** (dim - 1) * values
    return hankel_sum(dim, np.ascontiguousarray(np.atleast_1d(k), dtype=float),
                      np.ascontiguousarray(grid.nodes), np.ascontiguousarray(wf))
