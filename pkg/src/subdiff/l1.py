"""L1 time stepping for the Caputo problem on a truncated radial domain.

A deliberately simple, independent solver: L1 quadrature of the Caputo
derivative on a (possibly graded) time mesh, centred second differences in
space, implicit in the Laplacian, full history.  Used only to cross-check
the mild solution on short horizons.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import gamma

from .special import DomainError, as_alpha
from .solver import Snapshot
from .transforms import sphere_area

__all__ = ["ResourceError", "L1Grid", "l1_weights", "solve_l1", "truncation_mass", "backward_euler"]

DEFAULT_CAP = 4e10


class ResourceError(RuntimeError):
    """The O(n^2) history cost exceeds the configured cap."""


def l1_weights(order, n):
    """b_j = (j+1)^(1-a) - j^(1-a), j = 0..n-1."""
    a = as_alpha(order)
    if n < 1:
        raise ValueError("n must be at least 1")
    j = np.arange(n + 1, dtype=float)
    p = j ** (1.0 - a)
    return np.diff(p)


@dataclass(frozen=True)
class L1Grid:
    """Space-time mesh.

    boundary 'dirichlet': radial nodes r_i = i h on [0, r_trunc], u = 0 at
    r_trunc and a symmetry condition at r = 0.  boundary 'periodic': nodes
    x_i = i h on [0, r_trunc), one-dimensional.
    """

    dim: int
    order: float
    r_trunc: float
    n_space: int
    t_final: float
    n_steps: int
    grading: float = 1.0
    boundary: str = "dirichlet"

    def __post_init__(self):
        as_alpha(self.order, allow_one=True)
        if self.dim not in (1, 2, 3):
            raise DomainError("dim must be 1, 2 or 3")
        if self.boundary not in ("dirichlet", "periodic"):
            raise ValueError("boundary must be 'dirichlet' or 'periodic'")
        if self.boundary == "periodic" and self.dim != 1:
            raise DomainError("periodic grids are one-dimensional")
        if not (self.r_trunc > 0 and self.t_final > 0 and self.n_space >= 4 and self.n_steps >= 1):
            raise ValueError("invalid L1 grid parameters")
        if self.grading < 1.0:
            raise ValueError("grading exponent must be >= 1")

    @property
    def h(self):
        return self.r_trunc / self.n_space

    @property
    def nodes(self):
        return np.arange(self.n_space) * self.h

    @property
    def times(self):
        s = np.arange(self.n_steps + 1) / self.n_steps
        return self.t_final * s ** self.grading

    def history_cost(self):
        return 0.5 * float(self.n_steps) ** 2 * self.n_space


def _radial_bands(dim, n, h):
    # rows i = 0..n-1 of the discrete radial Laplacian, u_n = 0 (Dirichlet)
    i = np.arange(n, dtype=float)
    lower = np.ones(n) / h ** 2
    upper = np.ones(n) / h ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        drift = np.where(i > 0, (dim - 1) / (2.0 * np.where(i > 0, i, 1.0) * h ** 2), 0.0)
    lower = lower - drift
    upper = upper + drift
    diag = -2.0 * np.ones(n) / h ** 2
    # r = 0: Laplacian -> N u''(0), ghost node u_{-1} = u_1
    diag[0] = -2.0 * dim / h ** 2
    upper[0] = 2.0 * dim / h ** 2
    return lower, diag, upper


def _initial_values(u0, grid: L1Grid):
    x = grid.nodes
    if callable(u0):
        v = np.asarray(u0(x), dtype=float)
    else:
        v = np.asarray(u0, dtype=float)
        if v.shape != x.shape:
            raise ValueError("initial values must match the spatial nodes")
    return v.copy()


def solve_l1(u0, grid: L1Grid, times=None, cap=DEFAULT_CAP, table=None):
    """March the L1 scheme and return Snapshots at the requested mesh times.

    u0 is a Datum (or any callable of the node coordinate) or an array of
    nodal values.  Requested times must be mesh times; the default is the
    final time only.  With a profile table the truncation radius is checked
    against the kernel tail mass at the final time.
    """
    a = as_alpha(grid.order, allow_one=True)
    if grid.history_cost() > cap:
        raise ResourceError("L1 history cost %.3g exceeds cap %.3g" % (grid.history_cost(), cap))
    if table is not None and hasattr(u0, "support_radius"):
        tail = truncation_mass(table, grid.t_final, grid.r_trunc, u0.support_radius)
        if tail > 1e-8:
            raise DomainError("r_trunc too small: kernel tail mass %.2e outside" % tail)
    tm = grid.times
    want = [grid.t_final] if times is None else sorted(float(t) for t in times)
    idx = []
    for t in want:
        k = int(np.argmin(np.abs(tm - t)))
        if abs(tm[k] - t) > 1e-12 * max(1.0, t):
            raise ValueError("time %g is not a mesh time" % t)
        idx.append(k)
    u = _initial_values(u0, grid)
    n, m = grid.n_steps, u.size
    x = grid.nodes
    name = getattr(u0, "name", "array")
    snaps = {0: u.copy()} if 0 in idx else {}
    hist = np.zeros((n, m))
    g2 = gamma(2.0 - a)
    if grid.boundary == "periodic":
        kk = 2.0 * math.pi * np.fft.rfftfreq(m, d=grid.h)
        lam = -(2.0 - 2.0 * np.cos(kk * grid.h)) / grid.h ** 2
    else:
        lower, diag, upper = _radial_bands(grid.dim, m, grid.h)
    for step in range(1, n + 1):
        tn = tm[step]
        tau = np.diff(tm[: step + 1])
        if a == 1.0:
            c = np.zeros(step)
            c[-1] = 1.0 / tau[-1]
        else:
            c = ((tn - tm[:step]) ** (1.0 - a) - (tn - tm[1 : step + 1]) ** (1.0 - a)) / (tau * g2)
        rhs = c[-1] * u
        if step > 1:
            rhs -= c[:-1] @ hist[: step - 1]
        if grid.boundary == "periodic":
            new = np.fft.irfft(np.fft.rfft(rhs) / (c[-1] - lam), m)
        else:
            ab = np.zeros((3, m))
            ab[0, 1:] = -upper[:-1]
            ab[1] = c[-1] - diag
            ab[2, :-1] = -lower[1:]
            new = solve_banded((1, 1), ab, rhs)
        hist[step - 1] = new - u
        u = new
        if step in idx:
            snaps[step] = u.copy()
    return [Snapshot(grid.dim, a, name, float(tm[k]), x, snaps[k], "l1")
            for k in idx]


def backward_euler(u0, grid: L1Grid):
    """Classical implicit heat stepping on the same spatial grid and time mesh."""
    g = L1Grid(grid.dim, 1.0, grid.r_trunc, grid.n_space, grid.t_final, grid.n_steps,
               grid.grading, grid.boundary)
    return solve_l1(u0, g)[-1]


def truncation_mass(table, t, r_trunc, support=0.0):
    """Kernel mass outside radius r_trunc - support at time t (profile tail patch)."""
    from scipy.integrate import quad

    from .profile import eval_profile

    sc = t ** (0.5 * table.alpha)
    xi0 = max(r_trunc - (support if math.isfinite(support) else 0.0), 0.0) / sc
    f = lambda s: eval_profile(table, s) * s ** (table.dim - 1)
    val, _ = quad(f, xi0, np.inf, limit=200, epsabs=0.0, epsrel=1e-8)
    return sphere_area(table.dim) * val
