# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: radial Fourier sums and circle means of radial data."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, exp, sqrt, pow, acos, M_PI, fabs
from scipy.special.cython_special cimport j0

cnp.import_array()


cdef inline double _radial_kernel(int dim, double z) noexcept nogil:
    if dim == 1:
        return 2.0 * cos(z)
    if dim == 2:
        return 2.0 * M_PI * j0(z)
    if fabs(z) < 1e-8:
        return 4.0 * M_PI * (1.0 - z * z / 6.0)
    return 4.0 * M_PI * sin(z) / z


def hankel_sum(int dim, double[::1] k, double[::1] x, double[::1] wf):
    """out[i] = sum_j wf[j] K_dim(k[i] x[j])."""
    cdef Py_ssize_t i, j, nk = k.shape[0], nx = x.shape[0]
    out = np.empty(nk)
    cdef double[::1] o = out
    cdef double s, ki
    with nogil:
        for i in range(nk):
            s = 0.0
            ki = k[i]
            for j in range(nx):
                s += wf[j] * _radial_kernel(dim, ki * x[j])
            o[i] = s
    return out


cdef inline double _smooth_step(double s) noexcept nogil:
    # C-infinity step: 0 for s <= 0, 1 for s >= 1
    cdef double a, b
    if s <= 0.0:
        return 0.0
    if s >= 1.0:
        return 1.0
    a = exp(-1.0 / s)
    b = exp(-1.0 / (1.0 - s))
    return a / (a + b)


cdef inline double _datum(int kind, double[::1] p, double r) noexcept nogil:
    # kind 0 gaussian(mass, scale, dim); 1 smooth bump(height, R);
    # 2 power tail(A, beta, core); 3 ball(height, R)
    cdef double s, q, w
    if kind == 0:
        s = p[1]
        return p[0] * pow(4.0 * M_PI * s * s, -0.5 * p[2]) * exp(-r * r / (4.0 * s * s))
    if kind == 1:
        if r >= p[1]:
            return 0.0
        s = r / p[1]
        return p[0] * exp(1.0 - 1.0 / (1.0 - s * s))
    if kind == 2:
        if r <= p[2]:
            return p[0] * pow(p[2], -p[1])
        q = p[0] * pow(r, -p[1])
        w = 1.0 - _smooth_step((r - p[2]) / p[2])
        return q + w * (p[0] * pow(p[2], -p[1]) - q)
    if r < p[1]:
        return p[0]
    return 0.0


def datum_values(int kind, double[::1] params, double[::1] r):
    cdef Py_ssize_t i, n = r.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = _datum(kind, params, r[i])
    return out


def circle_mean(int kind, double[::1] params, double[::1] breaks,
                double[::1] r, double[::1] rho, double[::1] gx, double[::1] gw):
    """Mean of a radial datum over the circle of radius rho[j] centred at
    distance r[i] from the origin; theta panels split where the distance
    crosses one of the break radii."""
    cdef Py_ssize_t i, j, b, m, q, nr = r.shape[0], nrho = rho.shape[0]
    cdef Py_ssize_t nb = breaks.shape[0], ng = gx.shape[0]
    out = np.empty((nr, nrho))
    cdef double[:, ::1] o = out
    cdef double ri, pj, c, th, acc, lo, hi, half, mid, d2
    cdef double cuts[66]
    cdef Py_ssize_t nc
    with nogil:
        for i in range(nr):
            ri = r[i]
            for j in range(nrho):
                pj = rho[j]
                if ri == 0.0 or pj == 0.0:
                    o[i, j] = _datum(kind, params, ri + pj)
                    continue
                nc = 0
                cuts[nc] = 0.0
                nc += 1
                for b in range(nb if nb < 64 else 64):
                    c = (ri * ri + pj * pj - breaks[b] * breaks[b]) / (2.0 * ri * pj)
                    if c > -1.0 and c < 1.0:
                        cuts[nc] = acos(c)
                        nc += 1
                cuts[nc] = M_PI
                nc += 1
                # insertion sort of the few cut angles
                for m in range(1, nc):
                    th = cuts[m]
                    q = m
                    while q > 0 and cuts[q - 1] > th:
                        cuts[q] = cuts[q - 1]
                        q -= 1
                    cuts[q] = th
                acc = 0.0
                for m in range(nc - 1):
                    lo = cuts[m]
                    hi = cuts[m + 1]
                    if hi <= lo:
                        continue
                    half = 0.5 * (hi - lo)
                    mid = 0.5 * (hi + lo)
                    for q in range(ng):
                        th = mid + half * gx[q]
                        d2 = ri * ri + pj * pj - 2.0 * ri * pj * cos(th)
                        if d2 < 0.0:
                            d2 = 0.0
                        acc += half * gw[q] * _datum(kind, params, sqrt(d2))
                o[i, j] = acc / M_PI
    return out
