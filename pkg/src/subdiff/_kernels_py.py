"""Pure numpy versions of the compiled kernels in _kernels.pyx."""
import numpy as np
from scipy.special import j0


def _radial_kernel(dim, z):
    if dim == 1:
        return 2.0 * np.cos(z)
    if dim == 2:
        return 2.0 * np.pi * j0(z)
    return 4.0 * np.pi * np.sinc(z / np.pi)


def hankel_sum(dim, k, x, wf):
    k = np.asarray(k, dtype=float)
    out = np.empty(k.size)
    step = max(1, 2_000_000 // max(1, len(x)))
    for i in range(0, k.size, step):
        out[i:i + step] = _radial_kernel(dim, np.outer(k[i:i + step], x)) @ wf
    return out


def _smooth_step(s):
    s = np.clip(s, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return a / (a + b)


def datum_values(kind, params, r):
    r = np.asarray(r, dtype=float)
    p = params
    if kind == 0:
        s = p[1]
        return p[0] * (4.0 * np.pi * s * s) ** (-0.5 * p[2]) * np.exp(-r * r / (4.0 * s * s))
    if kind == 1:
        x = np.minimum(r / p[1], 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            v = p[0] * np.exp(1.0 - 1.0 / np.where(x < 1, 1.0 - x * x, 1.0))
        return np.where(r < p[1], v, 0.0)
    if kind == 2:
        flat = p[0] * p[2] ** (-p[1])
        rr = np.maximum(r, p[2])
        q = p[0] * rr ** (-p[1])
        w = 1.0 - _smooth_step((rr - p[2]) / p[2])
        return np.where(r <= p[2], flat, q + w * (flat - q))
    return np.where(r < p[1], p[0], 0.0)


def circle_mean(kind, params, breaks, r, rho, gx, gw):
    r = np.asarray(r, dtype=float)
    rho = np.asarray(rho, dtype=float)
    out = np.empty((r.size, rho.size))
    for i, ri in enumerate(r):
        if ri == 0.0:
            out[i] = datum_values(kind, params, rho)
            continue
        pj = rho
        cuts = [np.zeros_like(pj), np.full_like(pj, np.pi)]
        for b in breaks:
            with np.errstate(divide="ignore", invalid="ignore"):
                c = (ri * ri + pj * pj - b * b) / (2.0 * ri * pj)
            inside = (c > -1.0) & (c < 1.0)
            cuts.append(np.where(inside, np.arccos(np.clip(c, -1.0, 1.0)), np.pi))
        cuts = np.sort(np.stack(cuts, axis=1), axis=1)
        acc = np.zeros_like(pj)
        for m in range(cuts.shape[1] - 1):
            lo, hi = cuts[:, m], cuts[:, m + 1]
            half = 0.5 * (hi - lo)
            mid = 0.5 * (hi + lo)
            th = mid[:, None] + half[:, None] * gx[None, :]
            d2 = np.maximum(ri * ri + pj[:, None] ** 2 - 2.0 * ri * pj[:, None] * np.cos(th), 0.0)
            acc += half * (datum_values(kind, params, np.sqrt(d2)) @ gw)
        acc = np.where(pj == 0.0, datum_values(kind, params, np.full_like(pj, ri)) * np.pi, acc)
        out[i] = acc / np.pi
    return out
