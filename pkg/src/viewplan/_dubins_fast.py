"""JIT-compiled kernel for bulk 3D Dubins length evaluation.

Edge-cost matrices need millions of point-to-point lengths; this module
re-states the per-pair radius search of :mod:`viewplan.dubins` as scalar
code so numba can compile it.  The formulas and search schedule match the
pure-python implementation (a consistency test in the suite compares the
two); only the evaluation order differs at the float-rounding level.
"""

from __future__ import annotations

import numpy as np
from numba import njit

TWO_PI = 2.0 * np.pi
_RHO_LOW = 1.0 + 1e-4
_RHO_HIGH = 100.0
_MAX_EXTRA = 24


@njit(cache=True)
def _mod2pi(x):
    return x % TWO_PI


@njit(cache=True)
def _dubins2d_len(alpha, beta, d):
    """Minimum normalized length (t+p+q) over the six planar words."""
    sa = np.sin(alpha)
    ca = np.cos(alpha)
    sb = np.sin(beta)
    cb = np.cos(beta)
    cab = np.cos(alpha - beta)
    best = np.inf

    psq = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb)   # LSL
    if psq >= 0.0:
        tmp = np.arctan2(cb - ca, d + sa - sb)
        L = _mod2pi(-alpha + tmp) + np.sqrt(psq) + _mod2pi(beta - tmp)
        if L < best:
            best = L
    psq = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa)   # RSR
    if psq >= 0.0:
        tmp = np.arctan2(ca - cb, d - sa + sb)
        L = _mod2pi(alpha - tmp) + np.sqrt(psq) + _mod2pi(-beta + tmp)
        if L < best:
            best = L
    psq = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb)  # LSR
    if psq >= 0.0:
        p = np.sqrt(psq)
        tmp = np.arctan2(-ca - cb, d + sa + sb) - np.arctan2(-2.0, p)
        L = _mod2pi(-alpha + tmp) + p + _mod2pi(-beta + tmp)
        if L < best:
            best = L
    psq = -2.0 + d * d + 2.0 * cab - 2.0 * d * (sa + sb)  # RSL
    if psq >= 0.0:
        p = np.sqrt(psq)
        tmp = np.arctan2(ca + cb, d - sa - sb) - np.arctan2(2.0, p)
        L = _mod2pi(alpha - tmp) + p + _mod2pi(beta - tmp)
        if L < best:
            best = L
    tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0   # RLR
    if -1.0 <= tmp <= 1.0:
        p = _mod2pi(TWO_PI - np.arccos(tmp))
        t = _mod2pi(alpha - np.arctan2(ca - cb, d - sa + sb) + p / 2.0)
        L = t + p + _mod2pi(alpha - beta - t + p)
        if L < best:
            best = L
    tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0   # LRL
    if -1.0 <= tmp <= 1.0:
        p = _mod2pi(TWO_PI - np.arccos(tmp))
        t = _mod2pi(-alpha + np.arctan2(cb - ca, d + sa - sb) + p / 2.0)
        L = t + p + _mod2pi(beta - alpha - t + p)
        if L < best:
            best = L
    return best


@njit(cache=True)
def _vertical_len(s_goal, z0, g0, z1, g1, rho_v, gmin, gmax):
    """Shortest pitch-feasible CSC profile length in (s, z), or +inf."""
    dx = s_goal
    dz = z1 - z0
    th = np.arctan2(dz, dx)
    d = np.hypot(dx, dz) / rho_v
    alpha = _mod2pi(g0 - th)
    beta = _mod2pi(g1 - th)
    sa = np.sin(alpha)
    ca = np.cos(alpha)
    sb = np.sin(beta)
    cb = np.cos(beta)
    cab = np.cos(alpha - beta)
    best = np.inf
    for wi in range(4):
        t = np.nan
        p = np.nan
        q = np.nan
        if wi == 0:    # LSL
            psq = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb)
            if psq >= 0.0:
                tmp = np.arctan2(cb - ca, d + sa - sb)
                t = _mod2pi(-alpha + tmp)
                p = np.sqrt(psq)
                q = _mod2pi(beta - tmp)
            s1 = 1.0
            s3 = 1.0
        elif wi == 1:  # RSR
            psq = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa)
            if psq >= 0.0:
                tmp = np.arctan2(ca - cb, d - sa + sb)
                t = _mod2pi(alpha - tmp)
                p = np.sqrt(psq)
                q = _mod2pi(-beta + tmp)
            s1 = -1.0
            s3 = -1.0
        elif wi == 2:  # LSR
            psq = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb)
            if psq >= 0.0:
                p = np.sqrt(psq)
                tmp = np.arctan2(-ca - cb, d + sa + sb) - np.arctan2(-2.0, p)
                t = _mod2pi(-alpha + tmp)
                q = _mod2pi(-beta + tmp)
            s1 = 1.0
            s3 = -1.0
        else:          # RSL
            psq = -2.0 + d * d + 2.0 * cab - 2.0 * d * (sa + sb)
            if psq >= 0.0:
                p = np.sqrt(psq)
                tmp = np.arctan2(ca + cb, d - sa - sb) - np.arctan2(2.0, p)
                t = _mod2pi(alpha - tmp)
                q = _mod2pi(beta - tmp)
            s1 = -1.0
            s3 = 1.0
        if np.isnan(t):
            continue
        a1 = g0 + s1 * t
        a3 = a1 + s3 * q
        if abs(a3 - g1) > 1e-6:
            continue
        lo = min(g0, min(a1, a3))
        hi = max(g0, max(a1, a3))
        if lo < gmin - 1e-9 or hi > gmax + 1e-9:
            continue
        L = (t + p + q) * rho_v
        if L < best:
            best = L
    return best


@njit(cache=True)
def _total_len(dxy, alpha_h, beta_h, z0, g0, z1, g1, rho_h, extra, rho_min, gmin, gmax):
    lh = _dubins2d_len(alpha_h, beta_h, dxy / rho_h) * rho_h + extra * TWO_PI * rho_h
    rho_v = 1.0 / np.sqrt(1.0 / (rho_min * rho_min) - 1.0 / (rho_h * rho_h))
    return _vertical_len(lh, z0, g0, z1, g1, rho_v, gmin, gmax)


@njit(cache=True)
def _plan3d_len(x0, y0, z0, psi0, g0, x1, y1, z1, psi1, g1,
                rho_min, gmin, gmax, n_coarse, golden_iters):
    if x0 == x1 and y0 == y1 and z0 == z1 and psi0 == psi1 and g0 == g1:
        return 0.0
    dx = x1 - x0
    dy = y1 - y0
    th = np.arctan2(dy, dx)
    dxy = np.hypot(dx, dy)
    alpha_h = _mod2pi(psi0 - th)
    beta_h = _mod2pi(psi1 - th)

    r_lo = _RHO_LOW * rho_min
    r_hi = _RHO_HIGH * rho_min
    ratio = (r_hi / r_lo) ** (1.0 / (n_coarse - 1))
    phi = (np.sqrt(5.0) - 1.0) / 2.0

    for extra in range(_MAX_EXTRA + 1):
        best_len = _total_len(dxy, alpha_h, beta_h, z0, g0, z1, g1,
                              2.0 * rho_min, extra, rho_min, gmin, gmax)
        best_rho = 2.0 * rho_min
        edge_lo = np.nan   # largest infeasible radius below the best one
        r = r_lo
        k_best = -1
        for i in range(n_coarse):
            L = _total_len(dxy, alpha_h, beta_h, z0, g0, z1, g1,
                           r, extra, rho_min, gmin, gmax)
            if L < best_len:
                best_len = L
                best_rho = r
                k_best = i
            r *= ratio
        if not np.isfinite(best_len):
            continue
        # golden-section refinement between the grid neighbors of the best
        a = r_lo * ratio ** (k_best - 1) if k_best > 0 else r_lo / ratio
        b = r_lo * ratio ** (k_best + 1) if k_best >= 0 else r_lo * ratio
        if a < best_rho < b or a <= best_rho <= b:
            c = b - phi * (b - a)
            dd = a + phi * (b - a)
            fc = _total_len(dxy, alpha_h, beta_h, z0, g0, z1, g1, c, extra, rho_min, gmin, gmax)
            fd = _total_len(dxy, alpha_h, beta_h, z0, g0, z1, g1, dd, extra, rho_min, gmin, gmax)
            for _ in range(golden_iters):
                if fc < fd:
                    b = dd
                    dd = c
                    fd = fc
                    c = b - phi * (b - a)
                    fc = _total_len(dxy, alpha_h, beta_h, z0, g0, z1, g1, c, extra, rho_min, gmin, gmax)
                else:
                    a = c
                    c = dd
                    fc = fd
                    dd = a + phi * (b - a)
                    fd = _total_len(dxy, alpha_h, beta_h, z0, g0, z1, g1, dd, extra, rho_min, gmin, gmax)
                if b - a <= 1e-4 * a:
                    break
            if fc < best_len:
                best_len = fc
                best_rho = c
            if fd < best_len:
                best_len = fd
                best_rho = dd
        # the optimum often sits on the pitch-feasibility edge: bisect
        # between the best radius and the nearest infeasible radius below
        r = r_lo
        for i in range(n_coarse):
            if r >= best_rho:
                break
            L = _total_len(dxy, alpha_h, beta_h, z0, g0, z1, g1, r, extra, rho_min, gmin, gmax)
            if not np.isfinite(L):
                edge_lo = r
            r *= ratio
        if np.isfinite(edge_lo):
            lo = edge_lo
            hi = best_rho
            for _ in range(30):
                mid = np.sqrt(lo * hi)
                L = _total_len(dxy, alpha_h, beta_h, z0, g0, z1, g1, mid, extra, rho_min, gmin, gmax)
                if np.isfinite(L):
                    hi = mid
                    if L < best_len:
                        best_len = L
                        best_rho = mid
                else:
                    lo = mid
        return best_len
    return np.nan


@njit(cache=True)
def batch_lengths(starts, ends, rho_min, gmin, gmax, n_coarse, golden_iters):
    n = starts.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = _plan3d_len(
            starts[i, 0], starts[i, 1], starts[i, 2], starts[i, 3], starts[i, 4],
            ends[i, 0], ends[i, 1], ends[i, 2], ends[i, 3], ends[i, 4],
            rho_min, gmin, gmax, n_coarse, golden_iters)
    return out
