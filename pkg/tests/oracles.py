"""Independent oracles used by the test suite.

These deliberately avoid the implementation's closed forms: the planar
path oracle shoots candidate paths by forward composition and root-finds
the closure conditions; the cluster-tour oracle enumerates every order and
vertex choice; the prism oracle densely samples sight segments against a
point-in-prism test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

TWO_PI = 2.0 * math.pi


def _turn(x, y, psi, sweep, d):
    """Forward-integrate a unit-radius arc of signed direction d."""
    npsi = psi + d * sweep
    return (x + d * (np.sin(npsi) - np.sin(psi)),
            y - d * (np.cos(npsi) - np.cos(psi)),
            npsi)


def _csc_lengths(a, b, dist, d1, d3, n_grid=2048):
    """Root-scan over the first turn sweep; straight length follows."""
    t = np.linspace(0.0, TWO_PI, n_grid, endpoint=False)
    x1, y1, psi1 = _turn(0.0, 0.0, a, t, d1)
    q = (d3 * (b - psi1)) % TWO_PI
    ps = b - d3 * q
    xs = dist - d3 * (np.sin(b) - np.sin(ps))
    ys = d3 * (np.cos(b) - np.cos(ps))
    cross = np.cos(psi1) * (ys - y1) - np.sin(psi1) * (xs - x1)

    def residual(tm):
        x1m, y1m, psim = _turn(0.0, 0.0, a, tm, d1)
        qm = (d3 * (b - psim)) % TWO_PI
        psm = b - d3 * qm
        xsm = dist - d3 * (math.sin(b) - math.sin(psm))
        ysm = d3 * (math.cos(b) - math.cos(psm))
        cr = math.cos(psim) * (ysm - y1m) - math.sin(psim) * (xsm - x1m)
        dot = math.cos(psim) * (xsm - x1m) + math.sin(psim) * (ysm - y1m)
        return cr, dot, qm

    out = []
    sign = np.sign(cross)
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        lo, hi = t[i], t[i + 1]
        lo_neg = cross[i] < 0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            cr, _, _ = residual(mid)
            if (cr < 0) == lo_neg:
                lo = mid
            else:
                hi = mid
        mid = 0.5 * (lo + hi)
        _, dot, qm = residual(mid)
        if dot >= -1e-9:
            out.append(mid + max(dot, 0.0) + qm)
    # endpoints of the scan can be exact roots (straight-line cases)
    for tm in (0.0,):
        cr, dot, qm = residual(tm)
        if abs(cr) < 1e-12 and dot >= -1e-12:
            out.append(tm + max(dot, 0.0) + qm)
    return out


def _ccc_lengths(a, b, dist, d1, n_grid=240):
    """Grid plus Newton on the two free sweeps of a turn-turn-turn path."""
    d2, d3 = -d1, d1
    tg = np.linspace(0.0, TWO_PI, n_grid, endpoint=False)
    pg = np.linspace(1e-6, TWO_PI, n_grid, endpoint=False)
    T, P = np.meshgrid(tg, pg, indexing="ij")
    x1, y1, psi1 = _turn(0.0, 0.0, a, T, d1)
    x2, y2, psi2 = _turn(x1, y1, psi1, P, d2)
    Q = (d3 * (b - psi2)) % TWO_PI
    x3, y3, _ = _turn(x2, y2, psi2, Q, d3)
    R2 = (x3 - dist) ** 2 + y3 ** 2

    def res(v):
        x1, y1, psi1 = _turn(0.0, 0.0, a, v[0], d1)
        x2, y2, psi2 = _turn(x1, y1, psi1, v[1], d2)
        q = (d3 * (b - psi2)) % TWO_PI
        x3, y3, _ = _turn(x2, y2, psi2, q, d3)
        return np.array([x3 - dist, y3]), q

    out = []
    for f in np.argsort(R2, axis=None)[:30]:
        i, j = np.unravel_index(f, R2.shape)
        v = np.array([tg[i], pg[j]])
        ok = False
        for _ in range(60):
            r, q = res(v)
            if r @ r < 1e-24:
                ok = True
                break
            J = np.zeros((2, 2))
            for k in range(2):
                vp = v.copy()
                vp[k] += 1e-7
                rp, _ = res(vp)
                J[:, k] = (rp - r) / 1e-7
            try:
                step = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError:
                break
            v = v + np.clip(step, -0.3, 0.3)
            v[0] %= TWO_PI
            v[1] = max(v[1], 1e-9)
        if ok:
            _, q = res(v)
            L = v[0] + v[1] + q
            if all(abs(L - s) > 1e-9 for s in out):
                out.append(L)
    return out


def dubins_length_oracle(q0, q1, rho: float) -> float:
    """Shortest planar bounded-curvature length by dense search."""
    dx, dy = q1[0] - q0[0], q1[1] - q0[1]
    th = math.atan2(dy, dx) if (dx or dy) else 0.0
    d = math.hypot(dx, dy) / rho
    a = (q0[2] - th) % TWO_PI
    b = (q1[2] - th) % TWO_PI
    best = math.inf
    for d1 in (1.0, -1.0):
        for d3 in (1.0, -1.0):
            for L in _csc_lengths(a, b, d, d1, d3):
                best = min(best, L)
    if d < 6.0:
        for d1 in (1.0, -1.0):
            for L in _ccc_lengths(a, b, d, d1):
                best = min(best, L)
    return best * rho


def brute_force_gtsp(cost: np.ndarray, cluster_of: np.ndarray) -> float:
    """Exact one-vertex-per-cluster cycle cost by full enumeration."""
    clusters = [np.nonzero(cluster_of == c)[0] for c in range(cluster_of.max() + 1)]
    m = len(clusters)
    best = math.inf
    for perm in itertools.permutations(range(1, m)):
        order = (0,) + perm
        for choice in itertools.product(*[clusters[c] for c in order]):
            total = 0.0
            for k in range(m):
                total += cost[choice[k], choice[(k + 1) % m]]
            best = min(best, total)
    return best


def segment_blocked_oracle(g, p, footprint: np.ndarray, height: float,
                           n: int = 20001, eps: float = 1e-6) -> bool:
    """Dense-sampling prism test: open segment, strictly interior points."""
    g = np.asarray(g, dtype=float)
    p = np.asarray(p, dtype=float)
    taus = np.linspace(eps, 1.0 - eps, n)
    pts = g[None, :] + taus[:, None] * (p - g)[None, :]
    zin = (pts[:, 2] > 1e-9) & (pts[:, 2] < height - 1e-9)
    if not zin.any():
        return False
    sub = pts[zin, :2]
    inside = _points_in_poly(sub, footprint)
    if not inside.any():
        return False
    # require strict interiority: off-boundary by a tolerance
    d = _dist_to_edges(sub[inside], footprint)
    return bool((d > 1e-7).any())


def _points_in_poly(pts, poly):
    x, y = pts[:, 0], pts[:, 1]
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    inside = np.zeros(len(pts), dtype=bool)
    for i in range(len(poly)):
        crosses = (y0[i] > y) != (y1[i] > y)
        if crosses.any():
            xi = x0[i] + (y - y0[i]) / (y1[i] - y0[i]) * (x1[i] - x0[i])
            inside ^= crosses & (x < xi)
    return inside


def _dist_to_edges(pts, poly):
    best = np.full(len(pts), np.inf)
    for i in range(len(poly)):
        a = poly[i]
        b = poly[(i + 1) % len(poly)]
        ab = b - a
        denom = float(ab @ ab)
        t = np.clip((pts - a) @ ab / denom, 0.0, 1.0) if denom > 0 else 0.0
        best = np.minimum(best, np.linalg.norm(pts - (a + np.outer(t, ab)), axis=1))
    return best


def triangle_plane_sections(vertices: np.ndarray, faces: np.ndarray,
                            z: float) -> list[tuple[np.ndarray, np.ndarray]]:
    """Brute-force plane crossing segment of every face (or None)."""
    segs = []
    for f in faces:
        tri = vertices[f]
        pts = []
        for i in range(3):
            a, b = tri[i], tri[(i + 1) % 3]
            if (a[2] - z) * (b[2] - z) < 0:
                t = (z - a[2]) / (b[2] - a[2])
                pts.append(a + t * (b - a))
        if len(pts) == 2:
            segs.append((pts[0], pts[1]))
    return segs
