"""Shortest bounded-curvature paths in 2D and 3D.

Planar paths are classic six-word Dubins curves (LSL, RSR, LSR, RSL, RLR,
LRL).  Headings are measured from east (+x), counter-clockwise, so a heading
of 0 moves along +x and pi/2 along +y.

Three-dimensional paths join two airplane configurations (x, y, z, psi,
gamma) by decoupling into a horizontal Dubins path of radius ``rho_h`` in the
xy plane and a vertical Dubins path of radius ``rho_v`` in arc-length/altitude
coordinates, with the radii coupled through

    rho_min**-2 == rho_h**-2 + rho_v**-2.

The vertical profile's turn angle is the flight pitch, so restricting its
words to CSC and checking the swept angle range enforces the pitch bounds
along the entire path.  The total 3D length equals the vertical profile's
arc length.  ``rho_h`` is optimized by a coarse scan plus golden-section
refinement, starting from twice the minimum radius; connections too steep
for any admissible ``rho_h`` gain horizontal runway by extending the first
turn with whole extra revolutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Search space for the horizontal radius, as multiples of rho_min.  The lower
# edge sits just above rho_min (where the vertical profile degenerates to a
# straight line); the initial iterate is 2*rho_min.
RHO_H_LOW = 1.0 + 1e-4
RHO_H_HIGH = 100.0
MAX_EXTRA_TURNS = 24

_WORDS = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")
_CSC_WORDS = ("LSL", "RSR", "LSR", "RSL")


class DubinsConvergenceError(RuntimeError):
    """No feasible 3D connection found within the radius/turn search budget."""


@dataclass(frozen=True)
class VehicleParams:
    """Airplane limits: minimum turn radius, pitch bounds, and cruise speed.

    Speed only converts lengths to durations in reports; planning is purely
    geometric.
    """

    rho_min: float
    gamma_min: float
    gamma_max: float
    speed: float = 20.0

    def __post_init__(self):
        if self.rho_min <= 0:
            raise ValueError("rho_min must be positive")
        if not (self.gamma_min < 0.0 < self.gamma_max):
            raise ValueError("need gamma_min < 0 < gamma_max")
        if self.speed <= 0:
            raise ValueError("speed must be positive")


@dataclass(frozen=True)
class Configuration:
    """Vehicle state (x, y, z, psi, gamma); psi stored wrapped to [0, 2*pi)."""

    x: float
    y: float
    z: float
    psi: float
    gamma: float = 0.0

    def __post_init__(self):
        vals = (self.x, self.y, self.z, self.psi, self.gamma)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("configuration components must be finite")
        object.__setattr__(self, "psi", self.psi % TWO_PI)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.psi, self.gamma])


@dataclass(frozen=True)
class DubinsPath2:
    """A planar Dubins path: word, start pose, radius, and segment list.

    Segments are (kind, param) pairs where kind is 'L', 'R' or 'S'; the
    parameter is the swept angle in radians for turns and the length in
    meters for straights.
    """

    word: str
    start: tuple[float, float, float]
    rho: float
    segments: tuple[tuple[str, float], ...]

    @property
    def length(self) -> float:
        return sum(p * self.rho if k in "LR" else p for k, p in self.segments)

    def segment_lengths(self) -> list[float]:
        return [p * self.rho if k in "LR" else p for k, p in self.segments]

    def poses_at(self, s) -> np.ndarray:
        """Poses (x, y, psi) at arc lengths ``s`` (scalar or array)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        x = np.full_like(s, self.start[0])
        y = np.full_like(s, self.start[1])
        psi = np.full_like(s, self.start[2])
        x0, y0, psi0 = self.start
        consumed = 0.0
        for kind, param in self.segments:
            seg_len = param * self.rho if kind in "LR" else param
            local = np.clip(s - consumed, 0.0, seg_len)
            active = s > consumed
            if kind == "S":
                nx = x0 + local * math.cos(psi0)
                ny = y0 + local * math.sin(psi0)
                npsi = np.full_like(local, psi0)
            else:
                sign = 1.0 if kind == "L" else -1.0
                npsi = psi0 + sign * local / self.rho
                nx = x0 + sign * self.rho * (np.sin(npsi) - math.sin(psi0))
                ny = y0 - sign * self.rho * (np.cos(npsi) - math.cos(psi0))
            x = np.where(active, nx, x)
            y = np.where(active, ny, y)
            psi = np.where(active, npsi, psi)
            x0, y0, psi0 = _segment_end(kind, param, (x0, y0, psi0), self.rho)
            consumed += seg_len
        return np.stack([x, y, psi], axis=-1)

    def end_pose(self) -> tuple[float, float, float]:
        pose = self.poses_at(self.length)[0]
        return (float(pose[0]), float(pose[1]), float(pose[2]) % TWO_PI)

    def with_extra_turns(self, k: int) -> "DubinsPath2":
        """Extend the first turn by k whole revolutions (same endpoints)."""
        if k == 0:
            return self
        kind, param = self.segments[0]
        if kind == "S":
            raise ValueError("cannot add turns to a straight first segment")
        segs = ((kind, param + k * TWO_PI),) + self.segments[1:]
        return DubinsPath2(self.word, self.start, self.rho, segs)

    def to_dict(self) -> dict:
        return {
            "word": self.word,
            "start": list(self.start),
            "rho": self.rho,
            "segments": [[k, p] for k, p in self.segments],
            "length": self.length,
        }


def _segment_end(kind: str, param: float, pose, rho: float):
    x0, y0, psi0 = pose
    if kind == "S":
        return (x0 + param * math.cos(psi0), y0 + param * math.sin(psi0), psi0)
    sign = 1.0 if kind == "L" else -1.0
    psi1 = psi0 + sign * param
    x1 = x0 + sign * rho * (math.sin(psi1) - math.sin(psi0))
    y1 = y0 - sign * rho * (math.cos(psi1) - math.cos(psi0))
    return (x1, y1, psi1)


@dataclass(frozen=True)
class ModifiedDubinsPath:
    """Planar Dubins path flown at one constant pitch to join two altitudes.

    ``feasible`` is False when the required pitch falls outside the vehicle
    bounds; the length is still reported.
    """

    path2: DubinsPath2
    gamma_c: float
    length: float
    feasible: bool


@dataclass(frozen=True)
class DubinsPath3:
    """Decoupled 3D Dubins path.

    ``horizontal`` lives in the xy plane at radius ``rho_h`` (its first turn
    may include whole extra revolutions for steep connections).  ``vertical``
    lives in (arc-length, altitude) coordinates at radius ``rho_v``; its turn
    angle is the flight pitch and its arc length is the full 3D length.
    """

    horizontal: DubinsPath2
    vertical: DubinsPath2
    rho_h: float
    rho_v: float

    @property
    def length(self) -> float:
        return self.vertical.length

    def to_dict(self) -> dict:
        return {
            "horizontal": self.horizontal.to_dict(),
            "vertical": self.vertical.to_dict(),
            "rho_h": self.rho_h,
            "rho_v": self.rho_v,
            "length": self.length,
        }


def _mod2pi(x):
    return np.mod(x, TWO_PI)


def _word_params(alpha, beta, d):
    """Normalized (t, p, q) for all six words; NaN where a word is infeasible.

    Inputs are broadcastable arrays: start/goal headings relative to the
    chord direction and the chord length in turn-radius units.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    d = np.asarray(d, dtype=float)
    sa, ca = np.sin(alpha), np.cos(alpha)
    sb, cb = np.sin(beta), np.cos(beta)
    cab = np.cos(alpha - beta)
    out = {}

    with np.errstate(invalid="ignore"):
        psq = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb)
        p = np.sqrt(np.maximum(psq, 0.0))
        tmp = np.arctan2(cb - ca, d + sa - sb)
        t = _mod2pi(-alpha + tmp)
        q = _mod2pi(beta - tmp)
        bad = psq < 0
        out["LSL"] = (np.where(bad, np.nan, t), np.where(bad, np.nan, p), np.where(bad, np.nan, q))

        psq = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa)
        p = np.sqrt(np.maximum(psq, 0.0))
        tmp = np.arctan2(ca - cb, d - sa + sb)
        t = _mod2pi(alpha - tmp)
        q = _mod2pi(-beta + tmp)
        bad = psq < 0
        out["RSR"] = (np.where(bad, np.nan, t), np.where(bad, np.nan, p), np.where(bad, np.nan, q))

        psq = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb)
        bad = psq < 0
        p = np.sqrt(np.maximum(psq, 0.0))
        tmp = np.arctan2(-ca - cb, d + sa + sb) - np.arctan2(-2.0, p)
        t = _mod2pi(-alpha + tmp)
        q = _mod2pi(-beta + tmp)
        out["LSR"] = (np.where(bad, np.nan, t), np.where(bad, np.nan, p), np.where(bad, np.nan, q))

        psq = -2.0 + d * d + 2.0 * cab - 2.0 * d * (sa + sb)
        bad = psq < 0
        p = np.sqrt(np.maximum(psq, 0.0))
        tmp = np.arctan2(ca + cb, d - sa - sb) - np.arctan2(2.0, p)
        t = _mod2pi(alpha - tmp)
        q = _mod2pi(beta - tmp)
        out["RSL"] = (np.where(bad, np.nan, t), np.where(bad, np.nan, p), np.where(bad, np.nan, q))

        tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0
        bad = np.abs(tmp) > 1.0
        p = _mod2pi(TWO_PI - np.arccos(np.clip(tmp, -1.0, 1.0)))
        t = _mod2pi(alpha - np.arctan2(ca - cb, d - sa + sb) + p / 2.0)
        q = _mod2pi(alpha - beta - t + p)
        out["RLR"] = (np.where(bad, np.nan, t), np.where(bad, np.nan, p), np.where(bad, np.nan, q))

        tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0
        bad = np.abs(tmp) > 1.0
        p = _mod2pi(TWO_PI - np.arccos(np.clip(tmp, -1.0, 1.0)))
        t = _mod2pi(-alpha + np.arctan2(cb - ca, d + sa - sb) + p / 2.0)
        q = _mod2pi(beta - alpha - t + p)
        out["LRL"] = (np.where(bad, np.nan, t), np.where(bad, np.nan, p), np.where(bad, np.nan, q))
    return out


def _normalize_problem(x0, y0, psi0, x1, y1, psi1, rho):
    dx = np.asarray(x1, dtype=float) - np.asarray(x0, dtype=float)
    dy = np.asarray(y1, dtype=float) - np.asarray(y0, dtype=float)
    theta = np.arctan2(dy, dx)
    d = np.hypot(dx, dy) / rho
    alpha = _mod2pi(np.asarray(psi0, dtype=float) - theta)
    beta = _mod2pi(np.asarray(psi1, dtype=float) - theta)
    return alpha, beta, d


def dubins2d_lengths(x0, y0, psi0, x1, y1, psi1, rho) -> np.ndarray:
    """Vectorized shortest planar Dubins length over all six words."""
    alpha, beta, d = _normalize_problem(x0, y0, psi0, x1, y1, psi1, rho)
    params = _word_params(alpha, beta, d)
    best = None
    for w in _WORDS:
        t, p, q = params[w]
        total = (t + p + q) * rho
        best = total if best is None else np.fmin(best, total)
    return best


def plan_2d(start, end, rho: float) -> DubinsPath2:
    """Shortest planar Dubins path between (x, y, psi) poses at radius rho."""
    if rho <= 0:
        raise ValueError("turn radius must be positive")
    x0, y0, psi0 = float(start[0]), float(start[1]), float(start[2])
    x1, y1, psi1 = float(end[0]), float(end[1]), float(end[2])
    alpha, beta, d = _normalize_problem(x0, y0, psi0, x1, y1, psi1, rho)
    params = _word_params(alpha, beta, d)
    best_word, best_len, best_tpq = None, math.inf, None
    for w in _WORDS:
        t, p, q = (float(v) for v in params[w])
        if math.isnan(t):
            continue
        total = (t + p + q) * rho
        if total < best_len:
            best_word, best_len, best_tpq = w, total, (t, p, q)
    t, p, q = best_tpq
    segments = (
        (best_word[0], t),
        ("S", p * rho) if best_word[1] == "S" else (best_word[1], p),
        (best_word[2], q),
    )
    return DubinsPath2(best_word, (x0, y0, psi0), rho, segments)


def plan_modified_2d(q_i: Configuration, q_j: Configuration,
                     params: VehicleParams) -> ModifiedDubinsPath:
    """Planar Dubins path at rho_min tilted to a single constant pitch.

    The pitch is set by the altitude change over the planar path length; the
    3D length is the planar length divided by cos(pitch).  The connection is
    flagged infeasible when the pitch falls outside the vehicle bounds.
    """
    path = plan_2d((q_i.x, q_i.y, q_i.psi), (q_j.x, q_j.y, q_j.psi), params.rho_min)
    dz = q_j.z - q_i.z
    planar = path.length
    if planar == 0.0:
        gamma_c = 0.0 if dz == 0.0 else math.copysign(math.pi / 2, dz)
        length = abs(dz)
    else:
        gamma_c = math.atan2(dz, planar)
        length = planar / math.cos(gamma_c)
    feasible = params.gamma_min - 1e-12 <= gamma_c <= params.gamma_max + 1e-12
    return ModifiedDubinsPath(path, gamma_c, length, feasible)


def _vertical_lengths(s_goal, z0, g0, z1, g1, rho_v, gamma_min, gamma_max):
    """Shortest pitch-feasible CSC profile lengths in (s, z) coordinates.

    Returns (lengths, word_index, t, p, q); lengths are +inf where no CSC
    word keeps the swept pitch inside [gamma_min, gamma_max].
    """
    alpha, beta, d = _normalize_problem(0.0, z0, g0, s_goal, z1, g1, rho_v)
    params = _word_params(alpha, beta, d)
    g0 = np.asarray(g0, dtype=float)
    g1 = np.asarray(g1, dtype=float)
    best_len = np.full(np.broadcast(alpha, beta, d).shape, np.inf)
    best_idx = np.full(best_len.shape, -1, dtype=np.int64)
    best_t = np.zeros_like(best_len)
    best_p = np.zeros_like(best_len)
    best_q = np.zeros_like(best_len)
    for wi, w in enumerate(_CSC_WORDS):
        t, p, q = params[w]
        s1 = 1.0 if w[0] == "L" else -1.0
        s3 = 1.0 if w[2] == "L" else -1.0
        a1 = g0 + s1 * t
        a3 = a1 + s3 * q
        # the unwrapped end pitch must land on g1 itself, not g1 mod 2*pi
        closes = np.abs(a3 - g1) < 1e-6
        lo = np.minimum(np.minimum(g0, a1), a3)
        hi = np.maximum(np.maximum(g0, a1), a3)
        ok = closes & (lo >= gamma_min - 1e-9) & (hi <= gamma_max + 1e-9)
        total = np.where(ok, (t + p + q) * rho_v, np.inf)
        total = np.where(np.isnan(total), np.inf, total)
        better = total < best_len
        best_len = np.where(better, total, best_len)
        best_idx = np.where(better, wi, best_idx)
        best_t = np.where(better, t, best_t)
        best_p = np.where(better, p, best_p)
        best_q = np.where(better, q, best_q)
    return best_len, best_idx, best_t, best_p, best_q


def _rho_v_from(rho_h, rho_min):
    inv = 1.0 / rho_min**2 - 1.0 / np.asarray(rho_h, dtype=float) ** 2
    return 1.0 / np.sqrt(inv)


def _total_lengths_for_rho(qi, qj, rho_h, extra_turns, params: VehicleParams):
    """3D lengths for one configuration pair over an array of rho_h values."""
    rho_h = np.asarray(rho_h, dtype=float)
    lh = dubins2d_lengths(qi.x, qi.y, qi.psi, qj.x, qj.y, qj.psi, rho_h)
    lh = lh + extra_turns * TWO_PI * rho_h
    rho_v = _rho_v_from(rho_h, params.rho_min)
    lv, *_ = _vertical_lengths(lh, qi.z, qi.gamma, qj.z, qj.gamma, rho_v,
                               params.gamma_min, params.gamma_max)
    return lv


def plan_3d(q_i: Configuration, q_j: Configuration, params: VehicleParams,
            n_coarse: int = 64, golden_iters: int = 64,
            rel_tol: float = 1e-4) -> DubinsPath3:
    """Shortest decoupled 3D Dubins path between two configurations.

    Both endpoint pitches must lie within the vehicle bounds.  Raises
    :class:`DubinsConvergenceError` when no pitch-feasible profile exists
    within the radius search range and extra-turn budget.
    """
    for q in (q_i, q_j):
        if not params.gamma_min - 1e-12 <= q.gamma <= params.gamma_max + 1e-12:
            raise ValueError("endpoint pitch outside vehicle bounds")
    if (q_i.x, q_i.y, q_i.z, q_i.psi, q_i.gamma) == (q_j.x, q_j.y, q_j.z, q_j.psi, q_j.gamma):
        zero2 = DubinsPath2("LSL", (q_i.x, q_i.y, q_i.psi), params.rho_min,
                            (("L", 0.0), ("S", 0.0), ("L", 0.0)))
        zerov = DubinsPath2("LSL", (0.0, q_i.z, q_i.gamma), 2.0 * params.rho_min,
                            (("L", 0.0), ("S", 0.0), ("L", 0.0)))
        return DubinsPath3(zero2, zerov, 2.0 * params.rho_min, 2.0 * params.rho_min / math.sqrt(3.0))

    rho_min = params.rho_min
    grid = np.concatenate((
        [2.0 * rho_min],  # initial iterate
        np.geomspace(RHO_H_LOW * rho_min, RHO_H_HIGH * rho_min, n_coarse),
    ))
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    for extra in range(MAX_EXTRA_TURNS + 1):
        lengths = _total_lengths_for_rho(q_i, q_j, grid, extra, params)
        if not np.isfinite(lengths).any():
            continue
        k = int(np.argmin(lengths))
        # bracket the best grid point among its neighbors (grid[0] is the
        # out-of-order initial iterate, so order the bracket explicitly)
        neighbors = sorted({grid[max(k - 1, 0)], grid[k], grid[min(k + 1, len(grid) - 1)]})
        a, b = neighbors[0], neighbors[-1]
        c = b - phi * (b - a)
        d_ = a + phi * (b - a)
        fc = float(_total_lengths_for_rho(q_i, q_j, c, extra, params))
        fd = float(_total_lengths_for_rho(q_i, q_j, d_, extra, params))
        for _ in range(golden_iters):
            if fc < fd:
                b, d_, fd = d_, c, fc
                c = b - phi * (b - a)
                fc = float(_total_lengths_for_rho(q_i, q_j, c, extra, params))
            else:
                a, c, fc = c, d_, fd
                d_ = a + phi * (b - a)
                fd = float(_total_lengths_for_rho(q_i, q_j, d_, extra, params))
            if (b - a) <= rel_tol * a:
                break
        candidates = [(float(lengths[k]), float(grid[k])), (fc, c), (fd, d_)]
        candidates = [cf for cf in candidates if math.isfinite(cf[0])]
        if not candidates:
            continue
        _, rho_h = min(candidates)
        return _build_path3(q_i, q_j, rho_h, extra, params)
    raise DubinsConvergenceError(
        "no pitch-feasible 3D connection within the radius and extra-turn budget")


def _build_path3(q_i, q_j, rho_h, extra, params) -> DubinsPath3:
    horizontal = plan_2d((q_i.x, q_i.y, q_i.psi), (q_j.x, q_j.y, q_j.psi), rho_h)
    horizontal = horizontal.with_extra_turns(extra)
    s_goal = horizontal.length
    rho_v = float(_rho_v_from(rho_h, params.rho_min))
    lv, wi, t, p, q = _vertical_lengths(
        s_goal, q_i.z, q_i.gamma, q_j.z, q_j.gamma, rho_v,
        params.gamma_min, params.gamma_max)
    if not np.isfinite(float(lv)):
        raise DubinsConvergenceError("vertical profile infeasible at chosen radius")
    word = _CSC_WORDS[int(wi)]
    t, p, q = float(t), float(p), float(q)
    segments = ((word[0], t), ("S", p * rho_v), (word[2], q))
    vertical = DubinsPath2(word, (0.0, q_i.z, q_i.gamma), rho_v, segments)
    return DubinsPath3(horizontal, vertical, float(rho_h), rho_v)


try:
    from . import _dubins_fast
except ImportError:  # pragma: no cover - numba not installed
    _dubins_fast = None


def plan_3d_lengths(starts: np.ndarray, ends: np.ndarray, params: VehicleParams,
                    n_coarse: int = 20, refine_rounds: int = 2,
                    refine_pts: int = 7, chunk: int = 65536) -> np.ndarray:
    """Bulk 3D Dubins lengths for (n, 5) arrays of configurations.

    Runs the same radius search as :func:`plan_3d` on every pair: a coarse
    geometric scan, refinement around the best radius, bisection onto the
    pitch-feasibility edge, and extra revolutions for pairs that remain
    infeasible.  A compiled kernel is used when numba is importable; the
    numpy fallback trades some accuracy (still well under 1%) for speed.
    Use :func:`plan_3d` when the path itself is needed.
    """
    starts = np.asarray(starts, dtype=float).reshape(-1, 5)
    ends = np.asarray(ends, dtype=float).reshape(-1, 5)
    if _dubins_fast is not None:
        out = _dubins_fast.batch_lengths(
            np.ascontiguousarray(starts), np.ascontiguousarray(ends),
            params.rho_min, params.gamma_min, params.gamma_max, 48, 48)
        if np.isnan(out).any():
            raise DubinsConvergenceError(
                f"{int(np.isnan(out).sum())} pairs have no feasible 3D connection")
        return out
    n = len(starts)
    out = np.empty(n, dtype=float)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        out[lo:hi] = _plan_3d_lengths_chunk(
            starts[lo:hi], ends[lo:hi], params, n_coarse, refine_rounds, refine_pts)
    return out


def _plan_3d_lengths_chunk(starts, ends, params, n_coarse, refine_rounds, refine_pts):
    n = len(starts)
    rho_min = params.rho_min
    x0, y0, z0, psi0, g0 = starts.T
    x1, y1, z1, psi1, g1 = ends.T
    best_len = np.full(n, np.inf)
    best_rho = np.full(n, 2.0 * rho_min)
    same = np.all(np.isclose(starts, ends, rtol=0.0, atol=0.0), axis=1)

    def evaluate(rho_h, extra):
        lh = dubins2d_lengths(x0, y0, psi0, x1, y1, psi1, rho_h)
        lh = lh + extra * TWO_PI * rho_h
        rho_v = _rho_v_from(rho_h, rho_min)
        lv, *_ = _vertical_lengths(lh, z0, g0, z1, g1, rho_v,
                                   params.gamma_min, params.gamma_max)
        return lv

    grid = np.geomspace(RHO_H_LOW * rho_min, RHO_H_HIGH * rho_min, n_coarse)
    step = grid[1] / grid[0]
    unresolved = ~same
    for extra in range(MAX_EXTRA_TURNS + 1):
        if not unresolved.any():
            break
        round_len = np.full(n, np.inf)
        round_rho = np.full(n, 2.0 * rho_min)
        feas_grid = np.zeros((len(grid), n), dtype=bool)
        for gi, rho_h in enumerate(grid):
            lv = evaluate(np.full(n, rho_h), extra)
            feas_grid[gi] = np.isfinite(lv)
            better = unresolved & (lv < round_len)
            round_len[better] = lv[better]
            round_rho[better] = rho_h
        ratio = step
        for _ in range(refine_rounds):
            local = round_rho[:, None] * np.geomspace(1.0 / ratio, ratio, refine_pts)[None, :]
            local = np.clip(local, RHO_H_LOW * rho_min, RHO_H_HIGH * rho_min)
            for j in range(refine_pts):
                lv = evaluate(local[:, j], extra)
                better = unresolved & (lv < round_len)
                round_len[better] = lv[better]
                round_rho[better] = local[better, j]
            ratio = ratio ** (2.0 / (refine_pts - 1))
        # the minimum frequently sits on the pitch-feasibility edge in rho_h;
        # bisect between the best radius and the nearest infeasible grid
        # point below it, keeping the shortest feasible length seen
        best_gi = np.searchsorted(grid, round_rho, side="right") - 1
        lo = np.full(n, np.nan)
        for gi in range(len(grid)):
            mask = unresolved & (gi <= best_gi) & ~feas_grid[gi]
            lo[mask] = grid[gi]
        has_edge = unresolved & np.isfinite(lo) & np.isfinite(round_len)
        if has_edge.any():
            lo_e = lo[has_edge]
            hi_e = round_rho[has_edge]
            full_lo = np.full(n, np.nan)
            for _ in range(30):
                mid = np.sqrt(lo_e * hi_e)
                full_lo[has_edge] = mid
                lv = evaluate(full_lo, extra)[has_edge]
                feas = np.isfinite(lv)
                hi_e = np.where(feas, mid, hi_e)
                lo_e = np.where(feas, lo_e, mid)
                sub_better = feas & (lv < round_len[has_edge])
                tmp_len = round_len[has_edge]
                tmp_rho = round_rho[has_edge]
                tmp_len[sub_better] = lv[sub_better]
                tmp_rho[sub_better] = mid[sub_better]
                round_len[has_edge] = tmp_len
                round_rho[has_edge] = tmp_rho
        solved = unresolved & np.isfinite(round_len)
        best_len[solved] = round_len[solved]
        best_rho[solved] = round_rho[solved]
        unresolved &= ~solved
    if unresolved.any():
        raise DubinsConvergenceError(
            f"{int(unresolved.sum())} pairs have no feasible 3D connection")
    best_len[same] = 0.0
    return best_len


def sample_path(path, ds: float) -> list[Configuration]:
    """Configurations along a path at arc-length steps, endpoints included.

    Planar paths yield z = 0 and zero pitch; 3D paths are sampled by true
    arc length, with heading from the horizontal component and pitch from
    the vertical profile.
    """
    if ds <= 0:
        raise ValueError("sample step must be positive")
    if isinstance(path, DubinsPath2):
        total = path.length
        s = _steps(total, ds)
        poses = path.poses_at(s)
        return [Configuration(p[0], p[1], 0.0, p[2] % TWO_PI, 0.0) for p in poses]
    if isinstance(path, DubinsPath3):
        total = path.length
        s = _steps(total, ds)
        vert = path.vertical.poses_at(s)       # (s_h, z, gamma)
        s_h = np.clip(vert[:, 0], 0.0, path.horizontal.length)
        horiz = path.horizontal.poses_at(s_h)  # (x, y, psi)
        return [
            Configuration(h[0], h[1], v[1], h[2] % TWO_PI, _wrap_pi(v[2]))
            for h, v in zip(horiz, vert)
        ]
    raise TypeError(f"cannot sample a {type(path).__name__}")


def _wrap_pi(a: float) -> float:
    return (a + math.pi) % TWO_PI - math.pi


def _steps(total: float, ds: float) -> np.ndarray:
    if total == 0.0:
        return np.array([0.0, 0.0])
    k = np.arange(0.0, total, ds)
    return np.concatenate((k, [total]))
