"""Visibility volumes for targets in an extruded-polygon scene.

A target can be seen from a point when the point lies in the feasible
airspace, within sensor range, at least a minimum height above the target,
and with an unobstructed straight sight line.  The set of such points is
extracted as a closed triangular mesh by sampling a signed indicator field
on a regular grid and running marching cubes over it: range, height and
airspace terms contribute smooth signed distances, while occlusion
contributes a binary term scaled to one grid cell so the extracted surface
stays within a cell of the true boundary.

Sight lines are tested against open prisms: the footprint is ear-clipped
into triangles, each triangle gives a parametric clip interval, and an
interval only blocks if its midpoint is strictly interior to the prism.
Grazing contact with walls or roofs therefore does not occlude, and targets
sitting on an object surface see their own exterior half-space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from skimage import measure

from .errors import InfeasibleError, ValidationError
from .geom import (Polygon2, TriMesh, point_in_polygon, points_in_polygon,
                   polygon_area, triangulate)

SEGMENT_ENDPOINT_EPS = 1e-6
DEFAULT_RESOLUTION_DIVISOR = 48

PLACEMENTS = ("ground", "wall", "roof")


@dataclass
class ExtrudedObject:
    """A building: a simple footprint polygon swept from z=0 to its height."""

    footprint: Polygon2
    height: float

    def __post_init__(self):
        if self.height <= 0:
            raise ValueError("object height must be positive")
        if polygon_area(self.footprint) <= 0:
            self.footprint = self.footprint.reversed()
        self._triangles = None

    @property
    def triangles(self) -> list[np.ndarray]:
        """Footprint triangulation, cached; each entry is a (3, 2) array."""
        if self._triangles is None:
            v = self.footprint.vertices
            self._triangles = [v[list(t)] for t in triangulate(self.footprint)]
        return self._triangles


@dataclass
class Environment:
    """Operating region, extruded objects, and the altitude band."""

    region: Polygon2
    objects: list[ExtrudedObject]
    z_min: float
    z_max: float

    def __post_init__(self):
        if self.z_min >= self.z_max:
            raise ValueError("need z_min < z_max")
        for obj in self.objects:
            if not all(point_in_polygon(p, self.region) for p in obj.footprint.vertices):
                raise ValueError("object footprint extends outside the region")

    @property
    def h_max(self) -> float:
        return max((o.height for o in self.objects), default=0.0)


@dataclass(frozen=True)
class Target:
    """An inspection point on the ground, a wall, or a roof."""

    position: tuple[float, float, float]
    placement: str

    def __post_init__(self):
        if self.placement not in PLACEMENTS:
            raise ValueError(f"placement must be one of {PLACEMENTS}")

    @property
    def p(self) -> np.ndarray:
        return np.asarray(self.position, dtype=float)


@dataclass(frozen=True)
class SensorParams:
    """Maximum viewing range and the minimum height above the target."""

    d_max: float
    h_view: float

    def __post_init__(self):
        if not 0.0 < self.h_view < self.d_max:
            raise ValueError("need 0 < h_view < d_max")


def validate_target(target: Target, env: Environment, tol: float = 1e-6) -> None:
    """Check that the target sits in the placement case it claims."""
    x, y, z = target.position
    if target.placement == "ground":
        if abs(z) > tol:
            raise ValidationError("target-placement", "ground target must have z = 0")
        for obj in env.objects:
            if point_in_polygon((x, y), obj.footprint, include_boundary=True):
                raise ValidationError("target-placement",
                                      "ground target lies on an object footprint")
    elif target.placement == "wall":
        for obj in env.objects:
            if _on_boundary((x, y), obj.footprint, tol) and -tol <= z <= obj.height + tol:
                return
        raise ValidationError("target-placement", "wall target is not on any object wall")
    else:
        for obj in env.objects:
            if (point_in_polygon((x, y), obj.footprint, include_boundary=False)
                    and abs(z - obj.height) <= tol):
                return
        raise ValidationError("target-placement", "roof target is not on any object roof")


def _on_boundary(pt, poly: Polygon2, tol: float) -> bool:
    from .geom import _distance_to_boundary
    return _distance_to_boundary(pt, poly) <= tol


def _boundary_distances(points: np.ndarray, poly: Polygon2) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    a = poly.vertices
    b = np.roll(a, -1, axis=0)
    best = np.full(len(pts), np.inf)
    for i in range(len(a)):
        ab = b[i] - a[i]
        denom = float(ab @ ab)
        if denom == 0.0:
            d = np.linalg.norm(pts - a[i], axis=1)
        else:
            t = np.clip((pts - a[i]) @ ab / denom, 0.0, 1.0)
            d = np.linalg.norm(pts - (a[i] + t[:, None] * ab), axis=1)
        best = np.minimum(best, d)
    return best


def _blocked_by_object(points: np.ndarray, p: np.ndarray, obj: ExtrudedObject,
                       eps: float = SEGMENT_ENDPOINT_EPS) -> np.ndarray:
    """True where the open sight line from each point to ``p`` crosses the
    object's interior.

    The clip interval per footprint triangle is computed with half-plane
    tests; an interval blocks only if its midpoint is strictly inside the
    footprint and strictly between ground and roof, so boundary grazing
    never blocks.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    d = p[None, :] - pts
    blocked = np.zeros(n, dtype=bool)
    bx0, by0, bx1, by1 = obj.footprint.bounds
    # quick reject: segment bbox vs footprint bbox
    sx0 = np.minimum(pts[:, 0], p[0]); sx1 = np.maximum(pts[:, 0], p[0])
    sy0 = np.minimum(pts[:, 1], p[1]); sy1 = np.maximum(pts[:, 1], p[1])
    sz0 = np.minimum(pts[:, 2], p[2])
    near = (sx1 >= bx0) & (sx0 <= bx1) & (sy1 >= by0) & (sy0 <= by1) & (sz0 <= obj.height)
    if not near.any():
        return blocked
    idx = np.nonzero(near)[0]
    g = pts[idx]
    dg = d[idx]
    # altitude slab 0 <= z <= h
    lo = np.full(len(idx), eps)
    hi = np.full(len(idx), 1.0 - eps)
    _clip_linear(lo, hi, g[:, 2], dg[:, 2], 0.0, obj.height)
    open_z = hi > lo
    for tri in obj.triangles:
        tlo = lo.copy()
        thi = hi.copy()
        for k in range(3):
            e0 = tri[k]
            e1 = tri[(k + 1) % 3]
            ex, ey = e1[0] - e0[0], e1[1] - e0[1]
            # signed side value, linear in the segment parameter
            f0 = ex * (g[:, 1] - e0[1]) - ey * (g[:, 0] - e0[0])
            df = ex * dg[:, 1] - ey * dg[:, 0]
            _clip_halfplane(tlo, thi, f0, df)
        candidate = open_z & (thi - tlo > 1e-12)
        if not candidate.any():
            continue
        mid = 0.5 * (tlo + thi)
        m = g[candidate] + mid[candidate, None] * dg[candidate]
        strict_z = (m[:, 2] > 1e-9) & (m[:, 2] < obj.height - 1e-9)
        inside = points_in_polygon(m[:, :2], obj.footprint)
        on_edge = _boundary_distances(m[:, :2], obj.footprint) <= 1e-9
        hit = strict_z & inside & ~on_edge
        sub = np.nonzero(candidate)[0][hit]
        blocked[idx[sub]] = True
    return blocked


def _clip_linear(lo, hi, v0, dv, vmin, vmax):
    """Clip parameter range to vmin <= v0 + t*dv <= vmax, in place."""
    _clip_halfplane(lo, hi, v0 - vmin, dv)
    _clip_halfplane(lo, hi, vmax - v0, -dv)


def _clip_halfplane(lo, hi, f0, df):
    """Clip parameter range to f0 + t*df >= 0, in place."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -f0 / df
    rising = df > 0
    falling = df < 0
    flat_out = (df == 0) & (f0 < 0)
    lo[rising] = np.maximum(lo[rising], t[rising])
    hi[falling] = np.minimum(hi[falling], t[falling])
    hi[flat_out] = -np.inf


def line_of_sight(g, p, objects: list[ExtrudedObject]) -> bool:
    """True when the open segment from g to p misses every object interior.

    The endpoints themselves are excluded, so a target lying on an object
    surface does not occlude itself.
    """
    g = np.asarray(g, dtype=float)
    p = np.asarray(p, dtype=float)
    for obj in objects:
        if _blocked_by_object(g[None, :], p, obj)[0]:
            return False
    return True


def visibility_mask(points: np.ndarray, target: Target, env: Environment,
                    sensor: SensorParams) -> np.ndarray:
    """Vectorized visibility predicate for an (n, 3) array of viewpoints."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    p = target.p
    ok = np.linalg.norm(pts - p[None, :], axis=1) <= sensor.d_max
    ok &= pts[:, 2] >= p[2] + sensor.h_view
    ok &= (pts[:, 2] >= env.z_min) & (pts[:, 2] <= env.z_max)
    ok &= points_in_polygon(pts[:, :2], env.region) | \
        (_boundary_distances(pts[:, :2], env.region) <= 1e-9)
    for obj in env.objects:
        if not ok.any():
            break
        inside_fp = points_in_polygon(pts[:, :2], obj.footprint)
        interior = inside_fp & (pts[:, 2] < obj.height - 1e-9) & \
            (_boundary_distances(pts[:, :2], obj.footprint) > 1e-9)
        ok &= ~interior
        sub = np.nonzero(ok)[0]
        if len(sub):
            ok[sub] &= ~_blocked_by_object(pts[sub], p, obj)
    return ok


def visibility_predicate(g, target: Target, env: Environment,
                         sensor: SensorParams) -> bool:
    """Scalar form of :func:`visibility_mask`."""
    return bool(visibility_mask(np.asarray(g, dtype=float)[None, :], target, env, sensor)[0])


def _region_signed_distance(points2d: np.ndarray, region: Polygon2) -> np.ndarray:
    d = _boundary_distances(points2d, region)
    inside = points_in_polygon(points2d, region)
    return np.where(inside, -d, d)


def build_visibility_mesh(target: Target, env: Environment, sensor: SensorParams,
                          resolution: float | None = None) -> TriMesh:
    """Extract the visibility volume of a target as a closed triangle mesh.

    ``resolution`` is the grid cell size in meters (default d_max/48,
    at least 4 cells across d_max).  The output is a watertight 2-manifold
    with outward normals whose vertices track the true volume boundary to
    within about one cell.

    Raises
    ------
    InfeasibleError
        If the visibility volume is empty for this scene and sensor.
    """
    p = target.p
    cell = sensor.d_max / DEFAULT_RESOLUTION_DIVISOR if resolution is None else float(resolution)
    if sensor.d_max / cell < 4:
        raise ValueError("resolution too coarse: need at least 4 cells across d_max")

    rx0, ry0, rx1, ry1 = env.region.bounds
    x0 = max(p[0] - sensor.d_max, rx0) - 2 * cell
    x1 = min(p[0] + sensor.d_max, rx1) + 2 * cell
    y0 = max(p[1] - sensor.d_max, ry0) - 2 * cell
    y1 = min(p[1] + sensor.d_max, ry1) + 2 * cell
    z0 = max(env.z_min, p[2] + sensor.h_view) - 2 * cell
    z1 = min(env.z_max, p[2] + sensor.d_max) + 2 * cell
    if z1 <= z0:
        raise InfeasibleError("visibility volume empty: no feasible altitude band")

    xs = np.arange(x0, x1 + 0.5 * cell, cell)
    ys = np.arange(y0, y1 + 0.5 * cell, cell)
    zs = np.arange(z0, z1 + 0.5 * cell, cell)
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

    f = np.linalg.norm(pts - p[None, :], axis=1) - sensor.d_max
    f = np.maximum(f, (p[2] + sensor.h_view) - pts[:, 2])
    f = np.maximum(f, env.z_min - pts[:, 2])
    f = np.maximum(f, pts[:, 2] - env.z_max)
    f = np.maximum(f, _region_signed_distance(pts[:, :2], env.region))

    # occlusion and object interiors are binary; scale to one cell so the
    # interpolated crossing stays inside the straddling cell
    needs_los = f < cell
    if needs_los.any():
        sub = pts[needs_los]
        vis = np.ones(len(sub), dtype=bool)
        for obj in env.objects:
            inside_fp = points_in_polygon(sub[:, :2], obj.footprint)
            interior = inside_fp & (sub[:, 2] < obj.height - 1e-9)
            vis &= ~interior
            live = np.nonzero(vis)[0]
            if len(live):
                vis[live] &= ~_blocked_by_object(sub[live], p, obj)
        occ = np.where(vis, -cell, cell)
        f[needs_los] = np.maximum(f[needs_los], occ)

    field = f.reshape(X.shape)
    if not (field < 0).any():
        raise InfeasibleError("visibility volume empty for this target")
    verts, faces, _, _ = measure.marching_cubes(field, level=0.0,
                                                spacing=(cell, cell, cell))
    verts += np.array([x0, y0, z0])
    mesh = TriMesh(verts, faces.astype(np.int64))
    if mesh.volume() < 0:
        mesh = mesh.flipped()
    return mesh


def mesh_z_extent(mesh: TriMesh) -> tuple[float, float]:
    """Exact vertex altitude extrema of a nonempty mesh."""
    return mesh.z_extent()


def points_in_mesh(points: np.ndarray, mesh: TriMesh, chunk: int = 512) -> np.ndarray:
    """Ray-parity containment test against a closed mesh (+z rays).

    Points are processed in spatially sorted chunks so each chunk tests only
    the faces whose xy bounding boxes overlap it.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    c0, c1, c2 = mesh.corners()
    fx0 = np.minimum(np.minimum(c0[:, 0], c1[:, 0]), c2[:, 0])
    fx1 = np.maximum(np.maximum(c0[:, 0], c1[:, 0]), c2[:, 0])
    fy0 = np.minimum(np.minimum(c0[:, 1], c1[:, 1]), c2[:, 1])
    fy1 = np.maximum(np.maximum(c0[:, 1], c1[:, 1]), c2[:, 1])

    order = np.lexsort((pts[:, 1], pts[:, 0]))
    inside = np.zeros(len(pts), dtype=bool)
    for s in range(0, len(pts), chunk):
        sel = order[s:s + chunk]
        sub = pts[sel]
        px0, px1 = sub[:, 0].min(), sub[:, 0].max()
        py0, py1 = sub[:, 1].min(), sub[:, 1].max()
        fsel = np.nonzero((fx1 >= px0) & (fx0 <= px1) & (fy1 >= py0) & (fy0 <= py1))[0]
        if len(fsel) == 0:
            continue
        counts = np.zeros(len(sub), dtype=np.int64)
        a, b, c = c0[fsel], c1[fsel], c2[fsel]
        for fi in range(len(fsel)):
            counts += _ray_hits_triangle(sub, a[fi], b[fi], c[fi])
        inside[sel] = (counts % 2) == 1
    return inside


def _ray_hits_triangle(pts: np.ndarray, a, b, c) -> np.ndarray:
    """+z ray crossing test per point; half-open edge rule avoids double counts."""
    d1 = _edge_sign(pts, a, b)
    d2 = _edge_sign(pts, b, c)
    d3 = _edge_sign(pts, c, a)
    has_neg = (d1 < 0) | (d2 < 0) | (d3 < 0)
    has_pos = (d1 > 0) | (d2 > 0) | (d3 > 0)
    in_tri = ~(has_neg & has_pos) & (np.abs(d1) + np.abs(d2) + np.abs(d3) > 0)
    if not in_tri.any():
        return np.zeros(len(pts), dtype=np.int64)
    n = np.cross(b - a, c - a)
    hits = np.zeros(len(pts), dtype=np.int64)
    nz = n[2]
    if abs(nz) < 1e-15:
        return hits
    t = (np.dot(a, n) - pts @ n) / nz
    hits[in_tri & (t > 1e-12)] = 1
    return hits


def _edge_sign(pts, e0, e1):
    return (e1[0] - e0[0]) * (pts[:, 1] - e0[1]) - (e1[1] - e0[1]) * (pts[:, 0] - e0[0])


def decimate_mesh(mesh: TriMesh, target_faces: int) -> TriMesh:
    """Quadric-error edge-collapse simplification down to ``target_faces``.

    Collapses are rejected when they would break the manifold link
    condition, so the output stays a closed 2-manifold.  Intended as an
    optional post-pass; volumes are planned on the full mesh by default.
    """
    import heapq

    verts = [v.copy() for v in mesh.vertices]
    faces = {i: tuple(int(v) for v in f) for i, f in enumerate(mesh.faces)}
    vert_faces: dict[int, set[int]] = {}
    for fi, f in faces.items():
        for v in f:
            vert_faces.setdefault(v, set()).add(fi)

    def face_quadric(f):
        a, b, c = (verts[f[0]], verts[f[1]], verts[f[2]])
        n = np.cross(b - a, c - a)
        norm = np.linalg.norm(n)
        if norm == 0:
            return np.zeros((4, 4))
        n = n / norm
        plane = np.append(n, -n @ a)
        return np.outer(plane, plane)

    quadrics = {v: sum((face_quadric(faces[fi]) for fi in fs), np.zeros((4, 4)))
                for v, fs in vert_faces.items()}

    def neighbors(v):
        out = set()
        for fi in vert_faces.get(v, ()):
            out.update(faces[fi])
        out.discard(v)
        return out

    def collapse_cost(u, v):
        Q = quadrics[u] + quadrics[v]
        A = Q[:3, :3] + 1e-12 * np.eye(3)
        try:
            pos = np.linalg.solve(A, -Q[:3, 3])
        except np.linalg.LinAlgError:
            pos = 0.5 * (verts[u] + verts[v])
        h = np.append(pos, 1.0)
        return float(h @ Q @ h), pos

    heap = []
    version = {}
    for fi, f in faces.items():
        for k in range(3):
            u, v = f[k], f[(k + 1) % 3]
            if u < v:
                cost, pos = collapse_cost(u, v)
                version[(u, v)] = 0
                heapq.heappush(heap, (cost, u, v, 0, pos))

    n_faces = len(faces)
    while n_faces > target_faces and heap:
        cost, u, v, ver, pos = heapq.heappop(heap)
        key = (u, v) if u < v else (v, u)
        if version.get(key, -1) != ver or u not in vert_faces or v not in vert_faces:
            continue
        shared = vert_faces[u] & vert_faces[v]
        if len(shared) != 2:
            continue
        if len(neighbors(u) & neighbors(v)) != 2:
            continue  # link condition
        # collapse v into u at the optimal position
        verts[u] = pos
        quadrics[u] = quadrics[u] + quadrics[v]
        for fi in list(vert_faces[v]):
            f = faces[fi]
            if fi in shared:
                for w in f:
                    if w != v:
                        vert_faces[w].discard(fi)
                del faces[fi]
                n_faces -= 1
            else:
                faces[fi] = tuple(u if w == v else w for w in f)
                vert_faces[u].add(fi)
        del vert_faces[v]
        del quadrics[v]
        for w in neighbors(u) | {u}:
            for x in neighbors(w):
                a, b = (w, x) if w < x else (x, w)
                nver = version.get((a, b), 0) + 1
                version[(a, b)] = nver
                ncost, npos = collapse_cost(a, b)
                heapq.heappush(heap, (ncost, a, b, nver, npos))

    used = sorted({v for f in faces.values() for v in f})
    remap = {v: i for i, v in enumerate(used)}
    new_faces = np.array([[remap[v] for v in f] for f in faces.values()], dtype=np.int64)
    new_verts = np.array([verts[v] for v in used])
    return TriMesh(new_verts, new_faces)
