"""Planar polygon and triangular-mesh primitives.

Coordinates are metric, in an east-north(-up) frame.  Polygons are ordered
vertex lists, implicitly closed; the canonical orientation for object
footprints and mesh cross-sections is counter-clockwise (positive signed
area).  Meshes are triangle soups with per-face outward unit normals;
cross-sections of closed manifolds are stitched into simple polygons by
walking face adjacency across crossed edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Relative plane offset used when a slicing plane passes exactly through a
# mesh vertex; nudging into the body avoids degenerate loop stitching.
SLICE_NUDGE = 1e-7


class NonManifoldMeshError(ValueError):
    """Raised when a cross-section cannot be stitched into closed loops."""


@dataclass
class Polygon2:
    """Simple planar polygon given as an (n, 2) float array of vertices.

    The closing edge from the last vertex back to the first is implicit.
    Vertex order determines the sign of the area.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("polygon needs an (n, 2) array with n >= 3")
        if not np.all(np.isfinite(v)):
            raise ValueError("polygon vertices must be finite")
        self.vertices = v

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y)."""
        v = self.vertices
        return (v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max())

    def reversed(self) -> "Polygon2":
        return Polygon2(self.vertices[::-1].copy())


def polygon_area(poly: Polygon2) -> float:
    """Signed shoelace area; positive for counter-clockwise vertex order."""
    v = poly.vertices
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_perimeter(poly: Polygon2) -> float:
    """Total edge length, including the implicit closing edge."""
    v = poly.vertices
    return float(np.sum(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)))


def polygon_is_simple(poly: Polygon2, tol: float = 1e-12) -> bool:
    """True if no two non-adjacent edges intersect (O(n^2) segment test)."""
    v = poly.vertices
    n = len(v)
    a = v
    b = np.roll(v, -1, axis=0)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # shared endpoint
            if _segments_cross(a[i], b[i], a[j], b[j], tol):
                return False
    return True


def _segments_cross(p0, p1, q0, q1, tol: float) -> bool:
    d1 = p1 - p0
    d2 = q1 - q0
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    r = q0 - p0
    if abs(denom) < tol:
        return False  # parallel; overlap handled as non-simple input elsewhere
    t = (r[0] * d2[1] - r[1] * d2[0]) / denom
    u = (r[0] * d1[1] - r[1] * d1[0]) / denom
    return tol < t < 1 - tol and tol < u < 1 - tol


def point_in_polygon(point, poly: Polygon2, include_boundary: bool = True,
                     tol: float = 1e-9) -> bool:
    """Even-odd containment test for a single point."""
    if _distance_to_boundary(point, poly) <= tol:
        return include_boundary
    return bool(points_in_polygon(np.asarray(point, dtype=float)[None, :], poly)[0])


def points_in_polygon(points: np.ndarray, poly: Polygon2) -> np.ndarray:
    """Vectorized even-odd rule for an (n, 2) array of query points."""
    pts = np.asarray(points, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    v = poly.vertices
    x0, y0 = v[:, 0], v[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    inside = np.zeros(len(pts), dtype=bool)
    for i in range(len(v)):
        crosses = (y0[i] > y) != (y1[i] > y)
        if not crosses.any():
            continue
        xi = x0[i] + (y - y0[i]) / (y1[i] - y0[i]) * (x1[i] - x0[i])
        inside ^= crosses & (x < xi)
    return inside


def _distance_to_boundary(point, poly: Polygon2) -> float:
    p = np.asarray(point, dtype=float)
    a = poly.vertices
    b = np.roll(a, -1, axis=0)
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom[denom == 0.0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", p[None, :] - a, ab) / denom, 0.0, 1.0)
    closest = a + t[:, None] * ab
    return float(np.min(np.linalg.norm(closest - p[None, :], axis=1)))


def uniform_perimeter_points(poly: Polygon2, n: int) -> np.ndarray:
    """Place n points along the boundary at equal arc-length spacing.

    Spacing is perimeter/n, starting at vertex 0 with zero offset, so n=1
    returns vertex 0 and, on a unit square, n=4 returns the corners.
    """
    if n < 1:
        raise ValueError("need at least one perimeter point")
    v = poly.vertices
    edges = np.roll(v, -1, axis=0) - v
    lengths = np.linalg.norm(edges, axis=1)
    cum = np.concatenate(([0.0], np.cumsum(lengths)))
    perim = cum[-1]
    offsets = np.arange(n) * (perim / n)
    idx = np.searchsorted(cum, offsets, side="right") - 1
    idx = np.clip(idx, 0, len(v) - 1)
    local = offsets - cum[idx]
    with np.errstate(invalid="ignore"):
        frac = np.where(lengths[idx] > 0, local / lengths[idx], 0.0)
    return v[idx] + frac[:, None] * edges[idx]


def tangent_angle(point, poly: Polygon2, tol: float = 1e-6) -> float:
    """Heading of the boundary edge containing ``point``, in [0, 2*pi).

    Edges are traversed in the polygon's stored vertex order.  A point that
    coincides with a vertex takes the outgoing edge's heading.
    """
    p = np.asarray(point, dtype=float)
    v = poly.vertices
    n = len(v)
    # vertex hit: outgoing edge wins
    d_vert = np.linalg.norm(v - p[None, :], axis=1)
    k = int(np.argmin(d_vert))
    if d_vert[k] <= tol:
        e = v[(k + 1) % n] - v[k]
        return float(np.arctan2(e[1], e[0]) % (2 * np.pi))
    a = v
    b = np.roll(v, -1, axis=0)
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom[denom == 0.0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", p[None, :] - a, ab) / denom, 0.0, 1.0)
    dist = np.linalg.norm(a + t[:, None] * ab - p[None, :], axis=1)
    k = int(np.argmin(dist))
    if dist[k] > tol:
        raise ValueError(f"point {p} is not on the polygon boundary (closest {dist[k]:.3g} m)")
    e = ab[k]
    return float(np.arctan2(e[1], e[0]) % (2 * np.pi))


def triangulate(poly: Polygon2) -> list[tuple[int, int, int]]:
    """Ear-clipping triangulation of a simple polygon (any orientation).

    Returns vertex index triples wound counter-clockwise.
    """
    v = poly.vertices
    idx = list(range(len(v)))
    if polygon_area(poly) < 0:
        idx.reverse()
    tris: list[tuple[int, int, int]] = []
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 10 * len(v) ** 2:
            raise ValueError("ear clipping failed; polygon may be non-simple")
        n = len(idx)
        clipped = False
        for k in range(n):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % n]
            a, b, c = v[i0], v[i1], v[i2]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if cross <= 1e-12:
                continue  # reflex or degenerate corner
            others = [j for j in idx if j not in (i0, i1, i2)]
            if others and _any_point_in_triangle(v[others], a, b, c):
                continue
            tris.append((i0, i1, i2))
            idx.pop(k)
            clipped = True
            break
        if not clipped:
            raise ValueError("ear clipping failed; polygon may be non-simple")
    tris.append((idx[0], idx[1], idx[2]))
    return tris


def _any_point_in_triangle(pts: np.ndarray, a, b, c) -> bool:
    def side(p0, p1):
        return (p1[0] - p0[0]) * (pts[:, 1] - p0[1]) - (p1[1] - p0[1]) * (pts[:, 0] - p0[0])

    eps = 1e-12
    return bool(np.any((side(a, b) > eps) & (side(b, c) > eps) & (side(c, a) > eps)))


@dataclass
class TriMesh:
    """Triangular surface mesh: (n, 3) vertices and (m, 3) face index triples.

    Per-face unit normals follow the right-hand rule on the stored winding;
    meshes produced by the visibility pipeline are closed 2-manifolds with
    outward normals.
    """

    vertices: np.ndarray
    faces: np.ndarray
    normals: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if len(self.faces) and self.faces.max() >= len(self.vertices):
            raise ValueError("face index out of range")
        if len(self.faces) and self.faces.min() < 0:
            raise ValueError("negative face index")
        if self.normals is None:
            self.normals = face_normals(self.vertices, self.faces)
        else:
            self.normals = np.asarray(self.normals, dtype=float).reshape(-1, 3)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def corners(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-face vertex positions (c0, c1, c2), each (m, 3)."""
        return (self.vertices[self.faces[:, 0]],
                self.vertices[self.faces[:, 1]],
                self.vertices[self.faces[:, 2]])

    def z_extent(self) -> tuple[float, float]:
        if len(self.vertices) == 0:
            raise ValueError("empty mesh has no z extent")
        z = self.vertices[:, 2]
        return float(z.min()), float(z.max())

    def volume(self) -> float:
        """Signed enclosed volume by the divergence theorem."""
        c0, c1, c2 = self.corners()
        return float(np.einsum("ij,ij->i", c0, np.cross(c1, c2)).sum() / 6.0)

    def flipped(self) -> "TriMesh":
        return TriMesh(self.vertices.copy(), self.faces[:, ::-1].copy())


def face_normals(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Unit normals per face; zero vector for degenerate faces."""
    c0 = vertices[faces[:, 0]]
    c1 = vertices[faces[:, 1]]
    c2 = vertices[faces[:, 2]]
    n = np.cross(c1 - c0, c2 - c0)
    norm = np.linalg.norm(n, axis=1, keepdims=True)
    return np.where(norm > 0, n / np.where(norm == 0, 1.0, norm), 0.0)


def element_area(c0, c1, c2) -> np.ndarray | float:
    """Triangle area 0.5*||(c0-c1) x (c0-c2)||; broadcasts over leading axes."""
    c0 = np.asarray(c0, dtype=float)
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    a = 0.5 * np.linalg.norm(np.cross(c0 - c1, c0 - c2), axis=-1)
    return float(a) if a.ndim == 0 else a


def mesh_face_areas(mesh: TriMesh) -> np.ndarray:
    c0, c1, c2 = mesh.corners()
    return element_area(c0, c1, c2)


def edge_face_counts(mesh: TriMesh) -> dict[tuple[int, int], int]:
    """Multiplicity of each undirected edge across all faces."""
    counts: dict[tuple[int, int], int] = {}
    f = mesh.faces
    for cols in ((0, 1), (1, 2), (2, 0)):
        ea = f[:, cols[0]]
        eb = f[:, cols[1]]
        lo = np.minimum(ea, eb)
        hi = np.maximum(ea, eb)
        for a, b in zip(lo.tolist(), hi.tolist()):
            counts[(a, b)] = counts.get((a, b), 0) + 1
    return counts


def slice_mesh(mesh: TriMesh, z: float) -> list[Polygon2]:
    """Cross-section of a closed manifold mesh with the plane at height z.

    Crossing segments are stitched into loops by walking face adjacency
    across crossed edges, so no endpoint snapping is needed.  Every returned
    polygon is reoriented to positive signed area.  A plane passing exactly
    through a vertex is nudged into the body by ``SLICE_NUDGE`` times the
    mesh z extent.  Returns an empty list when the plane misses the mesh.

    Raises
    ------
    NonManifoldMeshError
        If a crossed edge is not shared by exactly two crossing faces.
    """
    if len(mesh.vertices) == 0:
        return []
    vz = mesh.vertices[:, 2]
    z_lo, z_hi = vz.min(), vz.max()
    if z < z_lo or z > z_hi:
        return []
    extent = max(z_hi - z_lo, 1e-12)
    nudge = SLICE_NUDGE * extent
    for _ in range(8):
        if np.min(np.abs(vz - z)) > 1e-12 * extent:
            break
        z += nudge
    if z <= z_lo or z >= z_hi:
        return []

    above = vz > z
    f = mesh.faces
    fa = above[f]
    n_above = fa.sum(axis=1)
    crossing = np.nonzero((n_above == 1) | (n_above == 2))[0]
    if len(crossing) == 0:
        return []

    # crossed edges per crossing face, keyed by sorted vertex pair
    face_edges: list[tuple[tuple[int, int], tuple[int, int]]] = []
    edge_point: dict[tuple[int, int], np.ndarray] = {}
    edge_faces: dict[tuple[int, int], list[int]] = {}
    for fi in crossing.tolist():
        tri = f[fi]
        keys = []
        for i in range(3):
            a, b = int(tri[i]), int(tri[(i + 1) % 3])
            if above[a] == above[b]:
                continue
            key = (a, b) if a < b else (b, a)
            keys.append(key)
            if key not in edge_point:
                pa, pb = mesh.vertices[a], mesh.vertices[b]
                t = (z - pa[2]) / (pb[2] - pa[2])
                edge_point[key] = pa[:2] + t * (pb[:2] - pa[:2])
            edge_faces.setdefault(key, []).append(fi)
        if len(keys) != 2:
            raise NonManifoldMeshError("face crosses plane on != 2 edges")
        face_edges.append((keys[0], keys[1]))

    if any(len(fs) != 2 for fs in edge_faces.values()):
        raise NonManifoldMeshError("crossed edge not shared by exactly 2 faces")

    face_index = {fi: k for k, fi in enumerate(crossing.tolist())}
    visited = np.zeros(len(crossing), dtype=bool)
    polys: list[Polygon2] = []
    for start_k in range(len(crossing)):
        if visited[start_k]:
            continue
        loop_pts: list[np.ndarray] = []
        k = start_k
        enter_edge = face_edges[k][0]
        while not visited[k]:
            visited[k] = True
            e0, e1 = face_edges[k]
            exit_edge = e1 if enter_edge == e0 else e0
            loop_pts.append(edge_point[exit_edge])
            fi_pair = edge_faces[exit_edge]
            fi_self = crossing[k]
            fi_next = fi_pair[0] if fi_pair[1] == fi_self else fi_pair[1]
            k = face_index[fi_next]
            enter_edge = exit_edge
        pts = np.asarray(loop_pts)
        keep = np.linalg.norm(pts - np.roll(pts, 1, axis=0), axis=1) > 1e-12
        pts = pts[keep]
        if len(pts) < 3:
            continue
        poly = Polygon2(pts)
        area = polygon_area(poly)
        if abs(area) < 1e-15:
            continue
        polys.append(poly if area > 0 else poly.reversed())
    return polys


def save_obj(mesh: TriMesh, path) -> None:
    """Write a triangles-only Wavefront OBJ (v and f records)."""
    with open(path, "w", encoding="ascii") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


def load_obj(path) -> TriMesh:
    """Read a triangles-only Wavefront OBJ; rejects non-triangle faces."""
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                if len(parts) != 4:
                    raise ValueError("only triangular faces are supported")
                faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    return TriMesh(np.asarray(verts), np.asarray(faces, dtype=np.int64))
