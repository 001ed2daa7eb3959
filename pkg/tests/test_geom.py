import math

import numpy as np
import pytest

from viewplan.geom import (NonManifoldMeshError, Polygon2, TriMesh, edge_face_counts,
                           element_area, load_obj, mesh_face_areas, point_in_polygon,
                           polygon_area, polygon_is_simple, polygon_perimeter,
                           save_obj, slice_mesh, tangent_angle, triangulate,
                           uniform_perimeter_points)

from oracles import triangle_plane_sections

UNIT_SQUARE = Polygon2(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


def test_polygon_area_unit_square_ccw():
    assert polygon_area(UNIT_SQUARE) == pytest.approx(1.0)


def test_polygon_area_triangle():
    tri = Polygon2(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    assert polygon_area(tri) == pytest.approx(0.5)


def test_polygon_area_cw_is_negative():
    assert polygon_area(UNIT_SQUARE.reversed()) == pytest.approx(-1.0)


def test_polygon_area_sign_flips_under_reversal():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(3, 12))
        # random convex polygon: sorted angles on a random radius profile
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        r = rng.uniform(0.5, 3.0, n)
        poly = Polygon2(np.column_stack([r * np.cos(ang), r * np.sin(ang)]))
        assert polygon_area(poly.reversed()) == pytest.approx(-polygon_area(poly))


def test_polygon_requires_three_vertices():
    with pytest.raises(ValueError):
        Polygon2(np.array([[0.0, 0.0], [1.0, 0.0]]))


def test_polygon_perimeter_cases():
    assert polygon_perimeter(UNIT_SQUARE) == pytest.approx(4.0)
    tri = Polygon2(np.array([[0.0, 0.0], [3.0, 0.0], [3.0, 4.0]]))
    assert polygon_perimeter(tri) == pytest.approx(12.0)
    ang = 2 * np.pi * np.arange(6) / 6
    hexagon = Polygon2(np.column_stack([2 * np.cos(ang), 2 * np.sin(ang)]))
    assert polygon_perimeter(hexagon) == pytest.approx(12.0)


def test_uniform_perimeter_points_square_corners():
    pts = uniform_perimeter_points(UNIT_SQUARE, 4)
    assert pts == pytest.approx(UNIT_SQUARE.vertices)


def test_uniform_perimeter_points_square_midpoints():
    pts = uniform_perimeter_points(UNIT_SQUARE, 8)
    expected = np.array([[0, 0], [0.5, 0], [1, 0], [1, 0.5],
                         [1, 1], [0.5, 1], [0, 1], [0, 0.5]], dtype=float)
    assert pts == pytest.approx(expected)


def test_uniform_perimeter_points_n1_is_vertex0():
    poly = Polygon2(np.array([[2.0, 3.0], [5.0, 3.0], [4.0, 7.0]]))
    assert uniform_perimeter_points(poly, 1)[0] == pytest.approx([2.0, 3.0])


def test_uniform_perimeter_points_equal_gaps():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(3, 9))
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        poly = Polygon2(np.column_stack([np.cos(ang), np.sin(ang)]) *
                        rng.uniform(1, 5))
        k = int(rng.integers(2, 40))
        pts = uniform_perimeter_points(poly, k)
        perim = polygon_perimeter(poly)
        gaps = [_arc_gap(poly, pts[i], pts[(i + 1) % k], perim) for i in range(k)]
        assert np.allclose(gaps, perim / k, rtol=1e-9)


def _arc_gap(poly, a, b, perim):
    sa = _arc_position(poly, a)
    sb = _arc_position(poly, b)
    return (sb - sa) % perim


def _arc_position(poly, pt):
    v = poly.vertices
    edges = np.roll(v, -1, axis=0) - v
    lengths = np.linalg.norm(edges, axis=1)
    cum = np.concatenate(([0.0], np.cumsum(lengths)))
    for i in range(len(v)):
        d = pt - v[i]
        if lengths[i] == 0:
            continue
        t = d @ edges[i] / lengths[i] ** 2
        if -1e-9 <= t <= 1 + 1e-9:
            close = v[i] + t * edges[i]
            if np.linalg.norm(close - pt) < 1e-9:
                return cum[i] + t * lengths[i]
    raise AssertionError("point not on boundary")


def test_tangent_angle_edges():
    assert tangent_angle((0.5, 0.0), UNIT_SQUARE) == pytest.approx(0.0)
    assert tangent_angle((1.0, 0.5), UNIT_SQUARE) == pytest.approx(math.pi / 2)


def test_tangent_angle_vertex_takes_outgoing_edge():
    # oracle: walk the boundary; the edge starting at arc position of the
    # vertex is the outgoing one
    poly = UNIT_SQUARE
    k = 1  # vertex (1, 0)
    v = poly.vertices
    outgoing = v[(k + 1) % 4] - v[k]
    expected = math.atan2(outgoing[1], outgoing[0]) % (2 * math.pi)
    assert tangent_angle((1.0, 0.0), poly) == pytest.approx(expected)
    assert expected == pytest.approx(math.pi / 2)


def test_tangent_angle_rejects_off_boundary():
    with pytest.raises(ValueError):
        tangent_angle((0.5, 0.5), UNIT_SQUARE)


def test_slice_cube_midheight(unit_cube):
    polys = slice_mesh(unit_cube, 0.5)
    assert len(polys) == 1
    assert polygon_area(polys[0]) == pytest.approx(1.0)
    assert polygon_perimeter(polys[0]) == pytest.approx(4.0)


def test_slice_cube_outside(unit_cube):
    assert slice_mesh(unit_cube, 2.0) == []


def test_slice_tetrahedron_against_face_oracle():
    v = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 1.0, 0.0],
                  [0.5, 0.4, 1.0]])
    f = np.array([[0, 2, 1], [0, 1, 3], [1, 2, 3], [2, 0, 3]])
    mesh = TriMesh(v, f)
    z = 0.5
    polys = slice_mesh(mesh, z)
    assert len(polys) == 1
    poly = polys[0]
    assert polygon_area(poly) > 0
    segs = triangle_plane_sections(v, f, z)
    oracle_pts = np.array([p for seg in segs for p in seg])[:, :2]
    # every polygon vertex appears among the per-face intersection points
    for pt in poly.vertices:
        assert np.min(np.linalg.norm(oracle_pts - pt[None, :], axis=1)) < 1e-9
    assert len(poly.vertices) == len(segs)


def test_slice_area_continuous_in_z(unit_cube):
    # away from vertex altitudes the cube section is constant
    for z in np.linspace(0.05, 0.95, 37):
        polys = slice_mesh(unit_cube, float(z))
        area = sum(polygon_area(p) for p in polys)
        assert area == pytest.approx(1.0, rel=1e-9)


def test_slice_through_vertex_altitude_is_nudged(unit_cube):
    polys = slice_mesh(unit_cube, 0.0)
    assert len(polys) == 1
    assert polygon_area(polys[0]) == pytest.approx(1.0, rel=1e-5)


def test_slice_open_mesh_raises():
    v = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 0.0, 1.0]])
    f = np.array([[0, 1, 2]])
    with pytest.raises(NonManifoldMeshError):
        slice_mesh(TriMesh(v, f), 0.5)


def test_element_area_cases():
    assert element_area([0, 0, 0], [1, 0, 0], [0, 1, 0]) == pytest.approx(0.5)
    assert element_area([0, 0, 0], [2, 0, 0], [0, 2, 0]) == pytest.approx(2.0)
    assert element_area([0, 0, 0], [1, 1, 1], [2, 2, 2]) == pytest.approx(0.0)


def test_cube_surface_bounds_projection(unit_cube):
    assert mesh_face_areas(unit_cube).sum() == pytest.approx(6.0)
    assert mesh_face_areas(unit_cube).sum() >= 1.0


def test_point_in_polygon_basics():
    assert point_in_polygon((0.5, 0.5), UNIT_SQUARE)
    assert not point_in_polygon((1.5, 0.5), UNIT_SQUARE)
    assert point_in_polygon((1.0, 0.5), UNIT_SQUARE, include_boundary=True)
    assert not point_in_polygon((1.0, 0.5), UNIT_SQUARE, include_boundary=False)


def test_triangulate_covers_polygon_area():
    poly = Polygon2(np.array([[0.0, 0.0], [4.0, 0.0], [4.0, 1.0], [1.0, 1.0],
                              [1.0, 3.0], [0.0, 3.0]]))  # L-shape
    tris = triangulate(poly)
    total = 0.0
    v = poly.vertices
    for a, b, c in tris:
        total += element_area(np.append(v[a], 0), np.append(v[b], 0),
                              np.append(v[c], 0))
    assert total == pytest.approx(abs(polygon_area(poly)))
    assert polygon_is_simple(poly)


def test_obj_roundtrip(unit_cube, tmp_path):
    path = tmp_path / "cube.obj"
    save_obj(unit_cube, path)
    back = load_obj(path)
    assert back.vertices == pytest.approx(unit_cube.vertices)
    assert (back.faces == unit_cube.faces).all()


def test_obj_rejects_quads(tmp_path):
    path = tmp_path / "quad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    with pytest.raises(ValueError):
        load_obj(path)


def test_edge_face_counts_closed_cube(unit_cube):
    counts = edge_face_counts(unit_cube)
    assert set(counts.values()) == {2}
    assert len(unit_cube.vertices) - len(counts) + len(unit_cube.faces) == 2
