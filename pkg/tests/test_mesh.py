"""Mesh I/O, normals, and spatial queries."""
from __future__ import annotations

import numpy as np
import pytest

from meshgaze import primitives
from meshgaze.mesh import (Mesh, MeshError, bounding_box_diagonal,
                           build_spatial_index, load_mesh, nearest_vertex,
                           radius_query, save_ply)

TRI_OBJ = """\
# minimal
v 0 0 0
v 1 0 0
v 0 1 0
f 1 2 3
"""

CUBE_PLY_VERTS = [(x, y, z) for x in (0.0, 1.0) for y in (0.0, 1.0)
                  for z in (0.0, 1.0)]


def _cube_ply_text():
    # 8 vertices, 12 triangles; windings are irrelevant for these tests
    faces = [(0, 1, 3), (0, 3, 2), (4, 6, 7), (4, 7, 5),
             (0, 4, 5), (0, 5, 1), (2, 3, 7), (2, 7, 6),
             (0, 2, 6), (0, 6, 4), (1, 5, 7), (1, 7, 3)]
    lines = ["ply", "format ascii 1.0", "element vertex 8",
             "property float x", "property float y", "property float z",
             "element face 12",
             "property list uchar int vertex_indices", "end_header"]
    lines += [f"{x} {y} {z}" for x, y, z in CUBE_PLY_VERTS]
    lines += [f"3 {a} {b} {c}" for a, b, c in faces]
    return "\n".join(lines) + "\n"


def test_single_triangle_obj(tmp_path):
    path = tmp_path / "tri.obj"
    path.write_text(TRI_OBJ)
    mesh = load_mesh(path)
    assert mesh.vertices.shape == (3, 3)
    assert mesh.triangles.shape == (1, 3)
    np.testing.assert_array_equal(mesh.triangles[0], [0, 1, 2])


def test_obj_out_of_range_index(tmp_path):
    path = tmp_path / "bad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 5\n")
    with pytest.raises(MeshError):
        load_mesh(path)


def test_obj_quad_fan_triangulation(tmp_path):
    path = tmp_path / "quad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    mesh = load_mesh(path)
    assert len(mesh.triangles) == 2


def test_obj_slash_indices(tmp_path):
    path = tmp_path / "slash.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1/1 2/1 3/1\n")
    mesh = load_mesh(path)
    assert len(mesh.triangles) == 1


def test_cube_ply_diagonal(tmp_path):
    path = tmp_path / "cube.ply"
    path.write_text(_cube_ply_text())
    mesh = load_mesh(path)
    assert len(mesh.vertices) == 8 and len(mesh.triangles) == 12
    assert bounding_box_diagonal(mesh) == pytest.approx(np.sqrt(3.0), abs=1e-12)


def test_diagonal_trivia():
    assert bounding_box_diagonal(np.array([[0.0, 0, 0], [3, 4, 0]])) == 5.0
    assert bounding_box_diagonal(np.array([[2.0, 2, 2]])) == 0.0


def test_load_transform(tmp_path):
    path = tmp_path / "tri.obj"
    path.write_text(TRI_OBJ)
    mesh = load_mesh(path, scale=2.0, translate=(0.0, 1.5, 0.0))
    np.testing.assert_allclose(mesh.vertices[1], [2.0, 1.5, 0.0])


def test_ply_roundtrip_bit_exact(tmp_path, sphere2):
    path = tmp_path / "s.ply"
    save_ply(sphere2, path)
    again = load_mesh(path)
    np.testing.assert_array_equal(again.vertices, sphere2.vertices)
    np.testing.assert_array_equal(again.triangles, sphere2.triangles)
    # second save is byte-identical (deterministic formatting)
    text = path.read_text()
    save_ply(again, path)
    assert path.read_text() == text


def test_mesh_rejects_empty_and_bad_indices():
    with pytest.raises(MeshError):
        Mesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    with pytest.raises(MeshError):
        Mesh(np.zeros((3, 3)), np.array([[0, 1, 3]]))
    with pytest.raises(MeshError):
        Mesh(np.array([[0.0, 0, 0], [1, 0, 0], [np.nan, 1, 0]]),
             np.array([[0, 1, 2]]))


def test_plane_normals_point_up():
    plane = primitives.plane_grid(5, 5, size=1.0, center=(0, 0, 0))
    np.testing.assert_allclose(plane.normals, np.tile([0.0, 1.0, 0.0], (36, 1)),
                               atol=1e-12)


def test_sphere_normals_radial(sphere3):
    radial = sphere3.vertices - np.array([0.0, 1.5, 0.0])
    radial /= np.linalg.norm(radial, axis=1, keepdims=True)
    cosang = np.einsum("ij,ij->i", sphere3.normals, radial)
    # within 5 degrees of the analytic direction
    assert cosang.min() > np.cos(np.radians(5.0))


def test_degenerate_triangle_flagged():
    verts = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [5, 5, 5]])
    tris = np.array([[0, 1, 2], [3, 3, 3]])       # second has zero area
    mesh = Mesh(verts, tris)
    assert mesh.normal_flags[3]                   # only degenerate incidence
    assert not mesh.normal_flags[:3].any()
    assert np.linalg.norm(mesh.normals[:3] - [0, 0, 1], axis=1).max() < 1e-12


def test_normals_deterministic(sphere2):
    m2 = primitives.icosphere(2)
    np.testing.assert_array_equal(sphere2.normals, m2.normals)


# ---------------------------------------------------------------------------
# spatial index vs brute force

def test_radius_query_matches_bruteforce():
    rng = np.random.default_rng(1234)
    pts = rng.uniform(-1.0, 1.0, size=(200, 3))
    idx = build_spatial_index(pts)
    for _ in range(100):
        center = rng.uniform(-1.2, 1.2, size=3)
        r = rng.uniform(0.0, 0.8)
        got = radius_query(idx, center, r)
        want = np.nonzero(np.linalg.norm(pts - center, axis=1) <= r)[0]
        np.testing.assert_array_equal(got, want)


def test_radius_query_edge_radii():
    pts = np.array([[0.0, 0, 0], [1, 0, 0], [0, 2, 0]])
    idx = build_spatial_index(pts)
    np.testing.assert_array_equal(radius_query(idx, [1.0, 0, 0], 0.0), [1])
    np.testing.assert_array_equal(radius_query(idx, [0.3, 0.3, 0.3], 10.0),
                                  [0, 1, 2])


def test_nearest_vertex():
    pts = np.array([[0.0, 0, 0], [1, 0, 0], [0, 2, 0]])
    idx = build_spatial_index(pts)
    assert nearest_vertex(idx, [0.9, 0.1, 0.0]) == 1


def test_unknown_format_rejected(tmp_path):
    path = tmp_path / "mesh.stl"
    path.write_text("solid nope")
    with pytest.raises(MeshError):
        load_mesh(path)
