import numpy as np
import pytest

from curvegait.mesh import (
    MeshError,
    NonManifoldError,
    TriangleMesh,
    boundary_vertex_mask,
    build_one_rings,
    corner_angles,
    unique_edges,
    validate,
    vertex_areas,
)
from curvegait.mesh_io import (
    MeshParseError,
    load_mesh,
    read_mesh,
    save_mesh,
    write_mesh,
)
from curvegait.shapes import cylinder, icosphere, plane_grid, tetrahedron, torus


def test_mesh_is_immutable():
    m = tetrahedron()
    with pytest.raises(ValueError):
        m.vertices[0, 0] = 1.0


@pytest.mark.parametrize("tris, msg", [
    ([[0, 1, 5]], "outside"),
    ([[0, 1, -1]], "outside"),
    ([[0, 1, 1]], "repeats"),
])
def test_bad_triangles_rejected(tris, msg):
    with pytest.raises(MeshError, match=msg):
        TriangleMesh(np.eye(3), tris)


def test_normals_must_be_unit():
    m = tetrahedron()
    with pytest.raises(MeshError):
        TriangleMesh(m.vertices, m.triangles, normals=np.ones((4, 3)))


@pytest.mark.parametrize("mesh, chi", [
    (tetrahedron(), 2), (icosphere(2), 2), (torus(), 0), (plane_grid(), 1), (cylinder(), 0),
])
def test_euler_characteristic(mesh, chi):
    assert mesh.euler_characteristic() == chi


def test_unique_edges_counts():
    edges, inverse, counts = unique_edges(tetrahedron().triangles)
    assert len(edges) == 6
    assert np.all(counts == 2)
    assert inverse.shape == (12,)


def test_boundary_mask_on_grid():
    g = plane_grid(n=5)
    mask = boundary_vertex_mask(g)
    # 5x5 grid: 16 border vertices
    assert mask.sum() == 16
    assert not mask[12]


def test_one_rings_closed_and_open():
    rings = build_one_rings(icosphere(1))
    assert not rings.boundary.any()
    assert set(rings.degree()) == {5, 6}

    g = plane_grid(n=3)
    rings = build_one_rings(g)
    assert rings.boundary.sum() == 8
    # an open fan has one more neighbour than faces
    for nb, fc, b in zip(rings.neighbors, rings.faces, rings.boundary):
        assert len(nb) == len(fc) + (1 if b else 0)


def test_one_rings_follow_winding():
    m = icosphere(1)
    rings = build_one_rings(m)
    tri = set(map(tuple, m.triangles.tolist()))
    for v, nb in enumerate(rings.neighbors):
        for a, b in zip(nb, np.roll(nb, -1)):
            assert {(v, a, b), (a, b, v), (b, v, a)} & tri


def test_non_manifold_edge_raises():
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]], float)
    m = TriangleMesh(v, [[0, 1, 2], [1, 0, 3], [0, 1, 4]])
    with pytest.raises(NonManifoldError) as err:
        build_one_rings(m)
    assert err.value.edge == (0, 1)
    assert validate(m).nonmanifold_edges == [(0, 1)]


def test_corner_angles_sum_to_pi():
    ang = corner_angles(icosphere(2))
    np.testing.assert_allclose(ang.sum(axis=1), np.pi, atol=1e-12)


@pytest.mark.parametrize("scheme", ["barycentric", "mixed-voronoi"])
@pytest.mark.parametrize("mesh", [icosphere(2), torus(n_major=20, n_minor=9), plane_grid()])
def test_vertex_areas_partition_surface(mesh, scheme):
    areas = vertex_areas(mesh, scheme=scheme)
    assert areas.values.sum() == pytest.approx(mesh.area(), rel=1e-12)
    assert np.all(areas.values > 0)


def test_vertex_areas_unknown_scheme():
    with pytest.raises(ValueError, match="area scheme"):
        vertex_areas(tetrahedron(), scheme="voronoi")


def test_validate_reports_problems():
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [2, 0, 0], [0, 0, 0], [5, 5, 5]], float)
    m = TriangleMesh(v, [[0, 1, 2], [0, 1, 3], [4, 1, 2]])
    rep = validate(m)
    assert rep.degenerate_triangles == [1]
    assert rep.duplicate_vertices == [(0, 4)]
    assert rep.isolated_vertices == [5]
    assert not rep.ok
    assert validate(icosphere(1)).ok and validate(icosphere(1)).is_closed
    d = validate(plane_grid(n=3)).to_dict()
    assert d["boundary_edges"] == 8 and not d["closed"]


# file formats

def test_obj_parses_quads_and_slashes():
    text = b"""# quad
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
vn 0 0 1
f 1//1 2//1 3//1 4//1
"""
    m = load_mesh(text, "obj")
    np.testing.assert_array_equal(m.triangles, [[0, 1, 2], [0, 2, 3]])


def test_obj_negative_indices():
    m = load_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n", "obj")
    np.testing.assert_array_equal(m.triangles, [[0, 1, 2]])


def test_ascii_ply():
    text = b"""ply
format ascii 1.0
element vertex 3
property float x
property float y
property float z
property uchar red
property uchar green
property uchar blue
element face 1
property list uchar int vertex_indices
end_header
0 0 0 255 0 0
1 0 0 0 255 0
0 1 0 0 0 255
3 0 1 2
"""
    m, c = load_mesh(text, "ply", return_colors=True)
    assert m.n_triangles == 1
    np.testing.assert_array_equal(c, [[255, 0, 0], [0, 255, 0], [0, 0, 255]])


@pytest.mark.parametrize("data, fmt, exc", [
    (b"solid nope", "ply", MeshParseError),
    (b"ply\nformat binary_little_endian 1.0\nelement vertex 3\nproperty float x\n"
     b"property float y\nproperty float z\nend_header\n\x00\x00", "ply", MeshParseError),
    (b"v 0 0\n", "obj", MeshParseError),
    (b"v 0 0 0\nv 1 0 0\nf 1 2 9\n", "obj", MeshError),
    (b"v x y z\n", "obj", MeshParseError),
])
def test_malformed_input(data, fmt, exc):
    with pytest.raises(exc):
        load_mesh(data, fmt)


def test_unknown_format():
    with pytest.raises(ValueError):
        save_mesh(tetrahedron(), fmt="stl")


@pytest.mark.parametrize("fmt", ["ply", "obj"])
def test_round_trip_preserves_mesh(fmt, tmp_path):
    m = icosphere(2, radius=0.37)
    colors = np.arange(m.n_vertices * 3).reshape(-1, 3) % 256
    path = tmp_path / f"mesh.{fmt}"
    write_mesh(path, m, colors.astype(np.uint8))
    back, c = read_mesh(path, return_colors=True)
    np.testing.assert_array_equal(back.triangles, m.triangles)
    np.testing.assert_allclose(back.vertices, m.vertices, atol=1e-6, rtol=0)
    np.testing.assert_array_equal(c, colors)
    # no temporary files are left behind
    assert [p.name for p in tmp_path.iterdir()] == [f"mesh.{fmt}"]


def test_save_is_deterministic():
    m = torus(n_major=16, n_minor=8)
    assert save_mesh(m, fmt="ply") == save_mesh(m, fmt="ply")
    assert save_mesh(m, fmt="obj") == save_mesh(m, fmt="obj")
