import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvegait.curvature import (
    RMS_CONVENTIONAL,
    angle_deficits,
    curvature_field,
    derived_fields,
    gauss_bonnet_total,
    laplace_beltrami,
    principal_from_hk,
    vertex_normals,
)
from curvegait.mesh import TriangleMesh, build_one_rings
from curvegait.shapes import cylinder, icosphere, plane_grid, tetrahedron, torus, torus_angle

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=300, deadline=None)
@given(finite, finite)
def test_principal_identities(H, K):
    k1, k2, clamped = principal_from_hk(H, K)
    assert k1 >= k2
    assert abs((k1 + k2) / 2 - H) <= np.spacing(max(abs(k1), abs(k2)))
    if clamped:
        assert k1 == k2 == H
    elif K != 0:
        # cancellation in H**2 - r**2 scales with H**2
        assert abs(k1 * k2 - K) <= 1e-12 * max(abs(K), H * H)


@settings(max_examples=200, deadline=None)
@given(finite, finite)
def test_derived_fields_printed_forms(k1, k2):
    k_abs, k_rms = derived_fields(k1, k2)
    assert k_abs == abs(k1) + abs(k2)
    assert k_rms == np.sqrt(k1 * k1 + k2 * k2) / 2
    _, conventional = derived_fields(k1, k2, RMS_CONVENTIONAL)
    assert conventional == pytest.approx(np.sqrt(2) * k_rms, rel=1e-12, abs=1e-300)


def test_derived_fields_unknown_convention():
    with pytest.raises(ValueError):
        derived_fields(1.0, 1.0, "quadratic")


def test_tetrahedron_deficits():
    # each vertex meets three 60 degree corners
    d = angle_deficits(tetrahedron()).deficit
    np.testing.assert_allclose(d, np.pi, atol=1e-12)


def test_boundary_deficit_uses_pi():
    table = angle_deficits(plane_grid(n=4))
    corners = [0, 3, 12, 15]
    np.testing.assert_allclose(table.deficit[corners], np.pi / 2, atol=1e-12)
    np.testing.assert_allclose(np.delete(table.deficit, corners), 0.0, atol=1e-12)
    # a flat disc-like patch: total turning of the boundary accounts for 2 pi
    assert table.deficit.sum() == pytest.approx(2 * np.pi)


@pytest.mark.parametrize("radius", [0.3, 1.0, 2.5])
def test_gauss_bonnet_is_scale_free(radius):
    assert gauss_bonnet_total(icosphere(3, radius)) == pytest.approx(4 * np.pi, abs=1e-9)


def test_gauss_bonnet_perturbed_sphere():
    rng = np.random.default_rng(1)
    m = icosphere(3)
    m = m.with_vertices(m.vertices * rng.uniform(0.8, 1.2, (m.n_vertices, 1)))
    assert gauss_bonnet_total(m) == pytest.approx(4 * np.pi, abs=1e-9)


@pytest.mark.parametrize("radius", [0.5, 2.0])
def test_sphere_scales_inversely(radius):
    f = curvature_field(icosphere(4, radius))
    assert f.mean.mean() == pytest.approx(1 / radius, rel=0.01)
    assert f.gaussian.mean() == pytest.approx(1 / radius**2, rel=0.01)


def test_sphere_refinement_reduces_error():
    bary, voronoi = [], []
    for s in (2, 3, 4, 5):
        m = icosphere(s)
        f = curvature_field(m)
        bary.append((np.abs(f.gaussian - 1).mean(), np.abs(f.mean - 1).mean()))
        f = curvature_field(m, area_scheme="mixed-voronoi")
        voronoi.append((np.abs(f.gaussian - 1).max(), np.abs(f.mean - 1).max()))
    # barycentric areas converge on average; the valence-5 vertices keep a
    # fixed pointwise error, which mixed Voronoi areas remove
    assert np.all(np.diff(bary, axis=0) < 0)
    assert np.all(np.diff(voronoi, axis=0) < 0)
    assert voronoi[-1][0] < 1e-3


@pytest.mark.parametrize("scheme", ["barycentric", "mixed-voronoi"])
def test_torus_against_closed_form(scheme):
    R, r = 0.5, 0.2
    m = torus(R, r, 64, 32)
    f = curvature_field(m, area_scheme=scheme)
    v = torus_angle(m, R)
    K = np.cos(v) / (r * (R + r * np.cos(v)))
    H = (R + 2 * r * np.cos(v)) / (2 * r * (R + r * np.cos(v)))
    assert np.abs(f.gaussian - K).max() < 0.01 * np.abs(K).max()
    assert np.abs(f.mean - H).max() < 0.01 * H.max()


def test_sign_follows_orientation():
    m = icosphere(3)
    flipped = TriangleMesh(m.vertices, m.triangles[:, ::-1])
    assert curvature_field(m).mean.min() > 0
    assert curvature_field(flipped).mean.max() < 0
    np.testing.assert_allclose(curvature_field(flipped).gaussian, curvature_field(m).gaussian)


def test_vertex_normals_point_outward():
    m = icosphere(3)
    n = vertex_normals(m)
    np.testing.assert_allclose(np.einsum("ij,ij->i", n, m.vertices), 1.0, atol=1e-3)


def test_laplacian_of_linear_function_vanishes_inside():
    g = plane_grid(n=9)
    rings = build_one_rings(g)
    f = 2.0 * g.vertices[:, 0] - 3.0 * g.vertices[:, 1] + 0.5
    lb = laplace_beltrami(g, f)
    np.testing.assert_allclose(lb[~rings.boundary], 0.0, atol=1e-9)


def test_laplacian_accepts_vector_values():
    m = icosphere(2)
    lb = laplace_beltrami(m, m.vertices)
    assert lb.shape == (m.n_vertices, 3)
    np.testing.assert_allclose(laplace_beltrami(m, m.vertices[:, 2]), lb[:, 2])


def test_cylinder_principal_curvatures():
    c = cylinder(radius=0.05)
    f = curvature_field(c)
    inner = f.reliable
    assert f.k1[inner].mean() == pytest.approx(20.0, rel=0.05)
    assert np.abs(f.k2[inner]).mean() < 1.0
    assert f.boundary.sum() == 2 * 64


def test_field_flags_and_lookup():
    f = curvature_field(icosphere(2))
    # on a round sphere H**2 and K agree to discretisation error, so most vertices clamp
    assert f.clamped.mean() > 0.5
    np.testing.assert_array_equal(f.k1[f.clamped], f.mean[f.clamped])
    assert f.get("rms") is f.rms
    assert len(f) == 162
    with pytest.raises(ValueError, match="curvature type"):
        f.get("ricci")


def test_isolated_vertex_is_flagged():
    v = np.vstack([icosphere(1).vertices, [[5.0, 5.0, 5.0]]])
    m = TriangleMesh(v, icosphere(1).triangles)
    f = curvature_field(m)
    assert f.isolated[-1] and not f.reliable[-1]
    assert f.gaussian[-1] == 0.0 and f.mean[-1] == 0.0


def test_degenerate_triangle_is_harmless():
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [2, 0, 0]], float)
    m = TriangleMesh(v, [[0, 1, 2], [1, 0, 3]])
    f = curvature_field(m)
    assert np.all(np.isfinite(f.gaussian)) and np.all(np.isfinite(f.mean))
