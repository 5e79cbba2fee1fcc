"""Discrete Gaussian, mean, principal, absolute and RMS curvature fields.

Gaussian curvature comes from the angle deficit normalised by the vertex
area; mean curvature from the cotangent Laplace-Beltrami operator applied to
the vertex coordinates. Principal curvatures are recovered from the pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import (
    DEGENERATE_AREA,
    boundary_vertex_mask,
    build_one_rings,
    corner_angles,
    vertex_areas,
)

#: ``sqrt(k1**2 + k2**2) / 2``, the RMS curvature as used throughout this package.
RMS_HALF_ROOT = "half-root"
#: Conventional root-mean-square, ``sqrt((k1**2 + k2**2) / 2)``.
RMS_CONVENTIONAL = "conventional"
RMS_CONVENTION = RMS_HALF_ROOT

CURVATURE_TYPES = ("gaussian", "mean", "absolute", "rms", "k1", "k2")


@dataclass(frozen=True)
class AngleDeficitTable:
    angle_sum: np.ndarray
    deficit: np.ndarray
    boundary: np.ndarray


@dataclass(frozen=True)
class CurvatureField:
    """Per-vertex curvature values of one mesh frame.

    Units are 1/m^2 for ``gaussian`` and 1/m for the rest. ``boundary`` and
    ``isolated`` mark vertices whose values are unreliable; ``clamped`` marks
    vertices where ``H**2 < K`` and the principal curvatures were forced equal.
    """

    gaussian: np.ndarray
    mean: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    absolute: np.ndarray
    rms: np.ndarray
    clamped: np.ndarray
    boundary: np.ndarray
    isolated: np.ndarray

    def __len__(self):
        return len(self.gaussian)

    def get(self, kind):
        """Field values by name (``gaussian``, ``mean``, ``absolute``, ``rms``, ``k1``, ``k2``)."""
        if kind not in CURVATURE_TYPES:
            raise ValueError(f"unknown curvature type {kind!r}; use one of {CURVATURE_TYPES}")
        return getattr(self, kind)

    @property
    def reliable(self):
        """Vertices usable in regional aggregates."""
        return ~(self.boundary | self.isolated)


def angle_deficits(mesh, boundary=None):
    """Angle sums and deficits; boundary vertices use ``pi`` instead of ``2 pi``."""
    if boundary is None:
        boundary = boundary_vertex_mask(mesh)
    ang = corner_angles(mesh)
    ang[mesh.triangle_areas() <= DEGENERATE_AREA] = 0.0
    total = np.bincount(mesh.triangles.ravel(), weights=ang.ravel(), minlength=mesh.n_vertices)
    full = np.where(boundary, np.pi, 2 * np.pi)
    return AngleDeficitTable(total, full - total, np.asarray(boundary, dtype=bool))


def gauss_bonnet_total(mesh):
    """Sum of angle deficits; equals ``2 pi chi`` on a closed mesh."""
    return float(np.sum(np.sort(angle_deficits(mesh).deficit)))


def _safe_divide(num, den):
    ok = den > 0
    if num.ndim > 1:
        out = np.zeros_like(num)
        np.divide(num, den[:, None], out=out, where=ok[:, None])
    else:
        out = np.zeros_like(num)
        np.divide(num, den, out=out, where=ok)
    return out


def gaussian_field(mesh, rings=None, areas=None):
    """Angle-deficit Gaussian curvature per vertex (1/m^2).

    Vertices with zero area get ``K = 0``.
    """
    boundary = rings.boundary if rings is not None else None
    if areas is None:
        areas = vertex_areas(mesh)
    table = angle_deficits(mesh, boundary)
    return _safe_divide(table.deficit, areas.values)


def cotangent_weights(mesh):
    """Cotangent of the angle opposite each half-edge, shape (m, 3).

    Column ``k`` belongs to the edge joining corners ``k+1`` and ``k+2``.
    Degenerate triangles contribute zero.
    """
    ang = corner_angles(mesh)
    s = np.sin(ang)
    cot = np.divide(np.cos(ang), s, out=np.zeros_like(ang), where=s > 1e-15)
    cot[mesh.triangle_areas() <= DEGENERATE_AREA] = 0.0
    return cot


def laplace_beltrami(mesh, values, areas=None):
    """Cotangent Laplace-Beltrami of per-vertex values, normalised by vertex area.

    ``values`` may be shape (n,) or (n, d). For vertex coordinates the result
    is the mean-curvature normal ``-2 H n``.
    """
    if areas is None:
        areas = vertex_areas(mesh)
    f = np.asarray(values, dtype=float)
    flat = f.ndim == 1
    if flat:
        f = f[:, None]
    t = mesh.triangles
    cot = cotangent_weights(mesh)
    out = np.zeros_like(f)
    for k in range(3):
        i, j = t[:, (k + 1) % 3], t[:, (k + 2) % 3]
        w = cot[:, k][:, None] * (f[j] - f[i])
        np.add.at(out, i, w)
        np.add.at(out, j, -w)
    out = _safe_divide(out, 2.0 * areas.values)
    return out[:, 0] if flat else out


def vertex_normals(mesh):
    """Angle-weighted average of incident face normals."""
    ang = corner_angles(mesh)
    fn = mesh.face_normals()
    acc = np.zeros((mesh.n_vertices, 3))
    for k in range(3):
        np.add.at(acc, mesh.triangles[:, k], fn * ang[:, k:k + 1])
    n = np.linalg.norm(acc, axis=1, keepdims=True)
    return np.divide(acc, n, out=np.zeros_like(acc), where=n > 0)


def mean_field(mesh, rings=None, areas=None):
    """Signed mean curvature per vertex (1/m).

    The magnitude is half the norm of the Laplace-Beltrami of the
    coordinates; the sign is positive when that vector points against the
    outward vertex normal, so an outward-oriented sphere has ``H > 0``.
    """
    if areas is None:
        areas = vertex_areas(mesh)
    lb = laplace_beltrami(mesh, mesh.vertices, areas)
    mag = 0.5 * np.linalg.norm(lb, axis=1)
    sign = np.where(np.einsum("ij,ij->i", lb, vertex_normals(mesh)) > 0, -1.0, 1.0)
    return sign * mag


def principal_from_hk(H, K):
    """Principal curvatures from mean and Gaussian curvature.

    Returns ``(k1, k2, clamped)``. A negative discriminant ``H**2 - K`` is
    clamped to zero and flagged.
    """
    H = np.asarray(H, dtype=float)
    K = np.asarray(K, dtype=float)
    d = H * H - K
    clamped = d < 0
    root = np.sqrt(np.where(clamped, 0.0, d))
    return H + root, H - root, clamped


def derived_fields(k1, k2, convention=None):
    """Absolute and RMS curvature from the principal curvatures."""
    convention = convention or RMS_CONVENTION
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    absolute = np.abs(k1) + np.abs(k2)
    if convention == RMS_HALF_ROOT:
        rms = np.sqrt(k1 * k1 + k2 * k2) / 2
    elif convention == RMS_CONVENTIONAL:
        rms = np.sqrt((k1 * k1 + k2 * k2) / 2)
    else:
        raise ValueError(f"unknown RMS convention {convention!r}")
    return absolute, rms


def curvature_field(mesh, rings=None, area_scheme="barycentric", rms_convention=None):
    """All curvature fields of a mesh.

    Parameters
    ----------
    mesh : TriangleMesh
    rings : OneRingTable, optional
        Reused when several frames share connectivity.
    area_scheme : {"barycentric", "mixed-voronoi"}
    rms_convention : str, optional
        ``RMS_HALF_ROOT`` (default) or ``RMS_CONVENTIONAL``.
    """
    if rings is None:
        rings = build_one_rings(mesh)
    areas = vertex_areas(mesh, rings, area_scheme)
    K = gaussian_field(mesh, rings, areas)
    H = mean_field(mesh, rings, areas)
    k1, k2, clamped = principal_from_hk(H, K)
    absolute, rms = derived_fields(k1, k2, rms_convention)
    isolated = areas.values <= 0
    return CurvatureField(
        gaussian=K,
        mean=H,
        k1=k1,
        k2=k2,
        absolute=absolute,
        rms=rms,
        clamped=clamped,
        boundary=np.asarray(rings.boundary, dtype=bool),
        isolated=isolated,
    )
