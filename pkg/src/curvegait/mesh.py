"""Indexed triangle meshes, one-ring adjacency, vertex areas and validation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

logger = logging.getLogger(__name__)

DEGENERATE_AREA = 1e-12
DUPLICATE_DISTANCE = 1e-9
AREA_SCHEMES = ("barycentric", "mixed-voronoi")


class MeshError(ValueError):
    """Raised for structurally invalid meshes."""


class NonManifoldError(MeshError):
    """Raised when an edge is shared by more than two triangles."""

    def __init__(self, message, edge=None):
        super().__init__(message)
        self.edge = edge


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Immutable indexed triangle surface.

    Parameters
    ----------
    vertices : array_like, shape (n, 3)
        Vertex positions in meters.
    triangles : array_like, shape (m, 3)
        Vertex indices of each triangle, counter-clockwise seen from outside.
    normals : array_like, shape (n, 3), optional
        Unit vertex normals.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    normals: np.ndarray | None = None

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64).reshape(-1, 3)
        t = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        if t.size:
            if t.min() < 0 or t.max() >= len(v):
                bad = int(np.flatnonzero((t < 0).any(1) | (t >= len(v)).any(1))[0])
                raise MeshError(
                    f"triangle {bad} references vertex outside [0, {len(v)})"
                )
            rep = (t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])
            if rep.any():
                raise MeshError(
                    f"triangle {int(np.flatnonzero(rep)[0])} repeats a vertex index"
                )
        object.__setattr__(self, "vertices", _readonly(v))
        object.__setattr__(self, "triangles", _readonly(t))
        if self.normals is not None:
            n = np.array(self.normals, dtype=np.float64).reshape(-1, 3)
            if len(n) != len(v):
                raise MeshError("normals must have one entry per vertex")
            if np.any(np.abs(np.linalg.norm(n, axis=1) - 1.0) > 1e-6):
                raise MeshError("normals must have unit length")
            object.__setattr__(self, "normals", _readonly(n))

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def with_vertices(self, vertices):
        """Return a mesh with the same connectivity and new positions."""
        mesh = TriangleMesh.__new__(TriangleMesh)
        v = np.array(vertices, dtype=np.float64).reshape(-1, 3)
        if v.shape != self.vertices.shape:
            raise MeshError("vertex count must not change")
        object.__setattr__(mesh, "vertices", _readonly(v))
        object.__setattr__(mesh, "triangles", self.triangles)
        object.__setattr__(mesh, "normals", None)
        return mesh

    def edges(self):
        """Unique undirected edges as sorted index pairs, shape (e, 2)."""
        return unique_edges(self.triangles)[0]

    def triangle_areas(self):
        return 0.5 * np.linalg.norm(self._cross(), axis=1)

    def face_normals(self):
        """Unit face normals; zero rows for degenerate triangles."""
        c = self._cross()
        n = np.linalg.norm(c, axis=1, keepdims=True)
        return np.divide(c, n, out=np.zeros_like(c), where=n > 0)

    def area(self):
        return float(self.triangle_areas().sum())

    def euler_characteristic(self):
        return self.n_vertices - len(self.edges()) + self.n_triangles

    def _cross(self):
        p = self.vertices[self.triangles]
        return np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])


def unique_edges(triangles):
    """Undirected edges of a triangle list.

    Returns
    -------
    edges : ndarray, shape (e, 2)
        Sorted vertex pairs.
    inverse : ndarray, shape (3 * m,)
        Edge index of each half-edge ``(t[:, k], t[:, (k + 1) % 3])``,
        ordered corner-major (all k=0 half-edges first).
    counts : ndarray, shape (e,)
        Number of triangles sharing each edge.
    """
    t = np.asarray(triangles, dtype=np.int64)
    half = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    half.sort(axis=1)
    edges, inverse, counts = np.unique(
        half, axis=0, return_inverse=True, return_counts=True
    )
    return edges.reshape(-1, 2), inverse.ravel(), counts


def boundary_vertex_mask(mesh):
    """Boolean mask of vertices lying on an edge used by a single triangle."""
    edges, _, counts = unique_edges(mesh.triangles)
    mask = np.zeros(mesh.n_vertices, dtype=bool)
    mask[edges[counts == 1].ravel()] = True
    return mask


@dataclass(frozen=True)
class OneRingTable:
    """Ordered one-ring neighbourhoods.

    ``neighbors[i]`` and ``faces[i]`` follow the triangle winding around
    vertex ``i``; for a boundary vertex the fan is open and has one more
    neighbour than incident faces.
    """

    neighbors: tuple
    faces: tuple
    boundary: np.ndarray

    def degree(self):
        return np.array([len(n) for n in self.neighbors])


def build_one_rings(mesh):
    """Build the ordered one-ring table of a manifold mesh.

    Raises
    ------
    NonManifoldError
        If an edge is shared by more than two triangles, or a vertex fan
        does not form a single sequence.
    """
    t = mesh.triangles
    edges, _, counts = unique_edges(t)
    if np.any(counts > 2):
        e = tuple(int(i) for i in edges[np.argmax(counts > 2)])
        raise NonManifoldError(f"non-manifold edge {e}", edge=e)

    n = mesh.n_vertices
    corner_v = t.ravel()
    order = np.argsort(corner_v, kind="stable")
    starts = np.searchsorted(corner_v[order], np.arange(n + 1))
    tri_of = order // 3
    k_of = order % 3
    nxt = t[tri_of, (k_of + 1) % 3]
    prv = t[tri_of, (k_of + 2) % 3]

    neighbors, faces = [], []
    boundary = np.zeros(n, dtype=bool)
    for v in range(n):
        lo, hi = starts[v], starts[v + 1]
        if lo == hi:
            neighbors.append(np.empty(0, dtype=np.int64))
            faces.append(np.empty(0, dtype=np.int64))
            continue
        by_next = {}
        for j in range(lo, hi):
            if nxt[j] in by_next:
                raise NonManifoldError(
                    f"inconsistent orientation or non-manifold fan at vertex {v}",
                    edge=(v, int(nxt[j])),
                )
            by_next[nxt[j]] = j
        prevs = set(prv[lo:hi].tolist())
        open_starts = [j for j in range(lo, hi) if nxt[j] not in prevs]
        if len(open_starts) > 1:
            raise NonManifoldError(f"vertex {v} has more than one open fan")
        j = open_starts[0] if open_starts else lo
        ring, fan = [int(nxt[j])], []
        for _ in range(hi - lo):
            fan.append(int(tri_of[j]))
            ring.append(int(prv[j]))
            j = by_next.get(prv[j])
            if j is None or int(tri_of[j]) == fan[0]:
                break
        if len(fan) != hi - lo:
            raise NonManifoldError(f"vertex {v} is a non-manifold vertex")
        if open_starts:
            boundary[v] = True
        else:
            ring.pop()
        neighbors.append(np.array(ring, dtype=np.int64))
        faces.append(np.array(fan, dtype=np.int64))
    boundary.setflags(write=False)
    return OneRingTable(tuple(neighbors), tuple(faces), boundary)


def corner_angles(mesh):
    """Interior angle at each triangle corner, shape (m, 3), radians."""
    p = mesh.vertices[mesh.triangles]
    out = np.empty(mesh.triangles.shape)
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        out[:, k] = np.arctan2(
            np.linalg.norm(np.cross(a, b), axis=1), np.einsum("ij,ij->i", a, b)
        )
    return out


@dataclass(frozen=True)
class VertexAreas:
    values: np.ndarray
    scheme: str


def vertex_areas(mesh, rings=None, scheme="barycentric"):
    """Per-vertex area used to normalise the discrete operators.

    ``"barycentric"`` gives each vertex a third of every incident triangle,
    ``"mixed-voronoi"`` uses Voronoi regions with the obtuse-triangle
    fallback. Both partition the total surface area.
    """
    if scheme not in AREA_SCHEMES:
        raise ValueError(f"unknown area scheme {scheme!r}; use one of {AREA_SCHEMES}")
    t = mesh.triangles
    area = mesh.triangle_areas()
    if scheme == "barycentric":
        share = np.repeat(area[:, None] / 3.0, 3, axis=1)
    else:
        share = _mixed_voronoi_shares(mesh, area)
    values = np.bincount(t.ravel(), weights=share.ravel(), minlength=mesh.n_vertices)
    return VertexAreas(_readonly(values), scheme)


def _mixed_voronoi_shares(mesh, area):
    p = mesh.vertices[mesh.triangles]
    ang = corner_angles(mesh)
    share = np.zeros_like(ang)
    cot = _cot_from_angles(ang)
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        lij = np.sum((p[:, i] - p[:, k]) ** 2, axis=1)
        lik = np.sum((p[:, j] - p[:, k]) ** 2, axis=1)
        # edge k->i is opposite corner j, edge k->j opposite corner i
        share[:, k] = (lij * cot[:, j] + lik * cot[:, i]) / 8.0
    obtuse = ang > np.pi / 2
    any_obt = obtuse.any(axis=1)
    share[any_obt] = np.where(obtuse[any_obt], 0.5, 0.25) * area[any_obt, None]
    return share


def _cot_from_angles(ang):
    s = np.sin(ang)
    return np.divide(np.cos(ang), s, out=np.zeros_like(ang), where=s > 0)


@dataclass
class ValidationReport:
    n_vertices: int
    n_edges: int
    n_triangles: int
    degenerate_triangles: list = field(default_factory=list)
    nonmanifold_edges: list = field(default_factory=list)
    duplicate_vertices: list = field(default_factory=list)
    isolated_vertices: list = field(default_factory=list)
    boundary_edges: int = 0
    euler_characteristic: int = 0

    @property
    def is_closed(self):
        return self.boundary_edges == 0

    @property
    def is_manifold(self):
        return not self.nonmanifold_edges

    @property
    def ok(self):
        return not (
            self.degenerate_triangles
            or self.nonmanifold_edges
            or self.duplicate_vertices
            or self.isolated_vertices
        )

    def to_dict(self):
        return {
            "n_vertices": self.n_vertices,
            "n_edges": self.n_edges,
            "n_triangles": self.n_triangles,
            "degenerate_triangles": self.degenerate_triangles,
            "nonmanifold_edges": self.nonmanifold_edges,
            "duplicate_vertices": self.duplicate_vertices,
            "isolated_vertices": self.isolated_vertices,
            "boundary_edges": self.boundary_edges,
            "euler_characteristic": self.euler_characteristic,
            "closed": self.is_closed,
            "manifold": self.is_manifold,
            "ok": self.ok,
        }


def validate(mesh):
    """Report structural problems without raising."""
    edges, _, counts = unique_edges(mesh.triangles)
    degenerate = np.flatnonzero(mesh.triangle_areas() <= DEGENERATE_AREA)
    pairs = cKDTree(mesh.vertices).query_pairs(DUPLICATE_DISTANCE, output_type="ndarray")
    used = np.zeros(mesh.n_vertices, dtype=bool)
    used[mesh.triangles.ravel()] = True
    report = ValidationReport(
        n_vertices=mesh.n_vertices,
        n_edges=len(edges),
        n_triangles=mesh.n_triangles,
        degenerate_triangles=degenerate.tolist(),
        nonmanifold_edges=[tuple(e) for e in edges[counts > 2].tolist()],
        duplicate_vertices=sorted(tuple(sorted(p)) for p in pairs.tolist()),
        isolated_vertices=np.flatnonzero(~used).tolist(),
        boundary_edges=int(np.sum(counts == 1)),
        euler_characteristic=mesh.n_vertices - len(edges) + mesh.n_triangles,
    )
    if not report.ok:
        logger.debug("mesh validation failed: %s", report.to_dict())
    return report
