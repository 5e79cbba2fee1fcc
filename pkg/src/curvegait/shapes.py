"""Procedural reference surfaces with known curvature."""

import numpy as np

from .mesh import TriangleMesh


def tetrahedron(edge=1.0):
    """Regular tetrahedron with outward-facing triangles."""
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    v *= edge / (2 * np.sqrt(2))
    t = [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]]
    return TriangleMesh(v, t)


def icosphere(subdivisions=3, radius=1.0):
    """Subdivided icosahedron projected onto a sphere.

    Level ``n`` has ``10 * 4**n + 2`` vertices.
    """
    phi = (1 + 5 ** 0.5) / 2
    v = [
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ]
    t = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    verts = [np.array(p, dtype=float) / np.linalg.norm(p) for p in v]
    tris = np.array(t)
    for _ in range(subdivisions):
        cache = {}

        def midpoint(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in tris.tolist():
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        tris = np.array(new)
    return TriangleMesh(np.array(verts) * radius, tris)


def _grid_triangles(nu, nv, wrap_u=False, wrap_v=False):
    """Triangulate an ``nu x nv`` vertex grid indexed ``i * nv + j``."""
    cu = nu if wrap_u else nu - 1
    cv = nv if wrap_v else nv - 1
    i, j = np.meshgrid(np.arange(cu), np.arange(cv), indexing="ij")
    i, j = i.ravel(), j.ravel()
    i1, j1 = (i + 1) % nu, (j + 1) % nv
    a, b, c, d = i * nv + j, i1 * nv + j, i1 * nv + j1, i * nv + j1
    return np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])


def plane_grid(n=11, spacing=0.1):
    """Flat ``n x n`` grid in the z=0 plane, normals along +z."""
    x, y = np.meshgrid(np.arange(n) * spacing, np.arange(n) * spacing, indexing="ij")
    v = np.stack([x.ravel(), y.ravel(), np.zeros(n * n)], 1)
    return TriangleMesh(v, _grid_triangles(n, n))


def cylinder(radius=0.05, length=0.5, n_around=64, n_along=None):
    """Open cylinder along z with outward orientation.

    ``n_along`` defaults to rings spaced roughly one arc-length apart.
    """
    if n_along is None:
        n_along = int(round(length / (2 * np.pi * radius / n_around))) + 1
    theta = 2 * np.pi * np.arange(n_around) / n_around
    z = np.linspace(0.0, length, n_along)
    zz, tt = np.meshgrid(z, theta, indexing="ij")
    v = np.stack([radius * np.cos(tt).ravel(), radius * np.sin(tt).ravel(), zz.ravel()], 1)
    return TriangleMesh(v, _grid_triangles(n_along, n_around, wrap_v=True)[:, ::-1])


def torus(major=0.5, minor=0.2, n_major=64, n_minor=32):
    """Closed torus around z; angle ``v`` = 0 on the outer equator.

    Analytic Gaussian curvature is ``cos v / (minor * (major + minor cos v))``.
    """
    u = 2 * np.pi * np.arange(n_major) / n_major
    v = 2 * np.pi * np.arange(n_minor) / n_minor
    uu, vv = np.meshgrid(u, v, indexing="ij")
    rho = major + minor * np.cos(vv)
    pts = np.stack(
        [(rho * np.cos(uu)).ravel(), (rho * np.sin(uu)).ravel(), (minor * np.sin(vv)).ravel()],
        1,
    )
    return TriangleMesh(pts, _grid_triangles(n_major, n_minor, wrap_u=True, wrap_v=True))


def torus_angle(mesh, major=0.5):
    """Minor angle ``v`` of each vertex of a torus centred at the origin."""
    p = mesh.vertices
    rho = np.hypot(p[:, 0], p[:, 1])
    return np.arctan2(p[:, 2], rho - major)
