"""Argument checks shared by the estimator wrappers and the CLI."""

import numpy as np

from .mesh import MeshError, TriangleMesh
from .synth import GaitSequence


def check_mesh(mesh):
    if not isinstance(mesh, TriangleMesh):
        raise TypeError(f"expected a TriangleMesh, got {type(mesh).__name__}")
    return mesh


def check_meshes(X):
    """A single mesh or a non-empty sequence of meshes, as a list."""
    if isinstance(X, TriangleMesh):
        return [X]
    meshes = [check_mesh(m) for m in X]
    if not meshes:
        raise ValueError("no meshes given")
    return meshes


def check_same_topology(meshes):
    """Raise naming the first mesh whose triangles differ from the first one's."""
    tri = meshes[0].triangles
    for i, m in enumerate(meshes[1:], start=1):
        if m.triangles is not tri and not np.array_equal(m.triangles, tri):
            raise MeshError(f"frame {i} does not share the connectivity of frame 0")
    return meshes


def check_sequences(X):
    if isinstance(X, GaitSequence):
        return [X]
    seqs = list(X)
    if not seqs:
        raise ValueError("no sequences given")
    for s in seqs:
        if not isinstance(s, GaitSequence):
            raise TypeError(f"expected GaitSequence items, got {type(s).__name__}")
    return seqs


def check_band(band):
    lo, hi = (float(b) for b in band)
    if not 0 <= lo < hi <= 1:
        raise ValueError(f"band must satisfy 0 <= low < high <= 1, got {band!r}")
    return lo, hi


def check_positive(name, value):
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value
