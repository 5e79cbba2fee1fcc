"""OBJ and PLY reading and writing with optional per-vertex colors."""

from __future__ import annotations

import io
import os
import tempfile
from pathlib import Path

import numpy as np

from .mesh import MeshError, TriangleMesh

FORMATS = ("obj", "ply")

_PLY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


class MeshParseError(MeshError):
    """Raised when a file cannot be parsed in its declared format."""


def _check_format(fmt):
    fmt = fmt.lower().lstrip(".")
    if fmt not in FORMATS:
        raise ValueError(f"unsupported mesh format {fmt!r}")
    return fmt


def _fan(poly):
    if len(poly) < 3:
        raise MeshParseError(f"face with {len(poly)} vertices")
    return [(poly[0], poly[k], poly[k + 1]) for k in range(1, len(poly) - 1)]


def _colors_array(colors, n):
    if colors is None:
        return None
    c = np.asarray(colors)
    if c.shape != (n, 3):
        raise ValueError(f"expected {n} RGB colors, got array of shape {c.shape}")
    if np.any(c < 0) or np.any(c > 255):
        raise ValueError("colors must be in [0, 255]")
    return c.astype(np.uint8)


def load_mesh(data, fmt, return_colors=False):
    """Parse OBJ or PLY bytes into a :class:`TriangleMesh`.

    Polygons with more than three vertices are fan-triangulated from their
    first vertex. With ``return_colors`` a ``(mesh, colors)`` pair is
    returned, ``colors`` being a ``(n, 3)`` uint8 array or ``None``.
    """
    fmt = _check_format(fmt)
    if isinstance(data, str):
        data = data.encode()
    try:
        if fmt == "obj":
            v, t, c = _parse_obj(data)
        else:
            v, t, c = _parse_ply(data)
    except MeshError:
        raise
    except (ValueError, IndexError, UnicodeDecodeError) as exc:
        raise MeshParseError(f"malformed {fmt.upper()} data: {exc}") from exc
    mesh = TriangleMesh(v, t)
    return (mesh, c) if return_colors else mesh


def _parse_obj(data):
    verts, colors, tris = [], [], []
    for lineno, raw in enumerate(data.decode("utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if line[0] == "v":
            vals = [float(x) for x in line[1:]]
            if len(vals) not in (3, 4, 6, 7):
                raise MeshParseError(f"line {lineno}: bad vertex record")
            verts.append(vals[:3])
            if len(vals) >= 6:
                colors.append(vals[-3:])
        elif line[0] == "f":
            idx = []
            for tok in line[1:]:
                i = int(tok.split("/")[0])
                idx.append(i - 1 if i > 0 else len(verts) + i)
            if any(i < 0 or i >= len(verts) for i in idx):
                raise MeshError(f"line {lineno}: face index out of range")
            tris.extend(_fan(idx))
    c = None
    if colors:
        if len(colors) != len(verts):
            raise MeshParseError("colors given for only some vertices")
        c = np.clip(np.round(np.array(colors) * 255.0), 0, 255).astype(np.uint8)
    return np.array(verts, float).reshape(-1, 3), np.array(tris, int).reshape(-1, 3), c


def _parse_ply(data):
    end = data.find(b"end_header")
    if not data.startswith(b"ply") or end < 0:
        raise MeshParseError("missing PLY header")
    nl = data.find(b"\n", end)
    header = data[:end].decode("ascii").splitlines()
    body = data[nl + 1:]

    fmt, elements = None, []
    for line in header[1:]:
        tok = line.split()
        if not tok or tok[0] in ("comment", "obj_info"):
            continue
        if tok[0] == "format":
            fmt = tok[1]
        elif tok[0] == "element":
            elements.append((tok[1], int(tok[2]), []))
        elif tok[0] == "property":
            if tok[1] == "list":
                elements[-1][2].append((tok[4], _PLY_TYPES[tok[2]], _PLY_TYPES[tok[3]]))
            else:
                elements[-1][2].append((tok[2], _PLY_TYPES[tok[1]], None))
    if fmt not in ("ascii", "binary_little_endian", "binary_big_endian"):
        raise MeshParseError(f"unsupported PLY format {fmt!r}")

    if fmt == "ascii":
        tokens = iter(body.decode("ascii").split())
        read = _ply_ascii_element
    else:
        tokens = io.BytesIO(body)
        read = _ply_binary_element
    endian = ">" if fmt == "binary_big_endian" else "<"

    vert, faces = None, None
    for name, count, props in elements:
        rows = read(tokens, count, props, endian)
        if name == "vertex":
            vert = rows
        elif name == "face":
            faces = rows
    if vert is None:
        raise MeshParseError("PLY has no vertex element")
    v = np.stack([vert["x"], vert["y"], vert["z"]], 1).astype(float)
    c = None
    if all(k in vert for k in ("red", "green", "blue")):
        c = np.stack([vert["red"], vert["green"], vert["blue"]], 1).astype(np.uint8)
    tris = []
    if faces is not None:
        key = "vertex_indices" if "vertex_indices" in faces else "vertex_index"
        for poly in faces[key]:
            poly = [int(i) for i in poly]
            if any(i < 0 or i >= len(v) for i in poly):
                raise MeshError("face index out of range")
            tris.extend(_fan(poly))
    return v, np.array(tris, int).reshape(-1, 3), c


def _ply_ascii_element(tokens, count, props, endian):
    out = {p[0]: [] for p in props}
    for _ in range(count):
        for name, dtype, item in props:
            if item is None:
                out[name].append(np.dtype(dtype).type(float(next(tokens))))
            else:
                k = int(next(tokens))
                out[name].append([int(next(tokens)) for _ in range(k)])
    return {k: (np.array(v) if props[i][2] is None else v)
            for i, (k, v) in enumerate(out.items())}


def _ply_binary_element(stream, count, props, endian):
    if all(p[2] is None for p in props):
        dt = np.dtype([(n, endian + d) for n, d, _ in props])
        buf = stream.read(dt.itemsize * count)
        if len(buf) != dt.itemsize * count:
            raise MeshParseError("truncated PLY body")
        arr = np.frombuffer(buf, dtype=dt)
        return {n: arr[n] for n, _, _ in props}
    out = {p[0]: [] for p in props}
    for _ in range(count):
        for name, dtype, item in props:
            if item is None:
                d = np.dtype(endian + dtype)
                out[name].append(np.frombuffer(stream.read(d.itemsize), d)[0])
            else:
                cd = np.dtype(endian + dtype)
                k = int(np.frombuffer(stream.read(cd.itemsize), cd)[0])
                idt = np.dtype(endian + item)
                buf = stream.read(idt.itemsize * k)
                if len(buf) != idt.itemsize * k:
                    raise MeshParseError("truncated PLY body")
                out[name].append(np.frombuffer(buf, idt).tolist())
    return out


def save_mesh(mesh, colors=None, fmt="ply"):
    """Serialise a mesh to OBJ text or binary little-endian PLY bytes.

    Colors, when given, are one uint8 RGB triple per vertex; OBJ stores them
    as ``v x y z r g b`` with channels scaled to [0, 1].
    """
    fmt = _check_format(fmt)
    c = _colors_array(colors, mesh.n_vertices)
    if fmt == "obj":
        return _write_obj(mesh, c)
    return _write_ply(mesh, c)


def _write_obj(mesh, c):
    lines = []
    if c is None:
        for x, y, z in mesh.vertices.tolist():
            lines.append(f"v {x:.17g} {y:.17g} {z:.17g}")
    else:
        for (x, y, z), (r, g, b) in zip(mesh.vertices.tolist(), c.tolist()):
            lines.append(
                f"v {x:.17g} {y:.17g} {z:.17g} {r / 255:.6f} {g / 255:.6f} {b / 255:.6f}"
            )
    for a, b, d in (mesh.triangles + 1).tolist():
        lines.append(f"f {a} {b} {d}")
    return ("\n".join(lines) + "\n").encode()


def _write_ply(mesh, c):
    n, m = mesh.n_vertices, mesh.n_triangles
    head = [
        "ply",
        "format binary_little_endian 1.0",
        f"element vertex {n}",
        "property double x",
        "property double y",
        "property double z",
    ]
    fields = [("x", "<f8"), ("y", "<f8"), ("z", "<f8")]
    if c is not None:
        head += ["property uchar red", "property uchar green", "property uchar blue"]
        fields += [("red", "u1"), ("green", "u1"), ("blue", "u1")]
    head += [f"element face {m}", "property list uchar int vertex_indices", "end_header"]
    vert = np.empty(n, dtype=fields)
    vert["x"], vert["y"], vert["z"] = mesh.vertices.T
    if c is not None:
        vert["red"], vert["green"], vert["blue"] = c.T
    face = np.empty(m, dtype=[("k", "u1"), ("i", "<i4", (3,))])
    face["k"] = 3
    face["i"] = mesh.triangles
    return ("\n".join(head) + "\n").encode() + vert.tobytes() + face.tobytes()


def format_from_path(path):
    return _check_format(Path(path).suffix)


def read_mesh(path, return_colors=False):
    """Load a mesh file, inferring the format from its suffix."""
    return load_mesh(Path(path).read_bytes(), format_from_path(path), return_colors)


def atomic_write_bytes(path, payload):
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_mesh(path, mesh, colors=None):
    atomic_write_bytes(path, save_mesh(mesh, colors, format_from_path(path)))
