"""Knee curvature time series, half-cycle symmetry and cycle-averaged maps."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ._parallel import ordered_map
from .curvature import curvature_field
from .export import format_float
from .mesh import build_one_rings, vertex_areas
from .synth import Side

DEFAULT_BAND = (0.25, 0.30)
DEFAULT_RADIUS = 0.05
LOWER_BODY = 0.55
SERIES_TYPES = ("gaussian", "mean", "absolute", "rms")
SERIES_COLUMNS = ("K", "H", "K_abs", "K_rms")
SYMMETRIC_THRESHOLD = 0.2
MAX_MATCH_DISTANCE = 0.10
MAX_UNMATCHED_FRACTION = 0.20

SYMMETRIC_NORMAL = "SymmetricNormal"
ASYMMETRIC_ANOMALOUS = "AsymmetricAnomalous"


class DetectionError(ValueError):
    """No candidate vertices for a knee region."""


class CorrespondenceError(ValueError):
    """Mirrored frames are too dissimilar for a vertex-wise comparison."""


def sagittal_x(mesh):
    """x coordinate of the sagittal plane: the median x of all vertices."""
    return float(np.median(mesh.vertices[:, 0]))


def _side(side):
    return side if isinstance(side, Side) else Side(str(side).capitalize())


def _on_side(mesh, side, plane=None):
    plane = sagittal_x(mesh) if plane is None else plane
    x = mesh.vertices[:, 0]
    return x < plane if side is Side.LEFT else x > plane


@dataclass(frozen=True)
class RegionSample:
    side: Side
    center: int
    members: np.ndarray
    radius: float
    band: tuple

    def center_point(self, mesh):
        return mesh.vertices[self.center]


def detect_knee_region(mesh, field, side, body_height, band=DEFAULT_BAND,
                       radius=DEFAULT_RADIUS, values=None):
    """Locate a knee area from the Gaussian curvature maximum.

    Candidates are vertices whose height lies in ``band * body_height`` on
    the requested side of the sagittal plane. The centre is the candidate
    with the largest Gaussian curvature (lowest index on ties); members are
    the same-side vertices within ``radius`` (Euclidean) of it.

    Parameters
    ----------
    values : ndarray, optional
        Field maximised instead of ``field.gaussian`` (used on averaged maps).

    Raises
    ------
    DetectionError
        If no vertex lies in the band on that side.
    """
    side = _side(side)
    lo, hi = band[0] * body_height, band[1] * body_height
    z = mesh.vertices[:, 2]
    same = _on_side(mesh, side)
    reliable = field.reliable if field is not None else np.ones(mesh.n_vertices, bool)
    cand = np.flatnonzero(same & (z >= lo) & (z <= hi) & reliable)
    if cand.size == 0:
        raise DetectionError(
            f"no {side.value.lower()} vertices in band [{band[0]:.3f}, {band[1]:.3f}] of body height"
        )
    score = field.gaussian if values is None else np.asarray(values)
    center = int(cand[np.argmax(score[cand])])
    d = np.linalg.norm(mesh.vertices - mesh.vertices[center], axis=1)
    members = np.flatnonzero((d <= radius) & same)
    return RegionSample(side, center, members, float(radius), tuple(band))


def region_means(field, region):
    """Mean K, H, K_abs, K_rms over region members, skipping flagged vertices."""
    m = region.members
    keep = m[field.reliable[m] & ~field.clamped[m]]
    if keep.size == 0:
        keep = m[field.reliable[m]]
    return np.array([field.get(k)[keep].mean() for k in SERIES_TYPES])


@dataclass
class KneeTimeSeries:
    """Averaged knee-area curvature per frame and side.

    ``values[side]`` has shape ``(n_frames, 4)`` with columns K, H, K_abs,
    K_rms.
    """

    values: dict
    labels: list
    centers: dict
    frames_per_cycle: int

    def __len__(self):
        return len(self.labels)

    def series(self, side, kind="gaussian"):
        return self.values[_side(side)][:, SERIES_TYPES.index(kind)]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("frame", "posture") + ("side",) + SERIES_COLUMNS)
        for i, label in enumerate(self.labels):
            for side in (Side.LEFT, Side.RIGHT):
                row = self.values[side][i]
                w.writerow([i, str(label) if label else "", side.value]
                           + [format_float(v) for v in row])
        return buf.getvalue()


def sequence_fields(seq, area_scheme="barycentric"):
    """Curvature fields of every frame, sharing one adjacency table."""
    rings = build_one_rings(seq.frames[0])
    return ordered_map(lambda m: curvature_field(m, rings, area_scheme), seq.frames)


def knee_time_series(seq, band=DEFAULT_BAND, radius=DEFAULT_RADIUS, fields=None):
    """Knee-area curvature means of both legs across a sequence.

    Raises
    ------
    DetectionError
        With the offending frame index in the message.
    """
    if fields is None:
        fields = sequence_fields(seq)
    values = {Side.LEFT: [], Side.RIGHT: []}
    centers = {Side.LEFT: [], Side.RIGHT: []}
    for i, (mesh, f) in enumerate(zip(seq.frames, fields)):
        for side in (Side.LEFT, Side.RIGHT):
            try:
                region = detect_knee_region(mesh, f, side, seq.body_height, band, radius)
            except DetectionError as exc:
                raise DetectionError(f"frame {i}: {exc}") from exc
            values[side].append(region_means(f, region))
            centers[side].append(region.center)
    return KneeTimeSeries(
        values={s: np.array(v) for s, v in values.items()},
        labels=list(seq.labels),
        centers={s: np.array(v) for s, v in centers.items()},
        frames_per_cycle=seq.frames_per_cycle,
    )


def half_cycle_pairs(seq, frames_per_cycle=None):
    """Frame pairs half a cycle apart: the first half of each cycle with its counterpart.

    ``seq`` is a :class:`GaitSequence`, or a frame count when
    ``frames_per_cycle`` is given.
    """
    if frames_per_cycle is None:
        n_frames, frames_per_cycle = len(seq), seq.frames_per_cycle
    else:
        n_frames = int(seq)
    if frames_per_cycle % 2:
        raise ValueError("frames_per_cycle must be even")
    half = frames_per_cycle // 2
    pairs = []
    for start in range(0, n_frames - frames_per_cycle + 1, frames_per_cycle):
        pairs.extend((start + k, start + k + half) for k in range(half))
    return pairs


@dataclass
class SymmetryEntry:
    frames: tuple
    labels: tuple
    curvature_type: str
    residual: np.ndarray
    asymmetry_index: float
    knee_offset: float
    knee_heights: dict = field(default_factory=dict)
    unmatched_fraction: float = 0.0

    def to_dict(self):
        return {
            "frames": list(self.frames),
            "labels": [str(x) if x else None for x in self.labels],
            "curvature_type": self.curvature_type,
            "asymmetry_index": self.asymmetry_index,
            "knee_offset": self.knee_offset,
            "knee_heights": self.knee_heights,
            "unmatched_fraction": self.unmatched_fraction,
        }


def mirror_match(mesh_i, mesh_j):
    """Nearest vertex of the reflected, centroid-aligned ``mesh_j`` for every vertex of ``mesh_i``.

    Returns ``(index, distance)`` arrays over ``mesh_i``'s vertices.
    """
    pj = mesh_j.vertices.copy()
    pj[:, 0] = 2 * sagittal_x(mesh_j) - pj[:, 0]
    pj += mesh_i.vertices.mean(axis=0) - pj.mean(axis=0)
    dist, idx = cKDTree(pj).query(mesh_i.vertices)
    return idx, dist


def _lower_body_mean(mesh, field_i, residual, body_height, floor=0.0):
    lower = (mesh.vertices[:, 2] - floor) < LOWER_BODY * body_height
    if field_i is not None:
        lower &= field_i.reliable
    area = vertex_areas(mesh).values
    w = area[lower]
    return float(np.sum(w * np.abs(residual[lower])) / np.sum(w))


def symmetry_report(mesh_i, field_i, mesh_j, field_j, curvature_type="gaussian",
                    body_height=1.73, band=DEFAULT_BAND, radius=DEFAULT_RADIUS,
                    frames=(None, None), labels=(None, None)):
    """Compare a frame with the mirror image of its half-cycle counterpart.

    The residual is ``c_i - c_j[match]`` on ``mesh_i``'s vertices; the
    asymmetry index is its area-weighted mean magnitude below 55% of body
    height. The knee offset is the larger vertical gap, after centroid
    alignment, between a knee of frame ``i`` and the opposite knee of
    frame ``j``.

    Raises
    ------
    CorrespondenceError
        If more than 20% of vertices have no mirrored vertex within 10 cm.
    """
    idx, dist = mirror_match(mesh_i, mesh_j)
    unmatched = float(np.mean(dist > MAX_MATCH_DISTANCE))
    if unmatched > MAX_UNMATCHED_FRACTION:
        raise CorrespondenceError(
            f"{unmatched:.0%} of vertices lack a mirrored match within {MAX_MATCH_DISTANCE} m"
        )
    ci = field_i.get(curvature_type)
    cj = field_j.get(curvature_type)
    residual = ci - cj[idx]
    index = _lower_body_mean(mesh_i, field_i, residual, body_height)

    heights = {}
    for tag, mesh, f in (("i", mesh_i, field_i), ("j", mesh_j, field_j)):
        cz = mesh.vertices[:, 2].mean()
        for side in (Side.LEFT, Side.RIGHT):
            region = detect_knee_region(mesh, f, side, body_height, band, radius)
            heights[f"{side.value.lower()}_{tag}"] = float(mesh.vertices[region.center, 2] - cz)
    offset = max(abs(heights["left_i"] - heights["right_j"]),
                 abs(heights["right_i"] - heights["left_j"]))
    return SymmetryEntry(
        frames=tuple(frames),
        labels=tuple(labels),
        curvature_type=curvature_type,
        residual=residual,
        asymmetry_index=index,
        knee_offset=float(offset),
        knee_heights=heights,
        unmatched_fraction=unmatched,
    )


def sequence_symmetry(seq, curvature_type="gaussian", fields=None, **kw):
    """Symmetry entries for every half-cycle pair of a sequence."""
    if fields is None:
        fields = sequence_fields(seq)
    out = []
    for i, j in half_cycle_pairs(seq):
        out.append(symmetry_report(
            seq.frames[i], fields[i], seq.frames[j], fields[j], curvature_type,
            seq.body_height, frames=(i, j), labels=(seq.labels[i], seq.labels[j]), **kw,
        ))
    return out


def mirror_asymmetry(mesh, values, body_height, field=None):
    """Asymmetry index of a single map against its own reflection."""
    idx, _ = mirror_match(mesh, mesh)
    values = np.asarray(values)
    return _lower_body_mean(mesh, field, values - values[idx], body_height)


@dataclass
class AverageCurvatureMap:
    """Per-vertex mean of one curvature type over the frames of a cycle.

    ``mesh`` carries the mean vertex positions over the same frames and is
    the geometry the map is displayed and analysed on.
    """

    values: np.ndarray
    mesh: object
    curvature_type: str
    frames: tuple
    reliable: np.ndarray


def average_curvature_map(seq, curvature_type="gaussian", cycle_index=0, fields=None):
    """Average a curvature field over all frames of one gait cycle."""
    frames = seq.cycle_frames(cycle_index)
    if fields is None:
        rings = build_one_rings(seq.frames[0])
        fields = {i: curvature_field(seq.frames[i], rings) for i in frames}
    stack = np.array([fields[i].get(curvature_type) for i in frames])
    reliable = np.logical_and.reduce([fields[i].reliable for i in frames])
    mean_pos = np.mean([seq.frames[i].vertices for i in frames], axis=0)
    return AverageCurvatureMap(
        values=stack.mean(axis=0),
        mesh=seq.frames[frames[0]].with_vertices(mean_pos),
        curvature_type=curvature_type,
        frames=tuple(frames),
        reliable=reliable,
    )


def knee_region_average(avg, side, body_height, band=DEFAULT_BAND, radius=DEFAULT_RADIUS,
                        absolute=True):
    """Mean of an averaged map over one knee area located on the averaged map itself."""
    region = detect_knee_region(avg.mesh, None, side, body_height, band, radius,
                                values=avg.values)
    vals = avg.values[region.members[avg.reliable[region.members]]]
    return float(np.mean(np.abs(vals) if absolute else vals))


@dataclass
class Classification:
    label: str
    score: float
    per_type: dict
    threshold: float

    def to_dict(self):
        return {
            "label": self.label,
            "score": self.score,
            "threshold": self.threshold,
            "per_type": self.per_type,
        }


def half_cycle_difference(series):
    """Normalised RMS difference between the half-cycle-shifted left series and the right one.

    The RMS of the difference is divided by the pooled RMS of both series.
    """
    fpc = series.frames_per_cycle
    if len(series) < fpc:
        raise ValueError("series shorter than one gait cycle")
    out = {}
    for k, kind in enumerate(SERIES_TYPES):
        left = np.roll(series.values[Side.LEFT][:, k], -(fpc // 2))
        right = series.values[Side.RIGHT][:, k]
        scale = np.sqrt(0.5 * np.mean(left ** 2 + right ** 2))
        rmsd = np.sqrt(np.mean((left - right) ** 2))
        out[kind] = float(rmsd / scale) if scale > 0 else 0.0
    return out


def classify_symmetry(series, threshold=SYMMETRIC_THRESHOLD):
    """Label a gait symmetric when both knees match after a half-cycle shift."""
    per_type = half_cycle_difference(series)
    score = max(per_type.values())
    label = SYMMETRIC_NORMAL if score < threshold else ASYMMETRIC_ANOMALOUS
    return Classification(label, score, per_type, threshold)
