"""Procedural walking humanoid: body construction, skinning and gait trajectories.

The body is a single closed genus-0 surface swept from rings around a
skeleton (torso and head, two arms, two legs with feet). Only the left half
is constructed; the right half is its exact reflection in the sagittal plane
``x = 0``. Axes: ``x`` points to the subject's right, ``y`` forward, ``z`` up,
and the ground is ``z = 0``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .mesh import MeshError, TriangleMesh

logger = logging.getLogger(__name__)

JOINTS = (
    "pelvis", "chest", "head",
    "l_upperarm", "l_forearm", "l_hand",
    "r_upperarm", "r_forearm", "r_hand",
    "l_thigh", "l_shank", "l_foot",
    "r_thigh", "r_shank", "r_foot",
)
PARENTS = (-1, 0, 1, 1, 3, 4, 1, 6, 7, 0, 9, 10, 0, 12, 13)
_J = {name: i for i, name in enumerate(JOINTS)}

#: Patella bulge on the front of the knee, as a fraction of body height. Off by
#: default: a pronounced bulge keeps a straight knee strongly curved.
KNEE_BUMP = 0.0
#: Half-width of the thigh-to-shank skinning blend, as a fraction of body height.
KNEE_BLEND = 0.03

KNEE_RATIO = 0.285
THIGH_RATIO = 0.245
SHANK_RATIO = 0.246
UPPER_BODY_RATIO = 0.55


class Side(str, enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"

    @property
    def other(self):
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


class Phase(str, enum.Enum):
    CONTACT = "Contact"
    LOW = "Low"
    PASSING = "Passing"
    HIGH = "High"


class GaitType(str, enum.Enum):
    NORMAL = "Normal"
    LOCKED_LEFT_KNEE = "LockedLeftKnee"
    HALF_STEP = "HalfStep"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).replace("-", "").replace("_", "").lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown gait type {value!r}")

    @property
    def slug(self):
        return {"Normal": "normal", "LockedLeftKnee": "locked-left-knee",
                "HalfStep": "half-step"}[self.value]


@dataclass(frozen=True)
class PostureLabel:
    phase: Phase
    side: Side

    def __str__(self):
        return f"{self.phase.value}-{self.side.value}"

    @classmethod
    def parse(cls, text):
        phase, side = text.split("-")
        return cls(Phase(phase), Side(side))


#: The eight postures of a cycle in order; the cycle starts at right heel contact.
POSTURES = tuple(
    PostureLabel(p, s) for s in (Side.RIGHT, Side.LEFT) for p in Phase
)


@dataclass(frozen=True)
class BodyParams:
    """Body dimensions and mesh resolution.

    Segment lengths follow fixed fractions of ``height``; the knee centre
    sits at ``0.285 * height``.
    """

    height: float = 1.73
    step_length: float = 0.65
    radial_segments: int = 24
    ring_spacing: float = 0.01

    def __post_init__(self):
        if not self.height > 0:
            raise ValueError("height must be positive")
        if not 0 < self.step_length < self.height:
            raise ValueError("step_length must lie in (0, height)")
        if self.radial_segments < 8:
            raise ValueError("radial_segments must be at least 8")
        if not 0 < self.ring_spacing < 0.05 * self.height:
            raise ValueError("ring_spacing out of range")

    @property
    def knee_height(self):
        return KNEE_RATIO * self.height

    @property
    def hip_height(self):
        return self.knee_height + THIGH_RATIO * self.height

    @property
    def ankle_height(self):
        return self.knee_height - SHANK_RATIO * self.height


@dataclass(frozen=True)
class SkinWeights:
    """Linear-blend skinning data for a rest mesh.

    Attributes
    ----------
    weights : ndarray, shape (n, 15)
        Rows sum to one.
    pivots : ndarray, shape (15, 3)
        Rest position of each joint's rotation centre.
    parents : tuple of int
    mirror : ndarray, shape (n,)
        Index of each vertex's sagittal mirror partner in the rest mesh.
    markers : dict
        Named rest positions tracked through posing, each with its own
        weight row (joint centres and surface landmarks).
    """

    weights: np.ndarray
    pivots: np.ndarray
    parents: tuple
    mirror: np.ndarray
    markers: dict
    marker_weights: dict

    @property
    def n_vertices(self):
        return len(self.weights)


@dataclass(frozen=True)
class PoseAngles:
    """Joint angles in radians, given as ``(left, right)`` pairs.

    Flexion is positive when the distal segment moves forward, except the
    knee and elbow whose positive flexion bends the joint. Abduction is
    positive away from the body midline. ``pelvis`` is a translation in m.
    """

    hip_flexion: tuple = (0.0, 0.0)
    hip_abduction: tuple = (0.0, 0.0)
    knee_flexion: tuple = (0.0, 0.0)
    ankle_flexion: tuple = (0.0, 0.0)
    shoulder_flexion: tuple = (0.0, 0.0)
    elbow_flexion: tuple = (0.0, 0.0)
    pelvis: tuple = (0.0, 0.0, 0.0)

    _LIMITS = {
        "hip_flexion": (-0.8, 2.0),
        "hip_abduction": (-0.5, 0.8),
        "knee_flexion": (0.0, 2.6),
        "ankle_flexion": (-0.9, 0.6),
        "shoulder_flexion": (-1.5, 3.0),
        "elbow_flexion": (0.0, 2.6),
    }

    def check_limits(self):
        for name, (lo, hi) in self._LIMITS.items():
            for side, value in zip(("left", "right"), getattr(self, name)):
                if not lo <= value <= hi:
                    raise ValueError(
                        f"{side} {name.replace('_', ' ')} {value:.4f} rad outside [{lo}, {hi}]"
                    )

    def mirrored(self):
        """Angles with left and right exchanged and the pelvis reflected."""
        kw = {name: tuple(reversed(getattr(self, name))) for name in self._LIMITS}
        x, y, z = self.pelvis
        return PoseAngles(pelvis=(-x, y, z), **kw)

    def as_vector(self):
        out = []
        for name in self._LIMITS:
            out.extend(getattr(self, name))
        return np.array(out + list(self.pelvis))


# ---------------------------------------------------------------------------
# body construction


class _HalfBody:
    """Accumulates the left half of the body: vertices, faces, part tags."""

    def __init__(self):
        self.points = []
        self.on_plane = []
        self.part = []
        self.param = []
        self.faces = []

    def add(self, p, part, param=0.0, on_plane=False):
        p = np.array(p, dtype=float)
        if on_plane:
            p[0] = 0.0
        self.points.append(p)
        self.on_plane.append(on_plane)
        self.part.append(part)
        self.param.append(param)
        return len(self.points) - 1

    def quad(self, a, b, c, d):
        self.faces.append((a, b, c))
        self.faces.append((a, c, d))

    def strip(self, ring0, ring1, closed=True):
        n = len(ring0)
        for k in range(n if closed else n - 1):
            k1 = (k + 1) % n
            self.quad(ring0[k], ring0[k1], ring1[k1], ring1[k])

    def fan(self, ring, pole):
        n = len(ring)
        for k in range(n):
            self.faces.append((ring[k], ring[(k + 1) % n], pole))


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3 - 2 * x)


def _transport_frames(points, e1):
    """Rotation-minimising frames along a polyline starting from ``e1``."""
    pts = np.asarray(points)
    tang = np.gradient(pts, axis=0)
    tang /= np.linalg.norm(tang, axis=1, keepdims=True)
    frames = []
    u = np.asarray(e1, dtype=float)
    for t in tang:
        u = u - np.dot(u, t) * t
        u /= np.linalg.norm(u)
        frames.append((t, u, np.cross(t, u)))
    return frames


def _polyline(segments, spacing):
    """Sample a chain of straight segments and circular arcs by arc length.

    ``segments`` is a list of ``("line", start, end)`` or
    ``("arc", centre, start, end)`` tuples sharing endpoints.
    """
    pts = []
    for seg in segments:
        if seg[0] == "line":
            _, a, b = seg
            a, b = np.asarray(a, float), np.asarray(b, float)
            n = max(1, int(np.ceil(np.linalg.norm(b - a) / spacing)))
            s = np.linspace(0, 1, n + 1)[:, None]
            chunk = a + s * (b - a)
        else:
            _, c, a, b = seg
            c, a, b = (np.asarray(v, float) for v in (c, a, b))
            ra, rb = a - c, b - c
            r = np.linalg.norm(ra)
            ang = np.arccos(np.clip(np.dot(ra, rb) / (r * np.linalg.norm(rb)), -1, 1))
            n = max(2, int(np.ceil(r * ang / spacing)))
            w = np.cross(np.cross(ra, rb), ra)
            w /= np.linalg.norm(w)
            s = np.linspace(0, ang, n + 1)[:, None]
            chunk = c + np.cos(s) * ra + np.sin(s) * r * w
        pts.extend(chunk if not pts else chunk[1:])
    pts = np.array(pts)
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    return pts, arc


def _loop_angles(loop_pts, centre, e1, e2):
    """Monotone angles of a closed loop around ``centre`` by arc-length fraction."""
    d = loop_pts - centre
    a0 = np.arctan2(d[0] @ e2, d[0] @ e1)
    seg = np.linalg.norm(np.roll(loop_pts, -1, axis=0) - loop_pts, axis=1)
    frac = np.concatenate([[0.0], np.cumsum(seg)[:-1]]) / seg.sum()
    ang = np.unwrap(np.arctan2(d @ e2, d @ e1))
    sign = 1.0 if ang[len(ang) // 4] > ang[0] else -1.0
    return a0 + sign * 2 * np.pi * frac


def _sweep(body, start_loop, centreline, arc, frames, radii, angles, part,
           blend_len, param0=0.0):
    """Sweep rings along a centreline, blending out of an existing loop.

    Returns the list of ring index arrays (the first is ``start_loop``).
    """
    loop_pts = np.array([body.points[i] for i in start_loop])
    rings = [list(start_loop)]
    for k in range(1, len(centreline)):
        t, e1, e2 = frames[k]
        r1, r2 = radii(arc[k], angles)
        circle = centreline[k] + (r1 * np.cos(angles))[:, None] * e1 + (r2 * np.sin(angles))[:, None] * e2
        alpha = _smoothstep(arc[k] / blend_len) if blend_len > 0 else 1.0
        shifted = loop_pts + (centreline[k] - centreline[0])
        pts = (1 - alpha) * shifted + alpha * circle
        rings.append([body.add(p, part, param0 + arc[k]) for p in pts])
        body.strip(rings[-2], rings[-1])
    return rings


def _cap(body, ring, tip, part, param, n_rings, shape):
    """Close a ring with shrinking rings ending at a pole at ``tip``."""
    ring_pts = np.array([body.points[i] for i in ring])
    base = ring_pts.mean(axis=0)
    rings = [ring]
    for k in range(1, n_rings):
        s = k / n_rings
        scale = shape(s)
        centre = base + (tip - base) * (1 - np.cos(0.5 * np.pi * s))
        pts = centre + scale * (ring_pts - base)
        rings.append([body.add(p, part, param) for p in pts])
        body.strip(rings[-2], rings[-1])
    pole = body.add(tip, part, param)
    body.fan(rings[-1], pole)
    return pole


def _torso_levels(h, spacing):
    """Torso and head ring levels as rows of (z, half_width, half_depth, y_centre)."""
    ctrl = np.array([
        # z/h   a/h    b/h
        [0.462, 0.098, 0.063],
        [0.500, 0.100, 0.068],
        [0.540, 0.097, 0.066],
        [0.590, 0.085, 0.059],
        [0.630, 0.082, 0.058],
        [0.690, 0.090, 0.063],
        [0.740, 0.096, 0.064],
        [0.785, 0.098, 0.060],
        [0.810, 0.090, 0.054],
        [0.825, 0.065, 0.045],
        [0.838, 0.040, 0.036],
        [0.850, 0.033, 0.033],
        [0.880, 0.032, 0.032],
    ])
    z0, z1 = ctrl[0, 0] * h, ctrl[-1, 0] * h
    n = int(np.ceil((z1 - z0) / spacing))
    z = np.linspace(z0, z1, n + 1)
    fa = PchipInterpolator(ctrl[:, 0] * h, ctrl[:, 1] * h)
    fb = PchipInterpolator(ctrl[:, 0] * h, ctrl[:, 2] * h)
    rows = [(zz, float(fa(zz)), float(fb(zz)), 0.0) for zz in z]

    # head ellipsoid sitting on the neck, closed at the crown by a pole
    cz, cv, ca, cb = h - 0.065 * h, 0.065 * h, 0.045 * h, 0.056 * h
    neck_r = ctrl[-1, 1] * h
    psi0 = np.pi - np.arcsin(min(neck_r / ca, 1.0))
    zh0 = cz + cv * np.cos(psi0)
    gap = int(np.ceil((zh0 - z1) / spacing))
    for zz in np.linspace(z1, zh0, gap + 1)[1:-1]:
        rows.append((zz, neck_r, neck_r, 0.0))
    n_head = max(4, int(np.ceil(cv * psi0 / spacing)))
    for psi in np.linspace(psi0, 0.0, n_head + 1)[:-1]:
        s = np.sin(psi)
        rows.append((cz + cv * np.cos(psi), ca * s, cb * s, 0.01 * h * s))
    return np.array(rows), (0.0, 0.0, h)


def make_body(params=None):
    """Build the rest-pose body mesh and its skinning data.

    Returns
    -------
    mesh : TriangleMesh
        Closed, manifold, genus-0 surface, mirror-symmetric about ``x = 0``.
    skin : SkinWeights
    """
    params = params or BodyParams()
    h = params.height
    M = params.radial_segments
    sp = params.ring_spacing
    p = max(2, M // 3)
    Q = M - p
    A = max(8, 4 * int(round(2 * M / 3 / 4)))
    ha = hb = A // 4

    body = _HalfBody()
    levels, crown = _torso_levels(h, sp)
    theta = np.pi * np.arange(Q + 1) / Q

    # torso half rings from the crotch to the crown
    torso = []
    for li, (z, a, b, yc) in enumerate(levels):
        row = []
        for k, th in enumerate(theta):
            pt = (-a * np.sin(th), yc + b * np.cos(th), z)
            row.append(body.add(pt, "torso", z, on_plane=k in (0, Q)))
        torso.append(row)

    z_hole = 0.765 * h
    lh = int(np.argmin(np.abs(levels[:, 0] - z_hole))) - hb // 2
    kh = Q // 2 - ha // 2
    for li in range(len(torso) - 1):
        for k in range(Q):
            if lh <= li < lh + hb and kh <= k < kh + ha:
                continue
            body.quad(torso[li][k], torso[li][k + 1], torso[li + 1][k + 1], torso[li + 1][k])
    crown_idx = body.add(crown, "head", crown[2], on_plane=True)
    top = torso[-1]
    for k in range(Q):
        body.faces.append((top[k], top[k + 1], crown_idx))

    # crotch path on the sagittal plane, front to back
    z_c, b_c = levels[0, 0], levels[0, 2]
    path = [torso[0][0]]
    for j in range(1, p):
        s = j / p
        path.append(body.add((0.0, b_c * (1 - 2 * s), z_c - 0.02 * h * np.sin(np.pi * s)),
                             "crotch", z_c, on_plane=True))
    path.append(torso[0][Q])
    loop = torso[0][:] + path[-2:0:-1]
    # torso bottom closes through the legs: each leg loop has Q + p vertices
    assert len(loop) == M

    # left leg centreline: down from the crotch, a heel bend, then the foot
    hx = 0.05 * h
    z_knee, z_ankle, z_hip = params.knee_height, params.ankle_height, params.hip_height
    rho = 0.032 * h
    z_bend = z_ankle + 0.017 * h
    foot_axis = z_bend - rho
    toe_y = 0.085 * h
    leg_pts, leg_arc = _polyline([
        ("line", (-hx, 0.0, z_c), (-hx, 0.0, z_bend)),
        ("arc", (-hx, rho, z_bend), (-hx, 0.0, z_bend), (-hx, rho, foot_axis)),
        ("line", (-hx, rho, foot_axis), (-hx, toe_y, foot_axis)),
    ], sp)
    leg_frames = _transport_frames(leg_pts, (0.0, 1.0, 0.0))
    s_bend0 = z_c - z_bend
    s_bend1 = s_bend0 + 0.5 * np.pi * rho
    s_knee = z_c - z_knee
    s_ankle = z_c - z_ankle

    z_tab = np.array([z_c, 0.41 * h, 0.36 * h, 0.325 * h, z_knee, 0.26 * h,
                      0.225 * h, 0.17 * h, 0.11 * h, z_ankle])
    r_tab = np.array([0.0495, 0.0445, 0.039, 0.0335, 0.031, 0.030,
                      0.0325, 0.028, 0.021, 0.0195]) * h
    leg_r = PchipInterpolator(z_c - z_tab, r_tab)
    foot_w, foot_t = 0.026 * h, 0.0185 * h
    bump_amp, bump_w = KNEE_BUMP * h, 0.018 * h

    def leg_radii(s, ang):
        if s <= s_bend0:
            r = float(leg_r(min(s, s_ankle)))
            z = z_c - s
            front = np.maximum(np.cos(ang), 0.0) ** 2
            bump = bump_amp * np.exp(-(((z - z_knee - 0.004 * h) / bump_w) ** 2))
            return r + bump * front, np.full_like(ang, r)
        u = _smoothstep((s - s_bend0) / (s_bend1 - s_bend0 + 0.04 * h))
        ra = float(leg_r(s_ankle))
        return (1 - u) * ra + u * foot_t, (1 - u) * ra + u * foot_w

    e1, e2 = leg_frames[0][1], leg_frames[0][2]
    loop_pts = np.array([body.points[i] for i in loop])
    angles = _loop_angles(loop_pts, leg_pts[0], e1, e2)
    leg_rings = _sweep(body, loop, leg_pts, leg_arc, leg_frames, leg_radii, angles,
                       "leg", blend_len=0.06 * h)
    toe_tip = np.array([-hx, toe_y + 0.03 * h, foot_axis - 0.004 * h])
    _cap(body, leg_rings[-1], toe_tip, "leg", leg_arc[-1], max(3, int(0.03 * h / sp)),
         lambda s: np.cos(0.5 * np.pi * s) ** 0.7)

    # left arm: out of a hole in the torso side, over the shoulder, down to the hand
    hole = (
        [torso[lh][k] for k in range(kh, kh + ha)]
        + [torso[li][kh + ha] for li in range(lh, lh + hb)]
        + [torso[lh + hb][k] for k in range(kh + ha, kh, -1)]
        + [torso[li][kh] for li in range(lh + hb, lh, -1)]
    )
    hole_pts = np.array([body.points[i] for i in hole])
    hc = hole_pts.mean(axis=0)
    out = 0.012 * h
    arc_r = 0.025 * h
    x_arm = hc[0] - out - arc_r
    z_top = hc[2]
    z_sh = z_top - arc_r
    # segments sized so the fingertips hang near 0.38 h
    z_el = z_sh - 0.158 * h
    z_wr = z_el - 0.124 * h
    z_hand = z_wr - 0.06 * h
    arm_pts, arm_arc = _polyline([
        ("line", hc, (hc[0] - out, 0.0, z_top)),
        ("arc", (x_arm + 0.0, 0.0, z_sh), (hc[0] - out, 0.0, z_top), (x_arm - arc_r, 0.0, z_sh)),
        ("line", (x_arm - arc_r, 0.0, z_sh), (x_arm - arc_r, 0.0, z_hand)),
    ], sp)
    x_arm = x_arm - arc_r
    arm_frames = _transport_frames(arm_pts, (0.0, 1.0, 0.0))
    s_sh = arm_arc[np.argmin(np.abs(arm_pts[:, 2] - z_sh) + np.abs(arm_pts[:, 0] - x_arm))]
    s_el = s_sh + (z_sh - z_el)
    s_wr = s_sh + (z_sh - z_wr)
    arm_tab_s = np.array([0.0, s_sh, s_sh + 0.05 * h, s_el, s_el + 0.04 * h, s_wr,
                          s_wr + 0.03 * h, arm_arc[-1]])
    arm_tab_r1 = np.array([0.030, 0.027, 0.025, 0.020, 0.021, 0.0155, 0.024, 0.026]) * h
    arm_tab_r2 = np.array([0.030, 0.027, 0.025, 0.020, 0.021, 0.0155, 0.011, 0.010]) * h
    arm_r1 = PchipInterpolator(arm_tab_s, arm_tab_r1)
    arm_r2 = PchipInterpolator(arm_tab_s, arm_tab_r2)

    def arm_radii(s, ang):
        return np.full_like(ang, float(arm_r1(s))), np.full_like(ang, float(arm_r2(s)))

    e1, e2 = arm_frames[0][1], arm_frames[0][2]
    arm_angles = _loop_angles(hole_pts, hc, e1, e2)
    arm_rings = _sweep(body, hole, arm_pts, arm_arc, arm_frames, arm_radii, arm_angles,
                       "arm", blend_len=0.03 * h)
    hand_tip = np.array([x_arm, 0.0, z_hand - 0.025 * h])
    _cap(body, arm_rings[-1], hand_tip, "arm", arm_arc[-1], max(3, int(0.03 * h / sp)),
         lambda s: np.cos(0.5 * np.pi * s) ** 0.8)

    mesh, mirror, half_n, plane = _mirror_halves(body)
    weights = _skin_weights(body, mirror, half_n, plane, params, dict(
        z_c=z_c, s_knee=s_knee, s_ankle=s_ankle, s_bend0=s_bend0, s_sh=s_sh,
        s_el=s_el, s_wr=s_wr, z_neck=levels[0, 0] + 0.0,
    ), levels)

    pivots = np.zeros((len(JOINTS), 3))
    pivots[_J["pelvis"]] = (0.0, 0.0, z_hip)
    pivots[_J["chest"]] = (0.0, 0.0, 0.62 * h)
    pivots[_J["head"]] = (0.0, 0.0, 0.86 * h)
    for side, sx in (("l", 1.0), ("r", -1.0)):
        pivots[_J[f"{side}_upperarm"]] = (sx * x_arm, 0.0, z_sh)
        pivots[_J[f"{side}_forearm"]] = (sx * x_arm, 0.0, z_el)
        pivots[_J[f"{side}_hand"]] = (sx * x_arm, 0.0, z_wr)
        pivots[_J[f"{side}_thigh"]] = (-sx * hx, 0.0, z_hip)
        pivots[_J[f"{side}_shank"]] = (-sx * hx, 0.0, z_knee)
        pivots[_J[f"{side}_foot"]] = (-sx * hx, 0.0, z_ankle)

    markers, marker_w = {}, {}
    for side, sx in (("l", 1.0), ("r", -1.0)):
        for joint, name in (("thigh", "hip"), ("shank", "knee"), ("foot", "ankle")):
            piv = pivots[_J[f"{side}_{joint}"]]
            markers[f"{side}_{name}"] = piv.copy()
            w = np.zeros(len(JOINTS))
            w[_J[f"{side}_{joint}" if joint != "thigh" else f"{side}_thigh"]] = 1.0
            if joint == "shank":
                w[:] = 0.0
                w[_J[f"{side}_thigh"]] = 1.0
            if joint == "foot":
                w[:] = 0.0
                w[_J[f"{side}_shank"]] = 1.0
            if joint == "thigh":
                w[:] = 0.0
                w[_J["pelvis"]] = 1.0
            marker_w[f"{side}_{name}"] = w
        # surface landmarks follow the skin of their nearest vertex
        front = (-sx * hx, float(leg_radii(s_knee, np.array([0.0]))[0][0]), z_knee)
        heel = (-sx * hx, -float(leg_r(s_ankle)) - 0.2 * rho, foot_axis - 0.6 * foot_t)
        toe = (-sx * hx, toe_tip[1], toe_tip[2])
        for name, pt in (("patella", front), ("heel", heel), ("toe", toe)):
            pt = np.array(pt)
            nearest = int(np.argmin(np.linalg.norm(mesh.vertices - pt, axis=1)))
            markers[f"{side}_{name}"] = mesh.vertices[nearest].copy()
            marker_w[f"{side}_{name}"] = weights[nearest].copy()

    skin = SkinWeights(
        weights=weights,
        pivots=pivots,
        parents=PARENTS,
        mirror=mirror,
        markers=markers,
        marker_weights=marker_w,
    )
    return mesh, skin


def _mirror_halves(body):
    """Reflect the left half into a full closed mesh.

    Returns the mesh, the mirror permutation, the half-vertex count and
    the on-plane mask of the half.
    """
    _compact(body)
    half = np.array(body.points)
    plane = np.array(body.on_plane)
    n = len(half)
    off_idx = np.flatnonzero(~plane)
    right_of = np.arange(n)
    right_of[off_idx] = n + np.arange(len(off_idx))
    right = half[off_idx] * np.array([-1.0, 1.0, 1.0])
    verts = np.vstack([half, right])

    left_faces = np.array(body.faces)
    right_faces = right_of[left_faces][:, ::-1]
    faces = np.vstack([left_faces, right_faces])

    mirror = np.arange(len(verts))
    mirror[off_idx] = right_of[off_idx]
    mirror[right_of[off_idx]] = off_idx
    faces = _orient(faces, len(verts))
    mesh = TriangleMesh(verts, faces)
    p = mesh.vertices[mesh.triangles]
    vol = np.einsum("ij,ij->i", p[:, 0], np.cross(p[:, 1], p[:, 2])).sum()
    if vol < 0:
        mesh = TriangleMesh(verts, faces[:, ::-1])
    return mesh, mirror, n, plane


def _compact(body):
    """Drop vertices no face uses (the interior of the arm holes)."""
    used = np.zeros(len(body.points), dtype=bool)
    used[np.array(body.faces).ravel()] = True
    remap = np.cumsum(used) - 1
    keep = np.flatnonzero(used)
    for name in ("points", "on_plane", "part", "param"):
        values = getattr(body, name)
        setattr(body, name, [values[i] for i in keep])
    body.faces = [tuple(int(remap[i]) for i in f) for f in body.faces]


def _orient(faces, n_vertices):
    """Flip faces so every interior edge is traversed in opposite directions."""
    from collections import deque

    faces = faces.copy()
    edge_faces = {}
    for f, (a, b, c) in enumerate(faces.tolist()):
        for u, v in ((a, b), (b, c), (c, a)):
            edge_faces.setdefault((min(u, v), max(u, v)), []).append(f)
    seen = np.zeros(len(faces), dtype=bool)
    for seed in range(len(faces)):
        if seen[seed]:
            continue
        seen[seed] = True
        queue = deque([seed])
        while queue:
            f = queue.popleft()
            a, b, c = faces[f]
            for u, v in ((a, b), (b, c), (c, a)):
                for g in edge_faces[(min(u, v), max(u, v))]:
                    if g == f or seen[g]:
                        continue
                    ga, gb, gc = faces[g]
                    same = (u, v) in ((ga, gb), (gb, gc), (gc, ga))
                    if same:
                        faces[g] = faces[g][::-1]
                    seen[g] = True
                    queue.append(g)
    return faces


def _skin_weights(body, mirror, half_n, plane, params, marks, levels):
    h = params.height
    half = np.array(body.points)
    part = np.array(body.part)
    param = np.array(body.param)
    n_half = len(half)
    W = np.zeros((n_half, len(JOINTS)))

    z = half[:, 2]
    z_c = marks["z_c"]
    waist = 0.62 * h
    neck = 0.845 * h
    # trunk: pelvis below the waist, chest above, head above the neck
    chest_f = _smoothstep((z - (waist - 0.04 * h)) / (0.08 * h))
    head_f = _smoothstep((z - (neck - 0.01 * h)) / (0.03 * h))
    trunk = np.stack([(1 - chest_f), chest_f * (1 - head_f), chest_f * head_f], 1)

    # pelvis to thigh across the groin; split between thighs by lateral position
    thigh_f = _smoothstep(((z_c + 0.03 * h) - z) / (0.09 * h))
    left_f = np.clip(0.5 - half[:, 0] / (0.02 * h), 0.0, 1.0)
    is_trunk = np.isin(part, ("torso", "head", "crotch"))
    W[is_trunk, 0:3] = trunk[is_trunk] * (1 - thigh_f[is_trunk, None])
    W[is_trunk, _J["l_thigh"]] = thigh_f[is_trunk] * left_f[is_trunk]
    W[is_trunk, _J["r_thigh"]] = thigh_f[is_trunk] * (1 - left_f[is_trunk])

    leg = part == "leg"
    s = param[leg]
    kw = KNEE_BLEND * h
    aw = 0.022 * h
    to_shank = _smoothstep((s - (marks["s_knee"] - kw)) / (2 * kw))
    to_foot = _smoothstep((s - (marks["s_ankle"] - 0.3 * aw)) / (2 * aw))
    top = thigh_f[leg]
    Wl = np.zeros((leg.sum(), len(JOINTS)))
    Wl[:, 0] = 1 - top
    Wl[:, _J["l_thigh"]] = top * (1 - to_shank)
    Wl[:, _J["l_shank"]] = top * to_shank * (1 - to_foot)
    Wl[:, _J["l_foot"]] = top * to_shank * to_foot
    W[leg] = Wl

    arm = part == "arm"
    s = param[arm]
    to_upper = _smoothstep(s / (marks["s_sh"] + 0.02 * h))
    ew = 0.025 * h
    to_fore = _smoothstep((s - (marks["s_el"] - ew)) / (2 * ew))
    to_hand = _smoothstep((s - (marks["s_wr"] - 0.015 * h)) / (0.03 * h))
    Wa = np.zeros((arm.sum(), len(JOINTS)))
    Wa[:, _J["chest"]] = 1 - to_upper
    Wa[:, _J["l_upperarm"]] = to_upper * (1 - to_fore)
    Wa[:, _J["l_forearm"]] = to_upper * to_fore * (1 - to_hand)
    Wa[:, _J["l_hand"]] = to_upper * to_fore * to_hand
    W[arm] = Wa

    W /= W.sum(axis=1, keepdims=True)

    # right half by swapping left/right joint columns
    swap = np.arange(len(JOINTS))
    for name in JOINTS:
        if name.startswith("l_"):
            swap[_J[name]] = _J["r_" + name[2:]]
            swap[_J["r_" + name[2:]]] = _J[name]
    off = np.flatnonzero(~plane)
    full = np.vstack([W, W[off][:, swap]])
    return full


# ---------------------------------------------------------------------------
# posing


def _rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def _rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])


def joint_transforms(skin, angles):
    """World rotation and translation ``(R, t)`` of every joint, ``x -> R x + t``."""
    local = [np.eye(3) for _ in JOINTS]
    for i, side in enumerate(("l", "r")):
        abd = angles.hip_abduction[i] * (1.0 if side == "l" else -1.0)
        local[_J[f"{side}_thigh"]] = _rot_y(abd) @ _rot_x(angles.hip_flexion[i])
        local[_J[f"{side}_shank"]] = _rot_x(-angles.knee_flexion[i])
        local[_J[f"{side}_foot"]] = _rot_x(angles.ankle_flexion[i])
        local[_J[f"{side}_upperarm"]] = _rot_x(angles.shoulder_flexion[i])
        local[_J[f"{side}_forearm"]] = _rot_x(angles.elbow_flexion[i])
    R = np.zeros((len(JOINTS), 3, 3))
    t = np.zeros((len(JOINTS), 3))
    for j, parent in enumerate(skin.parents):
        piv = skin.pivots[j]
        lt = piv - local[j] @ piv
        if parent < 0:
            R[j] = local[j]
            t[j] = lt + np.asarray(angles.pelvis, dtype=float)
        else:
            R[j] = R[parent] @ local[j]
            t[j] = R[parent] @ lt + t[parent]
    return R, t


def _blend(points, weights, R, t):
    moved = np.einsum("jab,nb->nja", R, points) + t[None]
    return np.einsum("nj,nja->na", weights, moved)


def pose_body(rest, skin, angles):
    """Linear-blend skinning of the rest mesh into a pose.

    Raises
    ------
    ValueError
        If an angle is outside its joint limit.
    MeshError
        If the skinning data does not match the mesh.
    """
    if skin.n_vertices != rest.n_vertices:
        raise MeshError("skin weights do not match the rest mesh")
    angles.check_limits()
    R, t = joint_transforms(skin, angles)
    if not np.any(angles.as_vector()):
        return rest.with_vertices(rest.vertices.copy())
    return rest.with_vertices(_blend(rest.vertices, skin.weights, R, t))


def pose_markers(skin, angles):
    """Positions of the named markers in a pose."""
    R, t = joint_transforms(skin, angles)
    names = sorted(skin.markers)
    pts = np.array([skin.markers[n] for n in names])
    w = np.array([skin.marker_weights[n] for n in names])
    return dict(zip(names, _blend(pts, w, R, t)))


# ---------------------------------------------------------------------------
# gait trajectories

_KEY_PHASES = np.arange(9) / 8
# right leg at its own phase; cycle starts at right heel contact (degrees)
_HIP_KEYS = np.array([20.0, 16.0, 2.0, -10.0, -14.0, -4.0, 14.0, 24.0, 20.0])
_KNEE_KEYS = np.array([3.0, 16.0, 7.0, 4.0, 28.0, 55.0, 58.0, 22.0, 3.0])
_ANKLE_KEYS = np.array([0.0, -4.0, 6.0, -6.0, 4.0, -8.0, 4.0, 3.0, 0.0])
_SHOULDER_KEYS = -0.7 * (_HIP_KEYS - 6.0)
_ELBOW_KEYS = 15.0 + 0.4 * (_HIP_KEYS - 6.0)

# half-step: the right foot leads throughout and lifts its knee in swing; the
# left is brought up behind it and stays loaded with a bent knee in stance
_HS_FRONT_HIP = np.array([14.0, 12.0, 8.0, 4.0, 4.0, 22.0, 36.0, 24.0, 14.0])
_HS_FRONT_KNEE = np.array([3.0, 12.0, 6.0, 4.0, 10.0, 24.0, 46.0, 30.0, 3.0])
_HS_REAR_HIP = np.array([0.0, -2.0, -5.0, -8.0, -10.0, -6.0, 4.0, 4.0, 0.0])
_HS_REAR_KNEE = np.array([14.0, 30.0, 45.0, 32.0, 20.0, 24.0, 30.0, 12.0, 14.0])

_SPLINES = {
    name: CubicSpline(_KEY_PHASES, np.radians(keys), bc_type="periodic")
    for name, keys in (
        ("hip", _HIP_KEYS), ("knee", _KNEE_KEYS), ("ankle", _ANKLE_KEYS),
        ("shoulder", _SHOULDER_KEYS), ("elbow", _ELBOW_KEYS),
        ("front_hip", _HS_FRONT_HIP), ("front_knee", _HS_FRONT_KNEE),
        ("rear_hip", _HS_REAR_HIP), ("rear_knee", _HS_REAR_KNEE),
    )
}

PELVIS_SWAY = 0.012
DEFAULT_ABDUCTION_PEAK = np.radians(15.0)
DEFAULT_STRIDE_FRACTION = 0.5
#: Left swing phase interval (own phase) used for the locked-knee lateral arc.
SWING = (0.55, 1.0)


def _leg(phase, hip_scale):
    return (
        hip_scale * float(_SPLINES["hip"](phase)),
        float(_SPLINES["knee"](phase)),
        float(_SPLINES["ankle"](phase)),
    )


def _phase_pair(phase):
    phase = float(phase) % 1.0
    return (phase + 0.5) % 1.0, phase


def gait_angles(gait_type, phase, *, hip_scale=1.0, abduction_peak=DEFAULT_ABDUCTION_PEAK):
    """Joint angles of one gait at a cycle phase in ``[0, 1)``.

    Phase 0 is right heel contact; the left leg runs half a cycle behind.
    ``hip_scale`` scales the sagittal hip excursion (tuned to the step
    length, or to the shortened step of the half-step gait) and
    ``abduction_peak`` is the locked leg's maximal lateral swing.
    The vertical pelvis offset is left at zero.
    """
    gait_type = GaitType.parse(gait_type)
    pl, pr = _phase_pair(phase)
    hip_l, knee_l, ankle_l = _leg(pl, hip_scale)
    hip_r, knee_r, ankle_r = _leg(pr, hip_scale)
    abd = (0.0, 0.0)

    if gait_type is GaitType.LOCKED_LEFT_KNEE:
        knee_l = 0.0
        lo, hi = SWING
        if lo <= pl < hi:
            abd = (abduction_peak * np.sin(np.pi * (pl - lo) / (hi - lo)) ** 2, 0.0)
        ankle_l = max(ankle_l, 0.0)
    elif gait_type is GaitType.HALF_STEP:
        hip_r = hip_scale * float(_SPLINES["front_hip"](pr))
        knee_r = float(_SPLINES["front_knee"](pr))
        hip_l = hip_scale * float(_SPLINES["rear_hip"](pl))
        knee_l = float(_SPLINES["rear_knee"](pl))
        ankle_r, ankle_l = 0.5 * ankle_r, 0.5 * ankle_l

    sh_l, sh_r = float(_SPLINES["shoulder"](pl)), float(_SPLINES["shoulder"](pr))
    el_l, el_r = float(_SPLINES["elbow"](pl)), float(_SPLINES["elbow"](pr))
    sway = PELVIS_SWAY * np.sin(2 * np.pi * (float(phase) % 1.0))
    return PoseAngles(
        hip_flexion=(hip_l, hip_r),
        hip_abduction=abd,
        knee_flexion=(knee_l, knee_r),
        ankle_flexion=(ankle_l, ankle_r),
        shoulder_flexion=(sh_l, sh_r),
        elbow_flexion=(el_l, el_r),
        pelvis=(sway, 0.0, 0.0),
    )


def posture_at(phase):
    """Canonical posture label of a phase, or ``None`` between postures."""
    k = float(phase) * 8
    if abs(k - round(k)) > 1e-9:
        return None
    return POSTURES[int(round(k)) % 8]


def ground_offset(rest, skin, angles):
    """Vertical pelvis offset that puts the lowest vertex on ``z = 0``."""
    posed = pose_body(rest, skin, replace(angles, pelvis=(angles.pelvis[0], angles.pelvis[1], 0.0)))
    return -float(posed.vertices[:, 2].min())


def step_length_at_contact(rest, skin, hip_scale, gait_type=GaitType.NORMAL):
    """Heel-to-heel distance along the walking direction at right contact."""
    ang = gait_angles(gait_type, 0.0, hip_scale=hip_scale)
    m = pose_markers(skin, ang)
    return float(m["r_heel"][1] - m["l_heel"][1])


def tune_hip_scale(rest, skin, step_length, lo=0.2, hi=2.5, tol=1e-6, gait_type=GaitType.NORMAL):
    """Bisection on the hip excursion scale to reach ``step_length``."""
    def step(scale):
        return step_length_at_contact(rest, skin, scale, gait_type)

    f_lo = step(lo) - step_length
    f_hi = step(hi) - step_length
    if f_lo * f_hi > 0:
        raise ValueError(f"step length {step_length} m not reachable")
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        f_mid = step(mid) - step_length
        if abs(f_mid) < tol:
            break
        if f_mid * f_lo > 0:
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return mid


@dataclass
class GaitSequence:
    """Topology-consistent frames of a synthesised walk.

    ``labels`` holds one :class:`PostureLabel` per frame, ``None`` for frames
    between the eight canonical postures. ``markers`` maps marker names to
    arrays of shape ``(n_frames, 3)``.
    """

    frames: list
    labels: list
    frames_per_cycle: int
    gait_type: GaitType
    body_height: float = 1.73
    step_length: float = 0.65
    angles: list = field(default_factory=list)
    markers: dict = field(default_factory=dict)
    mirror: np.ndarray | None = None

    def __post_init__(self):
        if self.frames_per_cycle % 2:
            raise ValueError("frames_per_cycle must be even")
        if len(self.labels) != len(self.frames):
            raise ValueError("one label per frame required")
        tri = self.frames[0].triangles if self.frames else None
        for i, f in enumerate(self.frames):
            if f.triangles is not tri and not np.array_equal(f.triangles, tri):
                raise MeshError(f"frame {i} does not share the sequence connectivity")

    def __len__(self):
        return len(self.frames)

    @property
    def cycles(self):
        return len(self.frames) // self.frames_per_cycle

    def cycle_frames(self, cycle):
        if not 0 <= cycle < self.cycles:
            raise IndexError(f"cycle {cycle} out of range [0, {self.cycles})")
        lo = cycle * self.frames_per_cycle
        return list(range(lo, lo + self.frames_per_cycle))


def synth_gait(params=None, gait_type=GaitType.NORMAL, cycles=2, frames_per_cycle=8, *,
               noise=0.0, seed=0, abduction_peak=DEFAULT_ABDUCTION_PEAK,
               stride_fraction=DEFAULT_STRIDE_FRACTION, body=None):
    """Synthesise a walking sequence.

    Parameters
    ----------
    params : BodyParams, optional
    gait_type : GaitType or str
    cycles : int
        Number of gait cycles, at least 1.
    frames_per_cycle : int
        Even, at least 8.
    noise : float
        Standard deviation (m) of i.i.d. vertex jitter along the normals.
    seed : int
        Seed of the jitter generator.
    abduction_peak : float
        Peak hip abduction in degrees.
    stride_fraction : float
        Half-step only: target step as a fraction of ``params.step_length``.
    body : tuple, optional
        Pre-built ``(mesh, skin)`` from :func:`make_body`.
    """
    params = params or BodyParams()
    gait_type = GaitType.parse(gait_type)
    if cycles < 1:
        raise ValueError("cycles must be at least 1")
    if frames_per_cycle < 8 or frames_per_cycle % 2:
        raise ValueError("frames_per_cycle must be even and at least 8")
    rest, skin = body if body is not None else make_body(params)
    if gait_type is GaitType.HALF_STEP:
        if not 0 < stride_fraction <= 1:
            raise ValueError("stride_fraction must be in (0, 1]")
        scale = tune_hip_scale(rest, skin, stride_fraction * params.step_length,
                               gait_type=gait_type)
    else:
        scale = tune_hip_scale(rest, skin, params.step_length)

    one_cycle = []
    for i in range(frames_per_cycle):
        phase = i / frames_per_cycle
        ang = gait_angles(gait_type, phase, hip_scale=scale, abduction_peak=abduction_peak)
        ang = replace(ang, pelvis=(ang.pelvis[0], ang.pelvis[1], ground_offset(rest, skin, ang)))
        one_cycle.append((ang, pose_body(rest, skin, ang), pose_markers(skin, ang), posture_at(phase)))

    rng = np.random.default_rng(seed)
    frames, labels, angles = [], [], []
    markers = {name: [] for name in skin.markers}
    for c in range(cycles):
        for ang, mesh, mk, label in one_cycle:
            if noise > 0:
                from .curvature import vertex_normals

                jitter = rng.normal(0.0, noise, mesh.n_vertices)[:, None] * vertex_normals(mesh)
                mesh = mesh.with_vertices(mesh.vertices + jitter)
            frames.append(mesh)
            labels.append(label)
            angles.append(ang)
            for name, pt in mk.items():
                markers[name].append(pt)
    logger.debug("synthesised %s: %d frames, hip scale %.4f", gait_type.value, len(frames), scale)
    return GaitSequence(
        frames=frames,
        labels=labels,
        frames_per_cycle=frames_per_cycle,
        gait_type=gait_type,
        body_height=params.height,
        step_length=params.step_length,
        angles=angles,
        markers={k: np.array(v) for k, v in markers.items()},
        mirror=skin.mirror,
    )
