"""Blue-green-red colouring of scalar fields on meshes.

Values at or below ``vmin`` are pure blue, the centre value is pure green
and values at or above ``vmax`` are pure red, with linear ramps in between.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SYMMETRIC = "symmetric"
MINMAX = "minmax"
SCALE_MODES = (SYMMETRIC, MINMAX)
DEFAULT_PERCENTILES = (2.0, 98.0)

BLUE = np.array([0, 0, 255], dtype=np.uint8)
GREEN = np.array([0, 255, 0], dtype=np.uint8)
RED = np.array([255, 0, 0], dtype=np.uint8)


@dataclass(frozen=True)
class ColorScale:
    """Value range of a colour map.

    Parameters
    ----------
    vmin, vmax : float
        Values mapped to pure blue and pure red.
    center : float
        Value mapped to pure green. In symmetric mode it must sit halfway
        between ``vmin`` and ``vmax``.
    mode : {"symmetric", "minmax"}
    gamma : float
        Exponent applied to the normalised distance from the centre.
    """

    vmin: float
    vmax: float
    center: float = 0.0
    mode: str = SYMMETRIC
    gamma: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.vmin) and np.isfinite(self.vmax)):
            raise ValueError("scale bounds must be finite")
        if not self.vmin < self.vmax:
            raise ValueError(f"vmin must be below vmax, got {self.vmin} and {self.vmax}")
        if self.mode not in SCALE_MODES:
            raise ValueError(f"unknown scale mode {self.mode!r}; use one of {SCALE_MODES}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.mode == SYMMETRIC:
            upper, lower = self.vmax - self.center, self.center - self.vmin
            if abs(upper - lower) > 1e-9 * max(abs(upper), abs(lower), 1.0):
                raise ValueError("symmetric scale needs vmax - center == center - vmin")
        elif not self.vmin <= self.center <= self.vmax:
            raise ValueError("center must lie within [vmin, vmax]")

    @classmethod
    def symmetric(cls, half_range, center=0.0, gamma=1.0):
        return cls(center - half_range, center + half_range, center, SYMMETRIC, gamma)

    def to_dict(self):
        return {"vmin": self.vmin, "vmax": self.vmax, "center": self.center,
                "mode": self.mode, "gamma": self.gamma}


def _round_half_up(x):
    return np.floor(x + 0.5).astype(np.uint8)


def map_to_color(value, scale):
    """RGB colour of one value or an array of values.

    Returns a ``uint8`` array of shape ``(..., 3)``. Out-of-range values are
    clamped; channels are rounded half up.

    Examples
    --------
    >>> s = ColorScale.symmetric(2.0)
    >>> map_to_color(0.0, s).tolist(), map_to_color(-1.0, s).tolist()
    ([0, 255, 0], [0, 128, 128])
    """
    v = np.asarray(value, dtype=float)
    c = scale.center
    below = v < c
    lo_span = c - scale.vmin
    hi_span = scale.vmax - c
    with np.errstate(divide="ignore", invalid="ignore"):
        u_lo = np.where(lo_span > 0, (c - v) / lo_span, 1.0)
        u_hi = np.where(hi_span > 0, (v - c) / hi_span, 1.0)
    u = np.clip(np.where(below, u_lo, u_hi), 0.0, 1.0)
    u = np.where(np.isnan(v), 0.0, u)
    if scale.gamma != 1.0:
        u = u ** scale.gamma
    rgb = np.empty(v.shape + (3,))
    rgb[..., 0] = np.where(below, 0.0, 255.0 * u)
    rgb[..., 1] = 255.0 * (1.0 - u)
    rgb[..., 2] = np.where(below, 255.0 * u, 0.0)
    return _round_half_up(rgb)


def auto_scale(values, mode=SYMMETRIC, center=0.0, percentiles=DEFAULT_PERCENTILES, gamma=1.0):
    """Colour scale from the 2nd and 98th percentiles of a field.

    In symmetric mode the half range is the larger distance from ``center``
    to either percentile; in minmax mode the percentiles are the bounds.
    A zero range falls back to one unit either side.

    Raises
    ------
    ValueError
        If there are no finite values.
    """
    v = np.asarray(values, dtype=float).ravel()
    v = v[np.isfinite(v)]
    if v.size == 0:
        raise ValueError("cannot scale an empty field")
    lo, hi = np.percentile(v, percentiles)
    if mode == SYMMETRIC:
        half = max(hi - center, center - lo, 0.0)
        if half <= 0:
            half = 1.0
        return ColorScale.symmetric(float(half), float(center), gamma)
    if mode == MINMAX:
        lo, hi = float(lo), float(hi)
        if hi <= lo:
            lo, hi = lo - 1.0, hi + 1.0
        return ColorScale(lo, hi, float(np.clip(center, lo, hi)), MINMAX, gamma)
    raise ValueError(f"unknown scale mode {mode!r}; use one of {SCALE_MODES}")


def pooled_scale(fields, mode=SYMMETRIC, center=0.0, **kw):
    """One scale shared by several fields, e.g. all frames of a sequence."""
    return auto_scale(np.concatenate([np.ravel(f) for f in fields]), mode, center, **kw)


def colorize_mesh(mesh, values, scale=None):
    """Per-vertex colours of a field; the scale defaults to :func:`auto_scale`."""
    values = np.asarray(values, dtype=float)
    if values.shape != (mesh.n_vertices,):
        raise ValueError(f"expected {mesh.n_vertices} values, got shape {values.shape}")
    if scale is None:
        scale = auto_scale(values)
    return map_to_color(values, scale)
