"""scikit-learn style wrappers around the curvature and gait analyses.

Nothing here is learned: ``fit`` only validates its arguments, so the
wrappers can sit in a :class:`sklearn.pipeline.Pipeline` next to real
estimators.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import _validation as val
from .analysis import (
    ASYMMETRIC_ANOMALOUS,
    DEFAULT_BAND,
    DEFAULT_RADIUS,
    SERIES_TYPES,
    SYMMETRIC_NORMAL,
    SYMMETRIC_THRESHOLD,
    KneeTimeSeries,
    half_cycle_difference,
    knee_time_series,
)
from .curvature import CURVATURE_TYPES, curvature_field
from .mesh import AREA_SCHEMES


class CurvatureTransformer(BaseEstimator, TransformerMixin):
    """Meshes to per-vertex curvature values.

    Parameters
    ----------
    kind : str
        One of ``gaussian``, ``mean``, ``absolute``, ``rms``, ``k1``, ``k2``.
    area_scheme : {"barycentric", "mixed-voronoi"}

    ``transform`` returns an array of shape ``(n_meshes, n_vertices)``; all
    meshes must have the same vertex count.
    """

    def __init__(self, kind="gaussian", area_scheme="barycentric"):
        self.kind = kind
        self.area_scheme = area_scheme

    def _check_params(self):
        if self.kind not in CURVATURE_TYPES:
            raise ValueError(f"unknown curvature type {self.kind!r}")
        if self.area_scheme not in AREA_SCHEMES:
            raise ValueError(f"unknown area scheme {self.area_scheme!r}")

    def fit(self, X, y=None):
        self._check_params()
        meshes = val.check_meshes(X)
        self.n_vertices_ = meshes[0].n_vertices
        return self

    def transform(self, X):
        self._check_params()
        meshes = val.check_meshes(X)
        n = {m.n_vertices for m in meshes}
        if len(n) != 1:
            raise ValueError(f"meshes have differing vertex counts {sorted(n)}")
        return np.stack([curvature_field(m, area_scheme=self.area_scheme).get(self.kind)
                         for m in meshes])


class KneeCurvatureTransformer(BaseEstimator, TransformerMixin):
    """Gait sequences to half-cycle knee-curvature differences.

    Each sequence becomes one row with the normalised RMS difference between
    the half-cycle-shifted left knee series and the right one, for K, H,
    K_abs and K_rms. The knee series are kept in ``series_``.
    """

    def __init__(self, band=DEFAULT_BAND, radius=DEFAULT_RADIUS):
        self.band = band
        self.radius = radius

    def fit(self, X, y=None):
        val.check_band(self.band)
        val.check_positive("radius", self.radius)
        return self

    def transform(self, X):
        band = val.check_band(self.band)
        radius = val.check_positive("radius", self.radius)
        self.series_ = [knee_time_series(s, band, radius) for s in val.check_sequences(X)]
        return np.array([[half_cycle_difference(ts)[k] for k in SERIES_TYPES]
                         for ts in self.series_])

    def get_feature_names_out(self, input_features=None):
        return np.array([f"half_cycle_rmsd_{k}" for k in SERIES_TYPES], dtype=object)


class GaitSymmetryClassifier(ClassifierMixin, BaseEstimator):
    """Rule-based normal/anomalous label from knee-curvature symmetry.

    Accepts gait sequences, :class:`KneeTimeSeries` or the feature rows of
    :class:`KneeCurvatureTransformer`. A gait is symmetric when every
    per-type difference is below ``threshold``.
    """

    def __init__(self, threshold=SYMMETRIC_THRESHOLD, band=DEFAULT_BAND, radius=DEFAULT_RADIUS):
        self.threshold = threshold
        self.band = band
        self.radius = radius

    def fit(self, X=None, y=None):
        val.check_positive("threshold", self.threshold)
        self.classes_ = np.array([ASYMMETRIC_ANOMALOUS, SYMMETRIC_NORMAL])
        return self

    def _features(self, X):
        if isinstance(X, np.ndarray) and X.dtype != object:
            X = np.atleast_2d(X).astype(float)
            if X.shape[1] != len(SERIES_TYPES):
                raise ValueError(f"expected {len(SERIES_TYPES)} feature columns, got {X.shape[1]}")
            return X
        items = list(X) if not isinstance(X, KneeTimeSeries) else [X]
        if items and all(isinstance(t, KneeTimeSeries) for t in items):
            return np.array([[half_cycle_difference(t)[k] for k in SERIES_TYPES] for t in items])
        knee = KneeCurvatureTransformer(self.band, self.radius)
        return knee.fit_transform(items)

    def decision_function(self, X):
        """Largest per-type difference of each gait; symmetric below ``threshold``."""
        return self._features(X).max(axis=1)

    def predict(self, X):
        check_is_fitted(self, "classes_")
        score = self.decision_function(X)
        return np.where(score < self.threshold, SYMMETRIC_NORMAL, ASYMMETRIC_ANOMALOUS)
