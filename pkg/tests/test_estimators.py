import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline

from curvegait.analysis import ASYMMETRIC_ANOMALOUS, SYMMETRIC_NORMAL, knee_time_series
from curvegait.estimators import (
    CurvatureTransformer,
    GaitSymmetryClassifier,
    KneeCurvatureTransformer,
)
from curvegait.shapes import icosphere
from curvegait.synth import GaitType

EXPECTED = [SYMMETRIC_NORMAL, ASYMMETRIC_ANOMALOUS, ASYMMETRIC_ANOMALOUS]


def test_params_and_clone():
    est = GaitSymmetryClassifier(threshold=0.3, band=(0.2, 0.3))
    assert est.get_params() == {"threshold": 0.3, "band": (0.2, 0.3), "radius": 0.05}
    twin = clone(est)
    assert twin.get_params() == est.get_params() and twin is not est
    assert CurvatureTransformer().set_params(kind="mean").kind == "mean"


def test_curvature_transformer():
    meshes = [icosphere(2), icosphere(2, radius=2.0)]
    X = CurvatureTransformer("mean").fit_transform(meshes)
    assert X.shape == (2, 162)
    assert X[0].mean() == pytest.approx(2 * X[1].mean(), rel=1e-9)
    assert CurvatureTransformer().fit_transform(icosphere(1)).shape == (1, 42)


@pytest.mark.parametrize("kw", [dict(kind="ricci"), dict(area_scheme="voronoi")])
def test_curvature_transformer_bad_params(kw):
    with pytest.raises(ValueError):
        CurvatureTransformer(**kw).fit([icosphere(1)])


def test_curvature_transformer_rejects_mixed_sizes():
    with pytest.raises(ValueError, match="vertex counts"):
        CurvatureTransformer().fit_transform([icosphere(1), icosphere(2)])
    with pytest.raises(TypeError):
        CurvatureTransformer().fit_transform([np.zeros((3, 3))])


def test_classifier_from_series(gaits, gait_fields):
    series = [knee_time_series(gaits[g], fields=gait_fields[g]) for g in GaitType]
    clf = GaitSymmetryClassifier().fit()
    assert clf.predict(series).tolist() == EXPECTED
    assert clf.score(series, EXPECTED) == 1.0
    scores = clf.decision_function(series)
    assert scores[0] < 0.2 < scores[1] and scores[2] > 0.2


def test_pipeline_on_sequences(gaits):
    seqs = [gaits[g] for g in GaitType]
    pipe = make_pipeline(KneeCurvatureTransformer(), GaitSymmetryClassifier())
    assert pipe.fit(seqs, EXPECTED).predict(seqs).tolist() == EXPECTED
    knee = pipe.named_steps["kneecurvaturetransformer"]
    assert len(knee.series_) == 3
    assert knee.get_feature_names_out().tolist() == [
        "half_cycle_rmsd_gaussian", "half_cycle_rmsd_mean",
        "half_cycle_rmsd_absolute", "half_cycle_rmsd_rms"]


def test_classifier_feature_rows():
    clf = GaitSymmetryClassifier(threshold=0.5).fit()
    X = np.array([[0.1, 0.2, 0.3, 0.4], [0.1, 0.9, 0.0, 0.0]])
    assert clf.predict(X).tolist() == [SYMMETRIC_NORMAL, ASYMMETRIC_ANOMALOUS]
    with pytest.raises(ValueError, match="feature columns"):
        clf.predict(np.zeros((1, 3)))


def test_classifier_requires_fit():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        GaitSymmetryClassifier().predict(np.zeros((1, 4)))


@pytest.mark.parametrize("kw", [dict(band=(0.3, 0.2)), dict(radius=0.0), dict(band=(0.1, 1.5))])
def test_knee_transformer_bad_params(kw):
    with pytest.raises(ValueError):
        KneeCurvatureTransformer(**kw).fit([])


def test_knee_transformer_rejects_non_sequences():
    with pytest.raises(TypeError):
        KneeCurvatureTransformer().fit_transform([icosphere(1)])
    with pytest.raises(ValueError):
        KneeCurvatureTransformer().fit_transform([])
