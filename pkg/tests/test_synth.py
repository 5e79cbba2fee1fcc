import numpy as np
import pytest
from dataclasses import replace

from curvegait.mesh import validate
from curvegait.synth import (
    KNEE_RATIO,
    UPPER_BODY_RATIO,
    BodyParams,
    GaitType,
    Phase,
    PoseAngles,
    PostureLabel,
    Side,
    gait_angles,
    pose_body,
    pose_markers,
    posture_at,
    synth_gait,
)

REFLECT = np.array([-1.0, 1.0, 1.0])


def test_rest_body_is_closed_genus_zero(body):
    rest, _ = body
    rep = validate(rest)
    assert rep.ok and rep.is_closed
    assert rest.euler_characteristic() == 2
    assert rest.vertices[:, 2].max() == pytest.approx(1.73)


def test_rest_body_mirror_is_exact(body):
    rest, skin = body
    np.testing.assert_array_equal(rest.vertices[skin.mirror] * REFLECT, rest.vertices)
    np.testing.assert_array_equal(skin.mirror[skin.mirror], np.arange(rest.n_vertices))


def test_skin_weights(body):
    rest, skin = body
    assert skin.weights.shape == (rest.n_vertices, 15)
    np.testing.assert_allclose(skin.weights.sum(axis=1), 1.0, atol=1e-12)
    assert skin.weights.min() >= 0
    assert skin.markers["l_knee"][2] == pytest.approx(KNEE_RATIO * 1.73)
    assert skin.markers["l_knee"][0] < 0 < skin.markers["r_knee"][0]


def test_zero_pose_is_identity(body):
    rest, skin = body
    np.testing.assert_array_equal(pose_body(rest, skin, PoseAngles()).vertices, rest.vertices)


def test_mirrored_pose_reflects_mesh(body):
    rest, skin = body
    ang = gait_angles(GaitType.NORMAL, 0.3)
    a = pose_body(rest, skin, ang).vertices
    b = pose_body(rest, skin, ang.mirrored()).vertices
    np.testing.assert_allclose(a[skin.mirror] * REFLECT, b, atol=1e-12)


def test_joint_limits_enforced(body):
    rest, skin = body
    with pytest.raises(ValueError, match="knee flexion"):
        pose_body(rest, skin, PoseAngles(knee_flexion=(-0.2, 0.0)))


def test_knee_flexion_moves_only_the_leg(body):
    rest, skin = body
    bent = pose_body(rest, skin, PoseAngles(knee_flexion=(1.0, 0.0))).vertices
    moved = np.linalg.norm(bent - rest.vertices, axis=1) > 1e-9
    assert moved.any()
    assert rest.vertices[moved, 2].max() < 0.4 * 1.73
    assert np.all(rest.vertices[moved, 0] < 0)


def test_normal_gait_half_cycle_mirror(gaits):
    seq = gaits[GaitType.NORMAL]
    half = seq.frames_per_cycle // 2
    for i in range(half):
        a = seq.frames[i].vertices
        b = seq.frames[i + half].vertices
        np.testing.assert_allclose(a[seq.mirror] * REFLECT, b, atol=1e-9)


@pytest.mark.parametrize("gait", list(GaitType))
def test_frames_touch_the_ground(gaits, gait):
    for f in gaits[gait].frames:
        assert f.vertices[:, 2].min() == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("gait, step", [(GaitType.NORMAL, 0.65), (GaitType.HALF_STEP, 0.325)])
def test_step_length_at_contact(gaits, gait, step):
    mk = gaits[gait].markers
    assert mk["r_heel"][0, 1] - mk["l_heel"][0, 1] == pytest.approx(step, abs=1e-4)


def test_locked_knee_keeps_normal_hip_excursion(gaits):
    normal, locked = gaits[GaitType.NORMAL], gaits[GaitType.LOCKED_LEFT_KNEE]
    for a, b in zip(normal.angles, locked.angles):
        assert a.hip_flexion == b.hip_flexion
        assert a.knee_flexion[1] == b.knee_flexion[1]


def test_locked_knee_stays_straight(gaits):
    seq = gaits[GaitType.LOCKED_LEFT_KNEE]
    assert all(a.knee_flexion[0] == 0.0 for a in seq.angles)
    assert max(a.knee_flexion[1] for a in seq.angles) > 0.8
    # the straight leg clears the ground by swinging outward
    assert max(a.hip_abduction[0] for a in seq.angles) > 0.2


def test_half_step_right_foot_leads(gaits):
    mk = gaits[GaitType.HALF_STEP].markers
    assert np.all(mk["r_heel"][:, 1] - mk["l_heel"][:, 1] >= -1e-9)


@pytest.mark.parametrize("gait", [GaitType.LOCKED_LEFT_KNEE, GaitType.HALF_STEP])
def test_upper_body_matches_normal(body, gaits, gait):
    rest, _ = body
    upper = rest.vertices[:, 2] > UPPER_BODY_RATIO * 1.73
    normal, other = gaits[GaitType.NORMAL], gaits[gait]
    for i in range(normal.frames_per_cycle):
        dz = normal.angles[i].pelvis[2] - other.angles[i].pelvis[2]
        shifted = other.frames[i].vertices[upper] + [0.0, 0.0, dz]
        np.testing.assert_allclose(shifted, normal.frames[i].vertices[upper], atol=1e-6)


def test_posture_labels(gaits):
    seq = gaits[GaitType.NORMAL]
    assert seq.labels[0] == PostureLabel(Phase.CONTACT, Side.RIGHT)
    assert seq.labels[4] == PostureLabel(Phase.CONTACT, Side.LEFT)
    assert str(seq.labels[2]) == "Passing-Right"
    assert PostureLabel.parse("High-Left") == seq.labels[7]
    assert posture_at(1 / 16) is None
    assert seq.cycles == 2 and seq.cycle_frames(1) == list(range(8, 16))
    with pytest.raises(IndexError):
        seq.cycle_frames(2)


def test_finer_sampling_keeps_canonical_postures(body):
    seq = synth_gait(body=body, cycles=1, frames_per_cycle=16)
    assert len(seq) == 16
    assert [str(l) for l in seq.labels[::2]] == [str(l) for l in synth_gait(body=body, cycles=1).labels]
    assert all(l is None for l in seq.labels[1::2])


def test_noise_is_seeded(body):
    a = synth_gait(body=body, cycles=1, noise=0.002, seed=3)
    b = synth_gait(body=body, cycles=1, noise=0.002, seed=3)
    c = synth_gait(body=body, cycles=1, noise=0.002, seed=4)
    clean = synth_gait(body=body, cycles=1)
    np.testing.assert_array_equal(a.frames[5].vertices, b.frames[5].vertices)
    assert not np.array_equal(a.frames[5].vertices, c.frames[5].vertices)
    d = np.linalg.norm(a.frames[5].vertices - clean.frames[5].vertices, axis=1)
    assert np.sqrt(np.mean(d**2)) == pytest.approx(0.002, rel=0.05)


def test_gait_type_parse():
    assert GaitType.parse("locked-left-knee") is GaitType.LOCKED_LEFT_KNEE
    assert GaitType.parse("HalfStep") is GaitType.HALF_STEP
    assert GaitType.HALF_STEP.slug == "half-step"
    with pytest.raises(ValueError):
        GaitType.parse("hopping")


@pytest.mark.parametrize("kw", [
    dict(frames_per_cycle=7), dict(frames_per_cycle=6), dict(cycles=0),
    dict(gait_type=GaitType.HALF_STEP, stride_fraction=1.5),
])
def test_synth_rejects_bad_arguments(body, kw):
    with pytest.raises(ValueError):
        synth_gait(body=body, **kw)


@pytest.mark.parametrize("kw", [dict(height=-1.0), dict(step_length=2.0), dict(radial_segments=4),
                                dict(ring_spacing=0.5)])
def test_body_params_validated(kw):
    with pytest.raises(ValueError):
        BodyParams(**kw)


def test_markers_follow_pose(body):
    rest, skin = body
    ang = gait_angles(GaitType.NORMAL, 0.0)
    mk = pose_markers(skin, replace(ang, pelvis=(0.0, 0.0, 0.0)))
    assert set(mk) == set(skin.markers)
    # at right contact the right heel is ahead of the left
    assert mk["r_heel"][1] > mk["l_heel"][1]


def test_normal_left_is_right_half_a_cycle_later():
    for phase in np.linspace(0, 1, 13, endpoint=False):
        now = gait_angles(GaitType.NORMAL, phase, hip_scale=1.3)
        later = gait_angles(GaitType.NORMAL, phase + 0.5, hip_scale=1.3)
        for name in ("hip_flexion", "knee_flexion", "ankle_flexion", "shoulder_flexion", "elbow_flexion"):
            assert getattr(now, name)[0] == getattr(later, name)[1]


def test_half_step_front_knee_lifts_higher(gaits):
    angles = gaits[GaitType.HALF_STEP].angles
    assert max(a.knee_flexion[1] for a in angles) > max(a.knee_flexion[0] for a in angles)
