"""
Tests for DLT estimation and centre transfer.
"""
import numpy as np
import pytest

from exceptions import DegenerateConfiguration, InsufficientCorrespondences
from geometry import Correspondence, Homography, PixelPoint, apply, correspondences, estimate, map_center, project
from geometry.homography import _apply_many, estimate_from_arrays, transfer_residuals
from models import AxisConfig, RigConfig
from rig import MotorState, RigModel, render, to_camera


def random_homography(rng):
    m = np.eye(3)
    m[:2, :2] += rng.uniform(-0.1, 0.1, size=(2, 2))
    m[:2, 2] = rng.uniform(-80, 80, size=2)
    m[2, :2] = rng.uniform(-2e-4, 2e-4, size=2)
    return m


def test_recovers_ground_truth_exactly():
    rng = np.random.default_rng(1)
    for _ in range(100):
        truth = random_homography(rng)
        src = rng.uniform(0, 1024, size=(int(rng.integers(4, 40)), 2))
        dst = _apply_many(truth, src)
        h = estimate_from_arrays(dst, src)
        assert np.max(np.linalg.norm(_apply_many(h.m, src) - dst, axis=1)) < 1e-8


def test_noisy_correspondences_small_residual():
    rng = np.random.default_rng(2)
    truth = random_homography(rng)
    src = rng.uniform(0, 1024, size=(60, 2))
    dst = _apply_many(truth, src) + rng.normal(0, 0.3, size=(60, 2))
    h = estimate_from_arrays(dst, src)
    corrs = [Correspondence(i, PixelPoint(*d), PixelPoint(*s)) for i, (d, s) in enumerate(zip(dst, src))]
    assert transfer_residuals(h, corrs).mean() < 0.5


def test_identity_from_self_correspondences():
    pts = [PixelPoint(0, 0), PixelPoint(100, 0), PixelPoint(0, 100), PixelPoint(100, 100), PixelPoint(40, 70)]
    h = estimate([Correspondence(i, p, p) for i, p in enumerate(pts)])
    np.testing.assert_allclose(h.m / h.m[2, 2], np.eye(3), atol=1e-10)


def test_too_few_correspondences():
    corrs = [Correspondence(i, PixelPoint(i, i * i), PixelPoint(i, i)) for i in range(3)]
    with pytest.raises(InsufficientCorrespondences):
        estimate(corrs)


def test_collinear_points_are_degenerate():
    pts = [PixelPoint(float(x), 2.0 * x + 1.0) for x in range(6)]
    with pytest.raises(DegenerateConfiguration):
        estimate([Correspondence(i, p, p) for i, p in enumerate(pts)])


def test_rank_deficient_matrix_rejected():
    with pytest.raises(DegenerateConfiguration):
        Homography(np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]))


def test_homography_normalized():
    h = Homography(np.diag([-2.0, -2.0, -2.0]))
    assert np.linalg.norm(h.m) == pytest.approx(1.0)
    assert h.m[2, 2] > 0


def test_map_center_self_is_exact(ideal_rig):
    intr = ideal_rig.intr
    pts = [PixelPoint(10, 20), PixelPoint(900, 30), PixelPoint(50, 700), PixelPoint(800, 650)]
    assert map_center([Correspondence(i, p, p) for i, p in enumerate(pts)], intr) == intr.image_center


def test_map_center_translation():
    intr_center = PixelPoint(512.0, 384.0)
    src = [PixelPoint(0, 0), PixelPoint(1000, 0), PixelPoint(0, 700), PixelPoint(1000, 700)]
    corrs = [Correspondence(i, PixelPoint(p.u + 25.0, p.v - 10.0), p) for i, p in enumerate(src)]
    h = estimate(corrs)
    c = apply(h, intr_center)
    assert c.u == pytest.approx(537.0, abs=1e-8)
    assert c.v == pytest.approx(374.0, abs=1e-8)


def test_correspondences_pair_shared_ids_in_order():
    a = {3: PixelPoint(3, 3), 1: PixelPoint(1, 1), 7: PixelPoint(7, 7)}
    b = {7: PixelPoint(70, 70), 3: PixelPoint(30, 30), 5: PixelPoint(5, 5)}
    corrs = correspondences(a, b)
    assert [c.id for c in corrs] == [3, 7]
    assert corrs[1].a == PixelPoint(7, 7)
    assert corrs[1].b == PixelPoint(70, 70)


def noisy_pairs(seed, n=30):
    rng = np.random.default_rng(seed)
    truth = random_homography(rng)
    src = rng.uniform(0, 1024, size=(n, 2))
    dst = _apply_many(truth, src) + rng.normal(0, 0.3, size=(n, 2))
    return dst, src


@pytest.mark.parametrize('seed', range(5))
def test_estimate_is_similarity_equivariant(seed):
    dst, src = noisy_pairs(seed)
    angle = np.radians(25.0 + 10 * seed)
    s = np.array([
        [2.5 * np.cos(angle), -2.5 * np.sin(angle), 40.0],
        [2.5 * np.sin(angle), 2.5 * np.cos(angle), -75.0],
        [0.0, 0.0, 1.0],
    ])
    h = estimate_from_arrays(dst, src)
    h_moved = estimate_from_arrays(dst, _apply_many(s, src))
    np.testing.assert_allclose(h_moved.m, Homography(h.m @ np.linalg.inv(s)).m, atol=1e-9)


@pytest.mark.parametrize('seed', range(5))
def test_estimate_ignores_correspondence_order(seed):
    dst, src = noisy_pairs(seed)
    order = np.random.default_rng(100 + seed).permutation(len(src))
    np.testing.assert_allclose(estimate_from_arrays(dst[order], src[order]).m,
                               estimate_from_arrays(dst, src).m, atol=1e-10)


def test_noiseless_estimate_reproduces_every_correspondence():
    rng = np.random.default_rng(9)
    truth = random_homography(rng)
    src = rng.uniform(0, 1024, size=(25, 2))
    corrs = [Correspondence(i, PixelPoint(*d), PixelPoint(*s))
             for i, (d, s) in enumerate(zip(_apply_many(truth, src), src))]
    assert transfer_residuals(estimate(corrs), corrs).max() < 1e-8


def _view_pair_center(rig, board, source, dest):
    src_obs = render(rig, source, board, seed=0)
    dst_obs = render(rig, dest, board, seed=0)
    return map_center(correspondences(dst_obs.corner_map(), src_obs.corner_map()), rig.intr)


def _axis_point(rig, state, depth=1000.0):
    rot, centers = rig.camera_pose(state.pan, state.tilt)
    return centers[0] + depth * rot[0].apply([0.0, 0.0, 1.0])


@pytest.mark.parametrize('source', [(5.0, 0.0), (-5.0, 0.0), (0.0, 5.0), (5.0, -5.0), (-10.0, 5.0)])
def test_map_center_matches_rotation_prediction(ideal_rig, board, source):
    dest = MotorState(0.0, 0.0)
    src = MotorState(*source)
    c = _view_pair_center(ideal_rig, board, src, dest)
    expected = project(ideal_rig.intr, to_camera(ideal_rig, dest, _axis_point(ideal_rig, src))[0])
    assert c.distance_to(expected) < 0.05


def test_pan_axis_offset_breaks_rotation_prediction(board):
    # optical centre 20 mm in front of the pan axis
    config = RigConfig.ideal().model_copy(
        update={'pan_axis': AxisConfig(direction=[0.0, 1.0, 0.0], offset_mm=[0.0, 0.0, -20.0])}
    )
    rig = RigModel.from_config(config)
    dest, src = MotorState(0.0, 0.0), MotorState(5.0, 0.0)
    c = _view_pair_center(rig, board, src, dest)

    rot, centers = rig.camera_pose(src.pan, src.tilt)
    axis = rot[0].apply([0.0, 0.0, 1.0])
    on_board = board.intersect(centers[0], axis)
    through_board = project(rig.intr, to_camera(rig, dest, on_board)[0])
    rotation_only = project(rig.intr, to_camera(rig, dest, centers[0] + 1e6 * axis)[0])

    # the board homography transfers the board point, not the direction
    assert c.distance_to(through_board) < 0.05
    assert 1.0 < c.distance_to(rotation_only) < 5.0
