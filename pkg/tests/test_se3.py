import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from src.exceptions import InvalidArgument
from src.geometry.se3 import (
    Pose,
    Twist,
    apply_twist,
    compose,
    invert,
    pose_delta,
    rotation_distance_deg,
    rotation_log_deg,
    translation_distance,
)


def random_pose(rng, spread=50.0):
    rot = Rotation.random(random_state=int(rng.integers(1 << 31))).as_matrix()
    return Pose(rng.uniform(-spread, spread, 3), rot)


def test_identity_compose_returns_same_pose():
    p = Pose.from_xyz_rpy([1.0, -2.0, 3.0], [10.0, 20.0, 30.0])
    assert compose(Pose.identity(), p).allclose(p)
    assert compose(p, Pose.identity()).allclose(p)


def test_compose_with_inverse_is_identity():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = random_pose(rng)
        assert compose(p, invert(p)).allclose(Pose.identity(), atol=1e-9)
        assert compose(invert(p), p).allclose(Pose.identity(), atol=1e-9)


def test_compose_matches_homogeneous_matrix_product():
    a = Pose.from_xyz_rpy([1.0, 0.0, 0.0], [0.0, 0.0, 90.0])
    b = Pose.from_xyz_rpy([0.0, 1.0, 0.0])
    esperado = a.as_matrix() @ b.as_matrix()
    np.testing.assert_allclose(compose(a, b).as_matrix(), esperado, atol=1e-12)
    np.testing.assert_allclose(compose(a, b).translation, [0.0, 0.0, 0.0], atol=1e-12)


def test_compose_is_associative():
    rng = np.random.default_rng(1)
    a, b, c = (random_pose(rng) for _ in range(3))
    assert compose(compose(a, b), c).allclose(compose(a, compose(b, c)), atol=1e-9)


def test_non_orthonormal_rotation_rejected():
    with pytest.raises(InvalidArgument):
        Pose(np.zeros(3), np.diag([1.0, 1.0, 1.1]))
    with pytest.raises(InvalidArgument):
        Pose(np.zeros(3), np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(InvalidArgument):
        Pose([np.nan, 0.0, 0.0], np.eye(3))


def test_pose_is_immutable():
    p = Pose.identity()
    with pytest.raises(ValueError):
        p.translation[0] = 1.0


def test_pose_delta_of_same_pose_is_zero():
    p = Pose.from_xyz_rpy([3.0, 4.0, 5.0], [1.0, 2.0, 3.0])
    assert pose_delta(p, p).is_zero()


def test_pose_delta_pure_translation():
    a = Pose.from_xyz_rpy([0.0, 0.0, 0.0], [5.0, 0.0, 0.0])
    b = Pose(a.translation + np.array([1.0, 2.0, 3.0]), a.rotation)
    delta = pose_delta(a, b)
    np.testing.assert_allclose(delta.d_translation, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(delta.d_rotation, 0.0, atol=1e-12)


def test_pose_delta_yaw_matches_rotation_log():
    a = Pose.identity()
    b = Pose.from_xyz_rpy([0.0, 0.0, 0.0], [0.0, 0.0, 10.0])
    delta = pose_delta(a, b)
    np.testing.assert_allclose(delta.d_rotation, [0.0, 0.0, 10.0], atol=1e-9)
    np.testing.assert_allclose(delta.d_rotation, rotation_log_deg(b.rotation @ a.rotation.T), atol=1e-12)


def test_apply_twist_reproduces_target():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a, b = random_pose(rng), random_pose(rng)
        assert apply_twist(a, pose_delta(a, b)).allclose(b, atol=1e-8)


def test_twist_clamp_bounds_each_component():
    t = Twist.from_array([5.0, -5.0, 0.5, 3.0, -0.1, -9.0]).clamp(2.0, 1.0)
    np.testing.assert_array_equal(t.as_array(), [2.0, -2.0, 0.5, 1.0, -0.1, -1.0])


def test_twist_arithmetic():
    a = Twist.from_array([1, 2, 3, 4, 5, 6])
    b = a.scaled(0.5) + a
    np.testing.assert_allclose(b.as_array(), 1.5 * np.arange(1, 7))
    assert Twist.zero().is_zero()
    assert a.equals(Twist.from_array(a.as_array()))


def test_distances():
    a = Pose.identity()
    b = Pose.from_xyz_rpy([3.0, 4.0, 0.0], [0.0, 0.0, 30.0])
    assert translation_distance(a, b) == pytest.approx(5.0)
    assert rotation_distance_deg(a, b) == pytest.approx(30.0)
