import numpy as np
import pytest

from src.exceptions import DegenerateGeometry, InvalidArgument
from src.geometry.queries import closest_pair, medial_anchor_path, penetration_depth, witness
from src.geometry.se3 import Pose
from src.geometry.shapes import PlugModel, SocketModel, socket_sdf

from conftest import make_scene


def lifted_goal(scene, dz=0.0, dx=0.0):
    goal = scene.socket.goal_pose()
    return Pose(goal.translation + np.array([dx, 0.0, dz]), goal.rotation)


def test_centered_plug_sees_radial_gap(easy_scene):
    # Folga de 2 mm no diâmetro: 1 mm de cada lado
    _, _, d = closest_pair(easy_scene.plug, lifted_goal(easy_scene, dz=5.0), easy_scene.socket)
    assert d == pytest.approx(1.0, abs=0.05)


def test_plug_touching_wall_has_zero_distance(easy_scene):
    _, _, d = closest_pair(easy_scene.plug, lifted_goal(easy_scene, dz=5.0, dx=1.0), easy_scene.socket)
    assert d == pytest.approx(0.0, abs=0.05)


def test_closest_pair_points_are_consistent(easy_scene):
    p_plug, p_socket, d = closest_pair(easy_scene.plug, lifted_goal(easy_scene, dz=5.0), easy_scene.socket)
    assert np.linalg.norm(p_plug - p_socket) == pytest.approx(d, abs=1e-6)
    assert abs(socket_sdf(easy_scene.socket, p_socket)[0]) < 1e-6


def test_closest_pair_matches_dense_oracle(easy_scene):
    rng = np.random.default_rng(5)
    socket = easy_scene.socket
    for _ in range(100):
        xyz = [rng.uniform(-15, 15), rng.uniform(-15, 15), socket.outer_height + rng.uniform(2, 20)]
        pose = Pose.from_xyz_rpy(xyz, rng.uniform(-3, 3, 3))
        _, _, d = closest_pair(easy_scene.plug, pose, socket, m=1000)
        _, _, oracle = closest_pair(easy_scene.plug, pose, socket, m=100_000)
        assert abs(d - oracle) < 0.2


@pytest.mark.parametrize("primitive", ["cylinder", "box", "triangle"])
def test_closest_pair_matches_dense_oracle_on_tilted_poses(primitive):
    scene = make_scene(primitive)
    socket = scene.socket
    rng = np.random.default_rng(11)
    for _ in range(100):
        xyz = [rng.uniform(-5, 5), rng.uniform(-5, 5), socket.outer_height + rng.uniform(1, 10)]
        pose = Pose.from_xyz_rpy(xyz, rng.uniform(-5, 5, 3))
        _, _, d = closest_pair(scene.plug, pose, socket, m=1000)
        _, _, oracle = closest_pair(scene.plug, pose, socket, m=100_000)
        assert abs(d - oracle) < 0.2


def test_distance_never_grows_when_moving_toward_wall(easy_scene):
    rng = np.random.default_rng(3)
    for _ in range(100):
        theta = rng.uniform(0.0, 2.0 * np.pi)
        u = np.array([np.cos(theta), np.sin(theta), 0.0])
        dz = rng.uniform(2.0, 20.0)
        inicio = rng.uniform(0.0, 0.3)
        distancias = []
        for passo in range(8):
            pose = lifted_goal(easy_scene, dz=dz)
            pose = Pose(pose.translation + (inicio + 0.1 * passo) * u, pose.rotation)
            distancias.append(closest_pair(easy_scene.plug, pose, easy_scene.socket)[2])
        assert all(b <= a for a, b in zip(distancias, distancias[1:]))


def test_zero_penetration_iff_positive_distance(easy_scene):
    socket = easy_scene.socket
    rng = np.random.default_rng(8)
    livres = penetrando = 0
    for _ in range(200):
        xyz = [rng.uniform(-3, 3), rng.uniform(-3, 3), socket.outer_height + rng.uniform(-3, 3)]
        pose = Pose.from_xyz_rpy(xyz, rng.uniform(-5, 5, 3))
        _, _, d = closest_pair(easy_scene.plug, pose, socket)
        pen = penetration_depth(easy_scene.plug, pose, socket)
        assert (pen == 0.0) == (d > 0.0)
        if pen == 0.0:
            livres += 1
        else:
            penetrando += 1
    assert livres > 0 and penetrando > 0


def test_witness_reports_signed_distance(small_scene):
    socket = small_scene.socket
    pose = Pose.from_xyz_rpy([12.0, 0.0, socket.outer_height - 0.5])
    _, sdf, normal = witness(small_scene.plug, pose, socket)
    assert sdf == pytest.approx(-0.5, abs=1e-9)
    np.testing.assert_allclose(normal, [0.0, 0.0, 1.0], atol=1e-6)


def test_penetration_depth_cases(easy_scene, small_scene):
    assert penetration_depth(easy_scene.plug, easy_scene.socket.goal_pose(), easy_scene.socket) == 0.0
    above = Pose.from_xyz_rpy([0.0, 0.0, 60.0])
    assert penetration_depth(easy_scene.plug, above, easy_scene.socket) == 0.0

    socket = small_scene.socket
    pose = Pose.from_xyz_rpy([12.0, 0.0, socket.outer_height - 0.5])
    assert penetration_depth(small_scene.plug, pose, socket) == pytest.approx(0.5, abs=0.05)


def test_degenerate_when_buried_too_deep():
    plug = PlugModel("cylinder", 2.0, 2.0)
    socket = SocketModel.for_plug(plug, 1.0, 10.0, 200.0, 200.0, 150.0)
    with pytest.raises(DegenerateGeometry):
        closest_pair(plug, Pose.from_xyz_rpy([60.0, 0.0, 60.0]), socket, m=100)


def test_anchor_path_endpoints_for_k2(easy_scene):
    socket = easy_scene.socket
    path = medial_anchor_path(socket, retract_height=10.0, k=2)
    assert len(path) == 2
    np.testing.assert_allclose(path.anchors[0].translation, [0.0, 0.0, socket.outer_height + 10.0])
    assert path.goal.allclose(socket.goal_pose(), atol=0.0)


def test_anchor_spacing_is_uniform(easy_scene):
    path = medial_anchor_path(easy_scene.socket, retract_height=10.0, k=30)
    passos = np.linalg.norm(np.diff(path.positions, axis=0), axis=1)
    np.testing.assert_allclose(passos, (25.0 + 10.0) / 29.0, atol=1e-9)
    for anchor in path.anchors:
        np.testing.assert_array_equal(anchor.rotation, easy_scene.socket.goal_pose().rotation)


def test_anchors_stay_centered_in_box_cavity():
    scene = make_scene("box", width=30.0, length=20.0, tolerance=1.0)
    base = Pose.from_xyz_rpy([5.0, 7.0, 0.0], [0.0, 0.0, 20.0])
    socket = scene.socket.at_pose(base)
    path = medial_anchor_path(socket, retract_height=10.0, k=30)
    local = base.inverse_transform_points(path.positions)
    half = socket.cavity_width / 2.0
    np.testing.assert_allclose(half - local[:, 0], local[:, 0] + half, atol=1e-9)


def test_anchor_path_rejects_bad_arguments(easy_scene):
    with pytest.raises(InvalidArgument):
        medial_anchor_path(easy_scene.socket, 10.0, k=1)
    with pytest.raises(InvalidArgument):
        medial_anchor_path(easy_scene.socket, 0.0, k=30)
