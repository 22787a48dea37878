import numpy as np
import pytest

from src.exceptions import InvalidArgument
from src.geometry.se3 import Pose
from src.geometry.shapes import (
    PlugModel,
    SceneSpec,
    SocketModel,
    plug_sdf,
    sample_surface,
    socket_normal,
    socket_sdf,
)

from conftest import make_scene


@pytest.fixture
def deep_socket():
    # Cavidade cilíndrica de raio 25 mm e 80 mm de profundidade
    return SocketModel("cylinder", cavity_width=50.0, cavity_depth=80.0, outer_width=120.0,
                       outer_length=120.0, outer_height=100.0, tolerance=1.0)


def test_sdf_on_axis_at_mid_depth_is_radius(deep_socket):
    z = deep_socket.floor_z + deep_socket.cavity_depth / 2.0
    assert socket_sdf(deep_socket, [0.0, 0.0, z])[0] == pytest.approx(25.0, abs=1e-9)


def test_sdf_on_cavity_wall_is_zero(deep_socket):
    z = deep_socket.floor_z + 10.0
    assert abs(socket_sdf(deep_socket, [25.0, 0.0, z])[0]) < 1e-9
    assert abs(socket_sdf(deep_socket, [0.0, -25.0, z])[0]) < 1e-9


def test_sdf_hand_computed_points(easy_scene):
    socket = easy_scene.socket
    # Acima do topo, fora da cavidade
    assert socket_sdf(socket, [40.0, 0.0, 40.0])[0] == pytest.approx(5.0)
    # Dentro do material: 5 mm do topo e 5 mm da lateral
    assert socket_sdf(socket, [40.0, 0.0, 30.0])[0] == pytest.approx(-5.0)
    # Dentro da cavidade, 5 mm acima do fundo
    assert socket_sdf(socket, [0.0, 0.0, socket.floor_z + 5.0])[0] == pytest.approx(5.0)
    # Fora do bloco, ao lado
    assert socket_sdf(socket, [50.0, 0.0, 10.0])[0] == pytest.approx(5.0)


def test_sdf_is_one_lipschitz(easy_scene):
    rng = np.random.default_rng(3)
    for primitive in ("cylinder", "box", "triangle"):
        socket = make_scene(primitive).socket
        a = rng.uniform([-60, -60, -10], [60, 60, 60], size=(2000, 3))
        b = a + rng.normal(scale=2.0, size=a.shape)
        diff = np.abs(socket_sdf(socket, a) - socket_sdf(socket, b))
        assert np.all(diff <= np.linalg.norm(a - b, axis=1) + 1e-9)


def test_sdf_follows_base_pose(easy_scene):
    base = Pose.from_xyz_rpy([10.0, -20.0, 5.0], [0.0, 0.0, 30.0])
    moved = easy_scene.socket.at_pose(base)
    local = np.array([[40.0, 0.0, 30.0], [0.0, 0.0, 15.0], [12.0, 3.0, 50.0]])
    np.testing.assert_allclose(socket_sdf(moved, base.transform_points(local)),
                               socket_sdf(easy_scene.socket, local), atol=1e-9)


def test_normal_points_out_of_material(easy_scene):
    socket = easy_scene.socket
    np.testing.assert_allclose(socket_normal(socket, np.array([40.0, 0.0, 36.0])), [0.0, 0.0, 1.0], atol=1e-6)
    np.testing.assert_allclose(socket_normal(socket, np.array([20.0, 0.0, 20.0])), [-1.0, 0.0, 0.0], atol=1e-6)


def test_goal_pose_is_penetration_free(easy_scene):
    from src.geometry.queries import penetration_depth

    for primitive in ("cylinder", "box", "triangle"):
        scene = make_scene(primitive)
        goal = scene.socket.goal_pose()
        assert penetration_depth(scene.plug, goal, scene.socket) == 0.0


def test_box_plug_forces_all_bottom_corners():
    plug = PlugModel("box", 20.0, 10.0, 30.0)
    pts = sample_surface(plug, 8)
    cantos = {(10.0, 15.0), (-10.0, 15.0), (-10.0, -15.0), (10.0, -15.0)}
    base = {(round(x, 9), round(y, 9)) for x, y, z in pts if z == 0.0}
    assert cantos <= base


def test_surface_samples_lie_on_surface():
    for primitive in ("cylinder", "box", "triangle"):
        plug = PlugModel(primitive, 50.0, 40.0)
        pts = sample_surface(plug, 1000, seed=4)
        assert pts.shape == (1000, 3)
        assert np.max(np.abs(plug_sdf(plug, pts))) < 1e-6


def test_surface_samples_proportional_to_area():
    plug = PlugModel("cylinder", 50.0, 40.0)
    pts = sample_surface(plug, 1000)
    section = plug.section
    areas = np.array([section.area(), section.area(), section.perimeter() * plug.height])
    esperado = 1000 * areas / areas.sum()
    obtido = np.array([np.sum(pts[:, 2] == 0.0), np.sum(pts[:, 2] == plug.height),
                       np.sum((pts[:, 2] > 0.0) & (pts[:, 2] < plug.height))])
    assert np.all(np.abs(obtido - esperado) <= 0.2 * esperado)


def test_surface_sampling_is_deterministic():
    plug = PlugModel("triangle", 30.0, 20.0)
    np.testing.assert_array_equal(sample_surface(plug, 500, seed=7), sample_surface(plug, 500, seed=7))
    assert not np.array_equal(sample_surface(plug, 500, seed=7), sample_surface(plug, 500, seed=8))


def test_invalid_dimensions_rejected():
    with pytest.raises(InvalidArgument):
        PlugModel("cylinder", 0.0, 10.0)
    with pytest.raises(InvalidArgument):
        PlugModel("hexagon", 10.0, 10.0)
    with pytest.raises(InvalidArgument):
        sample_surface(PlugModel("box", 10.0, 10.0), 3)
    with pytest.raises(InvalidArgument):
        make_scene(tolerance=0.0)
    with pytest.raises(InvalidArgument):
        # Cavidade maior que o bloco
        make_scene(width=100.0)


def test_scene_from_dict_and_bounding_box():
    scene = SceneSpec.from_dict({
        "name": "cil", "primitive": "cylinder", "width": 50, "height": 40, "tolerance": 2,
        "cavity_depth": 25, "outer_width": 90, "outer_height": 35,
    })
    assert scene.socket.cavity_width == pytest.approx(52.0)
    assert scene.success_eps_tr() == 1.0
    bbox = scene.bounding_box()
    assert bbox.plug.primitive == "box"
    assert bbox.plug.width == pytest.approx(50.0)
    assert bbox.tolerance == scene.tolerance
    assert SceneSpec.from_dict(scene.to_dict()).to_dict() == scene.to_dict()


def test_success_tolerance_below_clearance():
    assert make_scene(tolerance=1.0).success_eps_tr() == pytest.approx(0.5)
    assert make_scene(tolerance=0.1).success_eps_tr() == pytest.approx(0.05)


def test_scene_requires_matching_primitives():
    plug = PlugModel("box", 20.0, 10.0)
    socket = SocketModel.for_plug(PlugModel("cylinder", 20.0, 10.0), 1.0, 5.0, 40.0, 40.0, 10.0)
    with pytest.raises(InvalidArgument):
        SceneSpec("x", plug, socket)
