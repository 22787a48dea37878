import numpy as np
import pytest

from src.exceptions import InvalidArgument
from src.geometry.queries import medial_anchor_path, witness
from src.geometry.se3 import Pose, Twist, pose_delta
from src.logic import (
    PFConfig,
    PotentialFieldPolicy,
    attractive_action,
    blend,
    nearest_anchor,
    pf_action,
    repulsive_action,
)

SPACING = 35.0 / 29.0


@pytest.fixture
def path(easy_scene):
    return medial_anchor_path(easy_scene.socket, retract_height=10.0, k=30)


def at(xyz, rpy=(0.0, 0.0, 0.0)):
    return Pose.from_xyz_rpy(xyz, rpy)


# ==================== ÂNCORAS ====================

def test_nearest_anchor_coincident(path):
    assert nearest_anchor(path, path.anchors[5]) == (5, 0.0)


def test_nearest_anchor_tie_goes_toward_goal(path):
    mid = 0.5 * (path.positions[3] + path.positions[4])
    idx, dist = nearest_anchor(path, at(mid))
    assert idx == 4
    assert dist == pytest.approx(SPACING / 2.0, abs=1e-9)


def test_nearest_anchor_matches_exhaustive_search(path):
    rng = np.random.default_rng(6)
    for _ in range(100):
        obs = at(rng.uniform([-40, -40, 0], [40, 40, 80]))
        idx, dist = nearest_anchor(path, obs)
        dists = [np.linalg.norm(a.translation - obs.translation) for a in path.anchors]
        assert dist == pytest.approx(min(dists), abs=1e-12)
        assert dists[idx] == pytest.approx(min(dists), abs=1e-9)


# ==================== ATRAÇÃO ====================

def test_attraction_far_from_path_is_lateral(path):
    cfg = PFConfig()
    anchor = path.positions[10]
    action = attractive_action(path, at(anchor + [5.0, 0.0, 0.0]), cfg)
    np.testing.assert_allclose(action.d_translation, [-2.0, 0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(action.d_rotation, 0.0, atol=1e-12)


def test_attraction_at_goal_is_zero(path):
    assert attractive_action(path, path.goal, PFConfig()).is_zero()


def test_attraction_on_path_steps_to_next_anchor(path):
    cfg = PFConfig()
    obs = path.anchors[7]
    action = attractive_action(path, obs, cfg)
    esperado = pose_delta(obs, path.anchors[8])
    np.testing.assert_allclose(action.as_array(), esperado.as_array(), atol=1e-12)
    assert action.d_translation[2] == pytest.approx(-SPACING)


def test_attraction_clamps_rotation(path):
    action = attractive_action(path, at(path.positions[0] + [10.0, 0, 0], (0.0, 20.0, 0.0)), PFConfig())
    assert np.all(np.abs(action.d_rotation) <= 2.0)
    assert np.all(np.abs(action.d_translation) <= 2.0)


# ==================== REPULSÃO ====================

def test_repulsion_zero_beyond_threshold(small_scene):
    socket = small_scene.socket
    obs = at([12.0, 0.0, socket.outer_height + 2.0])
    assert repulsive_action(small_scene.plug, obs, socket, PFConfig(th=1.0)).is_zero()


def test_repulsion_pushes_away_from_near_wall(easy_scene):
    socket, plug = easy_scene.socket, easy_scene.plug
    base_z = socket.floor_z + 5.0
    cfg = PFConfig()
    right = repulsive_action(plug, at([0.4, 0.0, base_z]), socket, cfg)
    left = repulsive_action(plug, at([-0.4, 0.0, base_z]), socket, cfg)

    assert right.d_translation[0] < 0.0
    assert left.d_translation[0] > 0.0
    assert right.d_translation[0] + left.d_translation[0] == pytest.approx(0.0, abs=1e-6)
    # d = 0.6 mm: |N| = d / d² = 1 / 0.6
    assert abs(right.d_translation[0]) == pytest.approx(1.0 / 0.6, rel=1e-4)


def test_repulsion_matches_witness_arithmetic(easy_scene):
    socket, plug = easy_scene.socket, easy_scene.plug
    cfg = PFConfig()
    obs = at([0.1, 0.0, socket.floor_z + 5.0])
    p_plug, sdf, normal = witness(plug, obs, socket, cfg.samples, cfg.sampling_seed)
    assert sdf == pytest.approx(0.9, abs=1e-9)
    np.testing.assert_allclose(normal, [-1.0, 0.0, 0.0], atol=1e-6)

    # v = p_P − p_S = 0.9·n; N = v / 0.81
    v = 0.9 * normal
    force = v / 0.81
    lever = p_plug - obs.translation
    torque = np.cross(lever, force) / float(lever @ lever)
    esperado_rot = np.clip(np.degrees(torque), -cfg.max_step_rot, cfg.max_step_rot)

    action = repulsive_action(plug, obs, socket, cfg)
    np.testing.assert_allclose(action.d_translation, [-1.0 / 0.9, 0.0, 0.0], atol=1e-5)
    np.testing.assert_allclose(action.d_rotation, esperado_rot, atol=1e-6)


def test_repulsion_magnitude_grows_as_inverse_distance(easy_scene):
    socket, plug = easy_scene.socket, easy_scene.plug
    cfg = PFConfig(max_step_tr=10.0)
    mais_longe = repulsive_action(plug, at([0.1, 0.0, socket.floor_z + 5.0]), socket, cfg)
    mais_perto = repulsive_action(plug, at([0.55, 0.0, socket.floor_z + 5.0]), socket, cfg)
    razao = np.linalg.norm(mais_perto.d_translation) / np.linalg.norm(mais_longe.d_translation)
    assert razao == pytest.approx(0.9 / 0.45, rel=1e-4)


def test_repulsion_saturates_below_epsilon(small_scene):
    socket = small_scene.socket
    obs = at([12.0, 0.0, socket.outer_height - 0.5])
    action = repulsive_action(small_scene.plug, obs, socket, PFConfig(epsilon_d=0.01))
    # em contato: ε / ε² = 100 mm, limitado a 2 mm
    np.testing.assert_allclose(action.d_translation, [0.0, 0.0, 2.0], atol=1e-5)


def test_repulsion_rotation_uses_contact_lever(small_scene):
    socket = small_scene.socket
    # Inclinado: o ponto mais baixo da borda toca o topo
    obs = at([12.0, 0.0, socket.outer_height + 0.3], (0.0, 10.0, 0.0))
    action = repulsive_action(small_scene.plug, obs, socket, PFConfig())
    assert not action.is_zero()
    assert np.linalg.norm(action.d_rotation) > 0.0


# ==================== COMBINAÇÃO ====================

def test_blend_with_full_attraction_weight(path, easy_scene):
    cfg = PFConfig(w_tr=1.0, w_rot=1.0)
    obs = at([30.0, 10.0, 80.0], (3.0, 0.0, 0.0))
    att = attractive_action(path, obs, cfg)
    total = pf_action(path, easy_scene.plug, easy_scene.socket, obs, Pose.identity(), cfg)
    assert total.equals(att)


def test_blend_with_zero_translation_weight(easy_scene, path):
    cfg = PFConfig(w_tr=0.0)
    obs = at([0.4, 0.0, easy_scene.socket.floor_z + 5.0])
    rep = repulsive_action(easy_scene.plug, obs, easy_scene.socket, cfg)
    total = pf_action(path, easy_scene.plug, easy_scene.socket, obs, Pose.identity(), cfg)
    np.testing.assert_allclose(total.d_translation, rep.d_translation, atol=1e-12)


def test_blend_convex_arithmetic():
    cfg = PFConfig(w_tr=0.33, w_rot=0.5)
    att = Twist.from_array([1.0, -1.0, 0.5, 1.0, 0.0, -1.0])
    rep = Twist.from_array([0.2, 0.4, -1.0, 0.0, 2.0, 1.0])
    esperado = np.concatenate([0.33 * att.d_translation + 0.67 * rep.d_translation,
                               0.5 * att.d_rotation + 0.5 * rep.d_rotation])
    np.testing.assert_allclose(blend(att, rep, cfg).as_array(), esperado, atol=1e-12)


def test_policy_weight_override(easy_scene):
    cfg = PFConfig(w_tr=0.33, w_rot=0.5)
    policy = PotentialFieldPolicy(easy_scene.plug, easy_scene.socket, cfg)
    obs = at([0.4, 0.3, easy_scene.socket.floor_z + 5.0], (1.0, 0.0, 0.0))
    att, rep = policy.components(obs, Pose.identity())
    assert policy.act(obs, Pose.identity()).equals(blend(att, rep, cfg))
    assert policy.act(obs, Pose.identity(), weights=(0.9, 0.1)).equals(blend(att, rep, cfg.with_weights(0.9, 0.1)))


def test_policy_follows_observed_socket(easy_scene):
    policy = PotentialFieldPolicy(easy_scene.plug, easy_scene.socket, PFConfig())
    shifted = at([3.0, 0.0, 0.0])
    path = policy.path_for(shifted)
    np.testing.assert_allclose(path.goal.translation, [3.0, 0.0, easy_scene.socket.floor_z])


def test_config_validation():
    with pytest.raises(InvalidArgument):
        PFConfig(w_tr=1.5)
    with pytest.raises(InvalidArgument):
        PFConfig(th=0.01, epsilon_d=0.01)
    with pytest.raises(InvalidArgument):
        PFConfig(max_step_tr=0.0)
    with pytest.raises(InvalidArgument):
        PFConfig(k=1)
