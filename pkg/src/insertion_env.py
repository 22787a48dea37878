"""
Simulador quase-estático de inserção plug/socket.

Cada passo aplica um incremento SE(3) à pose real do plug, resolve o
contato limitando a penetração e devolve observações ruidosas das poses.
A recompensa é esparsa: positiva no sucesso e uma penalidade proporcional
à penetração.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.spatial.transform import Rotation

from src.exceptions import InvalidArgument, SteppedTerminalEpisode
from src.geometry.queries import penetration_depth
from src.geometry.se3 import (
    Pose,
    Twist,
    apply_twist,
    compose,
    rotation_distance_deg,
    translation_distance,
)
from src.geometry.shapes import PlugModel, SceneSpec, SocketModel
from src.logic.potential_field_logic import PFConfig, PotentialFieldPolicy

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence, None]

PF_GEOMETRIES = ("exact", "bounding_box")


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class EnvConfig:
    """Configuração do episódio (mm, graus, passos)."""

    scene: SceneSpec
    horizon: int = 256
    socket_range_xy: float = 100.0
    socket_range_z: float = 50.0
    socket_range_yaw: float = 5.0
    plug_range_xy: float = 10.0
    plug_range_rpy: float = 15.0
    start_height: float = 10.0
    plug_noise_max_tr: float = 5.0
    plug_noise_max_rot: float = 5.0
    socket_noise_max_tr: float = 1.0
    socket_noise_max_rot: float = 1.0
    reward_success: float = 1.0
    penalty_penetration: float = 0.1
    eps_tr: Optional[float] = None
    eps_rot: float = 2.0
    p_allow: float = 1.0
    max_action_tr: float = 2.0
    max_action_rot: float = 2.0
    bisection_iters: int = 20
    pf_geometry: str = "exact"

    def __post_init__(self):
        if self.horizon < 1:
            raise InvalidArgument("horizon deve ser >= 1")
        faixas = (self.socket_range_xy, self.socket_range_z, self.socket_range_yaw,
                  self.plug_range_xy, self.plug_range_rpy, self.start_height,
                  self.plug_noise_max_tr, self.plug_noise_max_rot,
                  self.socket_noise_max_tr, self.socket_noise_max_rot,
                  self.penalty_penetration, self.p_allow)
        if min(faixas) < 0:
            raise InvalidArgument("Faixas de randomização e ruído devem ser não negativas")
        if self.max_action_tr <= 0 or self.max_action_rot <= 0 or self.eps_rot <= 0:
            raise InvalidArgument("Limites de ação e eps_rot devem ser positivos")
        if self.pf_geometry not in PF_GEOMETRIES:
            raise InvalidArgument(f"pf_geometry inválida: {self.pf_geometry}")
        if self.success_eps_tr >= self.scene.tolerance:
            raise InvalidArgument(
                f"eps_tr ({self.success_eps_tr}) deve ser menor que a tolerância ({self.scene.tolerance})"
            )

    @property
    def success_eps_tr(self) -> float:
        return float(self.eps_tr) if self.eps_tr is not None else self.scene.success_eps_tr()

    @property
    def plug(self) -> PlugModel:
        return self.scene.plug

    def socket_at(self, socket_pose: Pose) -> SocketModel:
        return self.scene.socket.at_pose(socket_pose)

    def pf_scene(self) -> SceneSpec:
        """Cena usada pelo campo potencial (exata ou caixa envolvente)."""
        return self.scene.bounding_box() if self.pf_geometry == "bounding_box" else self.scene


@dataclass(frozen=True)
class NoiseLevel:
    """Amplitudes de ruído de observação de um episódio."""

    plug_tr: float = 0.0
    plug_rot: float = 0.0
    socket_tr: float = 0.0
    socket_rot: float = 0.0

    def __post_init__(self):
        if min(self.plug_tr, self.plug_rot, self.socket_tr, self.socket_rot) < 0:
            raise InvalidArgument("Níveis de ruído devem ser não negativos")

    @classmethod
    def zero(cls) -> "NoiseLevel":
        return cls()

    @classmethod
    def from_level(cls, n: float, cfg: EnvConfig) -> "NoiseLevel":
        """
        Nível n mm / n graus no plug; o socket recebe min(n, máximo do socket).
        """
        plug_tr = min(float(n), cfg.plug_noise_max_tr)
        plug_rot = min(float(n), cfg.plug_noise_max_rot)
        return cls(plug_tr, plug_rot,
                   min(float(n), cfg.socket_noise_max_tr),
                   min(float(n), cfg.socket_noise_max_rot))

    def is_zero(self) -> bool:
        return max(self.plug_tr, self.plug_rot, self.socket_tr, self.socket_rot) == 0.0


@dataclass(frozen=True)
class EpisodeState:
    """Estado real do episódio."""

    plug_pose: Pose
    socket_pose: Pose
    level: NoiseLevel
    step_count: int = 0
    penetration: float = 0.0
    cumulative_penetration: float = 0.0
    terminal: bool = False
    outcome: Optional[str] = None

    def equals(self, other: "EpisodeState") -> bool:
        return (self.plug_pose.equals(other.plug_pose)
                and self.socket_pose.equals(other.socket_pose)
                and self.level == other.level
                and self.step_count == other.step_count
                and self.penetration == other.penetration
                and self.cumulative_penetration == other.cumulative_penetration
                and self.terminal == other.terminal
                and self.outcome == other.outcome)


@dataclass(frozen=True)
class Observation:
    """Poses observadas; os campos privilegiados só existem em simulação."""

    obs_plug: Pose
    obs_socket: Pose
    gt_plug: Optional[Pose] = None
    gt_socket: Optional[Pose] = None

    @property
    def has_privileged(self) -> bool:
        return self.gt_plug is not None and self.gt_socket is not None

    def without_privileged(self) -> "Observation":
        return Observation(self.obs_plug, self.obs_socket)


# ==================== RUÍDO E RANDOMIZAÇÃO ====================

def apply_noise(pose: Pose, max_tr: float, max_rot: float, rng: np.random.Generator) -> Pose:
    """
    Perturba uma pose com ruído uniforme independente por eixo.

    Args:
        pose: Pose real
        max_tr: Amplitude translacional (mm)
        max_rot: Amplitude de roll/pitch/yaw (graus)
        rng: Gerador; seis sorteios são consumidos a cada chamada

    Returns:
        Pose ruidosa (idêntica à original quando as amplitudes são zero)
    """
    if max_tr < 0 or max_rot < 0:
        raise InvalidArgument("Amplitudes de ruído devem ser não negativas")
    u = rng.uniform(-1.0, 1.0, size=6)
    translation = pose.translation + u[:3] * max_tr if max_tr > 0 else pose.translation
    if max_rot > 0:
        perturb = Rotation.from_euler("xyz", u[3:] * max_rot, degrees=True).as_matrix()
        rotation = perturb @ pose.rotation
    else:
        rotation = pose.rotation
    return Pose(translation, rotation)


def observe(state: EpisodeState, rng: np.random.Generator) -> Observation:
    """Observação ruidosa do estado, com os campos privilegiados preenchidos."""
    lv = state.level
    obs_plug = apply_noise(state.plug_pose, lv.plug_tr, lv.plug_rot, rng)
    obs_socket = apply_noise(state.socket_pose, lv.socket_tr, lv.socket_rot, rng)
    return Observation(obs_plug, obs_socket, state.plug_pose, state.socket_pose)


def sample_socket_pose(cfg: EnvConfig, rng: np.random.Generator) -> Pose:
    u = rng.uniform(-1.0, 1.0, size=3)
    z = rng.uniform(0.0, cfg.socket_range_z)
    yaw = rng.uniform(-cfg.socket_range_yaw, cfg.socket_range_yaw)
    offset = Pose.from_xyz_rpy([u[0] * cfg.socket_range_xy, u[1] * cfg.socket_range_xy, z],
                               [0.0, 0.0, yaw])
    return compose(cfg.scene.socket.base_pose, offset)


def sample_plug_pose(cfg: EnvConfig, socket_pose: Pose, rng: np.random.Generator) -> Pose:
    """Plug acima da abertura do socket, deslocado e inclinado aleatoriamente."""
    xy = rng.uniform(-cfg.plug_range_xy, cfg.plug_range_xy, size=2)
    rpy = rng.uniform(-cfg.plug_range_rpy, cfg.plug_range_rpy, size=3)
    z = cfg.scene.socket.outer_height + cfg.start_height
    local = Pose.from_xyz_rpy([xy[0], xy[1], z], rpy)
    return compose(socket_pose, local)


def reset(cfg: EnvConfig, level: NoiseLevel, seed: SeedLike) -> Tuple[EpisodeState, Observation]:
    """
    Inicia um episódio randomizado.

    Args:
        cfg: Configuração do ambiente
        level: Nível de ruído fixo durante o episódio
        seed: Semente inteira ou gerador (usado também na primeira observação)

    Returns:
        (estado inicial, observação inicial)
    """
    rng = make_rng(seed)
    socket_pose = sample_socket_pose(cfg, rng)
    plug_pose = sample_plug_pose(cfg, socket_pose, rng)
    pen = penetration_depth(cfg.plug, plug_pose, cfg.socket_at(socket_pose),
                            cfg.scene.samples, cfg.scene.sampling_seed)
    state = EpisodeState(plug_pose, socket_pose, level, penetration=pen)
    return state, observe(state, rng)


# ==================== CONTATO E SUCESSO ====================

def resolve_contact(plug: PlugModel, candidate: Pose, socket: SocketModel, previous: Pose,
                    p_allow: float = 1.0, iterations: int = 20,
                    m: int = 1000, seed: int = 0) -> Tuple[Pose, float]:
    """
    Limita a penetração do movimento comandado.

    Se a pose candidata penetra mais que `p_allow`, a translação recua ao
    longo do movimento comandado (a partir de `previous`) por bissecção,
    mantendo a rotação candidata.

    Args:
        plug: Modelo do plug
        candidate: Pose comandada
        socket: Socket em sua pose real
        previous: Pose antes do comando
        p_allow: Penetração tolerada (mm), limite inclusivo
        iterations: Iterações de bissecção

    Returns:
        (pose resolvida, penetração na pose resolvida)
    """
    pen = penetration_depth(plug, candidate, socket, m, seed)
    if pen <= p_allow:
        return candidate, pen

    def at(alpha: float) -> Pose:
        t = previous.translation + alpha * (candidate.translation - previous.translation)
        return Pose(t, candidate.rotation)

    pen_lo = penetration_depth(plug, at(0.0), socket, m, seed)
    if pen_lo > p_allow:
        # A rotação comandada já viola o limite: o comando é rejeitado,
        # a não ser que a pose anterior penetre ainda mais
        pen_prev = penetration_depth(plug, previous, socket, m, seed)
        if pen_prev <= pen:
            return previous, pen_prev
        return candidate, pen

    lo, hi = 0.0, 1.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        pen_mid = penetration_depth(plug, at(mid), socket, m, seed)
        if pen_mid <= p_allow:
            lo, pen_lo = mid, pen_mid
        else:
            hi = mid
    logger.debug(f"Contato resolvido por bissecção: alfa={lo:.6f}, penetração={pen_lo:.4f} mm")
    return at(lo), pen_lo


def check_success(plug_pose: Pose, goal: Pose, eps_tr: float, eps_rot: float,
                  penetration: float = 0.0, p_allow: float = 1.0) -> bool:
    """Plug totalmente inserido: perto da meta em translação e rotação, sem penetração excessiva."""
    return (translation_distance(plug_pose, goal) <= eps_tr
            and rotation_distance_deg(plug_pose, goal) <= eps_rot
            and penetration <= p_allow)


def step(cfg: EnvConfig, state: EpisodeState, action: Twist,
         rng: np.random.Generator) -> Tuple[EpisodeState, Observation, float, bool, Dict[str, Any]]:
    """
    Avança um passo quase-estático.

    Args:
        cfg: Configuração do ambiente
        state: Estado não terminal
        action: Incremento comandado (limitado aos limites de ação)
        rng: Gerador para o ruído de observação

    Returns:
        (novo estado, observação, recompensa, done, info)
    """
    if state.terminal:
        raise SteppedTerminalEpisode(f"Episódio já encerrado ({state.outcome})")

    clamped = action.clamp(cfg.max_action_tr, cfg.max_action_rot)
    candidate = apply_twist(state.plug_pose, clamped)
    socket = cfg.socket_at(state.socket_pose)
    resolved, pen = resolve_contact(
        cfg.plug, candidate, socket, state.plug_pose,
        cfg.p_allow, cfg.bisection_iters, cfg.scene.samples, cfg.scene.sampling_seed,
    )

    goal = socket.goal_pose()
    success = check_success(resolved, goal, cfg.success_eps_tr, cfg.eps_rot, pen, cfg.p_allow)
    step_count = state.step_count + 1
    reward = (cfg.reward_success if success else 0.0) - cfg.penalty_penetration * pen

    if success:
        outcome = "success"
    elif step_count >= cfg.horizon:
        outcome = "timeout"
    else:
        outcome = None
    done = outcome is not None

    new_state = replace(
        state,
        plug_pose=resolved,
        step_count=step_count,
        penetration=pen,
        cumulative_penetration=state.cumulative_penetration + pen,
        terminal=done,
        outcome=outcome,
    )
    info = {
        "success": success,
        "outcome": outcome,
        "penetration": pen,
        "distance_tr": translation_distance(resolved, goal),
        "distance_rot": rotation_distance_deg(resolved, goal),
        "applied_action": clamped,
    }
    return new_state, observe(new_state, rng), float(reward), done, info


def build_pf_policy(cfg: EnvConfig, pf_cfg: PFConfig) -> PotentialFieldPolicy:
    """Campo potencial sobre a geometria configurada, com a amostragem da cena."""
    scene = cfg.pf_scene()
    pf_cfg = replace(pf_cfg, samples=scene.samples, sampling_seed=scene.sampling_seed)
    return PotentialFieldPolicy(scene.plug, scene.socket, pf_cfg)


# ==================== AMBIENTES ====================

class InsertionEnv:
    """Ambiente com dono único: guarda o gerador e o estado do episódio."""

    def __init__(self, cfg: EnvConfig, seed: SeedLike = None):
        self.cfg = cfg
        self.rng = make_rng(seed)
        self.state: Optional[EpisodeState] = None
        self.observation: Optional[Observation] = None

    def reset(self, level: NoiseLevel, seed: SeedLike = None) -> Observation:
        if seed is not None:
            self.rng = make_rng(seed)
        self.state, self.observation = reset(self.cfg, level, self.rng)
        return self.observation

    def step(self, action: Twist) -> Tuple[Observation, float, bool, Dict[str, Any]]:
        if self.state is None:
            raise SteppedTerminalEpisode("Ambiente sem episódio ativo: chame reset()")
        self.state, self.observation, reward, done, info = step(self.cfg, self.state, action, self.rng)
        return self.observation, reward, done, info

    def goal(self) -> Pose:
        return self.cfg.socket_at(self.state.socket_pose).goal_pose()


class VecInsertionEnv:
    """
    N ambientes independentes com sementes derivadas de uma SeedSequence.

    Episódios encerrados são reiniciados automaticamente com o nível de
    ruído informado no passo.
    """

    def __init__(self, cfg: EnvConfig, num_envs: int, seed: Union[int, np.random.SeedSequence] = 0):
        if num_envs < 1:
            raise InvalidArgument("num_envs deve ser >= 1")
        root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        children = root.spawn(num_envs)
        self.envs: List[InsertionEnv] = [InsertionEnv(cfg, np.random.default_rng(s)) for s in children]
        self.cfg = cfg

    def __len__(self) -> int:
        return len(self.envs)

    def reset(self, level: NoiseLevel) -> List[Observation]:
        return [env.reset(level) for env in self.envs]

    def step(self, actions: Sequence[Twist], next_level: NoiseLevel):
        """
        Aplica uma ação por ambiente.

        Returns:
            (observações, recompensas, dones, infos); a observação de um
            ambiente encerrado já é a do novo episódio
        """
        observations, rewards, dones, infos = [], [], [], []
        for env, action in zip(self.envs, actions):
            obs, reward, done, info = env.step(action)
            if done:
                info = dict(info, final_state=env.state)
                obs = env.reset(next_level)
            observations.append(obs)
            rewards.append(reward)
            dones.append(done)
            infos.append(info)
        return observations, np.array(rewards), np.array(dones, dtype=bool), infos


# ==================== TRACE ====================

def _pose_columns(prefix: str) -> List[str]:
    cols = [f"{prefix}_t{a}" for a in "xyz"]
    cols += [f"{prefix}_r{i}{j}" for i in range(3) for j in range(3)]
    return cols


def _twist_columns(prefix: str) -> List[str]:
    return [f"{prefix}_{c}" for c in ("tx", "ty", "tz", "rx", "ry", "rz")]


TRACE_COLUMNS = (["step"] + _pose_columns("true") + _pose_columns("obs")
                 + _twist_columns("a_pf") + _twist_columns("a_rl") + _twist_columns("a_total")
                 + ["reward", "penetration", "done"])


def _pose_values(pose: Pose) -> List[float]:
    return list(pose.translation) + list(pose.rotation.reshape(-1))


@dataclass
class EpisodeTrace:
    """Registro passo a passo de um episódio para exportação em CSV."""

    rows: List[List[Any]] = field(default_factory=list)
    outcome: Optional[str] = None

    def record(self, step_index: int, state: EpisodeState, obs: Observation,
               a_pf: Twist, a_rl: Twist, a_total: Twist,
               reward: float, penetration: float, done: bool):
        self.rows.append(
            [step_index] + _pose_values(state.plug_pose) + _pose_values(obs.obs_plug)
            + list(a_pf.as_array()) + list(a_rl.as_array()) + list(a_total.as_array())
            + [reward, penetration, bool(done)]
        )

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=TRACE_COLUMNS)

    def to_csv(self, path) -> None:
        self.to_dataframe().to_csv(path, index=False)

    def __len__(self) -> int:
        return len(self.rows)
