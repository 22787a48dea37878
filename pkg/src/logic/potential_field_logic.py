"""
Lógica do controlador por campo potencial.

Combina uma atração para o caminho de âncoras do eixo medial com uma
repulsão a partir do par de pontos mais próximo entre plug e socket.
"""

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from src.exceptions import InvalidArgument
from src.geometry.queries import AnchorPath, medial_anchor_path, witness
from src.geometry.se3 import Pose, Twist, pose_delta
from src.geometry.shapes import PlugModel, SocketModel


@dataclass(frozen=True)
class PFConfig:
    """Parâmetros do campo potencial (mm e graus)."""

    k: int = 30
    switch_threshold: float = 1.0
    th: float = 1.0
    w_tr: float = 0.33
    w_rot: float = 0.0
    max_step_tr: float = 2.0
    max_step_rot: float = 2.0
    epsilon_d: float = 0.01
    retract_height: float = 10.0
    samples: int = 1000
    sampling_seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.w_tr <= 1.0 and 0.0 <= self.w_rot <= 1.0):
            raise InvalidArgument("w_tr e w_rot devem estar em [0, 1]")
        if not (self.th > self.epsilon_d > 0.0):
            raise InvalidArgument("Exige-se th > epsilon_d > 0")
        if self.max_step_tr <= 0 or self.max_step_rot <= 0:
            raise InvalidArgument("Passos máximos devem ser positivos")
        if self.k < 2:
            raise InvalidArgument("k deve ser >= 2")
        if self.switch_threshold < 0:
            raise InvalidArgument("switch_threshold não pode ser negativo")

    def with_weights(self, w_tr: float, w_rot: float) -> "PFConfig":
        return replace(self, w_tr=float(w_tr), w_rot=float(w_rot))


def nearest_anchor(path: AnchorPath, obs: Pose) -> Tuple[int, float]:
    """
    Âncora mais próxima em distância translacional.

    Empates vão para o índice maior (mais perto da meta).
    """
    dists = np.linalg.norm(path.positions - obs.translation, axis=1)
    best = float(np.min(dists))
    idx = int(np.flatnonzero(dists <= best + 1e-9)[-1])
    return idx, float(dists[idx])


def attractive_action(path: AnchorPath, obs: Pose, cfg: PFConfig) -> Twist:
    """
    Ação atrativa: para a âncora mais próxima quando longe do caminho,
    senão para a âncora seguinte em direção à meta.
    """
    idx, dist = nearest_anchor(path, obs)
    if dist > cfg.switch_threshold:
        target = path.anchors[idx]
    else:
        target = path.anchors[min(idx + 1, len(path) - 1)]
    return pose_delta(obs, target).clamp(cfg.max_step_tr, cfg.max_step_rot)


def repulsive_action(plug: PlugModel, obs_plug: Pose, socket: SocketModel, cfg: PFConfig) -> Twist:
    """
    Ação repulsiva aplicada na origem do plug.

    Zero quando o par mais próximo está além de `th`. Caso contrário, a
    força virtual N(v) = v/max(d², ε_d²), com v = p_P − p_S = d·n (n é a
    normal externa no ponto-testemunha), aponta para fora do socket com
    módulo 1/d. Em contato ou penetração |v| é tomado como ε_d, e o módulo
    satura em 1/ε_d. A rotação é a pseudo-inversa do Jacobiano do ponto de
    contato, ω = r × N / |r|².

    Args:
        plug: Modelo do plug
        obs_plug: Pose observada do plug
        socket: Socket posicionado na pose observada
        cfg: Parâmetros do campo

    Returns:
        Twist repulsivo limitado aos passos máximos
    """
    p_plug, sdf, normal = witness(plug, obs_plug, socket, cfg.samples, cfg.sampling_seed)
    d = max(sdf, 0.0)
    if d > cfg.th:
        return Twist.zero()

    v = max(d, cfg.epsilon_d) * normal
    force = v / max(d * d, cfg.epsilon_d ** 2)
    lever = p_plug - obs_plug.translation
    lever_sq = float(lever @ lever)
    if lever_sq > 0.0:
        omega_deg = np.degrees(np.cross(lever, force) / lever_sq)
    else:
        omega_deg = np.zeros(3)
    return Twist(force, omega_deg).clamp(cfg.max_step_tr, cfg.max_step_rot)


def blend(att: Twist, rep: Twist, cfg: PFConfig) -> Twist:
    """Combinação convexa por componente, com limite final."""
    tr = cfg.w_tr * att.d_translation + (1.0 - cfg.w_tr) * rep.d_translation
    rot = cfg.w_rot * att.d_rotation + (1.0 - cfg.w_rot) * rep.d_rotation
    return Twist(tr, rot).clamp(cfg.max_step_tr, cfg.max_step_rot)


def pf_action(path: AnchorPath, plug: PlugModel, socket: SocketModel,
              obs_plug: Pose, obs_socket: Pose, cfg: PFConfig) -> Twist:
    """
    Ação do campo potencial a partir das poses observadas.

    Args:
        path: Caminho de âncoras calculado do socket observado
        plug: Modelo do plug
        socket: Modelo do socket
        obs_plug: Pose observada do plug
        obs_socket: Pose observada do socket
        cfg: Parâmetros do campo

    Returns:
        Twist combinado
    """
    att = attractive_action(path, obs_plug, cfg)
    rep = repulsive_action(plug, obs_plug, socket.at_pose(obs_socket), cfg)
    return blend(att, rep, cfg)


class PotentialFieldPolicy:
    """Controlador por campo potencial usado nos episódios."""

    def __init__(self, plug: PlugModel, socket: SocketModel, cfg: PFConfig):
        self.plug = plug
        self.socket = socket
        self.cfg = cfg

    def path_for(self, obs_socket: Pose) -> AnchorPath:
        return medial_anchor_path(self.socket.at_pose(obs_socket), self.cfg.retract_height, self.cfg.k)

    def components(self, obs_plug: Pose, obs_socket: Pose) -> Tuple[Twist, Twist]:
        """Componentes atrativa e repulsiva para as poses observadas."""
        path = self.path_for(obs_socket)
        att = attractive_action(path, obs_plug, self.cfg)
        rep = repulsive_action(self.plug, obs_plug, self.socket.at_pose(obs_socket), self.cfg)
        return att, rep

    def act(self, obs_plug: Pose, obs_socket: Pose,
            weights: Optional[Tuple[float, float]] = None) -> Twist:
        """
        Ação do campo para uma observação.

        Args:
            obs_plug: Pose observada do plug
            obs_socket: Pose observada do socket
            weights: (w_tr, w_rot) substituindo os pesos configurados

        Returns:
            Twist do campo potencial
        """
        cfg = self.cfg if weights is None else self.cfg.with_weights(*weights)
        att, rep = self.components(obs_plug, obs_socket)
        return blend(att, rep, cfg)
