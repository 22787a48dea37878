"""
Consultas geométricas entre plug e socket.

O par mais próximo é obtido amostrando a superfície do plug e avaliando a
SDF analítica do socket em cada amostra.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from src.exceptions import DegenerateGeometry, InvalidArgument
from src.geometry.se3 import Pose
from src.geometry.shapes import PlugModel, SocketModel, sample_surface, socket_normal, socket_sdf


@lru_cache(maxsize=64)
def cached_surface(plug: PlugModel, m: int, seed: int = 0) -> np.ndarray:
    """Amostras da superfície do plug reaproveitadas entre consultas."""
    pts = sample_surface(plug, m, seed)
    pts.flags.writeable = False
    return pts


def _world_sdf(plug: PlugModel, plug_pose: Pose, socket: SocketModel, m: int, seed: int):
    world = plug_pose.transform_points(cached_surface(plug, m, seed))
    return world, socket_sdf(socket, world)


def closest_pair(plug: PlugModel, plug_pose: Pose, socket: SocketModel,
                 m: int = 1000, seed: int = 0) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Par de pontos mais próximo entre plug e socket.

    Args:
        plug: Modelo do plug
        plug_pose: Pose do plug no mundo
        socket: Modelo do socket (em sua pose)
        m: Resolução de amostragem
        seed: Semente das amostras

    Returns:
        (p_P, p_S, d): ponto do plug, sua projeção na superfície do socket
        e a distância (>= 0)
    """
    world, sdf = _world_sdf(plug, plug_pose, socket, m, seed)
    if np.all(sdf < -socket.cavity_depth):
        raise DegenerateGeometry("Todas as amostras penetram além da profundidade da cavidade")
    idx = int(np.argmin(sdf))
    p_plug = world[idx]
    p_socket = p_plug - sdf[idx] * socket_normal(socket, p_plug)
    return p_plug, p_socket, max(float(sdf[idx]), 0.0)


def witness(plug: PlugModel, plug_pose: Pose, socket: SocketModel,
            m: int = 1000, seed: int = 0) -> Tuple[np.ndarray, float, np.ndarray]:
    """Ponto-testemunha do plug, SDF com sinal e normal externa do socket nele."""
    world, sdf = _world_sdf(plug, plug_pose, socket, m, seed)
    if np.all(sdf < -socket.cavity_depth):
        raise DegenerateGeometry("Todas as amostras penetram além da profundidade da cavidade")
    idx = int(np.argmin(sdf))
    return world[idx], float(sdf[idx]), socket_normal(socket, world[idx])


def penetration_depth(plug: PlugModel, plug_pose: Pose, socket: SocketModel,
                      m: int = 1000, seed: int = 0) -> float:
    """Maior penetração entre as amostras do plug (0 sem colisão)."""
    _, sdf = _world_sdf(plug, plug_pose, socket, m, seed)
    return max(0.0, -float(np.min(sdf)))


@dataclass(frozen=True, eq=False)
class AnchorPath:
    """Âncoras do eixo medial, da pose de recuo (índice 0) até a meta."""

    anchors: Tuple[Pose, ...]

    def __post_init__(self):
        if len(self.anchors) == 0:
            raise InvalidArgument("Caminho de âncoras vazio")
        positions = np.array([a.translation for a in self.anchors])
        positions.flags.writeable = False
        object.__setattr__(self, "_positions", positions)

    @property
    def positions(self) -> np.ndarray:
        return self._positions

    @property
    def goal(self) -> Pose:
        return self.anchors[-1]

    def __len__(self) -> int:
        return len(self.anchors)


def medial_anchor_path(socket: SocketModel, retract_height: float, k: int = 30) -> AnchorPath:
    """
    Discretiza o caminho reto de recuo ao longo do eixo da cavidade.

    Args:
        socket: Modelo do socket (em sua pose)
        retract_height: Altura do recuo acima do topo do socket (mm)
        k: Número de âncoras (>= 2)

    Returns:
        AnchorPath com k poses igualmente espaçadas e orientação da meta
    """
    if k < 2:
        raise InvalidArgument(f"São necessárias ao menos 2 âncoras (k={k})")
    if retract_height <= 0:
        raise InvalidArgument("retract_height deve ser positivo")

    goal = socket.goal_pose()
    axis = goal.rotation[:, 2]
    length = socket.cavity_depth + retract_height
    fractions = 1.0 - np.arange(k) / (k - 1)
    anchors: List[Pose] = [
        Pose(goal.translation + (length * f) * axis, goal.rotation) for f in fractions[:-1]
    ]
    anchors.append(goal)
    return AnchorPath(tuple(anchors))
