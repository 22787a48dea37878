"""
Codificação de poses para as redes.

Cada pose vira 12 números: translação normalizada (3) seguida da matriz
de rotação em ordem de linhas (9).
"""

import numpy as np

from src.exceptions import MissingPrivilegedData
from src.geometry.se3 import Pose, compose, invert

TRANSLATION_SCALE = 100.0
POSE_DIM = 12
ACTOR_DIM = 2 * POSE_DIM
CRITIC_DIM = 6 * POSE_DIM


def encode_pose(pose: Pose, scale: float = TRANSLATION_SCALE) -> np.ndarray:
    return np.concatenate([pose.translation / scale, pose.rotation.reshape(-1)])


def decode_rotation(encoding: np.ndarray) -> np.ndarray:
    """Bloco de rotação (9 entradas) de volta para matriz 3x3."""
    return np.asarray(encoding, dtype=np.float64)[3:12].reshape(3, 3)


def decode_pose(encoding: np.ndarray, scale: float = TRANSLATION_SCALE) -> Pose:
    enc = np.asarray(encoding, dtype=np.float64)
    return Pose(enc[:3] * scale, decode_rotation(enc))


def encode_actor_obs(obs, scale: float = TRANSLATION_SCALE) -> np.ndarray:
    """[plug observado, socket observado] -> vetor de 24."""
    return np.concatenate([encode_pose(obs.obs_plug, scale), encode_pose(obs.obs_socket, scale)])


def encode_critic_obs(obs, scale: float = TRANSLATION_SCALE) -> np.ndarray:
    """
    Entrada privilegiada do crítico (72 valores).

    Ordem: plug observado, socket observado, plug real, socket real,
    relativa observada, relativa real. A pose relativa é a do plug no
    frame do socket.

    Raises:
        MissingPrivilegedData: Observação sem poses reais
    """
    if obs.gt_plug is None or obs.gt_socket is None:
        raise MissingPrivilegedData("Observação sem poses reais para o crítico")
    rel_obs = compose(invert(obs.obs_socket), obs.obs_plug)
    rel_gt = compose(invert(obs.gt_socket), obs.gt_plug)
    blocks = [obs.obs_plug, obs.obs_socket, obs.gt_plug, obs.gt_socket, rel_obs, rel_gt]
    return np.concatenate([encode_pose(p, scale) for p in blocks])
