"""
Álgebra SE(3) para poses do plug e do socket.

Poses guardam translação em milímetros e rotação como matriz 3x3.
Incrementos (Twist) usam eixo-ângulo em graus, a mesma unidade das
faixas de ruído e randomização.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.transform import Rotation

from src.exceptions import InvalidArgument

ORTHO_TOL = 1e-9


def _frozen(values, shape) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(shape)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Pose:
    """Transformação rígida: translação (mm) + rotação (matriz ortonormal)."""

    translation: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        t = _frozen(self.translation, (3,))
        r = _frozen(self.rotation, (3, 3))
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(r))):
            raise InvalidArgument("Pose com valores não finitos")
        erro = np.max(np.abs(r.T @ r - np.eye(3)))
        if erro >= ORTHO_TOL or np.linalg.det(r) <= 0:
            raise InvalidArgument(f"Rotação não ortonormal (erro {erro:.3e})")
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", r)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.zeros(3), np.eye(3))

    @classmethod
    def from_xyz_rpy(cls, translation: Sequence[float], rpy_deg: Sequence[float] = (0.0, 0.0, 0.0)) -> "Pose":
        """
        Cria uma pose a partir de translação e ângulos roll/pitch/yaw.

        Args:
            translation: Translação (mm)
            rpy_deg: Ângulos em graus, eixos fixos x-y-z

        Returns:
            Pose correspondente
        """
        rot = Rotation.from_euler("xyz", rpy_deg, degrees=True).as_matrix()
        return cls(translation, rot)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Pose":
        m = np.asarray(matrix, dtype=np.float64)
        return cls(m[:3, 3], m[:3, :3])

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def rpy_deg(self) -> np.ndarray:
        return Rotation.from_matrix(self.rotation).as_euler("xyz", degrees=True)

    def transform_points(self, points: np.ndarray) -> np.ndarray:
        """Aplica a pose a pontos (N, 3) expressos no frame local."""
        return np.asarray(points) @ self.rotation.T + self.translation

    def inverse_transform_points(self, points: np.ndarray) -> np.ndarray:
        """Leva pontos do mundo para o frame local."""
        return (np.asarray(points) - self.translation) @ self.rotation

    def equals(self, other: "Pose") -> bool:
        """Igualdade bit a bit."""
        return bool(np.array_equal(self.translation, other.translation)
                    and np.array_equal(self.rotation, other.rotation))

    def allclose(self, other: "Pose", atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.translation, other.translation, atol=atol, rtol=0.0)
                    and np.allclose(self.rotation, other.rotation, atol=atol, rtol=0.0))


@dataclass(frozen=True, eq=False)
class Twist:
    """Incremento SE(3): translação (mm) + eixo-ângulo (graus)."""

    d_translation: np.ndarray
    d_rotation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d_translation", _frozen(self.d_translation, (3,)))
        object.__setattr__(self, "d_rotation", _frozen(self.d_rotation, (3,)))

    @classmethod
    def zero(cls) -> "Twist":
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "Twist":
        arr = np.asarray(values, dtype=np.float64).reshape(6)
        return cls(arr[:3], arr[3:])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.d_translation, self.d_rotation])

    def clamp(self, max_tr: float, max_rot: float) -> "Twist":
        """Limita cada componente aos limites por eixo."""
        return Twist(np.clip(self.d_translation, -max_tr, max_tr),
                     np.clip(self.d_rotation, -max_rot, max_rot))

    def scaled(self, factor: float) -> "Twist":
        return Twist(self.d_translation * factor, self.d_rotation * factor)

    def __add__(self, other: "Twist") -> "Twist":
        return Twist(self.d_translation + other.d_translation,
                     self.d_rotation + other.d_rotation)

    def is_zero(self) -> bool:
        return not (np.any(self.d_translation) or np.any(self.d_rotation))

    def equals(self, other: "Twist") -> bool:
        return bool(np.array_equal(self.as_array(), other.as_array()))


def compose(a: Pose, b: Pose) -> Pose:
    """Composição a∘b (b expresso no frame de a)."""
    return Pose(a.rotation @ b.translation + a.translation, a.rotation @ b.rotation)


def invert(p: Pose) -> Pose:
    rt = p.rotation.T
    return Pose(-rt @ p.translation, rt)


def rotation_log_deg(rotation: np.ndarray) -> np.ndarray:
    """Logaritmo de SO(3) como vetor eixo-ângulo em graus."""
    return Rotation.from_matrix(rotation).as_rotvec(degrees=True)


def rotation_exp_deg(rotvec_deg: np.ndarray) -> np.ndarray:
    return Rotation.from_rotvec(np.asarray(rotvec_deg, dtype=np.float64), degrees=True).as_matrix()


def pose_delta(from_pose: Pose, to_pose: Pose) -> Twist:
    """
    Incremento que leva `from_pose` até `to_pose`.

    A rotação é aplicada em torno da posição de `from_pose`, com eixo no
    frame do mundo, de modo que apply_twist(from_pose, delta) reproduz
    `to_pose`.
    """
    d_tr = to_pose.translation - from_pose.translation
    d_rot = rotation_log_deg(to_pose.rotation @ from_pose.rotation.T)
    return Twist(d_tr, d_rot)


def apply_twist(pose: Pose, twist: Twist) -> Pose:
    """Aplica um incremento no frame do mundo em torno da origem da pose."""
    if not np.any(twist.d_rotation):
        rot = pose.rotation
    else:
        rot = rotation_exp_deg(twist.d_rotation) @ pose.rotation
    return Pose(pose.translation + twist.d_translation, rot)


def translation_distance(a: Pose, b: Pose) -> float:
    return float(np.linalg.norm(a.translation - b.translation))


def rotation_distance_deg(a: Pose, b: Pose) -> float:
    """Ângulo (graus) da rotação relativa entre duas poses."""
    return float(np.linalg.norm(rotation_log_deg(a.rotation @ b.rotation.T)))
