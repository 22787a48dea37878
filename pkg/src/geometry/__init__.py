"""
Geometria SE(3) e consultas plug/socket.
"""

from .se3 import (
    Pose,
    Twist,
    compose,
    invert,
    pose_delta,
    apply_twist,
    translation_distance,
    rotation_distance_deg,
)
from .shapes import (
    PRIMITIVES,
    CrossSection,
    PlugModel,
    SocketModel,
    SceneSpec,
    plug_sdf,
    sample_surface,
    socket_sdf,
    socket_normal,
)
from .queries import (
    AnchorPath,
    closest_pair,
    penetration_depth,
    medial_anchor_path,
    witness,
)

__all__ = [
    # SE(3)
    'Pose',
    'Twist',
    'compose',
    'invert',
    'pose_delta',
    'apply_twist',
    'translation_distance',
    'rotation_distance_deg',

    # Formas
    'PRIMITIVES',
    'CrossSection',
    'PlugModel',
    'SocketModel',
    'SceneSpec',
    'plug_sdf',
    'sample_surface',
    'socket_sdf',
    'socket_normal',

    # Consultas
    'AnchorPath',
    'closest_pair',
    'penetration_depth',
    'medial_anchor_path',
    'witness',
]
