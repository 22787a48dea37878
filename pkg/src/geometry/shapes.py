"""
Geometria paramétrica de plug e socket.

O plug é uma extrusão de uma seção transversal (círculo, retângulo ou
triângulo equilátero) com origem no centro da face inferior. O socket é
um bloco retangular com uma cavidade da mesma primitiva, aberta no topo.
As distâncias com sinal são analíticas e exatas para as três primitivas.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional

import numpy as np
from scipy.stats import qmc

from src.exceptions import InvalidArgument
from src.geometry.se3 import Pose, compose

PRIMITIVES = ("cylinder", "box", "triangle")

# Pontos forçados na borda inferior do cilindro
CYLINDER_RIM_POINTS = 16


# ==================== SEÇÕES TRANSVERSAIS 2D ====================

def sdf2d_circle(q: np.ndarray, radius: float) -> np.ndarray:
    return np.linalg.norm(q, axis=-1) - radius


def sdf2d_rect(q: np.ndarray, half_x: float, half_y: float) -> np.ndarray:
    d = np.abs(q) - np.array([half_x, half_y])
    outside = np.linalg.norm(np.maximum(d, 0.0), axis=-1)
    inside = np.minimum(np.max(d, axis=-1), 0.0)
    return outside + inside


def sdf2d_convex_polygon(q: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """
    Distância com sinal exata a um polígono convexo.

    Args:
        q: Pontos (N, 2)
        vertices: Vértices (K, 2) em ordem anti-horária

    Returns:
        Distâncias (N,), negativas no interior
    """
    q = np.atleast_2d(q)
    a = vertices
    b = np.roll(vertices, -1, axis=0)
    edge = b - a                                      # (K, 2)
    rel = q[:, None, :] - a[None, :, :]               # (N, K, 2)
    t = np.clip(np.sum(rel * edge, axis=-1) / np.sum(edge * edge, axis=-1), 0.0, 1.0)
    closest = a[None] + t[..., None] * edge[None]
    dist = np.min(np.linalg.norm(q[:, None, :] - closest, axis=-1), axis=1)
    # Lado de cada aresta: positivo fora para polígono anti-horário
    cross = edge[None, :, 0] * rel[..., 1] - edge[None, :, 1] * rel[..., 0]
    inside = np.all(cross >= 0.0, axis=1)
    return np.where(inside, -dist, dist)


@dataclass(frozen=True)
class CrossSection:
    """Seção transversal de uma primitiva, centrada na origem."""

    primitive: str
    width: float
    length: float

    def __post_init__(self):
        if self.primitive not in PRIMITIVES:
            raise InvalidArgument(f"Primitiva desconhecida: {self.primitive}")
        if not (self.width > 0 and self.length > 0):
            raise InvalidArgument("Dimensões da seção devem ser positivas")

    @property
    def triangle_vertices(self) -> np.ndarray:
        circum = self.width / np.sqrt(3.0)
        angles = np.radians([90.0, 210.0, 330.0])
        return np.stack([circum * np.cos(angles), circum * np.sin(angles)], axis=1)

    def sdf(self, q: np.ndarray) -> np.ndarray:
        if self.primitive == "cylinder":
            return sdf2d_circle(q, self.width / 2.0)
        if self.primitive == "box":
            return sdf2d_rect(q, self.width / 2.0, self.length / 2.0)
        return sdf2d_convex_polygon(q, self.triangle_vertices)

    def area(self) -> float:
        if self.primitive == "cylinder":
            return float(np.pi * (self.width / 2.0) ** 2)
        if self.primitive == "box":
            return float(self.width * self.length)
        return float(np.sqrt(3.0) / 4.0 * self.width ** 2)

    def perimeter(self) -> float:
        if self.primitive == "cylinder":
            return float(np.pi * self.width)
        if self.primitive == "box":
            return float(2.0 * (self.width + self.length))
        return float(3.0 * self.width)

    def corners(self) -> np.ndarray:
        """Vértices da borda usados como amostras obrigatórias."""
        if self.primitive == "box":
            hx, hy = self.width / 2.0, self.length / 2.0
            return np.array([[hx, hy], [-hx, hy], [-hx, -hy], [hx, -hy]])
        if self.primitive == "triangle":
            return self.triangle_vertices
        angles = 2.0 * np.pi * np.arange(CYLINDER_RIM_POINTS) / CYLINDER_RIM_POINTS
        return (self.width / 2.0) * np.stack([np.cos(angles), np.sin(angles)], axis=1)

    def polygon(self) -> np.ndarray:
        if self.primitive == "box":
            return self.corners()
        return self.triangle_vertices

    def sample_interior(self, u: np.ndarray) -> np.ndarray:
        """Mapeia pontos do quadrado unitário (N, 2) para o interior, uniformemente."""
        if self.primitive == "cylinder":
            r = (self.width / 2.0) * np.sqrt(u[:, 0])
            theta = 2.0 * np.pi * u[:, 1]
            return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
        if self.primitive == "box":
            return (u - 0.5) * np.array([self.width, self.length])
        a, b, c = self.triangle_vertices
        s, t = u[:, 0].copy(), u[:, 1].copy()
        flip = s + t > 1.0
        s[flip], t[flip] = 1.0 - s[flip], 1.0 - t[flip]
        return a + s[:, None] * (b - a) + t[:, None] * (c - a)

    def sample_boundary(self, s: np.ndarray) -> np.ndarray:
        """Mapeia s ∈ [0, 1) para pontos da borda, uniformes em comprimento de arco."""
        if self.primitive == "cylinder":
            theta = 2.0 * np.pi * s
            return (self.width / 2.0) * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        verts = self.polygon()
        nxt = np.roll(verts, -1, axis=0)
        lengths = np.linalg.norm(nxt - verts, axis=1)
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        arc = s * cum[-1]
        idx = np.clip(np.searchsorted(cum, arc, side="right") - 1, 0, len(verts) - 1)
        frac = (arc - cum[idx]) / lengths[idx]
        return verts[idx] + frac[:, None] * (nxt[idx] - verts[idx])

    def half_extents(self) -> np.ndarray:
        """Semi-extensões simétricas do retângulo envolvente centrado na origem."""
        if self.primitive == "cylinder":
            return np.array([self.width / 2.0, self.width / 2.0])
        if self.primitive == "box":
            return np.array([self.width / 2.0, self.length / 2.0])
        return np.max(np.abs(self.triangle_vertices), axis=0)


def _extrusion_sdf(d2: np.ndarray, z: np.ndarray, z_min: float, z_max: float) -> np.ndarray:
    """SDF exata de uma extrusão ao longo de z dada a SDF 2D da seção."""
    half = 0.5 * (z_max - z_min)
    dz = np.abs(z - (z_min + half)) - half
    outside = np.sqrt(np.maximum(d2, 0.0) ** 2 + np.maximum(dz, 0.0) ** 2)
    return outside + np.minimum(np.maximum(d2, dz), 0.0)


def _distance_to_extrusion(d2_outside: np.ndarray, dz_outside: np.ndarray) -> np.ndarray:
    return np.sqrt(d2_outside ** 2 + dz_outside ** 2)


# ==================== PLUG ====================

@dataclass(frozen=True)
class PlugModel:
    """Plug extrudado com origem no centro da face inferior."""

    primitive: str
    width: float
    height: float
    length: Optional[float] = None

    def __post_init__(self):
        if self.length is None or self.primitive != "box":
            object.__setattr__(self, "length", float(self.width))
        if not (self.width > 0 and self.height > 0 and self.length > 0):
            raise InvalidArgument("Dimensões do plug devem ser estritamente positivas")
        if self.primitive not in PRIMITIVES:
            raise InvalidArgument(f"Primitiva desconhecida: {self.primitive}")

    @property
    def section(self) -> CrossSection:
        return CrossSection(self.primitive, float(self.width), float(self.length))


def plug_sdf(plug: PlugModel, points: np.ndarray) -> np.ndarray:
    """Distância com sinal ao sólido do plug, pontos no frame do plug."""
    pts = np.atleast_2d(points)
    return _extrusion_sdf(plug.section.sdf(pts[:, :2]), pts[:, 2], 0.0, plug.height)


def sample_surface(plug: PlugModel, m: int, seed: int = 0) -> np.ndarray:
    """
    Amostra quase-uniforme e determinística da superfície do plug.

    Os vértices da borda inferior entram sempre; o restante é dividido
    entre base, topo e lateral proporcionalmente à área de cada face.

    Args:
        plug: Modelo do plug
        m: Número total de amostras (>= 4)
        seed: Semente do gerador Halton embaralhado

    Returns:
        Pontos (m, 3) no frame do plug
    """
    if m < 4:
        raise InvalidArgument(f"São necessárias ao menos 4 amostras (m={m})")

    section = plug.section
    rim = section.corners()[:m]
    forced = np.column_stack([rim, np.zeros(len(rim))])
    restante = m - len(forced)

    areas = np.array([section.area(), section.area(), section.perimeter() * plug.height])
    quotas = areas / areas.sum() * restante
    counts = np.floor(quotas).astype(int)
    # Maior resto para fechar a soma exatamente
    for idx in np.argsort(-(quotas - counts))[: restante - counts.sum()]:
        counts[idx] += 1

    partes = [forced]
    for face, n in enumerate(counts):
        if n == 0:
            continue
        u = qmc.Halton(d=2, scramble=True, seed=seed + face).random(n)
        if face == 0:
            partes.append(np.column_stack([section.sample_interior(u), np.zeros(n)]))
        elif face == 1:
            partes.append(np.column_stack([section.sample_interior(u), np.full(n, plug.height)]))
        else:
            partes.append(np.column_stack([section.sample_boundary(u[:, 0]), u[:, 1] * plug.height]))
    return np.vstack(partes)


# ==================== SOCKET ====================

@dataclass(frozen=True)
class SocketModel:
    """
    Bloco com cavidade aberta no topo.

    O frame do socket fica no centro da face inferior do bloco; o topo está
    em z = outer_height e o fundo da cavidade em z = outer_height - cavity_depth.
    """

    primitive: str
    cavity_width: float
    cavity_depth: float
    outer_width: float
    outer_length: float
    outer_height: float
    tolerance: float
    cavity_length: Optional[float] = None
    base_pose: Pose = field(default_factory=Pose.identity)

    def __post_init__(self):
        if self.cavity_length is None or self.primitive != "box":
            object.__setattr__(self, "cavity_length", float(self.cavity_width))
        if self.tolerance <= 0:
            raise InvalidArgument("Tolerância do socket deve ser positiva")
        if min(self.cavity_width, self.cavity_length, self.cavity_depth,
               self.outer_width, self.outer_length, self.outer_height) <= 0:
            raise InvalidArgument("Dimensões do socket devem ser positivas")
        half = self.cavity.half_extents()
        if half[0] >= self.outer_width / 2.0 or half[1] >= self.outer_length / 2.0:
            raise InvalidArgument("Cavidade não cabe dentro do bloco")
        if self.cavity_depth >= self.outer_height:
            raise InvalidArgument("Cavidade mais profunda que o bloco")

    @classmethod
    def for_plug(cls, plug: PlugModel, tolerance: float, cavity_depth: float,
                 outer_width: float, outer_length: float, outer_height: float,
                 base_pose: Optional[Pose] = None) -> "SocketModel":
        """Cria o socket cuja cavidade excede o plug em `tolerance`."""
        return cls(
            primitive=plug.primitive,
            cavity_width=plug.width + tolerance,
            cavity_length=plug.length + tolerance,
            cavity_depth=cavity_depth,
            outer_width=outer_width,
            outer_length=outer_length,
            outer_height=outer_height,
            tolerance=tolerance,
            base_pose=base_pose if base_pose is not None else Pose.identity(),
        )

    @property
    def cavity(self) -> CrossSection:
        return CrossSection(self.primitive, float(self.cavity_width), float(self.cavity_length))

    @property
    def floor_z(self) -> float:
        return self.outer_height - self.cavity_depth

    def at_pose(self, base_pose: Pose) -> "SocketModel":
        return replace(self, base_pose=base_pose)

    def goal_pose(self) -> Pose:
        """Pose do plug totalmente inserido: base no fundo da cavidade."""
        return compose(self.base_pose, Pose(np.array([0.0, 0.0, self.floor_z]), np.eye(3)))


def socket_sdf(socket: SocketModel, points: np.ndarray) -> np.ndarray:
    """
    Distância com sinal ao material do socket.

    O sólido é a união de uma laje (fundo) e de um anel (paredes), ambos
    extrusões em z; fora do sólido a distância é o mínimo das distâncias
    às duas extrusões. Dentro, é a menor distância ao exterior do bloco ou
    ao prisma da cavidade.

    Args:
        socket: Modelo do socket (frame em `base_pose`)
        points: Pontos (N, 3) ou (3,) no frame do mundo

    Returns:
        Distâncias (N,): positivas fora, negativas na penetração
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    local = socket.base_pose.inverse_transform_points(pts)
    q, z = local[:, :2], local[:, 2]
    floor, top = socket.floor_z, socket.outer_height

    s_outer = sdf2d_rect(q, socket.outer_width / 2.0, socket.outer_length / 2.0)
    s_cav = socket.cavity.sdf(q)

    # Fora do material
    d_slab = _distance_to_extrusion(np.maximum(s_outer, 0.0),
                                    np.maximum(np.maximum(-z, z - floor), 0.0))
    d_ring = _distance_to_extrusion(np.maximum(np.maximum(s_outer, -s_cav), 0.0),
                                    np.maximum(np.maximum(floor - z, z - top), 0.0))
    outside = np.minimum(d_slab, d_ring)

    # Dentro do material
    to_box_exterior = np.minimum(np.minimum(-s_outer, z), top - z)
    to_cavity = _distance_to_extrusion(np.maximum(s_cav, 0.0), np.maximum(floor - z, 0.0))
    inside = np.minimum(to_box_exterior, to_cavity)

    return np.where(outside > 0.0, outside, -inside)


def socket_normal(socket: SocketModel, point: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Gradiente unitário da SDF do socket por diferenças centrais."""
    p = np.asarray(point, dtype=np.float64)
    offsets = np.vstack([np.eye(3) * h, -np.eye(3) * h])
    values = socket_sdf(socket, p[None, :] + offsets)
    grad = (values[:3] - values[3:]) / (2.0 * h)
    norm = np.linalg.norm(grad)
    if norm == 0.0:
        return np.array([0.0, 0.0, 1.0])
    return grad / norm


# ==================== CENA ====================

@dataclass(frozen=True)
class SceneSpec:
    """Par plug/socket com parâmetros de amostragem e nível de dificuldade."""

    name: str
    plug: PlugModel
    socket: SocketModel
    tier: str = "easy"
    sampling_seed: int = 0
    samples: int = 1000
    eps_tr: Optional[float] = None

    def __post_init__(self):
        if self.plug.primitive != self.socket.primitive:
            raise InvalidArgument("Plug e cavidade devem usar a mesma primitiva")
        if self.samples < 4:
            raise InvalidArgument("samples deve ser >= 4")

    @property
    def tolerance(self) -> float:
        return self.socket.tolerance

    def success_eps_tr(self) -> float:
        """Tolerância translacional de sucesso, sempre menor que a folga da cena."""
        if self.eps_tr is not None:
            return float(self.eps_tr)
        return 1.0 if self.tolerance > 1.0 else 0.5 * self.tolerance

    def bounding_box(self) -> "SceneSpec":
        """
        Aproxima plug e cavidade pela caixa envolvente simétrica.

        Mantém a tolerância, a profundidade e o bloco externo.
        """
        if self.plug.primitive == "box":
            return self
        hx, hy = self.plug.section.half_extents()
        plug = PlugModel("box", 2.0 * hx, self.plug.height, 2.0 * hy)
        socket = SocketModel.for_plug(
            plug, self.socket.tolerance, self.socket.cavity_depth,
            self.socket.outer_width, self.socket.outer_length, self.socket.outer_height,
            self.socket.base_pose,
        )
        return replace(self, name=f"{self.name}_bbox", plug=plug, socket=socket)

    def to_dict(self) -> Dict[str, Any]:
        base = self.socket.base_pose
        return {
            "name": self.name,
            "tier": self.tier,
            "primitive": self.plug.primitive,
            "width": float(self.plug.width),
            "length": float(self.plug.length),
            "height": float(self.plug.height),
            "tolerance": float(self.socket.tolerance),
            "cavity_depth": float(self.socket.cavity_depth),
            "outer_width": float(self.socket.outer_width),
            "outer_length": float(self.socket.outer_length),
            "outer_height": float(self.socket.outer_height),
            "base_pose": {
                "translation": [float(v) for v in base.translation],
                "rpy_deg": [float(v) for v in base.rpy_deg()],
            },
            "sampling_seed": int(self.sampling_seed),
            "samples": int(self.samples),
            "eps_tr": self.eps_tr,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SceneSpec":
        """
        Constrói a cena a partir do esquema YAML documentado.

        Args:
            data: Dicionário com primitive, width, height, tolerance,
                cavity_depth e dimensões externas (length e base_pose opcionais)

        Returns:
            SceneSpec validada
        """
        try:
            plug = PlugModel(
                primitive=str(data["primitive"]),
                width=float(data["width"]),
                height=float(data["height"]),
                length=float(data["length"]) if data.get("length") is not None else None,
            )
            pose_cfg = data.get("base_pose") or {}
            base = Pose.from_xyz_rpy(pose_cfg.get("translation", [0.0, 0.0, 0.0]),
                                     pose_cfg.get("rpy_deg", [0.0, 0.0, 0.0]))
            socket = SocketModel.for_plug(
                plug,
                tolerance=float(data["tolerance"]),
                cavity_depth=float(data["cavity_depth"]),
                outer_width=float(data["outer_width"]),
                outer_length=float(data.get("outer_length", data["outer_width"])),
                outer_height=float(data["outer_height"]),
                base_pose=base,
            )
        except KeyError as e:
            raise InvalidArgument(f"Campo obrigatório ausente na cena: {e}") from e
        eps = data.get("eps_tr")
        return cls(
            name=str(data.get("name", "cena")),
            plug=plug,
            socket=socket,
            tier=str(data.get("tier", "easy")),
            sampling_seed=int(data.get("sampling_seed", 0)),
            samples=int(data.get("samples", 1000)),
            eps_tr=float(eps) if eps is not None else None,
        )
