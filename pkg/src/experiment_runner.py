"""
Execução de experimentos: células de avaliação, varreduras, traces de
episódios e amostragem do campo potencial.

Cada célula (cena, variante, nível de ruído) grava seu próprio
subdiretório com manifest.json e episodes.csv, de onde qualquer número da
tabela final pode ser recalculado.
"""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.config import construir_env, construir_secao, resolver_cena
from src.exceptions import ChecksumMismatch, ConfigError, InvalidSpec
from src.geometry.se3 import Pose, Twist, compose
from src.insertion_env import EnvConfig, EpisodeTrace, InsertionEnv, NoiseLevel, build_pf_policy
from src.learning.checkpoint import load_checkpoint
from src.learning.encoding import encode_actor_obs
from src.learning.policy import ActorCritic, executed_action, variant_spec
from src.logic.potential_field_logic import PFConfig, blend
from src.utils import escrever_manifesto, formatar_nivel_ruido, ler_manifesto, semente_episodio

logger = logging.getLogger(__name__)

NIVEIS_PADRAO = (0.0, 1.0, 5.0)
EPISODE_COLUMNS = ["seed", "trial", "success", "steps", "cumulative_penetration",
                   "final_distance_tr", "final_distance_rot"]

Checkpoints = Union[None, str, Sequence[Optional[str]]]


# ==================== TIPOS ====================

@dataclass(frozen=True)
class ExperimentCell:
    """Uma célula da matriz de avaliação."""

    env: EnvConfig
    pf: PFConfig
    variant: str
    noise: float
    trials: int
    seeds: Tuple[int, ...]
    checkpoints: Tuple[Optional[str], ...] = ()
    traces: int = 0

    @property
    def scene_name(self) -> str:
        return self.env.scene.name

    @property
    def key(self) -> str:
        return f"{self.scene_name}__{self.variant}__{self.noise:g}"

    def describe(self) -> Dict[str, Any]:
        return {
            "scene": self.env.scene.to_dict(),
            "variant": self.variant,
            "noise": float(self.noise),
            "trials": int(self.trials),
            "seeds": list(self.seeds),
            "checkpoints": list(self.checkpoints),
            "env": {k: v for k, v in asdict(self.env).items() if k != "scene"},
            "pf": asdict(self.pf),
        }


@dataclass(frozen=True)
class ExperimentSpec:
    """Matriz cenas × variantes × níveis de ruído."""

    envs: Tuple[EnvConfig, ...]
    pf: PFConfig
    variants: Tuple[str, ...]
    noise_levels: Tuple[float, ...] = NIVEIS_PADRAO
    trials: int = 200
    seeds: Tuple[int, ...] = (0,)
    checkpoints: Dict[str, Tuple[Optional[str], ...]] = field(default_factory=dict)
    traces_per_cell: int = 0
    output_dir: str = "runs"

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidSpec(f"trials deve ser >= 1 (recebido {self.trials})")
        if not self.envs or not self.variants or not self.noise_levels or not self.seeds:
            raise InvalidSpec("Cenas, variantes, níveis de ruído e sementes não podem ser vazios")
        if len(set(self.seeds)) != len(self.seeds):
            raise InvalidSpec("Sementes repetidas entre as repetições")
        if min(self.noise_levels) < 0:
            raise InvalidSpec("Níveis de ruído devem ser não negativos")
        for variant in self.variants:
            variant_spec(variant)

    def validate_checkpoints(self) -> None:
        """Variantes com rede precisam de checkpoint (1 ou um por semente) existente."""
        for variant in self.variants:
            if not variant_spec(variant).learns:
                continue
            caminhos = self.checkpoints.get(variant, ())
            if not caminhos:
                raise InvalidSpec(f"A variante {variant} exige --checkpoint ou experiment.checkpoints")
            if len(caminhos) not in (1, len(self.seeds)):
                raise InvalidSpec(f"Checkpoints de {variant}: informe 1 ou {len(self.seeds)}")
            for caminho in caminhos:
                if caminho is None or not os.path.exists(caminho):
                    raise InvalidSpec(f"Checkpoint não encontrado: {caminho}")

    def cells(self) -> List[ExperimentCell]:
        return [
            ExperimentCell(env, self.pf, variant, float(noise), self.trials, tuple(self.seeds),
                           tuple(self.checkpoints.get(variant, ())), self.traces_per_cell)
            for env in self.envs
            for variant in self.variants
            for noise in self.noise_levels
        ]


@dataclass
class EpisodeResult:
    seed: int
    trial: int
    success: bool
    steps: int
    cumulative_penetration: float
    final_distance_tr: float
    final_distance_rot: float
    trace: Optional[EpisodeTrace] = field(default=None, repr=False)

    def as_row(self) -> Dict[str, Any]:
        return {c: getattr(self, c) for c in EPISODE_COLUMNS}


@dataclass
class SuccessStats:
    """Agregado de uma célula: taxas por semente, depois entre sementes."""

    successes: int
    trials: int
    mean_rate: float
    std_rate: float
    mean_steps_to_success: float
    seed_rates: Tuple[float, ...] = ()
    episodes: List[EpisodeResult] = field(default_factory=list, repr=False, compare=False)

    @classmethod
    def from_episodes(cls, episodes: Sequence[EpisodeResult]) -> "SuccessStats":
        if not episodes:
            raise InvalidSpec("Célula sem episódios")
        df = pd.DataFrame([e.as_row() for e in episodes])
        return cls.from_frame(df, list(episodes))

    @classmethod
    def from_frame(cls, df: pd.DataFrame, episodes: Optional[List[EpisodeResult]] = None) -> "SuccessStats":
        seed_rates = df.groupby("seed", sort=False)["success"].mean().astype(float)
        passos = df.loc[df["success"].astype(bool), "steps"]
        return cls(
            successes=int(df["success"].astype(bool).sum()),
            trials=int(len(df)),
            mean_rate=float(seed_rates.mean()),
            std_rate=float(np.std(seed_rates.to_numpy(), ddof=0)),
            mean_steps_to_success=float(passos.mean()) if len(passos) else float("nan"),
            seed_rates=tuple(float(r) for r in seed_rates),
            episodes=episodes or [],
        )


# ==================== CONSTRUÇÃO A PARTIR DO YAML ====================

def construir_experimento(config: Dict[str, Any], output_dir: Optional[str] = None,
                          variant: Optional[str] = None, checkpoint: Optional[str] = None,
                          seed: Optional[int] = None) -> ExperimentSpec:
    """
    Monta o ExperimentSpec da seção `experiment`.

    Args:
        config: Configuração carregada
        output_dir: Sobrescreve o diretório de saída
        variant: Restringe a uma variante (flag --variant)
        checkpoint: Checkpoint para a variante escolhida (flag --checkpoint)
        seed: Substitui a lista de sementes por uma única (flag --seed)
    """
    exp = dict(config.get("experiment") or {})
    cenas = exp.get("scenes") or ([config["scene"]] if "scene" in config else [])
    if not cenas:
        raise ConfigError("Seção 'experiment' sem cenas")
    envs = tuple(construir_env(config, resolver_cena(c)) for c in cenas)
    variants = (variant,) if variant else tuple(exp.get("variants") or ("pf_only",))

    checkpoints: Dict[str, Tuple[Optional[str], ...]] = {}
    for nome, caminhos in (exp.get("checkpoints") or {}).items():
        checkpoints[nome] = tuple([caminhos] if isinstance(caminhos, str) else caminhos)
    if checkpoint and variant:
        checkpoints[variant] = (checkpoint,)

    seeds = (int(seed),) if seed is not None else tuple(int(s) for s in exp.get("seeds", (0,)))
    try:
        return ExperimentSpec(
            envs=envs,
            pf=construir_secao(PFConfig, config.get("pf"), "pf"),
            variants=variants,
            noise_levels=tuple(float(n) for n in exp.get("noise_levels", NIVEIS_PADRAO)),
            trials=int(exp.get("trials", 200)),
            seeds=seeds,
            checkpoints=checkpoints,
            traces_per_cell=int(exp.get("traces_per_cell", 0)),
            output_dir=output_dir or exp.get("output_dir", "runs"),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Seção 'experiment' inválida: {e}") from e


# ==================== EPISÓDIOS ====================

def _carregar_agentes(cell: ExperimentCell) -> List[Optional[ActorCritic]]:
    """Um agente por semente (ou None para variantes sem rede)."""
    spec = variant_spec(cell.variant)
    if not spec.learns:
        return [None] * len(cell.seeds)
    if not cell.checkpoints or any(c is None for c in cell.checkpoints):
        raise InvalidSpec(f"A variante {cell.variant} exige checkpoint")
    caminhos = list(cell.checkpoints)
    if len(caminhos) == 1:
        caminhos = caminhos * len(cell.seeds)
    if len(caminhos) != len(cell.seeds):
        raise InvalidSpec("Número de checkpoints deve ser 1 ou igual ao de sementes")
    cache: Dict[str, ActorCritic] = {}
    agentes = []
    for caminho in caminhos:
        if caminho not in cache:
            cache[caminho] = load_checkpoint(caminho, expected_variant=cell.variant).eval()
        agentes.append(cache[caminho])
    return agentes


def run_episode(env_cfg: EnvConfig, pf_policy, variant: str, agent: Optional[ActorCritic],
                level: NoiseLevel, seed, beta: float = 1.0, record_trace: bool = False) -> EpisodeResult:
    """
    Executa um episódio com a média determinística da política.

    Args:
        env_cfg: Configuração do ambiente
        pf_policy: Campo potencial
        variant: Nome da variante
        agent: Agente treinado (None para pf_only)
        level: Nível de ruído do episódio
        seed: Semente do episódio
        beta: Escala do resíduo (1 na avaliação)
        record_trace: Se deve registrar o trace passo a passo

    Returns:
        EpisodeResult
    """
    spec = variant_spec(variant)
    env = InsertionEnv(env_cfg)
    obs = env.reset(level, seed=seed)
    trace = EpisodeTrace() if record_trace else None
    zero = Twist.zero()
    if trace is not None:
        trace.record(0, env.state, obs, zero, zero, zero, 0.0, env.state.penetration, False)

    hidden = agent.initial_state(1) if agent is not None else None
    starts = np.ones(1, dtype=bool)
    scale = agent.cfg.translation_scale if agent is not None else 1.0
    info: Dict[str, Any] = {}
    done = False
    while not done:
        u = None
        if agent is not None:
            publica = obs.without_privileged()
            mean, _, _, hidden = agent.step(encode_actor_obs(publica, scale)[None], None, hidden, starts)
            u = mean[0]
            starts[:] = False
        policy_cfg = agent.cfg if agent is not None else None
        if policy_cfg is None:
            a_pf = pf_policy.act(obs.obs_plug, obs.obs_socket)
            a_rl, a_t = zero, a_pf
        else:
            a_pf, a_rl, a_t = executed_action(spec, pf_policy, obs, u, beta, policy_cfg,
                                              env_cfg.max_action_tr, env_cfg.max_action_rot)
        obs, reward, done, info = env.step(a_t)
        if trace is not None:
            trace.record(env.state.step_count, env.state, obs, a_pf, a_rl, a_t,
                         reward, info["penetration"], done)

    state = env.state
    if trace is not None:
        trace.outcome = state.outcome
    return EpisodeResult(
        seed=-1, trial=-1,
        success=state.outcome == "success",
        steps=state.step_count,
        cumulative_penetration=state.cumulative_penetration,
        final_distance_tr=info.get("distance_tr", float("nan")),
        final_distance_rot=info.get("distance_rot", float("nan")),
        trace=trace,
    )


def run_eval(cell: ExperimentCell, checkpoint: Checkpoints = None, record_traces: int = 0) -> SuccessStats:
    """
    Avalia uma célula: `trials` episódios por semente, com β = 1.

    Args:
        cell: Célula da matriz
        checkpoint: Caminho (ou um por semente) que sobrescreve os da célula
        record_traces: Quantos episódios, na ordem, registram trace

    Returns:
        SuccessStats com os episódios anexados

    Raises:
        InvalidSpec: trials = 0 ou checkpoint ausente para variante com rede
        ChecksumMismatch: Checkpoint incompatível com a variante
    """
    if cell.trials < 1:
        raise InvalidSpec(f"trials deve ser >= 1 (recebido {cell.trials})")
    if checkpoint is not None:
        caminhos = (checkpoint,) if isinstance(checkpoint, str) else tuple(checkpoint)
        cell = ExperimentCell(cell.env, cell.pf, cell.variant, cell.noise, cell.trials,
                              cell.seeds, caminhos, cell.traces)

    agentes = _carregar_agentes(cell)
    pf_policy = build_pf_policy(cell.env, cell.pf)
    level = NoiseLevel.from_level(cell.noise, cell.env)

    episodes: List[EpisodeResult] = []
    for seed, agent in zip(cell.seeds, agentes):
        for trial in range(cell.trials):
            result = run_episode(cell.env, pf_policy, cell.variant, agent, level,
                                 semente_episodio(seed, trial), beta=1.0,
                                 record_trace=len(episodes) < record_traces)
            result.seed, result.trial = int(seed), trial
            episodes.append(result)

    stats = SuccessStats.from_episodes(episodes)
    logger.info(f"Célula {cell.key}: sucesso {stats.mean_rate:.2%} ± {stats.std_rate:.2%}")
    return stats


def _nome_trace(result: EpisodeResult) -> str:
    tag = "success" if result.success else "failure"
    return f"trace_s{result.seed}_t{result.trial:04d}_{tag}.csv"


def export_trajectories(cell: ExperimentCell, n: int, out_dir: str,
                        checkpoint: Checkpoints = None) -> List[str]:
    """Grava os traces dos primeiros n episódios da célula."""
    if n < 1:
        return []
    os.makedirs(out_dir, exist_ok=True)
    stats = run_eval(cell, checkpoint, record_traces=n)
    caminhos = []
    for result in stats.episodes[:n]:
        caminho = os.path.join(out_dir, _nome_trace(result))
        result.trace.to_csv(caminho)
        caminhos.append(caminho)
    logger.info(f"{len(caminhos)} traces gravados em {out_dir}")
    return caminhos


def evaluate_cell(cell: ExperimentCell, out_dir: str) -> Dict[str, Any]:
    """
    Avalia a célula e grava episodes.csv, traces e manifest.json.

    Returns:
        Linha de resultados da célula
    """
    os.makedirs(out_dir, exist_ok=True)
    stats = run_eval(cell, record_traces=cell.traces)
    pd.DataFrame([e.as_row() for e in stats.episodes], columns=EPISODE_COLUMNS).to_csv(
        os.path.join(out_dir, "episodes.csv"), index=False)
    if cell.traces:
        traces_dir = os.path.join(out_dir, "traces")
        os.makedirs(traces_dir, exist_ok=True)
        for result in stats.episodes[:cell.traces]:
            result.trace.to_csv(os.path.join(traces_dir, _nome_trace(result)))

    linha = resultado_celula(cell, stats)
    escrever_manifesto(out_dir, cell.describe(), cell.seeds[0],
                       {"seeds": list(cell.seeds), "result": linha})
    return linha


def resultado_celula(cell: ExperimentCell, stats: SuccessStats) -> Dict[str, Any]:
    return {
        "scene": cell.scene_name,
        "variant": cell.variant,
        "noise": float(cell.noise),
        "noise_label": formatar_nivel_ruido(cell.noise),
        "successes": stats.successes,
        "trials": stats.trials,
        "mean_rate": stats.mean_rate,
        "std_rate": stats.std_rate,
        "mean_steps_to_success": stats.mean_steps_to_success,
    }


def rederive_cell(cell_dir: str) -> SuccessStats:
    """
    Recalcula as estatísticas de uma célula a partir do episodes.csv em disco
    e confere com o resultado gravado no manifesto.

    Raises:
        ChecksumMismatch: episodes.csv não reproduz o resultado do manifesto
    """
    df = pd.read_csv(os.path.join(cell_dir, "episodes.csv"))
    stats = SuccessStats.from_frame(df)
    gravado = ler_manifesto(cell_dir).get("result") or {}
    if gravado and (stats.successes != gravado["successes"] or stats.trials != gravado["trials"]
                    or not math.isclose(stats.mean_rate, gravado["mean_rate"], abs_tol=1e-12)):
        logger.error(f"Célula {cell_dir}: {stats.successes}/{stats.trials} no disco, "
                     f"{gravado['successes']}/{gravado['trials']} no manifesto")
        raise ChecksumMismatch(f"episodes.csv não reproduz o manifesto em {cell_dir}")
    return stats


def auditar_varredura(spec: ExperimentSpec, seed: int = 0) -> str:
    """Re-deriva uma célula sorteada da varredura gravada e devolve sua chave."""
    cells = spec.cells()
    escolhida = cells[int(np.random.default_rng(seed).integers(len(cells)))]
    stats = rederive_cell(os.path.join(spec.output_dir, "cells", escolhida.key))
    logger.info(f"Auditoria: {escolhida.key} re-derivada ({stats.successes}/{stats.trials})")
    return escolhida.key


def _avaliar(args) -> Dict[str, Any]:
    cell, out_dir = args
    return evaluate_cell(cell, out_dir)


def sweep(spec: ExperimentSpec, workers: int = 1) -> List[Dict[str, Any]]:
    """
    Avalia todas as células, possivelmente em paralelo.

    Cada célula escreve apenas no seu subdiretório; os resultados voltam na
    ordem das células.
    """
    tarefas = [(cell, os.path.join(spec.output_dir, "cells", cell.key)) for cell in spec.cells()]
    logger.info(f"Varredura com {len(tarefas)} células e {workers} worker(s)")
    if workers <= 1:
        return [_avaliar(t) for t in tarefas]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_avaliar, tarefas))


# ==================== CAMPO ====================

@dataclass(frozen=True)
class FieldGrid:
    """Grade y–z no frame do socket (mm)."""

    y_min: float = -30.0
    y_max: float = 30.0
    z_min: float = 10.0
    z_max: float = 60.0
    ny: int = 25
    nz: int = 23
    x: float = 0.0
    rpy_deg: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.ny < 1 or self.nz < 1 or self.y_max < self.y_min or self.z_max < self.z_min:
            raise InvalidSpec("Grade do campo inválida")

    def points(self) -> List[Tuple[float, float]]:
        ys = np.linspace(self.y_min, self.y_max, self.ny)
        zs = np.linspace(self.z_min, self.z_max, self.nz)
        return [(float(y), float(z)) for z in zs for y in ys]


FIELD_COMPONENTS = ("att", "rep", "pf")
FIELD_AXES = ("tx", "ty", "tz", "rx", "ry", "rz")


def export_field(env_cfg: EnvConfig, pf_cfg: PFConfig, grid: FieldGrid,
                 out_path: Optional[str] = None) -> pd.DataFrame:
    """
    Amostra o campo potencial sem ruído sobre a grade.

    Returns:
        DataFrame com y, z e as componentes atrativa, repulsiva e combinada
    """
    policy = build_pf_policy(env_cfg, pf_cfg)
    socket_pose = env_cfg.scene.socket.base_pose
    linhas = []
    for y, z in grid.points():
        plug_pose = compose(socket_pose, Pose.from_xyz_rpy([grid.x, y, z], grid.rpy_deg))
        att, rep = policy.components(plug_pose, socket_pose)
        combined = blend(att, rep, policy.cfg)
        linha = {"y": y, "z": z}
        for nome, twist in zip(FIELD_COMPONENTS, (att, rep, combined)):
            for eixo, valor in zip(FIELD_AXES, twist.as_array()):
                linha[f"{nome}_{eixo}"] = float(valor)
        linhas.append(linha)

    df = pd.DataFrame(linhas)
    if out_path:
        os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
        df.to_csv(out_path, index=False)
        logger.info(f"Campo exportado: {out_path} ({len(df)} pontos)")
    return df
