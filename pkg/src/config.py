"""
Configuração: arquivos YAML, variáveis de ambiente e catálogo de cenas.
"""

import logging
import os
from dataclasses import dataclass, fields
from typing import Any, Dict, Optional, Union

import torch
import yaml
from dotenv import load_dotenv

from src.exceptions import ConfigError, InvalidArgument
from src.geometry.shapes import SceneSpec
from src.insertion_env import EnvConfig
from src.learning.policy import PolicyConfig
from src.learning.ppo import PPOConfig
from src.learning.trainer import CurriculumConfig, RunConfig
from src.logic.potential_field_logic import PFConfig

# Carregar variáveis de ambiente
load_dotenv()

logger = logging.getLogger(__name__)

RAIZ_PROJETO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CATALOGO_PADRAO = os.path.join(RAIZ_PROJETO, "configs", "scenes.yaml")
FORMATO_LOG = "%(asctime)s %(levelname)s %(name)s: %(message)s"
NIVEIS_LOG = ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG")


@dataclass(frozen=True)
class Settings:
    """Valores vindos do ambiente (.env opcional)."""

    log_level: str = "INFO"
    output_dir: str = "runs"
    workers: int = 1
    torch_threads: Optional[int] = None

    @classmethod
    def from_env(cls) -> "Settings":
        try:
            workers = int(os.getenv("INSERCAO_WORKERS", "1"))
            threads = os.getenv("INSERCAO_TORCH_THREADS")
            return cls(
                log_level=os.getenv("INSERCAO_LOG_LEVEL", "INFO").upper(),
                output_dir=os.getenv("INSERCAO_OUTPUT_DIR", "runs"),
                workers=max(1, workers),
                torch_threads=int(threads) if threads else None,
            )
        except ValueError as e:
            raise ConfigError(f"Variável de ambiente inválida: {e}") from e


def configurar_logging(nivel: Optional[str] = None) -> None:
    """Configura o logging raiz uma única vez por processo."""
    nivel = (nivel or Settings.from_env().log_level).upper()
    if nivel not in NIVEIS_LOG:
        raise ConfigError(f"Nível de log inválido: {nivel}")
    logging.basicConfig(level=nivel, format=FORMATO_LOG, force=True)


def aplicar_threads(settings: Settings) -> None:
    if settings.torch_threads:
        torch.set_num_threads(settings.torch_threads)


def carregar_yaml(caminho: str) -> Dict[str, Any]:
    """
    Lê um arquivo YAML de configuração.

    Args:
        caminho: Caminho do arquivo

    Returns:
        Dicionário (vazio para arquivo vazio)

    Raises:
        ConfigError: Arquivo ausente, ilegível ou sem um mapeamento na raiz
    """
    try:
        with open(caminho, encoding="utf-8") as f:
            dados = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Arquivo de configuração não encontrado: {caminho}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"YAML inválido em {caminho}: {e}") from e

    if dados is None:
        return {}
    if not isinstance(dados, dict):
        raise ConfigError(f"A raiz de {caminho} deve ser um mapeamento")
    return dados


# ==================== CENAS ====================

def carregar_catalogo(caminho: Optional[str] = None) -> Dict[str, SceneSpec]:
    """Catálogo de cenas nomeadas (chave `scenes` do YAML)."""
    dados = carregar_yaml(caminho or CATALOGO_PADRAO)
    catalogo = {}
    for nome, entrada in (dados.get("scenes") or {}).items():
        entrada = dict(entrada, name=entrada.get("name", nome))
        catalogo[nome] = _cena_de_dict(entrada)
    logger.debug(f"Catálogo com {len(catalogo)} cenas carregado")
    return catalogo


def _cena_de_dict(entrada: Dict[str, Any]) -> SceneSpec:
    try:
        return SceneSpec.from_dict(entrada)
    except (InvalidArgument, KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Cena inválida ({entrada.get('name', '?')}): {e}") from e


def resolver_cena(entrada: Union[str, Dict[str, Any]],
                  catalogo: Optional[Dict[str, SceneSpec]] = None) -> SceneSpec:
    """
    Resolve uma cena por nome do catálogo ou definição inline.

    Raises:
        ConfigError: Nome desconhecido ou definição inválida
    """
    if isinstance(entrada, str):
        catalogo = catalogo if catalogo is not None else carregar_catalogo()
        if entrada not in catalogo:
            raise ConfigError(f"Cena desconhecida: {entrada} (catálogo: {', '.join(sorted(catalogo))})")
        return catalogo[entrada]
    if isinstance(entrada, dict):
        return _cena_de_dict(dict(entrada, name=entrada.get("name", "inline")))
    raise ConfigError("A cena deve ser um nome do catálogo ou um mapeamento")


# ==================== SEÇÕES ====================

def construir_secao(cls, secao: Optional[Dict[str, Any]], nome: str, **fixos):
    """
    Instancia um dataclass de configuração a partir de uma seção YAML.

    Chaves desconhecidas e valores inválidos viram ConfigError.
    """
    secao = dict(secao or {})
    permitidos = {f.name for f in fields(cls)} - set(fixos)
    desconhecidas = set(secao) - permitidos
    if desconhecidas:
        raise ConfigError(f"Chaves desconhecidas na seção '{nome}': {sorted(desconhecidas)}")
    valores = {k: tuple(v) if isinstance(v, list) else v for k, v in secao.items()}
    try:
        return cls(**valores, **fixos)
    except (InvalidArgument, TypeError, ValueError) as e:
        raise ConfigError(f"Seção '{nome}' inválida: {e}") from e


def construir_env(config: Dict[str, Any], cena: SceneSpec) -> EnvConfig:
    return construir_secao(EnvConfig, config.get("env"), "env", scene=cena)


def construir_run_config(config: Dict[str, Any], seed: Optional[int] = None,
                         variant: Optional[str] = None,
                         catalogo: Optional[Dict[str, SceneSpec]] = None) -> RunConfig:
    """
    Monta a configuração de treino a partir do YAML carregado.

    Args:
        config: Dicionário de configuração
        seed: Sobrescreve `seed` do arquivo
        variant: Sobrescreve `variant` do arquivo

    Returns:
        RunConfig validada
    """
    if "scene" not in config:
        raise ConfigError("Configuração sem seção 'scene'")
    cena = resolver_cena(config["scene"], catalogo)
    treino = config.get("train") or {}
    try:
        return RunConfig(
            env=construir_env(config, cena),
            pf=construir_secao(PFConfig, config.get("pf"), "pf"),
            policy=construir_secao(PolicyConfig, config.get("policy"), "policy"),
            ppo=construir_secao(PPOConfig, config.get("ppo"), "ppo"),
            curriculum=construir_secao(CurriculumConfig, config.get("curriculum"), "curriculum"),
            variant=str(variant or treino.get("variant", "full")),
            seed=int(seed if seed is not None else config.get("seed", 0)),
            checkpoint_every=int(treino.get("checkpoint_every", 10)),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Configuração de treino inválida: {e}") from e
