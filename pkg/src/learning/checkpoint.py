"""
Checkpoints do agente.

Formato (torch.save de um dicionário):
    format_version: int
    variant: nome da variante
    architecture: dimensões e larguras das redes
    policy: campos de PolicyConfig
    state_dict: tensores dos parâmetros
    checksum: SHA-256 dos parâmetros em ordem de chave
"""

import hashlib
import logging
import os
from dataclasses import asdict
from typing import Any, Dict, Optional

import torch

from src.exceptions import ChecksumMismatch
from src.learning.policy import ActorCritic, PolicyConfig

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def state_checksum(state_dict: Dict[str, torch.Tensor]) -> str:
    digest = hashlib.sha256()
    for key in sorted(state_dict):
        tensor = state_dict[key].detach().cpu().contiguous()
        digest.update(key.encode("utf-8"))
        digest.update(str(tensor.dtype).encode("utf-8"))
        digest.update(str(tuple(tensor.shape)).encode("utf-8"))
        digest.update(tensor.numpy().tobytes())
    return digest.hexdigest()


def save_checkpoint(agent: ActorCritic, path: str, extra: Optional[Dict[str, Any]] = None) -> str:
    """
    Grava o agente em disco.

    Args:
        agent: Agente treinado
        path: Caminho do arquivo
        extra: Metadados adicionais (ex. iteração, nível de ruído)

    Returns:
        Checksum dos parâmetros
    """
    state = {k: v.detach().cpu().clone() for k, v in agent.state_dict().items()}
    checksum = state_checksum(state)
    policy = asdict(agent.cfg)
    payload = {
        "format_version": FORMAT_VERSION,
        "variant": agent.variant.name,
        "architecture": agent.architecture(),
        "policy": {k: list(v) if isinstance(v, tuple) else v for k, v in policy.items()},
        "state_dict": state,
        "checksum": checksum,
        "extra": dict(extra or {}),
    }
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    torch.save(payload, path)
    logger.info(f"Checkpoint salvo: {path}")
    return checksum


def load_checkpoint(path: str, expected_variant: Optional[str] = None) -> ActorCritic:
    """
    Carrega um agente verificando versão, arquitetura e checksum.

    Raises:
        ChecksumMismatch: Arquivo corrompido ou incompatível com a variante
    """
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except FileNotFoundError:
        raise
    except Exception as e:
        raise ChecksumMismatch(f"Checkpoint ilegível ({path}): {e}") from e

    if payload.get("format_version") != FORMAT_VERSION:
        raise ChecksumMismatch(f"Versão de checkpoint incompatível: {payload.get('format_version')}")
    if expected_variant is not None and payload.get("variant") != expected_variant:
        raise ChecksumMismatch(
            f"Checkpoint da variante {payload.get('variant')}, esperado {expected_variant}"
        )
    if state_checksum(payload["state_dict"]) != payload.get("checksum"):
        raise ChecksumMismatch(f"Checksum dos parâmetros não confere: {path}")

    policy_fields = {k: tuple(v) if isinstance(v, list) else v for k, v in payload["policy"].items()}
    agent = ActorCritic(PolicyConfig(**policy_fields), payload["variant"])
    if agent.architecture() != payload["architecture"]:
        raise ChecksumMismatch("Arquitetura do checkpoint não corresponde à configuração")
    try:
        agent.load_state_dict(payload["state_dict"])
    except RuntimeError as e:
        raise ChecksumMismatch(f"Parâmetros incompatíveis com a arquitetura: {e}") from e
    agent.checkpoint_extra = payload.get("extra", {})
    return agent
