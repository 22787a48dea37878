"""
Utilitários de formatação, sementes e rastreabilidade dos resultados.
"""

import hashlib
import json
import logging
import os
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


def formatar_percentual(valor: Optional[Union[float, int]], casas: int = 2) -> str:
    """
    Formata uma taxa em [0, 1] como percentual.

    Args:
        valor: Taxa (ex. 0.9625)
        casas: Casas decimais

    Returns:
        String formatada (ex: "96.25%"), ou "n/a" sem valor
    """
    if valor is None or pd.isna(valor):
        return "n/a"
    return f"{100.0 * float(valor):.{casas}f}%"


def formatar_taxa_com_desvio(media: float, desvio: float) -> str:
    """
    Formata média e desvio de taxas de sucesso no estilo "96.25±1.22%".

    Args:
        media: Taxa média em [0, 1]
        desvio: Desvio padrão entre sementes em [0, 1]

    Returns:
        String formatada
    """
    if media is None or pd.isna(media):
        return "-"
    desvio = 0.0 if desvio is None or pd.isna(desvio) else desvio
    return f"{100.0 * media:.2f}±{100.0 * desvio:.2f}%"


def formatar_nivel_ruido(nivel: float) -> str:
    """Rótulo do nível de ruído (ex: "5mm/5°")."""
    return f"{nivel:g}mm/{nivel:g}°"


def formatar_duracao(segundos: float) -> str:
    minutos, seg = divmod(int(round(segundos)), 60)
    horas, minutos = divmod(minutos, 60)
    if horas:
        return f"{horas}h{minutos:02d}m{seg:02d}s"
    return f"{minutos}m{seg:02d}s"


# ==================== SEMENTES ====================

def semente_episodio(semente: int, tentativa: int) -> np.random.SeedSequence:
    """Semente do episódio `tentativa` sob a semente de avaliação `semente`."""
    return np.random.SeedSequence([int(semente), int(tentativa)])


# ==================== RASTREABILIDADE ====================

def _normalizar(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _normalizar(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalizar(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_normalizar(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def hash_configuracao(config: Dict[str, Any]) -> str:
    """SHA-256 do JSON canônico (chaves ordenadas) da configuração."""
    canonico = json.dumps(_normalizar(config), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonico.encode("utf-8")).hexdigest()


def file_checksum(path: str) -> str:
    """SHA-256 do conteúdo de um arquivo."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for bloco in iter(lambda: f.read(1 << 16), b""):
            digest.update(bloco)
    return digest.hexdigest()


def escrever_manifesto(diretorio: str, config: Dict[str, Any], semente: int,
                       extra: Optional[Dict[str, Any]] = None) -> str:
    """
    Grava manifest.json com hash da configuração, semente e versão do código.

    Args:
        diretorio: Diretório de saída
        config: Configuração efetiva
        semente: Semente raiz da execução
        extra: Campos adicionais (ex. checksums de saídas)

    Returns:
        Caminho do manifesto
    """
    from src import __version__

    os.makedirs(diretorio, exist_ok=True)
    manifesto = {
        "config_hash": hash_configuracao(config),
        "seed": int(semente),
        "version": __version__,
        "config": _normalizar(config),
    }
    if extra:
        manifesto.update(_normalizar(extra))
    caminho = os.path.join(diretorio, "manifest.json")
    with open(caminho, "w", encoding="utf-8") as f:
        json.dump(manifesto, f, indent=2, sort_keys=True, ensure_ascii=False)
    logger.info(f"Manifesto gravado: {caminho}")
    return caminho


def ler_manifesto(diretorio: str) -> Dict[str, Any]:
    with open(os.path.join(diretorio, "manifest.json"), encoding="utf-8") as f:
        return json.load(f)
