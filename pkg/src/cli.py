"""
Interface de linha de comando.

Verbos: train, eval, sweep, field-dump, replay. Códigos de saída: 0 em
sucesso, 1 em erro de configuração, 2 em falha durante a execução.
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import pandas as pd

from src.config import (
    Settings,
    aplicar_threads,
    carregar_yaml,
    configurar_logging,
    construir_env,
    construir_run_config,
    construir_secao,
    resolver_cena,
)
from src.exceptions import ConfigError
from src.experiment_runner import (
    FieldGrid,
    auditar_varredura,
    construir_experimento,
    export_field,
    export_trajectories,
    sweep,
)
from src.learning.trainer import train_variant
from src.logic.potential_field_logic import PFConfig
from src.report_generator import ReportGenerator
from src.utils import escrever_manifesto, file_checksum

logger = logging.getLogger(__name__)

VERBOS = ("train", "eval", "sweep", "field-dump", "replay")
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class ArgumentParser(argparse.ArgumentParser):
    """Parser que sinaliza erros de uso como erro de configuração."""

    def error(self, message):
        raise ConfigError(message)


def criar_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="insercao", description="Inserção plug/socket com campo potencial e RL residual")
    parser.add_argument("verb", help=f"Verbo: {', '.join(VERBOS)}")
    parser.add_argument("--config", required=True, help="Arquivo YAML de configuração")
    parser.add_argument("--seed", type=int, default=None, help="Semente raiz")
    parser.add_argument("--out", default=None, help="Diretório de saída")
    parser.add_argument("--variant", default=None, help="Variante a treinar/avaliar")
    parser.add_argument("--checkpoint", default=None, help="Checkpoint do agente treinado")
    return parser


def _msg(texto: str) -> None:
    print(texto, file=sys.stderr)


def _config_efetiva(config: Dict[str, Any], args) -> Dict[str, Any]:
    return {
        "config": config,
        "verb": args.verb,
        "seed": args.seed,
        "variant": args.variant,
        "checkpoint": args.checkpoint,
    }


def _semente(config: Dict[str, Any], args) -> int:
    return int(args.seed if args.seed is not None else config.get("seed", 0))


# ==================== VERBOS ====================

def cmd_train(config: Dict[str, Any], args, out_dir: str) -> None:
    run = construir_run_config(config, seed=args.seed, variant=args.variant)
    resultado = train_variant(run.variant, run, out_dir)

    extra: Dict[str, Any] = {"variant": resultado.variant, "iterations": resultado.iterations,
                             "env_steps": resultado.env_steps}
    if resultado.log_path:
        extra["training_log_sha256"] = resultado.log_checksum
        extra["checkpoint_sha256"] = file_checksum(resultado.checkpoint_path)
        extra["final_noise_mm"] = resultado.final_noise
        extra["reached_n_max"] = resultado.reached_n_max
        relatorios = ReportGenerator(out_dir)
        fig = relatorios.criar_grafico_treino(pd.read_csv(resultado.log_path))
        relatorios.salvar_grafico(fig, "training")
    escrever_manifesto(out_dir, _config_efetiva(config, args), run.seed, extra)

    if resultado.checkpoint_path:
        _msg(f"✅ Treino concluído: {resultado.checkpoint_path} (ruído final {resultado.final_noise:.2f} mm)")
    else:
        _msg(f"⚠️ A variante {resultado.variant} não tem parâmetros; nada foi treinado")


def _avaliar_matriz(config: Dict[str, Any], args, out_dir: str, workers: int) -> None:
    spec = construir_experimento(config, out_dir, args.variant, args.checkpoint, args.seed)
    spec.validate_checkpoints()
    resultados = sweep(spec, workers)
    saidas = ReportGenerator(out_dir).emit_table(resultados, spec.variants)
    auditada = auditar_varredura(spec, _semente(config, args))
    escrever_manifesto(out_dir, _config_efetiva(config, args), spec.seeds[0], {
        "seeds": list(spec.seeds),
        "cells": [c.key for c in spec.cells()],
        "results_sha256": file_checksum(saidas["results_csv"]),
        "audited_cell": auditada,
    })
    _msg(f"✅ {len(resultados)} células avaliadas; tabela em {saidas['table_csv']}")
    _msg(saidas["table"].to_string())


def cmd_eval(config: Dict[str, Any], args, out_dir: str) -> None:
    if not args.variant:
        variantes = (config.get("experiment") or {}).get("variants") or []
        if len(variantes) != 1:
            raise ConfigError("eval exige --variant (ou uma única variante em experiment.variants)")
        args.variant = variantes[0]
    _avaliar_matriz(config, args, out_dir, workers=1)


def cmd_sweep(config: Dict[str, Any], args, out_dir: str) -> None:
    settings = Settings.from_env()
    workers = int((config.get("experiment") or {}).get("workers", settings.workers))
    _avaliar_matriz(config, args, out_dir, workers)


def cmd_field_dump(config: Dict[str, Any], args, out_dir: str) -> None:
    if "scene" not in config:
        raise ConfigError("field-dump exige a seção 'scene'")
    env = construir_env(config, resolver_cena(config["scene"]))
    pf = construir_secao(PFConfig, config.get("pf"), "pf")
    grid = construir_secao(FieldGrid, config.get("field"), "field")

    campo = export_field(env, pf, grid, os.path.join(out_dir, "field.csv"))
    relatorios = ReportGenerator(out_dir)
    relatorios.salvar_grafico(relatorios.criar_grafico_campo(campo), "field")
    escrever_manifesto(out_dir, _config_efetiva(config, args), _semente(config, args),
                       {"field_sha256": file_checksum(os.path.join(out_dir, "field.csv"))})
    _msg(f"✅ Campo com {len(campo)} pontos gravado em {out_dir}")


def cmd_replay(config: Dict[str, Any], args, out_dir: str) -> None:
    spec = construir_experimento(config, out_dir, args.variant, args.checkpoint, args.seed)
    spec.validate_checkpoints()
    n = max(1, spec.traces_per_cell)
    relatorios = ReportGenerator(out_dir)
    gravados: List[str] = []
    for cell in spec.cells():
        caminhos = export_trajectories(cell, n, os.path.join(out_dir, "traces", cell.key))
        gravados.extend(caminhos)
        if caminhos:
            fig = relatorios.criar_grafico_trajetoria(pd.read_csv(caminhos[0]))
            relatorios.salvar_grafico(fig, f"trajectory_{cell.key}")
    escrever_manifesto(out_dir, _config_efetiva(config, args), spec.seeds[0],
                       {"traces": [os.path.relpath(c, out_dir) for c in gravados]})
    _msg(f"✅ {len(gravados)} traces gravados em {out_dir}")


COMANDOS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "field-dump": cmd_field_dump,
    "replay": cmd_replay,
}


def cli_main(argv: Optional[List[str]] = None) -> int:
    """
    Ponto de entrada da linha de comando.

    Args:
        argv: Argumentos (padrão: sys.argv[1:])

    Returns:
        Código de saída
    """
    try:
        args = criar_parser().parse_args(argv)
        if args.verb not in COMANDOS:
            raise ConfigError(f"Verbo desconhecido: {args.verb} (opções: {', '.join(VERBOS)})")

        settings = Settings.from_env()
        config = carregar_yaml(args.config)
        configurar_logging((config.get("logging") or {}).get("level") or settings.log_level)
        aplicar_threads(settings)

        out_dir = args.out or os.path.join(settings.output_dir, args.verb)
        os.makedirs(out_dir, exist_ok=True)
        COMANDOS[args.verb](config, args, out_dir)
        return EXIT_OK

    except SystemExit as e:
        return int(e.code or 0)
    except ConfigError as e:
        _msg(f"❌ Erro de configuração: {e}")
        return EXIT_CONFIG
    except Exception as e:
        logger.exception("Falha na execução")
        _msg(f"❌ Falha na execução: {e}")
        return EXIT_RUNTIME
