"""
Currículo de ruído de observação e escala do resíduo.

O nível de ruído n (mm, e n graus na rotação) sobe quando a taxa de
sucesso da janela passa de 75% e desce abaixo de 50%. A escala do resíduo
acompanha o nível: β = n / n_max.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Sequence, Tuple

from src.exceptions import InvalidArgument

logger = logging.getLogger(__name__)

LIMIAR_SUBIDA = 0.75
LIMIAR_DESCIDA = 0.50


@dataclass(frozen=True)
class CurriculumState:
    """Estado do currículo: nível de ruído, passo e janela de resultados."""

    n: float = 0.0
    n_max: float = 5.0
    step: float = 0.1
    window_size: int = 100
    window: Tuple[bool, ...] = field(default_factory=tuple)
    fixed: bool = False
    adjustments: int = 0

    def __post_init__(self):
        if self.n_max <= 0 or self.step <= 0 or self.window_size < 1:
            raise InvalidArgument("n_max, step e window_size devem ser positivos")
        if not (0.0 <= self.n <= self.n_max):
            raise InvalidArgument(f"Nível {self.n} fora de [0, {self.n_max}]")

    @classmethod
    def no_curriculum(cls, n_max: float = 5.0) -> "CurriculumState":
        """Estado fixo em n = n_max, β = 1."""
        return cls(n=n_max, n_max=n_max, fixed=True)

    @property
    def beta(self) -> float:
        return self.n / self.n_max

    def success_rate(self) -> float:
        if not self.window:
            return 0.0
        return sum(self.window) / len(self.window)

    def record(self, success: bool) -> "CurriculumState":
        """
        Registra o resultado de um episódio concluído.

        Quando a janela está cheia, aplica curriculum_update.
        """
        if self.fixed:
            return self
        window = (self.window + (bool(success),))[-self.window_size:]
        state = replace(self, window=window)
        if len(window) >= self.window_size:
            return curriculum_update(state, window)
        return state


def curriculum_update(state: CurriculumState, window: Sequence[bool]) -> CurriculumState:
    """
    Ajusta o nível de ruído a partir de uma janela de resultados.

    Args:
        state: Estado atual do currículo
        window: Resultados (sucesso/falha) de ao menos window_size episódios

    Returns:
        Novo estado; a janela é esvaziada quando há ajuste
    """
    if len(window) < state.window_size:
        raise InvalidArgument(
            f"Janela incompleta: {len(window)} de {state.window_size} episódios"
        )
    if state.fixed:
        return state

    recent = tuple(bool(x) for x in window)[-state.window_size:]
    rate = sum(recent) / len(recent)

    if rate > LIMIAR_SUBIDA:
        novo_n = min(round(state.n + state.step, 9), state.n_max)
    elif rate < LIMIAR_DESCIDA:
        novo_n = max(round(state.n - state.step, 9), 0.0)
    else:
        return replace(state, window=recent)

    if novo_n == state.n:
        # Já no limite: sem ajuste efetivo, a janela continua rolando
        return replace(state, window=recent)

    logger.info(f"Currículo: sucesso {rate:.1%}, ruído {state.n:.2f} -> {novo_n:.2f} mm")
    return replace(state, n=novo_n, window=(), adjustments=state.adjustments + 1)
