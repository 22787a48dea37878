"""
Erros do domínio de inserção.

Todas as exceções derivam de InsercaoError para que o CLI possa
mapeá-las em códigos de saída.
"""


class InsercaoError(Exception):
    """Erro base do projeto."""


class InvalidArgument(InsercaoError, ValueError):
    """Argumento fora do domínio permitido (dimensões, contagens, pesos)."""


class ConfigError(InsercaoError):
    """Arquivo de configuração inválido, ausente ou inconsistente."""


class InvalidSpec(ConfigError):
    """Célula de experimento incompleta ou vazia."""


class UnknownVariant(ConfigError):
    """Nome de variante de treinamento não reconhecido."""


class DegenerateGeometry(InsercaoError):
    """Todas as amostras do plug penetram além da profundidade da cavidade."""


class SteppedTerminalEpisode(InsercaoError):
    """step() chamado depois do término do episódio."""


class MissingPrivilegedData(InsercaoError):
    """Observação sem os campos privilegiados exigidos pelo crítico."""


class NonFiniteLoss(InsercaoError, ArithmeticError):
    """Perda não finita durante o cálculo de gradientes ou a atualização PPO."""


class ChecksumMismatch(InsercaoError):
    """Checkpoint ou resultado em disco corrompido ou incompatível."""
