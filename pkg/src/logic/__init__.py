"""
Lógicas de controle da inserção.

Este módulo reúne o controlador por campo potencial e o currículo de
ruído, separados do simulador e do treinamento.
"""

from .potential_field_logic import (
    PFConfig,
    PotentialFieldPolicy,
    nearest_anchor,
    attractive_action,
    repulsive_action,
    pf_action,
    blend
)
from .curriculum_logic import (
    CurriculumState,
    curriculum_update
)

__all__ = [
    # Campo potencial
    'PFConfig',
    'PotentialFieldPolicy',
    'nearest_anchor',
    'attractive_action',
    'repulsive_action',
    'pf_action',
    'blend',

    # Currículo
    'CurriculumState',
    'curriculum_update'
]
