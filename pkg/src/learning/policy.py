"""
Política residual: amostragem gaussiana, decodificação do resíduo e
combinação com o campo potencial, além das variantes de ablação.
"""

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch
import torch.nn as nn
from torch.distributions import Normal

from src.exceptions import InvalidArgument, NonFiniteLoss, UnknownVariant
from src.geometry.se3 import Twist
from src.learning.encoding import ACTOR_DIM, CRITIC_DIM, TRANSLATION_SCALE
from src.learning.networks import (
    LOG_STD_INIT,
    ActorNet,
    CriticNet,
    HiddenState,
    actor_forward,
    critic_forward,
)

HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
SIGMOID_GAIN = 4.0


# ==================== VARIANTES ====================

@dataclass(frozen=True)
class VariantSpec:
    """Como uma variante usa a rede e o currículo."""

    name: str
    learns: bool
    output_dim: int
    residual: bool
    learned_weights: bool = False
    learned_beta: bool = False
    curriculum: bool = True


VARIANTS: Dict[str, VariantSpec] = {
    "pf_only": VariantSpec("pf_only", learns=False, output_dim=0, residual=False, curriculum=False),
    "pf_residual_no_curriculum": VariantSpec(
        "pf_residual_no_curriculum", learns=True, output_dim=6, residual=True, curriculum=False),
    "pf_plus_learned_w": VariantSpec(
        "pf_plus_learned_w", learns=True, output_dim=2, residual=False, learned_weights=True),
    "pf_residual_learned_beta": VariantSpec(
        "pf_residual_learned_beta", learns=True, output_dim=7, residual=True, learned_beta=True),
    "full": VariantSpec("full", learns=True, output_dim=6, residual=True),
}


def variant_spec(name: str) -> VariantSpec:
    try:
        return VARIANTS[name]
    except KeyError:
        raise UnknownVariant(f"Variante desconhecida: {name} (opções: {', '.join(VARIANTS)})") from None


# ==================== CONFIGURAÇÃO ====================

@dataclass(frozen=True)
class PolicyConfig:
    """Arquitetura do ator/crítico e limites do resíduo."""

    actor_widths: Tuple[int, ...] = (64, 64, 64)
    lstm_widths: Tuple[int, ...] = (64, 64)
    critic_widths: Tuple[int, ...] = (64, 64, 64)
    recurrent: bool = True
    log_std_init: float = LOG_STD_INIT
    residual_max_tr: float = 2.0
    residual_max_rot: float = 2.0
    translation_scale: float = TRANSLATION_SCALE

    def __post_init__(self):
        for campo in ("actor_widths", "lstm_widths", "critic_widths"):
            widths = tuple(int(w) for w in getattr(self, campo))
            if any(w <= 0 for w in widths):
                raise InvalidArgument(f"{campo} deve conter larguras positivas")
            object.__setattr__(self, campo, widths)
        if self.recurrent and not self.lstm_widths:
            raise InvalidArgument("Ator recorrente exige lstm_widths")
        if self.residual_max_tr <= 0 or self.residual_max_rot <= 0 or self.translation_scale <= 0:
            raise InvalidArgument("Limites do resíduo e escala devem ser positivos")

    def architecture(self, output_dim: int) -> Dict[str, Any]:
        return {
            "actor_input": ACTOR_DIM,
            "critic_input": CRITIC_DIM,
            "output_dim": int(output_dim),
            "actor_widths": list(self.actor_widths),
            "lstm_widths": list(self.lstm_widths),
            "critic_widths": list(self.critic_widths),
            "recurrent": bool(self.recurrent),
        }


# ==================== AÇÕES ====================

def gaussian_logprob(u: np.ndarray, mean: np.ndarray, log_std: np.ndarray) -> np.ndarray:
    """Log-densidade da gaussiana diagonal, somada no último eixo."""
    z = (u - mean) * np.exp(-log_std)
    return np.sum(-0.5 * z * z - log_std - HALF_LOG_2PI, axis=-1)


def sample_and_logprob(mean: np.ndarray, log_std: np.ndarray,
                       rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Amostra u ~ N(mean, exp(log_std)²) e devolve sua log-probabilidade.

    Args:
        mean: Médias (..., D)
        log_std: Log-desvios (D,)
        rng: Gerador numpy

    Returns:
        (u, logp)
    """
    mean = np.asarray(mean, dtype=np.float64)
    log_std = np.asarray(log_std, dtype=np.float64)
    u = mean + np.exp(log_std) * rng.standard_normal(mean.shape)
    return u, gaussian_logprob(u, mean, log_std)


def decode_residual(u: np.ndarray, max_tr: float = 2.0, max_rot: float = 2.0) -> Twist:
    """Escala u ∈ [-1, 1]⁶ para os limites do resíduo."""
    v = np.clip(np.asarray(u, dtype=np.float64)[:6], -1.0, 1.0)
    return Twist(v[:3] * max_tr, v[3:] * max_rot)


def combine_residual(a_pf: Twist, a_rl: Twist, beta: float,
                     max_tr: float = 2.0, max_rot: float = 2.0) -> Twist:
    """a_T = a_PF + β·a_RL, limitado aos limites de ação do ambiente."""
    if not 0.0 <= beta <= 1.0:
        raise InvalidArgument(f"beta fora de [0, 1]: {beta}")
    if beta == 0.0:
        return a_pf.clamp(max_tr, max_rot)
    return (a_pf + a_rl.scaled(beta)).clamp(max_tr, max_rot)


def squash(u: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-SIGMOID_GAIN * np.asarray(u, dtype=np.float64)))


def decode_weights(u: np.ndarray) -> Tuple[float, float]:
    """Pesos (w_tr, w_rot) ∈ (0, 1)² da variante de pesos aprendidos."""
    w = squash(np.asarray(u)[:2])
    return float(w[0]), float(w[1])


def decode_beta(u: np.ndarray) -> float:
    return float(squash(np.asarray(u)[6]))


def executed_action(variant: VariantSpec, pf_policy, obs, u: Optional[np.ndarray], beta: float,
                    cfg: PolicyConfig, max_tr: float, max_rot: float) -> Tuple[Twist, Twist, Twist]:
    """
    Ação executada por uma variante.

    Args:
        variant: Variante em execução
        pf_policy: Campo potencial do episódio
        obs: Observação atual
        u: Saída amostrada da rede (None para pf_only)
        beta: Escala do resíduo vinda do currículo (ignorada quando aprendida)
        cfg: Limites do resíduo
        max_tr, max_rot: Limites de ação do ambiente

    Returns:
        (a_PF, a_RL, a_T)
    """
    if variant.learned_weights:
        a_pf = pf_policy.act(obs.obs_plug, obs.obs_socket, weights=decode_weights(u))
    else:
        a_pf = pf_policy.act(obs.obs_plug, obs.obs_socket)

    if not variant.residual or u is None:
        return a_pf, Twist.zero(), a_pf.clamp(max_tr, max_rot)

    a_rl = decode_residual(u, cfg.residual_max_tr, cfg.residual_max_rot)
    if variant.learned_beta:
        beta = decode_beta(u)
    return a_pf, a_rl, combine_residual(a_pf, a_rl, beta, max_tr, max_rot)


# ==================== GRADIENTE ====================

def gradient(params: Sequence[torch.Tensor], loss_fn: Callable[[Any], torch.Tensor],
             batch: Any) -> List[torch.Tensor]:
    """
    Derivadas exatas (modo reverso) da perda escalar em relação a cada parâmetro.

    Raises:
        NonFiniteLoss: Perda não finita
    """
    params = list(params)
    loss = loss_fn(batch)
    if not torch.isfinite(loss).all():
        raise NonFiniteLoss(f"Perda não finita: {loss.item()}")
    grads = torch.autograd.grad(loss, params, allow_unused=True)
    return [torch.zeros_like(p) if g is None else g for p, g in zip(params, grads)]


# ==================== AGENTE ====================

class ActorCritic(nn.Module):
    """Ator residual e crítico privilegiado de uma variante."""

    def __init__(self, cfg: PolicyConfig, variant: str = "full"):
        super().__init__()
        self.cfg = cfg
        self.variant = variant_spec(variant)
        if not self.variant.learns:
            raise InvalidArgument(f"A variante {variant} não tem rede")
        self.actor = ActorNet(ACTOR_DIM, cfg.actor_widths, cfg.lstm_widths,
                              self.variant.output_dim, cfg.recurrent, cfg.log_std_init)
        self.critic = CriticNet(CRITIC_DIM, cfg.critic_widths)

    def architecture(self) -> Dict[str, Any]:
        return self.cfg.architecture(self.variant.output_dim)

    def initial_state(self, batch: int) -> HiddenState:
        return self.actor.initial_state(batch)

    @torch.no_grad()
    def step(self, actor_x: np.ndarray, critic_x: Optional[np.ndarray], hidden: HiddenState,
             starts: np.ndarray):
        """
        Um passo de coleta para B ambientes.

        Returns:
            (média (B, D), log_std (D,), valores (B,) ou None, novo estado)
        """
        dtype = self.actor.log_std.dtype
        x = torch.as_tensor(actor_x, dtype=dtype)
        mask = torch.as_tensor(starts, dtype=torch.bool)
        mean, log_std, hidden = actor_forward(self.actor, x, hidden, mask)
        values = None
        if critic_x is not None:
            values = critic_forward(self.critic, torch.as_tensor(critic_x, dtype=dtype))
            values = values.numpy().astype(np.float64)
        return (mean.numpy().astype(np.float64),
                log_std.detach().numpy().astype(np.float64), values, hidden)

    def evaluate(self, batch):
        """
        Reavalia um minibatch de segmentos recorrentes.

        Returns:
            (logp (L, B), entropia (L, B), valores (L, B))
        """
        mean, log_std, _ = self.actor(batch.actor_obs, batch.hidden0, batch.starts)
        dist = Normal(mean, torch.exp(log_std))
        logp = dist.log_prob(batch.actions).sum(-1)
        entropy = dist.entropy().sum(-1)
        values = critic_forward(self.critic, batch.critic_obs)
        return logp, entropy, values
