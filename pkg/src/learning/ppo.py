"""
PPO com GAE e perda recortada.
"""

import copy
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import torch

from src.exceptions import InvalidArgument, NonFiniteLoss

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PPOConfig:
    """Hiperparâmetros de PPO e orçamento de treino."""

    gamma: float = 0.998
    lam: float = 0.95
    clip: float = 0.2
    epochs: int = 8
    minibatch: int = 2048
    learning_rate: float = 1e-3
    entropy_coef: float = 0.0
    critic_coef: float = 2.0
    horizon: int = 256
    env_count: int = 64
    total_steps: int = 2_000_000
    segment_length: int = 32
    max_grad_norm: Optional[float] = 1.0

    def __post_init__(self):
        if not (0.0 < self.gamma <= 1.0 and 0.0 < self.lam <= 1.0):
            raise InvalidArgument("gamma e lam devem estar em (0, 1]")
        if self.clip <= 0 or self.learning_rate <= 0:
            raise InvalidArgument("clip e learning_rate devem ser positivos")
        if self.epochs < 1 or self.env_count < 1 or self.total_steps < 1:
            raise InvalidArgument("epochs, env_count e total_steps devem ser positivos")
        if self.horizon % self.segment_length != 0:
            raise InvalidArgument("horizon deve ser múltiplo de segment_length")
        if not (self.segment_length <= self.minibatch <= self.rollout_size):
            raise InvalidArgument(
                f"minibatch ({self.minibatch}) deve estar entre segment_length e o rollout ({self.rollout_size})"
            )

    @property
    def rollout_size(self) -> int:
        return self.horizon * self.env_count

    @property
    def iterations(self) -> int:
        return -(-self.total_steps // self.rollout_size)


def compute_gae(rewards, values, dones, bootstrap_value, gamma: float, lam: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vantagens generalizadas e retornos.

    Args:
        rewards, values, dones: Sequências (T,) ou (T, N)
        bootstrap_value: Valor do estado após o último passo
        gamma: Desconto
        lam: Parâmetro λ do GAE

    Returns:
        (vantagens, retornos = vantagens + valores)
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    nonterminal = 1.0 - np.asarray(dones, dtype=np.float64)
    advantages = np.zeros_like(rewards)

    last = np.zeros_like(rewards[0]) if rewards.ndim > 1 else 0.0
    next_value = np.asarray(bootstrap_value, dtype=np.float64)
    for t in reversed(range(len(rewards))):
        delta = rewards[t] + gamma * next_value * nonterminal[t] - values[t]
        last = delta + gamma * lam * nonterminal[t] * last
        advantages[t] = last
        next_value = values[t]
    return advantages, advantages + values


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    return (advantages - advantages.mean()) / (advantages.std() + 1e-8)


def ppo_loss(logp: torch.Tensor, logp_old: torch.Tensor, advantages: torch.Tensor,
             values: torch.Tensor, returns: torch.Tensor, entropy: torch.Tensor,
             cfg: PPOConfig) -> Tuple[torch.Tensor, Dict[str, torch.Tensor]]:
    """Perda recortada + valor + entropia, com estatísticas."""
    log_ratio = logp - logp_old
    ratio = torch.exp(log_ratio)
    surr1 = ratio * advantages
    surr2 = torch.clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * advantages
    policy_loss = -torch.min(surr1, surr2).mean()
    value_loss = ((values - returns) ** 2).mean()
    entropy_mean = entropy.mean()
    loss = policy_loss + cfg.critic_coef * value_loss - cfg.entropy_coef * entropy_mean

    with torch.no_grad():
        stats = {
            "policy_loss": policy_loss.detach(),
            "value_loss": value_loss.detach(),
            "entropy": entropy_mean.detach(),
            "clip_frac": ((ratio - 1.0).abs() > cfg.clip).to(ratio.dtype).mean(),
            "kl": ((ratio - 1.0) - log_ratio).mean(),
        }
    return loss, stats


def ppo_update(agent, buffer, optimizer: torch.optim.Optimizer, cfg: PPOConfig,
               rng: np.random.Generator) -> Dict[str, float]:
    """
    Épocas de PPO sobre o buffer.

    Args:
        agent: Módulo com evaluate(minibatch) -> (logp, entropia, valores)
        buffer: RolloutBuffer com retornos calculados
        optimizer: Adam sobre os parâmetros do agente
        cfg: Hiperparâmetros
        rng: Gerador para a ordem dos minibatches

    Returns:
        Médias de policy_loss, value_loss, entropy, clip_frac e kl

    Raises:
        NonFiniteLoss: Perda não finita; parâmetros e otimizador restaurados
    """
    params = [p for p in agent.parameters() if p.requires_grad]
    dtype = params[0].dtype
    snapshot = copy.deepcopy(agent.state_dict())
    opt_snapshot = copy.deepcopy(optimizer.state_dict())
    advantages = normalize_advantages(buffer.advantages)

    totals: Dict[str, float] = {}
    count = 0
    for epoch in range(cfg.epochs):
        for batch in buffer.minibatches(cfg.minibatch, rng, advantages, dtype):
            logp, entropy, values = agent.evaluate(batch)
            loss, stats = ppo_loss(logp, batch.logp_old, batch.advantages,
                                   values, batch.returns, entropy, cfg)
            if not torch.isfinite(loss):
                agent.load_state_dict(snapshot)
                optimizer.load_state_dict(opt_snapshot)
                logger.error(f"Perda não finita na época {epoch}; parâmetros restaurados")
                raise NonFiniteLoss(f"Perda não finita na época {epoch}")

            optimizer.zero_grad()
            loss.backward()
            if cfg.max_grad_norm is not None:
                torch.nn.utils.clip_grad_norm_(params, cfg.max_grad_norm)
            optimizer.step()

            for key, value in stats.items():
                totals[key] = totals.get(key, 0.0) + float(value)
            count += 1

    return {key: value / max(count, 1) for key, value in totals.items()}
