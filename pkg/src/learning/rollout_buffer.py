"""
Buffer de rollout em ordem temporal (passo, ambiente).

Os minibatches são segmentos recorrentes inteiros, cada um com o estado
oculto guardado no seu início.
"""

from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np
import torch

from src.exceptions import InvalidArgument
from src.learning.networks import HiddenState
from src.learning.ppo import compute_gae


@dataclass
class Minibatch:
    """Segmentos (L, B, ...) prontos para reavaliação."""

    actor_obs: torch.Tensor
    critic_obs: torch.Tensor
    actions: torch.Tensor
    logp_old: torch.Tensor
    values_old: torch.Tensor
    advantages: torch.Tensor
    returns: torch.Tensor
    starts: torch.Tensor
    hidden0: HiddenState

    @property
    def size(self) -> int:
        return int(self.advantages.numel())


class RolloutBuffer:
    """Armazena T passos de N ambientes."""

    def __init__(self, num_steps: int, num_envs: int, actor_dim: int, critic_dim: int,
                 action_dim: int, hidden_sizes: Tuple[int, ...] = (), segment_length: int = 32):
        if num_steps % segment_length != 0:
            raise InvalidArgument("num_steps deve ser múltiplo de segment_length")
        self.num_steps = num_steps
        self.num_envs = num_envs
        self.segment_length = segment_length
        self.num_segments = num_steps // segment_length
        shape = (num_steps, num_envs)

        self.actor_obs = np.zeros(shape + (actor_dim,))
        self.critic_obs = np.zeros(shape + (critic_dim,))
        self.actions = np.zeros(shape + (action_dim,))
        self.logp = np.zeros(shape)
        self.values = np.zeros(shape)
        self.rewards = np.zeros(shape)
        self.dones = np.zeros(shape, dtype=bool)
        self.starts = np.zeros(shape, dtype=bool)
        self.hidden = [(np.zeros((self.num_segments, num_envs, h)), np.zeros((self.num_segments, num_envs, h)))
                       for h in hidden_sizes]
        self.advantages: Optional[np.ndarray] = None
        self.returns: Optional[np.ndarray] = None
        self.filled = 0

    @property
    def size(self) -> int:
        return self.num_steps * self.num_envs

    def store_hidden(self, t: int, hidden: HiddenState) -> None:
        """Guarda o estado oculto no início do segmento que começa em t."""
        seg = t // self.segment_length
        for (h_buf, c_buf), (h, c) in zip(self.hidden, hidden):
            h_buf[seg] = h[0].detach().numpy()
            c_buf[seg] = c[0].detach().numpy()

    def add(self, t: int, actor_obs, critic_obs, actions, logp, values, rewards, dones, starts) -> None:
        self.actor_obs[t] = actor_obs
        self.critic_obs[t] = critic_obs
        self.actions[t] = actions
        self.logp[t] = logp
        self.values[t] = values
        self.rewards[t] = rewards
        self.dones[t] = dones
        self.starts[t] = starts
        self.filled = t + 1
        self.advantages = None
        self.returns = None

    def compute_returns(self, bootstrap_value: np.ndarray, gamma: float, lam: float) -> None:
        self.advantages, self.returns = compute_gae(
            self.rewards, self.values, self.dones, bootstrap_value, gamma, lam
        )

    def minibatches(self, batch_size: int, rng: np.random.Generator,
                    normalized_advantages: np.ndarray,
                    dtype: torch.dtype = torch.float32) -> Iterator[Minibatch]:
        """
        Embaralha os segmentos (segmento, ambiente) e os agrupa em minibatches.

        Args:
            batch_size: Transições por minibatch
            rng: Gerador para a ordem dos segmentos
            normalized_advantages: Vantagens (T, N) já normalizadas
            dtype: Tipo dos tensores
        """
        if self.returns is None:
            raise InvalidArgument("compute_returns() deve ser chamado antes dos minibatches")
        if batch_size > self.size:
            raise InvalidArgument("minibatch maior que o rollout")
        per_batch = max(1, batch_size // self.segment_length)
        pairs = [(s, e) for s in range(self.num_segments) for e in range(self.num_envs)]
        order = rng.permutation(len(pairs))

        for start in range(0, len(pairs), per_batch):
            chosen = [pairs[i] for i in order[start:start + per_batch]]
            yield self._gather(chosen, normalized_advantages, dtype)

    def _gather(self, chosen: List[Tuple[int, int]], advantages: np.ndarray,
                dtype: torch.dtype) -> Minibatch:
        L = self.segment_length
        segs = np.array([s for s, _ in chosen])
        envs = np.array([e for _, e in chosen])
        rows = segs[None, :] * L + np.arange(L)[:, None]
        cols = np.broadcast_to(envs[None, :], rows.shape)

        def take(arr):
            return torch.as_tensor(arr[rows, cols], dtype=dtype)

        hidden0 = [(torch.as_tensor(h[segs, envs], dtype=dtype).unsqueeze(0),
                    torch.as_tensor(c[segs, envs], dtype=dtype).unsqueeze(0)) for h, c in self.hidden]
        return Minibatch(
            actor_obs=take(self.actor_obs),
            critic_obs=take(self.critic_obs),
            actions=take(self.actions),
            logp_old=take(self.logp),
            values_old=take(self.values),
            advantages=take(advantages),
            returns=take(self.returns),
            starts=torch.as_tensor(self.starts[rows, cols], dtype=torch.bool),
            hidden0=hidden0,
        )
