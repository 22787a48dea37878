"""
Treinamento residual com currículo de ruído.

Alterna coleta de rollouts (campo potencial calculado das observações
ruidosas, resíduo amostrado e combinado com β) e atualizações de PPO.
"""

import logging
import os
import time
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np
import pandas as pd
import torch

from src.exceptions import NonFiniteLoss
from src.insertion_env import EnvConfig, NoiseLevel, VecInsertionEnv, build_pf_policy
from src.learning.checkpoint import save_checkpoint
from src.learning.encoding import ACTOR_DIM, CRITIC_DIM, encode_actor_obs, encode_critic_obs
from src.learning.networks import critic_forward
from src.learning.policy import ActorCritic, PolicyConfig, executed_action, sample_and_logprob, variant_spec
from src.learning.ppo import PPOConfig, ppo_update
from src.learning.rollout_buffer import RolloutBuffer
from src.logic.curriculum_logic import CurriculumState
from src.logic.potential_field_logic import PFConfig
from src.utils import file_checksum, formatar_duracao, formatar_percentual

logger = logging.getLogger(__name__)

LOG_COLUMNS = ["iteration", "env_steps", "noise_mm", "beta", "success_rate",
               "policy_loss", "value_loss", "clip_frac", "kl"]


@dataclass(frozen=True)
class CurriculumConfig:
    n_max: float = 5.0
    step: float = 0.1
    window: int = 100
    initial: float = 0.0

    def initial_state(self, enabled: bool = True) -> CurriculumState:
        if not enabled:
            return CurriculumState.no_curriculum(self.n_max)
        return CurriculumState(n=self.initial, n_max=self.n_max, step=self.step, window_size=self.window)


@dataclass(frozen=True)
class RunConfig:
    """Tudo que define uma execução de treino."""

    env: EnvConfig
    pf: PFConfig = field(default_factory=PFConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    ppo: PPOConfig = field(default_factory=PPOConfig)
    curriculum: CurriculumConfig = field(default_factory=CurriculumConfig)
    variant: str = "full"
    seed: int = 0
    checkpoint_every: int = 10


@dataclass
class TrainingResult:
    variant: str
    checkpoint_path: Optional[str] = None
    log_path: Optional[str] = None
    log_checksum: Optional[str] = None
    iterations: int = 0
    env_steps: int = 0
    final_noise: float = 0.0
    final_beta: float = 0.0
    max_noise: float = 0.0
    noise_cap: float = 0.0
    checkpoints: List[str] = field(default_factory=list)

    @property
    def reached_n_max(self) -> bool:
        return self.noise_cap > 0 and bool(np.isclose(self.max_noise, self.noise_cap))


class Trainer:
    """Coleta rollouts em ambientes vetorizados e atualiza o agente."""

    def __init__(self, run: RunConfig, out_dir: str):
        self.run = run
        self.out_dir = out_dir
        self.variant = variant_spec(run.variant)
        os.makedirs(out_dir, exist_ok=True)

        torch.manual_seed(run.seed)
        env_seq, sample_seq, batch_seq = np.random.SeedSequence(run.seed).spawn(3)
        self.sample_rng = np.random.default_rng(sample_seq)
        self.batch_rng = np.random.default_rng(batch_seq)

        ppo = run.ppo
        self.venv = VecInsertionEnv(run.env, ppo.env_count, env_seq)
        self.pf = build_pf_policy(run.env, run.pf)
        self.agent = ActorCritic(run.policy, run.variant)
        self.optimizer = torch.optim.Adam(self.agent.parameters(), lr=ppo.learning_rate)
        self.curriculum = run.curriculum.initial_state(self.variant.curriculum)

        hidden_sizes = run.policy.lstm_widths if run.policy.recurrent else ()
        self.buffer = RolloutBuffer(ppo.horizon, ppo.env_count, ACTOR_DIM, CRITIC_DIM,
                                    self.variant.output_dim, hidden_sizes, ppo.segment_length)

        self.observations = self.venv.reset(self.level())
        self.hidden = self.agent.initial_state(ppo.env_count)
        self.starts = np.ones(ppo.env_count, dtype=bool)
        self.log_path = os.path.join(out_dir, "training_log.csv")
        if os.path.exists(self.log_path):
            os.remove(self.log_path)

    def level(self) -> NoiseLevel:
        return NoiseLevel.from_level(self.curriculum.n, self.run.env)

    def _encode(self, observations):
        scale = self.run.policy.translation_scale
        ax = np.stack([encode_actor_obs(o, scale) for o in observations])
        cx = np.stack([encode_critic_obs(o, scale) for o in observations])
        return ax, cx

    def collect_rollout(self):
        """
        Preenche o buffer com T passos de cada ambiente.

        Returns:
            (sucessos, episódios encerrados) no rollout
        """
        env_cfg = self.run.env
        successes, episodes = 0, 0

        for t in range(self.run.ppo.horizon):
            if t % self.buffer.segment_length == 0:
                self.buffer.store_hidden(t, self.hidden)
            ax, cx = self._encode(self.observations)
            mean, log_std, values, new_hidden = self.agent.step(ax, cx, self.hidden, self.starts)
            u, logp = sample_and_logprob(mean, log_std, self.sample_rng)

            beta = self.curriculum.beta
            actions = [
                executed_action(self.variant, self.pf, obs, u[i], beta, self.run.policy,
                                env_cfg.max_action_tr, env_cfg.max_action_rot)[2]
                for i, obs in enumerate(self.observations)
            ]
            observations, rewards, dones, infos = self.venv.step(actions, self.level())
            self.buffer.add(t, ax, cx, u, logp, values, rewards, dones, self.starts)

            for i in np.flatnonzero(dones):
                success = bool(infos[i]["success"])
                successes += int(success)
                episodes += 1
                self.curriculum = self.curriculum.record(success)

            self.observations = observations
            self.hidden = new_hidden
            self.starts = dones.copy()

        _, cx = self._encode(self.observations)
        with torch.no_grad():
            bootstrap = critic_forward(
                self.agent.critic, torch.as_tensor(cx, dtype=self.agent.actor.log_std.dtype))
        bootstrap = bootstrap.numpy().astype(np.float64)
        self.buffer.compute_returns(bootstrap, self.run.ppo.gamma, self.run.ppo.lam)
        return successes, episodes

    def _append_log(self, row: dict) -> None:
        header = not os.path.exists(self.log_path)
        pd.DataFrame([row], columns=LOG_COLUMNS).to_csv(self.log_path, mode="a", header=header, index=False)

    def _save(self, path: str, iteration: int, env_steps: int, status: str = "ok") -> str:
        save_checkpoint(self.agent, path, {
            "iteration": iteration,
            "env_steps": env_steps,
            "noise_mm": float(self.curriculum.n),
            "status": status,
        })
        return path

    def run_training(self) -> TrainingResult:
        ppo = self.run.ppo
        result = TrainingResult(variant=self.variant.name, log_path=self.log_path,
                                noise_cap=self.curriculum.n_max)
        final_path = os.path.join(self.out_dir, "checkpoint.pt")
        env_steps = 0

        inicio_treino = time.time()
        logger.info(f"Treinando {self.variant.name}: {ppo.iterations} iterações de {ppo.rollout_size} passos")
        for iteration in range(1, ppo.iterations + 1):
            inicio = time.time()
            successes, episodes = self.collect_rollout()
            env_steps += ppo.rollout_size
            try:
                stats = ppo_update(self.agent, self.buffer, self.optimizer, ppo, self.batch_rng)
            except NonFiniteLoss:
                self._save(final_path, iteration - 1, env_steps - ppo.rollout_size, status="non_finite")
                logger.error(f"Treino interrompido na iteração {iteration}; último estado válido em {final_path}")
                raise

            # sem episódios encerrados a taxa fica vazia no log
            rate = successes / episodes if episodes else None
            self._append_log({
                "iteration": iteration,
                "env_steps": env_steps,
                "noise_mm": self.curriculum.n,
                "beta": self.curriculum.beta,
                "success_rate": rate,
                "policy_loss": stats["policy_loss"],
                "value_loss": stats["value_loss"],
                "clip_frac": stats["clip_frac"],
                "kl": stats["kl"],
            })
            result.max_noise = max(result.max_noise, self.curriculum.n)
            logger.info(
                f"Iteração {iteration}/{ppo.iterations}: passos={env_steps}, ruído={self.curriculum.n:.2f} mm, "
                f"β={self.curriculum.beta:.2f}, sucesso={formatar_percentual(rate, 1)} ({episodes} episódios), "
                f"{formatar_duracao(time.time() - inicio)}"
            )

            if self.run.checkpoint_every and iteration % self.run.checkpoint_every == 0:
                path = os.path.join(self.out_dir, "checkpoints", f"iter_{iteration:04d}.pt")
                result.checkpoints.append(self._save(path, iteration, env_steps))

        result.checkpoint_path = self._save(final_path, ppo.iterations, env_steps)
        result.iterations = ppo.iterations
        result.env_steps = env_steps
        result.final_noise = self.curriculum.n
        result.final_beta = self.curriculum.beta
        result.log_checksum = file_checksum(self.log_path)
        logger.info(f"Treino de {self.variant.name} concluído em {formatar_duracao(time.time() - inicio_treino)}")
        return result


def train(run: RunConfig, out_dir: str) -> TrainingResult:
    """
    Treina a variante de `run` e grava checkpoint e log em `out_dir`.

    Raises:
        NonFiniteLoss: Propagada após salvar o último estado válido
    """
    return Trainer(run, out_dir).run_training()


def train_variant(variant: str, run: RunConfig, out_dir: str) -> TrainingResult:
    """
    Treina uma variante de ablação.

    pf_only não tem parâmetros: nada é treinado nem gravado.

    Raises:
        UnknownVariant: Nome fora do catálogo de variantes
    """
    spec = variant_spec(variant)
    if not spec.learns:
        logger.info(f"Variante {variant} não aprende: treino ignorado")
        return TrainingResult(variant=variant)
    return train(replace(run, variant=variant), out_dir)
