"""
Redes do ator residual e do crítico privilegiado.

O ator é um MLP seguido de uma pilha de LSTMs e de uma cabeça gaussiana
com média limitada por tanh e log-desvio independente do estado. O crítico
é um MLP que recebe a codificação privilegiada.
"""

import math
from typing import List, Optional, Sequence, Tuple

import torch
import torch.nn as nn

HiddenState = List[Tuple[torch.Tensor, torch.Tensor]]

LOG_STD_INIT = math.log(0.6)


def mlp(input_dim: int, widths: Sequence[int]) -> Tuple[nn.Sequential, int]:
    """Camadas afins + ELU com inicialização ortogonal."""
    layers: List[nn.Module] = []
    last = input_dim
    for width in widths:
        linear = nn.Linear(last, width)
        nn.init.orthogonal_(linear.weight, gain=math.sqrt(2.0))
        nn.init.zeros_(linear.bias)
        layers += [linear, nn.ELU()]
        last = width
    return nn.Sequential(*layers), last


def _head(input_dim: int, output_dim: int, gain: float) -> nn.Linear:
    head = nn.Linear(input_dim, output_dim)
    nn.init.orthogonal_(head.weight, gain=gain)
    nn.init.zeros_(head.bias)
    return head


class ActorNet(nn.Module):
    """
    Ator gaussiano recorrente.

    O estado oculto é zerado, por ambiente, sempre que `starts` marca o
    início de um episódio. A mesma máscara é usada na coleta e no replay
    dos segmentos, então as duas passagens produzem saídas idênticas.
    """

    def __init__(self, input_dim: int = 24, mlp_widths: Sequence[int] = (64, 64, 64),
                 lstm_widths: Sequence[int] = (64, 64), output_dim: int = 6,
                 recurrent: bool = True, log_std_init: float = LOG_STD_INIT):
        super().__init__()
        self.input_dim = input_dim
        self.output_dim = output_dim
        self.recurrent = recurrent
        self.trunk, last = mlp(input_dim, mlp_widths)

        self.lstms = nn.ModuleList()
        if recurrent:
            for width in lstm_widths:
                self.lstms.append(nn.LSTM(last, width))
                last = width
        self.mean_head = _head(last, output_dim, gain=0.01)
        self.log_std = nn.Parameter(torch.full((output_dim,), float(log_std_init)))

    def initial_state(self, batch: int) -> HiddenState:
        dtype = self.log_std.dtype
        return [(torch.zeros(1, batch, lstm.hidden_size, dtype=dtype),
                 torch.zeros(1, batch, lstm.hidden_size, dtype=dtype)) for lstm in self.lstms]

    def forward(self, x: torch.Tensor, hidden: Optional[HiddenState] = None,
                starts: Optional[torch.Tensor] = None):
        """
        Args:
            x: Entradas (T, B, input_dim)
            hidden: Estado por camada, tensores (1, B, H)
            starts: Máscara (T, B) de início de episódio

        Returns:
            (média (T, B, out), log_std (out,), novo estado)
        """
        features = self.trunk(x)
        if not self.recurrent:
            return torch.tanh(self.mean_head(features)), self.log_std, []

        steps, batch = x.shape[0], x.shape[1]
        if hidden is None:
            hidden = self.initial_state(batch)
        if starts is None:
            starts = torch.zeros(steps, batch, dtype=torch.bool)

        outputs = []
        state = list(hidden)
        for t in range(steps):
            keep = (~starts[t]).to(features.dtype).view(1, batch, 1)
            out = features[t:t + 1]
            for i, lstm in enumerate(self.lstms):
                h, c = state[i]
                out, state[i] = lstm(out, (h * keep, c * keep))
            outputs.append(out)
        out = torch.cat(outputs, dim=0)
        return torch.tanh(self.mean_head(out)), self.log_std, state


class CriticNet(nn.Module):
    """MLP de valor sobre a observação privilegiada."""

    def __init__(self, input_dim: int = 72, widths: Sequence[int] = (64, 64, 64)):
        super().__init__()
        self.body, last = mlp(input_dim, widths)
        self.value_head = _head(last, 1, gain=1.0)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.value_head(self.body(x)).squeeze(-1)


def actor_forward(net: ActorNet, x: torch.Tensor, h: Optional[HiddenState] = None,
                  starts: Optional[torch.Tensor] = None):
    """Um passo do ator para um lote (B, input_dim), com máscara (B,) de início opcional."""
    mask = None if starts is None else starts.unsqueeze(0)
    mean, log_std, h_next = net(x.unsqueeze(0), h, mask)
    return mean.squeeze(0), log_std, h_next


def critic_forward(net: CriticNet, x: torch.Tensor) -> torch.Tensor:
    """Valores (...,) para codificações privilegiadas (..., input_dim)."""
    return net(x)

