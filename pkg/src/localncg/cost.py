"""Agent cost, social cost and the reference optimum for Sum- and Max-NCG."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .errors import InfiniteRatio, NotSupported
from .graph import INFINITE, Network, bfs_layers

Cost = Fraction | float  # float only ever holds INFINITE


class Mode(enum.Enum):
    SUM = "sum"
    MAX = "max"


def parse_alpha(value) -> Fraction:
    """Exact edge price from a Fraction, int, or ``"p/q"`` string."""
    if isinstance(value, float):
        raise TypeError("alpha must be exact; pass a Fraction or a 'p/q' string")
    alpha = Fraction(value)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return alpha


def format_alpha(alpha: Fraction) -> str:
    return f"{alpha.numerator}/{alpha.denominator}"


@dataclass(frozen=True)
class GameConfig:
    alpha: Fraction
    k: int = 1
    mode: Mode = Mode.SUM

    def __post_init__(self):
        object.__setattr__(self, "alpha", parse_alpha(self.alpha))
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", Mode(self.mode.lower()))
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    def with_k(self, k: int) -> GameConfig:
        return GameConfig(self.alpha, k, self.mode)


def distance_cost(net: Network, u: int, mode: Mode = Mode.SUM) -> int | float:
    """Sum (or max) of hop distances from ``u``; INFINITE if anyone is unreachable."""
    layers = bfs_layers(net.adj, u)
    if sum(layer.bit_count() for layer in layers) < net.n:
        return INFINITE
    if mode is Mode.MAX:
        return len(layers) - 1
    return sum(d * layer.bit_count() for d, layer in enumerate(layers))


def agent_cost(net: Network, cfg: GameConfig, u: int) -> Cost:
    dist = distance_cost(net, u, cfg.mode)
    if dist == INFINITE:
        return INFINITE
    return cfg.alpha * net.owned[u].bit_count() + dist


def social_cost(net: Network, cfg: GameConfig) -> Cost:
    total = Fraction(0)
    for u in range(net.n):
        c = agent_cost(net, cfg, u)
        if c == INFINITE:
            return INFINITE
        total += c
    return total


def opt_network(n: int, cfg: GameConfig) -> Network:
    """Minimum social cost network for Sum-NCG: clique below alpha=2, star otherwise."""
    if cfg.mode is not Mode.SUM:
        raise NotSupported("the optimum is only characterized for the Sum game")
    if n < 2:
        raise ValueError("need n >= 2")
    from .constructions import clique, star

    return clique(n) if cfg.alpha < 2 else star(n)


def opt_cost(n: int, cfg: GameConfig) -> Cost:
    return social_cost(opt_network(n, cfg), cfg)


def poa_ratio(net: Network, cfg: GameConfig) -> Fraction:
    """Social cost of ``net`` over the optimum on the same number of agents."""
    cost = social_cost(net, cfg)
    if cost == INFINITE:
        raise InfiniteRatio("network is disconnected")
    return cost / opt_cost(net.n, cfg)
