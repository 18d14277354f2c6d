"""k-local network creation games: costs, moves, equilibria and dynamics."""

from .cost import GameConfig, Mode, agent_cost, format_alpha, opt_cost, parse_alpha, poa_ratio, social_cost
from .errors import *  # noqa: F401,F403
from .graph import (
    INFINITE,
    Network,
    canonical_hash,
    diameter,
    is_connected,
    k_neighborhood,
    shortest_paths,
)
from .moves import (
    GreedyMove,
    MoveKind,
    Strategy,
    apply_strategy,
    best_global_response,
    best_greedy_move,
    best_k_local_response,
    build_umfl_instance,
    enumerate_greedy_moves,
    local_strategy_space,
)

__version__ = "0.1.0"

__all__ = [
    "GameConfig", "Mode", "agent_cost", "format_alpha", "opt_cost", "parse_alpha", "poa_ratio",
    "social_cost", "INFINITE", "Network", "canonical_hash", "diameter", "is_connected",
    "k_neighborhood", "shortest_paths", "GreedyMove", "MoveKind", "Strategy", "apply_strategy",
    "best_global_response", "best_greedy_move", "best_k_local_response", "build_umfl_instance",
    "enumerate_greedy_moves", "local_strategy_space",
]
