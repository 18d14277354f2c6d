"""k-local moves, strategy spaces and exact best responses.

Everything here rests on one observation: when agent ``u`` rewires only its own
incident edges, its distance to ``w`` becomes ``min over new neighbours x of
1 + d_{G-u}(x, w)``.  An :class:`AgentView` caches those rows once, after which
every candidate strategy is a single min-reduction.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .cost import Cost, GameConfig, Mode
from .errors import InvalidStrategy, SpaceTooLarge
from .graph import (
    INFINITE,
    UNREACHABLE,
    Network,
    bits_to_set,
    distance_rows,
    iter_bits,
    k_neighborhood_mask,
    set_to_bits,
)

DEFAULT_BUDGET = 24
GLOBAL_GUARD = 16
_TABLE_LIMIT = 16          # candidate sets up to this size get a full subset table
_BATCH = 1 << 15
_INF_SCALED = 1 << 62


class MoveKind(enum.IntEnum):
    # value order is the tie-break order
    DELETE = 0
    SWAP = 1
    BUY = 2


@dataclass(frozen=True, order=True)
class GreedyMove:
    actor: int
    kind: MoveKind
    target: int
    old_target: int | None = None

    def apply_mask(self, owned: int) -> int:
        if self.kind is MoveKind.DELETE:
            return owned & ~(1 << self.target)
        if self.kind is MoveKind.BUY:
            return owned | 1 << self.target
        return (owned & ~(1 << self.old_target)) | 1 << self.target

    def sort_key(self) -> tuple:
        if self.kind is MoveKind.SWAP:
            return (self.kind, self.old_target, self.target)
        return (self.kind, self.target)

    def __str__(self) -> str:
        if self.kind is MoveKind.SWAP:
            return f"{self.actor}: swap {self.old_target}->{self.target}"
        return f"{self.actor}: {self.kind.name.lower()} {self.target}"


@dataclass(frozen=True)
class Strategy:
    actor: int
    targets: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "targets", frozenset(self.targets))

    @property
    def mask(self) -> int:
        return set_to_bits(self.targets)

    def sorted_targets(self) -> tuple[int, ...]:
        return tuple(sorted(self.targets))


# --- evaluation core -------------------------------------------------------


class _SharedRows:
    """Lazily computed rows of the full distance matrix of one network."""

    def __init__(self, net: Network):
        self.net = net
        self.rows: dict[int, np.ndarray] = {}

    def __getitem__(self, idx) -> np.ndarray:
        idx = [int(i) for i in np.atleast_1d(idx)]
        missing = sorted({i for i in idx if i not in self.rows})
        if missing:
            block = distance_rows(self.net.adj, missing, self.net.n)
            for i, row in zip(missing, block):
                self.rows[i] = row
        return np.stack([self.rows[i] for i in idx])


@lru_cache(maxsize=8)
def _shared_rows(net: Network) -> _SharedRows:
    return _SharedRows(net)


class AgentView:
    """Distance oracle for one agent under arbitrary changes of its own edges."""

    def __init__(self, net: Network, u: int, mode: Mode):
        if not 0 <= u < net.n:
            raise IndexError(f"agent {u} out of range")
        self.net, self.u, self.mode, self.n = net, u, mode, net.n
        self.owned = net.owned[u]
        self.fixed = net.adj[u] & ~self.owned      # neighbours whose edge u does not own
        # an agent of degree <= 1 is never interior to a path between others
        self._shared = net.degree(u) <= 1
        self._rows = None
        self._have = None
        self._tables: dict[tuple[int, ...], np.ndarray] = {}

    def rows(self, idx) -> np.ndarray:
        """``rows[x, w] = 1 + d_{G-u}(x, w)``, with column ``u`` zeroed."""
        idx = np.asarray(idx, dtype=np.intp)
        if self._shared:
            block = _shared_rows(self.net)[idx] + 1
            block[:, self.u] = 0
            return block
        if self._rows is None:
            self._rows = np.zeros((self.n, self.n), dtype=np.int32)
            self._have = np.zeros(self.n, dtype=bool)
        missing = idx[~self._have[idx]]
        if missing.size:
            missing = np.unique(missing)
            block = distance_rows(self.net.adj, missing.tolist(), self.n, removed=self.u) + 1
            block[:, self.u] = 0
            self._rows[missing] = block
            self._have[missing] = True
        return self._rows[idx]

    def base_vector(self, mask: int) -> np.ndarray:
        """Per-agent distance with neighbour set ``fixed | mask``."""
        nbrs = list(iter_bits(self.fixed | mask))
        if not nbrs:
            vec = np.full(self.n, UNREACHABLE, dtype=np.int32)
            vec[self.u] = 0
            return vec
        return self.rows(nbrs).min(axis=0)

    def aggregate(self, vecs: np.ndarray) -> np.ndarray:
        """Distance cost for each row vector; -1 marks unreachable."""
        vecs = np.atleast_2d(vecs)
        worst = vecs.max(axis=1)
        if self.mode is Mode.MAX:
            out = worst.astype(np.int64)
        else:
            out = vecs.sum(axis=1, dtype=np.int64)
        out[worst >= UNREACHABLE] = -1
        return out

    def dist(self, mask: int) -> int | float:
        if self.n == 1:
            return 0
        d = int(self.aggregate(self.base_vector(mask))[0])
        return INFINITE if d < 0 else d

    def table(self, cands: tuple[int, ...]) -> np.ndarray:
        """Distance cost for every subset of ``cands`` (bit i = cands[i])."""
        if cands in self._tables:
            return self._tables[cands]
        m = len(cands)
        vecs = np.empty((1 << m, self.n), dtype=np.int32)
        vecs[0] = self.base_vector(0)
        if m:
            rows = self.rows(list(cands))
            for i in range(m):
                np.minimum(vecs[: 1 << i], rows[i], out=vecs[1 << i: 2 << i])
        dists = self.aggregate(vecs)
        self._tables[cands] = dists
        return dists


@lru_cache(maxsize=64)
def agent_view(net: Network, u: int, mode: Mode) -> AgentView:
    return AgentView(net, u, mode)


def _scale(cfg: GameConfig):
    return cfg.alpha.numerator, cfg.alpha.denominator


def _scaled_to_cost(scaled: int, cfg: GameConfig) -> Cost:
    if scaled >= _INF_SCALED:
        return INFINITE
    return Fraction(scaled, cfg.alpha.denominator)


def _scaled_costs(dists: np.ndarray, sizes: np.ndarray, cfg: GameConfig) -> np.ndarray:
    p, q = _scale(cfg)
    out = p * sizes.astype(np.int64) + q * dists
    out[dists < 0] = _INF_SCALED
    return out


def local_candidates(net: Network, u: int, k: int | None) -> int:
    """Targets u may own after a move: own edges plus the (pre-move) k-ball, minus
    agents that already own an edge to u.  ``k=None`` means unrestricted."""
    full = (1 << net.n) - 1
    ball = full if k is None else k_neighborhood_mask(net.adj, u, k)
    fixed = net.adj[u] & ~net.owned[u]
    return (net.owned[u] | ball) & ~fixed & ~(1 << u)


def strategy_cost(net: Network, cfg: GameConfig, u: int, targets) -> Cost:
    """Cost of ``u`` if it switched to owning exactly ``targets``."""
    mask = targets if isinstance(targets, int) else set_to_bits(targets)
    d = agent_view(net, u, cfg.mode).dist(mask)
    if d == INFINITE:
        return INFINITE
    return cfg.alpha * mask.bit_count() + d


# --- strategy spaces -------------------------------------------------------


def local_strategy_space(net: Network, cfg: GameConfig, u: int):
    """Every strategy reachable by one k-local move, the current one included."""
    cands = sorted(iter_bits(local_candidates(net, u, cfg.k)))
    for r in range(len(cands) + 1):
        for combo in itertools.combinations(cands, r):
            yield Strategy(u, frozenset(combo))


def apply_strategy(net: Network, s: Strategy) -> Network:
    u = s.actor
    if not 0 <= u < net.n:
        raise InvalidStrategy(f"actor {u} out of range")
    mask = s.mask
    if mask >> u & 1:
        raise InvalidStrategy("an agent cannot buy an edge to itself")
    if mask >> net.n:
        raise InvalidStrategy("target outside the network")
    clash = mask & net.adj[u] & ~net.owned[u]
    if clash:
        raise InvalidStrategy(f"edges to {sorted(iter_bits(clash))} are already owned by the other side")
    return net.with_strategy(u, mask)


def enumerate_greedy_moves(net: Network, cfg: GameConfig, u: int, k: int | None = -1) -> list[GreedyMove]:
    """All single delete / swap / buy moves of ``u`` within its k-ball.

    ``k`` defaults to ``cfg.k``; pass ``None`` for unrestricted (global) moves.
    """
    radius = cfg.k if k == -1 else k
    full = (1 << net.n) - 1
    ball = full if radius is None else k_neighborhood_mask(net.adj, u, radius)
    owned = net.owned[u]
    fresh = sorted(iter_bits(ball & ~net.adj[u] & ~(1 << u)))
    own = sorted(iter_bits(owned))
    moves = [GreedyMove(u, MoveKind.DELETE, v) for v in own]
    moves += [GreedyMove(u, MoveKind.SWAP, t, v) for v in own for t in fresh]
    moves += [GreedyMove(u, MoveKind.BUY, t) for t in fresh]
    return moves


# --- best responses ---------------------------------------------------------


def _tie_break(masks) -> int:
    return min(masks, key=lambda m: (m.bit_count(), sorted(iter_bits(m))))


def _best_subset(net: Network, cfg: GameConfig, u: int, cand_mask: int) -> tuple[int, int]:
    """(scaled cost, mask) of the best strategy among all subsets of ``cand_mask``."""
    view = agent_view(net, u, cfg.mode)
    cands = tuple(iter_bits(cand_mask))
    if len(cands) <= _TABLE_LIMIT:
        dists = view.table(cands)
        costs = _scaled_costs(dists, _popcounts(len(cands)), cfg)
        best = int(costs.min())
        tied = np.flatnonzero(costs == best)
        masks = [_expand(int(i), cands) for i in tied]
        return best, _tie_break(masks)
    return _best_subset_bounded(view, cfg, cands)


@lru_cache(maxsize=None)
def _popcounts(m: int) -> np.ndarray:
    sizes = np.zeros(1 << m, dtype=np.int64)
    for i in range(m):
        sizes[1 << i: 2 << i] = sizes[: 1 << i] + 1
    return sizes


def _expand(compressed: int, cands: tuple[int, ...]) -> int:
    mask = 0
    for i in iter_bits(compressed):
        mask |= 1 << cands[i]
    return mask


def _best_subset_bounded(view: AgentView, cfg: GameConfig, cands: tuple[int, ...]) -> tuple[int, int]:
    """Cardinality-ordered search, cut off once alpha*m alone rules out size m."""
    p, q = _scale(cfg)
    all_d = int(view.aggregate(view.base_vector(set_to_bits(cands)))[0])
    base = view.base_vector(0)
    rows = view.rows(list(cands)) if cands else np.zeros((0, view.n), dtype=np.int32)
    best_cost, best_mask = _INF_SCALED, 0
    for m in range(len(cands) + 1):
        if all_d < 0:
            break  # unreachable regardless of what u owns
        if p * m + q * all_d >= best_cost:
            break
        combos = itertools.combinations(range(len(cands)), m)
        while True:
            chunk = list(itertools.islice(combos, _BATCH))
            if not chunk:
                break
            arr = np.array(chunk, dtype=np.intp).reshape(len(chunk), m)
            if m:
                vecs = np.minimum(rows[arr].min(axis=1), base)
            else:
                vecs = base[None, :]
            d = view.aggregate(vecs)
            costs = p * m + q * d
            costs[d < 0] = _INF_SCALED
            i = int(costs.argmin())  # first minimum is lexicographically smallest
            if costs[i] < best_cost:
                best_cost = int(costs[i])
                best_mask = set_to_bits(cands[j] for j in chunk[i])
    if best_cost >= _INF_SCALED:
        return _INF_SCALED, 0
    return best_cost, best_mask


def _check_budget(net: Network, u: int, cand_mask: int, budget: int):
    size = (cand_mask | net.owned[u]).bit_count()
    if size > budget:
        raise SpaceTooLarge(f"agent {u}: local space over {size} agents exceeds budget {budget}")


def best_k_local_response(net: Network, cfg: GameConfig, u: int, budget: int = DEFAULT_BUDGET) -> tuple[Strategy, Cost]:
    cand = local_candidates(net, u, cfg.k)
    _check_budget(net, u, cand, budget)
    scaled, mask = _best_subset(net, cfg, u, cand)
    return Strategy(u, bits_to_set(mask)), _scaled_to_cost(scaled, cfg)


def best_global_response(net: Network, alpha, u: int, mode: Mode = Mode.SUM) -> tuple[Strategy, Cost]:
    if net.n > GLOBAL_GUARD:
        raise SpaceTooLarge(f"global response enumeration guarded at n <= {GLOBAL_GUARD}")
    cfg = alpha if isinstance(alpha, GameConfig) else GameConfig(alpha, 1, mode)
    scaled, mask = _best_subset(net, cfg, u, local_candidates(net, u, None))
    return Strategy(u, bits_to_set(mask)), _scaled_to_cost(scaled, cfg)


def greedy_move_costs(net: Network, cfg: GameConfig, u: int, k: int | None = -1) -> list[tuple[GreedyMove, int]]:
    """Scaled cost (alpha denominator times cost) after each greedy move."""
    moves = enumerate_greedy_moves(net, cfg, u, k)
    if not moves:
        return []
    view = agent_view(net, u, cfg.mode)
    p, q = _scale(cfg)
    owned = net.owned[u]
    size = owned.bit_count()
    out: list[tuple[GreedyMove, int]] = []

    def scaled(d, m):
        return [(_INF_SCALED if x < 0 else p * m + q * int(x)) for x in d]

    own = [mv.target for mv in moves if mv.kind is MoveKind.DELETE]
    fresh = [mv.target for mv in moves if mv.kind is MoveKind.BUY]
    fixed_vec = view.base_vector(0)
    cur = view.base_vector(owned)
    # distance vectors with one owned edge removed, via prefix/suffix minima
    without = {}
    if own:
        rows = view.rows(own)
        pre = np.minimum.accumulate(rows, axis=0)
        suf = np.minimum.accumulate(rows[::-1], axis=0)[::-1]
        for i, v in enumerate(own):
            vec = fixed_vec.copy()
            if i > 0:
                np.minimum(vec, pre[i - 1], out=vec)
            if i + 1 < len(own):
                np.minimum(vec, suf[i + 1], out=vec)
            without[v] = vec
        dels = view.aggregate(np.stack([without[v] for v in own]))
        for v, c in zip(own, scaled(dels, size - 1)):
            out.append((GreedyMove(u, MoveKind.DELETE, v), c))
    if fresh:
        frows = view.rows(fresh)
        for v in own:
            d = view.aggregate(np.minimum(frows, without[v]))
            for t, c in zip(fresh, scaled(d, size)):
                out.append((GreedyMove(u, MoveKind.SWAP, t, v), c))
        d = view.aggregate(np.minimum(frows, cur))
        for t, c in zip(fresh, scaled(d, size + 1)):
            out.append((GreedyMove(u, MoveKind.BUY, t), c))
    return out


def _current_scaled(net: Network, cfg: GameConfig, u: int) -> int:
    p, q = _scale(cfg)
    d = agent_view(net, u, cfg.mode).dist(net.owned[u])
    return _INF_SCALED if d == INFINITE else p * net.owned[u].bit_count() + q * d


def best_greedy_scaled(net: Network, cfg: GameConfig, u: int, k: int | None = -1) -> tuple[int, GreedyMove | None]:
    """Best cost reachable by at most one greedy move (staying put included)."""
    cur = _current_scaled(net, cfg, u)
    best, best_move = cur, None
    for mv, c in greedy_move_costs(net, cfg, u, k):
        if c >= cur:
            continue
        if best_move is None or c < best or (c == best and mv.sort_key() < best_move.sort_key()):
            best, best_move = c, mv
    return best, best_move


def best_greedy_move(net: Network, cfg: GameConfig, u: int, k: int | None = -1) -> tuple[GreedyMove, Cost] | None:
    """Strictly improving single move with the lowest cost, or None."""
    scaled, move = best_greedy_scaled(net, cfg, u, k)
    if move is None:
        return None
    return move, _scaled_to_cost(scaled, cfg)


# --- facility location view ---------------------------------------------------


@dataclass(frozen=True)
class UMFLInstance:
    facilities: frozenset[int]
    clients: frozenset[int]
    opening_cost: dict[int, Fraction]
    distance: dict[tuple[int, int], int | float]

    def cost(self, open_set) -> Fraction | float:
        open_set = list(open_set)
        if not open_set:
            return INFINITE
        total = sum((self.opening_cost[v] for v in open_set), Fraction(0))
        for x in self.clients:
            d = min(self.distance[v, x] for v in open_set)
            if d == INFINITE:
                return INFINITE
            total += d
        return total


def build_umfl_instance(net: Network, cfg: GameConfig, u: int) -> UMFLInstance:
    ball = k_neighborhood_mask(net.adj, u, cfg.k) & ~(1 << u)
    facilities = bits_to_set(ball)
    clients = frozenset(range(net.n)) - {u}
    incoming = net.adj[u] & ~net.owned[u]
    opening = {v: (Fraction(0) if incoming >> v & 1 else cfg.alpha) for v in facilities}
    fac = sorted(facilities)
    d = _shared_rows(net)[fac] if fac else None
    distance = {}
    for i, v in enumerate(fac):
        for x in clients:
            val = int(d[i, x])
            distance[v, x] = INFINITE if val >= UNREACHABLE else val + 1
    return UMFLInstance(facilities, clients, opening, distance)


def umfl_open_set(net: Network, u: int) -> frozenset[int]:
    """Facilities open under u's current strategy: its own targets plus the free
    facilities that already connect to u."""
    return bits_to_set(net.adj[u])


# --- swaps --------------------------------------------------------------------


def swap_distance_costs(net: Network, mode: Mode, u: int, k: int | None = None,
                        own_only: bool = True) -> list[tuple[GreedyMove, int | float]]:
    """Distance cost of ``u`` after each single edge swap.

    With ``own_only`` false, ``u`` may also swap edges bought by the other
    endpoint (the swap game); the new edge is then owned by ``u``.
    """
    view = agent_view(net, u, mode)
    full = (1 << net.n) - 1
    ball = full if k is None else k_neighborhood_mask(net.adj, u, k)
    fresh = sorted(iter_bits(ball & ~net.adj[u] & ~(1 << u)))
    olds = sorted(iter_bits(net.adj[u] if not own_only else net.owned[u]))
    out = []
    if not fresh or not olds:
        return out
    frows = view.rows(fresh)
    for v in olds:
        rest = list(iter_bits(net.adj[u] & ~(1 << v)))
        if rest:
            vecs = np.minimum(frows, view.rows(rest).min(axis=0))
        else:
            vecs = frows
        for t, d in zip(fresh, view.aggregate(vecs)):
            out.append((GreedyMove(u, MoveKind.SWAP, t, v), INFINITE if d < 0 else int(d)))
    return out


def apply_move(net: Network, move: GreedyMove) -> Network:
    """Apply a greedy move; a swap of an edge owned by the other side moves
    that edge into the actor's strategy."""
    u = move.actor
    if move.kind is MoveKind.SWAP and not net.owned[u] >> move.old_target & 1:
        v = move.old_target
        owned = list(net.owned)
        owned[v] &= ~(1 << u)
        owned[u] |= 1 << move.target
        return Network.from_masks(owned)
    return net.with_strategy(u, move.apply_mask(net.owned[u]))
