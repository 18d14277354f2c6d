"""Sequential improving-response dynamics and best-response cycle search.

Four move regimes are supported:

* ``K_SG``: swap any incident edge (own or not) to an agent in the k-ball.  The
  swapper owns the new edge; only distance cost matters.
* ``K_ASG``: swap one own edge inside the k-ball.
* ``K_GBG``: one greedy move (delete, swap or buy) inside the k-ball.
* ``K_BG``: any k-local strategy change.

In every regime the activated agent plays its tie-broken best improving
response.  States are compared as labelled networks via :func:`canonical_hash`.
"""

from __future__ import annotations

import enum
import itertools
import json
import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .cost import GameConfig, Mode, distance_cost, format_alpha
from .errors import BudgetExhausted, ScriptExhausted
from .graph import (
    INFINITE,
    Network,
    bits_to_set,
    canonical_hash,
    is_connected,
    set_to_bits,
)
from .moves import (
    _INF_SCALED,
    DEFAULT_BUDGET,
    _best_subset,
    _check_budget,
    _current_scaled,
    _popcounts,
    _scaled_costs,
    _expand,
    _TABLE_LIMIT,
    agent_view,
    best_greedy_scaled,
    greedy_move_costs,
    local_candidates,
    swap_distance_costs,
)


class MoveRegime(enum.Enum):
    K_SG = "k-sg"
    K_ASG = "k-asg"
    K_GBG = "k-gbg"
    K_BG = "k-bg"


class Policy(enum.Enum):
    ROUND_ROBIN = "round-robin"
    RANDOM = "random"
    SCRIPT = "script"
    MAX_GAIN = "max-gain"


@dataclass(frozen=True)
class Scheduler:
    policy: Policy = Policy.ROUND_ROBIN
    seed: int | None = None
    script: tuple[int, ...] = ()

    @classmethod
    def round_robin(cls) -> Scheduler:
        return cls(Policy.ROUND_ROBIN)

    @classmethod
    def random(cls, seed: int) -> Scheduler:
        return cls(Policy.RANDOM, seed)

    @classmethod
    def from_script(cls, agents: Iterable[int]) -> Scheduler:
        return cls(Policy.SCRIPT, script=tuple(agents))

    @classmethod
    def max_gain(cls) -> Scheduler:
        return cls(Policy.MAX_GAIN)


# --- single responses ----------------------------------------------------------


@dataclass(frozen=True)
class Response:
    """An improving change by ``agent``; ``released`` is the previous owner of an
    edge taken over in a swap-game move."""

    agent: int
    before: int
    after: int
    gain: int                  # scaled cost decrease (distance decrease for swaps)
    released: int | None = None

    def apply(self, net: Network) -> Network:
        owned = list(net.owned)
        owned[self.agent] = self.after
        if self.released is not None:
            owned[self.released] &= ~(1 << self.agent)
        return Network.from_masks(owned)


def _swap_responses(net, cfg, regime, u) -> list[tuple[int, tuple, Response]]:
    own_only = regime is MoveRegime.K_ASG
    cur = distance_cost(net, u, cfg.mode)
    out = []
    for move, d in swap_distance_costs(net, cfg.mode, u, cfg.k, own_only=own_only):
        if d < cur:
            released = None if net.owned[u] >> move.old_target & 1 else move.old_target
            after = (net.owned[u] & ~(1 << move.old_target)) | 1 << move.target
            gain = _INF_SCALED if cur == INFINITE else cur - d
            out.append((d, move.sort_key(), Response(u, net.owned[u], after, gain, released)))
    return out


def _greedy_responses(net, cfg, u) -> list[tuple[int, tuple, Response]]:
    cur = _current_scaled(net, cfg, u)
    out = []
    for move, c in greedy_move_costs(net, cfg, u):
        if c < cur:
            out.append((c, move.sort_key(), Response(u, net.owned[u], move.apply_mask(net.owned[u]), cur - c)))
    return out


def best_responses(net: Network, cfg: GameConfig, regime: MoveRegime, u: int,
                   budget: int = DEFAULT_BUDGET) -> list[Response]:
    """Every strictly improving response of ``u`` attaining the best cost, tie-broken one first."""
    if regime in (MoveRegime.K_SG, MoveRegime.K_ASG, MoveRegime.K_GBG):
        opts = _greedy_responses(net, cfg, u) if regime is MoveRegime.K_GBG else _swap_responses(net, cfg, regime, u)
        if not opts:
            return []
        best = min(c for c, _, _ in opts)
        return [r for c, _, r in sorted(opts, key=lambda t: (t[0], t[1])) if c == best]
    cur = _current_scaled(net, cfg, u)
    cand = local_candidates(net, u, cfg.k)
    _check_budget(net, u, cand, budget)
    cands = tuple(sorted(bits_to_set(cand)))
    if len(cands) > _TABLE_LIMIT:
        best, mask = _best_subset(net, cfg, u, cand)
        return [Response(u, net.owned[u], mask, cur - best)] if best < cur else []
    costs = _scaled_costs(agent_view(net, u, cfg.mode).table(cands), _popcounts(len(cands)), cfg)
    best = int(costs.min())
    if best >= cur:
        return []
    masks = [_expand(int(i), cands) for i in np.flatnonzero(costs == best)]
    masks.sort(key=lambda m: (m.bit_count(), sorted(bits_to_set(m))))
    return [Response(u, net.owned[u], m, cur - best) for m in masks]


def best_response(net, cfg, regime, u, budget=DEFAULT_BUDGET) -> Response | None:
    if regime is MoveRegime.K_GBG:
        best, move = best_greedy_scaled(net, cfg, u)
        if move is None:
            return None
        cur = _current_scaled(net, cfg, u)
        return Response(u, net.owned[u], move.apply_mask(net.owned[u]), cur - best)
    if regime is MoveRegime.K_BG:
        cur = _current_scaled(net, cfg, u)
        cand = local_candidates(net, u, cfg.k)
        _check_budget(net, u, cand, budget)
        best, mask = _best_subset(net, cfg, u, cand)
        return Response(u, net.owned[u], mask, cur - best) if best < cur else None
    opts = best_responses(net, cfg, regime, u, budget)
    return opts[0] if opts else None


def step(net: Network, cfg: GameConfig, regime: MoveRegime, agent: int,
         budget: int = DEFAULT_BUDGET) -> Network | None:
    """Network after ``agent`` plays its best improving response, or None."""
    if not 0 <= agent < net.n:
        raise IndexError(f"agent {agent} out of range")
    r = best_response(net, cfg, regime, agent, budget)
    return None if r is None else r.apply(net)


# --- traces ----------------------------------------------------------------------


class Outcome(enum.Enum):
    CONVERGED = "converged"
    CYCLE = "cycle"
    BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class Step:
    agent: int
    before: frozenset[int]
    after: frozenset[int]
    digest: str
    released: int | None = None

    def apply(self, net: Network) -> Network:
        return Response(self.agent, set_to_bits(self.before), set_to_bits(self.after), 0,
                        self.released).apply(net)


@dataclass
class Trace:
    start: Network
    config: GameConfig
    regime: MoveRegime
    steps: list[Step] = field(default_factory=list)
    outcome: Outcome | None = None
    first_index: int | None = None   # state index where the cycle starts
    period: int | None = None

    def states(self) -> list[Network]:
        out = [self.start]
        for s in self.steps:
            out.append(s.apply(out[-1]))
        return out

    @property
    def final(self) -> Network:
        return self.states()[-1]

    def digests(self) -> list[str]:
        return [canonical_hash(self.start)] + [s.digest for s in self.steps]

    # json lines: header, one line per step, outcome
    def to_jsonl(self) -> str:
        head = {
            "start": self.start.to_dict(),
            "alpha": format_alpha(self.config.alpha),
            "k": self.config.k,
            "mode": self.config.mode.value,
            "regime": self.regime.value,
        }
        lines = [json.dumps(head, separators=(",", ":"))]
        for s in self.steps:
            rec = {"agent": s.agent, "before": sorted(s.before), "after": sorted(s.after), "digest": s.digest}
            if s.released is not None:
                rec["released"] = s.released
            lines.append(json.dumps(rec, separators=(",", ":")))
        tail = {"outcome": self.outcome.value if self.outcome else None,
                "first_index": self.first_index, "period": self.period}
        lines.append(json.dumps(tail, separators=(",", ":")))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> Trace:
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        head, body, tail = rows[0], rows[1:-1], rows[-1]
        cfg = GameConfig(head["alpha"], head["k"], Mode(head["mode"]))
        trace = cls(Network.from_dict(head["start"]), cfg, MoveRegime(head["regime"]))
        for r in body:
            trace.steps.append(Step(r["agent"], frozenset(r["before"]), frozenset(r["after"]),
                                    r["digest"], r.get("released")))
        trace.outcome = Outcome(tail["outcome"]) if tail.get("outcome") else None
        trace.first_index = tail.get("first_index")
        trace.period = tail.get("period")
        return trace


def _record(trace: Trace, r: Response, new: Network):
    trace.steps.append(Step(r.agent, bits_to_set(r.before), bits_to_set(r.after),
                            canonical_hash(new), r.released))


def _is_stable(net, cfg, regime, budget) -> bool:
    return all(best_response(net, cfg, regime, u, budget) is None for u in range(net.n))


def run(net: Network, cfg: GameConfig, regime: MoveRegime, scheduler: Scheduler | None = None,
        max_steps: int = 10_000, budget: int = DEFAULT_BUDGET) -> Trace:
    """Activate agents until nobody can improve, a state repeats, or ``max_steps``
    moves have been made."""
    scheduler = scheduler or Scheduler.round_robin()
    trace = Trace(net, cfg, regime)
    seen = {canonical_hash(net): 0}
    rng = random.Random(scheduler.seed)
    script = iter(scheduler.script)
    idle = 0
    turn = 0
    while True:
        if scheduler.policy is Policy.MAX_GAIN:
            options = [best_response(net, cfg, regime, u, budget) for u in range(net.n)]
            options = [r for r in options if r is not None]
            if not options:
                trace.outcome = Outcome.CONVERGED
                return trace
            if len(trace.steps) >= max_steps:
                break
            r = max(options, key=lambda x: (x.gain, -x.agent))
        else:
            if scheduler.policy is Policy.ROUND_ROBIN:
                agent = turn % net.n
            elif scheduler.policy is Policy.RANDOM:
                agent = rng.randrange(net.n)
            else:
                agent = next(script, None)
                if agent is None:
                    raise ScriptExhausted(f"script ran out after {len(trace.steps)} moves")
            turn += 1
            r = best_response(net, cfg, regime, agent, budget)
            if r is None:
                idle += 1
                if scheduler.policy is Policy.ROUND_ROBIN:
                    done = idle >= net.n
                else:
                    done = _is_stable(net, cfg, regime, budget)
                if done:
                    trace.outcome = Outcome.CONVERGED
                    return trace
                continue
            if len(trace.steps) >= max_steps:
                break
        idle = 0
        net = r.apply(net)
        _record(trace, r, net)
        h = trace.steps[-1].digest
        if h in seen:
            trace.outcome = Outcome.CYCLE
            trace.first_index = seen[h]
            trace.period = len(trace.steps) - seen[h]
            return trace
        seen[h] = len(trace.steps)
    trace.outcome = Outcome.BUDGET_EXHAUSTED
    return trace


# --- cycle verification and search -------------------------------------------------


def verify_cycle(trace: Trace, cfg: GameConfig | None = None, regime: MoveRegime | None = None) -> bool:
    """Replay a trace, accepting any equal-cost best response at each step, and
    check that it returns to the state where the claimed cycle starts."""
    cfg = cfg or trace.config
    regime = regime or trace.regime
    if trace.outcome is not Outcome.CYCLE or not trace.steps:
        return False
    net = trace.start
    states = [net]
    for s in trace.steps:
        options = best_responses(net, cfg, regime, s.agent)
        nxt = s.apply(net)
        if canonical_hash(nxt) != s.digest:
            return False
        if not any(r.apply(net) == nxt for r in options):
            return False
        net = nxt
        states.append(net)
    first = trace.first_index or 0
    if trace.period != len(trace.steps) - first:
        return False
    return states[-1] == states[first]


@dataclass(frozen=True)
class CaptionPattern:
    """Constraints on a starting state read off a described move sequence.

    ``owned``: (owner, other) edges that must be present; ``absent``: pairs that
    must not be present; ``extra``: how many further edges to add; ``script``:
    the agents' activation order, used to order the search; ``connected_after``:
    (removed pairs, added pairs) edits of the start whose results must stay
    connected, i.e. intermediate states of the described sequence.
    """

    n: int
    owned: tuple[tuple[int, int], ...]
    absent: tuple[tuple[int, int], ...] = ()
    extra: int = 0
    script: tuple[int, ...] = ()
    connected_after: tuple[tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]], ...] = ()


# Start-state constraints read off two published move sequences (agents a.. = 0..).
# Six agents, k=2, 2 < alpha < 3: b owns ab and be, d owns db, c owns cb, f owns fe,
# ae is absent and one more edge exists.
SIX_AGENT_PATTERN = CaptionPattern(
    6, owned=((1, 0), (1, 4), (3, 1), (2, 1), (5, 4)), absent=((0, 4),), extra=1,
    script=(0, 1, 0, 1, 3, 2, 1, 0, 1, 0, 3, 2),
)
# Eight agents, k=3, 3 < alpha < 4: d owns dc, a owns ac, b owns bh; db, ab and ch
# are absent; five more edges, such that the states with {db, ab} and with
# {dc, ac} in place of those three edges are both connected.
EIGHT_AGENT_PATTERN = CaptionPattern(
    8, owned=((3, 2), (0, 2), (1, 7)), absent=((3, 1), (0, 1), (2, 7)), extra=5,
    script=(3, 0, 1, 2, 3, 0, 2, 1),
    connected_after=(
        (((3, 2), (0, 2), (1, 7)), ((3, 1), (0, 1))),
        (((1, 7),), ()),
    ),
)


def caption_seeds(pattern: CaptionPattern, limit: int | None = None) -> Iterable[Network]:
    """Connected states matching ``pattern``, in a deterministic order."""
    taken = {frozenset(e) for e in pattern.owned} | {frozenset(e) for e in pattern.absent}
    free = [(u, v) for u in range(pattern.n) for v in range(u + 1, pattern.n)
            if frozenset((u, v)) not in taken]
    count = 0
    required = [frozenset(e) for e in pattern.owned]
    for extra in itertools.combinations(free, pattern.extra):
        pairs = set(required) | {frozenset(e) for e in extra}
        if not _pairs_connected(pattern.n, pairs):
            continue
        if not all(_pairs_connected(pattern.n, (pairs - {frozenset(e) for e in rem}) | {frozenset(e) for e in add})
                   for rem, add in pattern.connected_after):
            continue
        for flips in itertools.product((False, True), repeat=len(extra)):
            edges = list(pattern.owned) + [(v, u) if f else (u, v) for (u, v), f in zip(extra, flips)]
            yield Network(pattern.n, edges)
            count += 1
            if limit is not None and count >= limit:
                return


def _pairs_connected(n: int, pairs) -> bool:
    return is_connected(Network(n, [tuple(p) for p in pairs]))


def random_connected_network(n: int, rng: random.Random, p: float = 0.4) -> Network:
    """Random spanning tree plus independent extra edges, random owners."""
    order = list(range(n))
    rng.shuffle(order)
    pairs = set()
    for i in range(1, n):
        a, b = order[i], order[rng.randrange(i)]
        pairs.add((min(a, b), max(a, b)))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in pairs and rng.random() < p:
                pairs.add((u, v))
    edges = [(u, v) if rng.random() < 0.5 else (v, u) for u, v in sorted(pairs)]
    return Network(n, edges)


def random_tree(n: int, rng: random.Random) -> Network:
    return random_connected_network(n, rng, p=0.0)


@dataclass
class CycleSearchResult:
    start: Network
    trace: Trace
    explored: int
    seed_index: int


def find_br_cycle(n: int, cfg: GameConfig, regime: MoveRegime, search_budget: int = 100_000,
                  seeds: Sequence[Network] | Iterable[Network] | None = None,
                  hint: Sequence[int] = (), max_depth: int | None = None,
                  per_seed_budget: int | None = None, random_seeds: int = 0,
                  rng_seed: int = 0) -> CycleSearchResult | None:
    """Depth-first search of the improvement graph for a best-response cycle.

    Nodes are labelled states; the successors of a state are all equal-cost best
    responses of every agent (the agent order rotates through ``hint`` first).
    A back edge onto the current path is a cycle.  ``seeds`` are explored in
    order, followed by ``random_seeds`` random connected states.

    Returns None once all seeds are exhausted without a cycle; raises
    :class:`BudgetExhausted` when ``search_budget`` expansions are spent.
    """
    def all_seeds():
        yield from (seeds or ())
        rng = random.Random(rng_seed)
        for _ in range(random_seeds):
            yield random_connected_network(n, rng)

    explored = 0
    done: set[str] = set()          # fully explored without a cycle
    succ_cache: dict[str, list[tuple[Response, Network, str]]] = {}

    def successors(net: Network, h: str, depth: int):
        if h not in succ_cache:
            out = []
            for u in range(net.n):
                for r in best_responses(net, cfg, regime, u):
                    nxt = r.apply(net)
                    out.append((r, nxt, canonical_hash(nxt)))
            succ_cache[h] = out
        out = succ_cache[h]
        if hint:
            want = hint[depth % len(hint)]
            out = sorted(out, key=lambda t: (t[0].agent != want,))
        return out

    for index, seed in enumerate(all_seeds()):
        if seed.n != n:
            raise ValueError(f"seed has {seed.n} agents, expected {n}")
        h0 = canonical_hash(seed)
        if h0 in done:
            continue
        local = 0
        path: list[tuple[Network, str]] = [(seed, h0)]
        moves: list[Response] = []
        on_path = {h0: 0}
        stack = [iter(successors(seed, h0, 0))]
        while stack:
            try:
                r, nxt, h = next(stack[-1])
            except StopIteration:
                stack.pop()
                _, ph = path.pop()
                del on_path[ph]
                if moves:
                    moves.pop()
                if max_depth is None:
                    done.add(ph)  # depth-limited searches may have pruned below here
                continue
            if h in on_path:
                i = on_path[h]
                trace = Trace(path[i][0], cfg, regime)
                cur = path[i][0]
                for mv in moves[i:] + [r]:
                    cur = mv.apply(cur)
                    _record(trace, mv, cur)
                trace.outcome = Outcome.CYCLE
                trace.first_index = 0
                trace.period = len(trace.steps)
                return CycleSearchResult(path[i][0], trace, explored, index)
            if h in done:
                continue
            if max_depth is not None and len(path) > max_depth:
                continue
            explored += 1
            local += 1
            if explored > search_budget:
                raise BudgetExhausted(f"no cycle within {search_budget} explored states")
            if per_seed_budget is not None and local > per_seed_budget:
                break
            path.append((nxt, h))
            moves.append(r)
            on_path[h] = len(path) - 1
            stack.append(iter(successors(nxt, h, len(moves))))
    return None
