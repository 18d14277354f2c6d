"""Equilibrium certification and approximation factors.

Certifiers scan agents in id order and stop at the first one that can
strictly improve; that agent and its tie-broken best deviation form the
witness.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .cost import GameConfig, Mode, format_alpha
from .errors import PreconditionNotMet, SpaceTooLarge
from .graph import INFINITE, Network, bits_to_set, k_neighborhood_mask
from .moves import (
    DEFAULT_BUDGET,
    GLOBAL_GUARD,
    _INF_SCALED,
    GreedyMove,
    Strategy,
    _best_subset,
    _check_budget,
    _current_scaled,
    _scaled_to_cost,
    best_greedy_scaled,
    local_candidates,
    swap_distance_costs,
)


class Concept(enum.Enum):
    NE = "NE"
    KNE = "kNE"
    GE = "GE"
    KGE = "kGE"
    ASE = "ASE"


class Scope(enum.Enum):
    LOCAL_FULL = "local-full"
    LOCAL_GREEDY = "local-greedy"
    GLOBAL_FULL = "global-full"
    GLOBAL_GREEDY = "global-greedy"


@dataclass(frozen=True)
class Verdict:
    concept: Concept
    holds: bool
    agent: int | None = None
    witness: Strategy | GreedyMove | None = None
    cost_before: Fraction | float | None = None
    cost_after: Fraction | float | None = None

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        out: dict = {"concept": self.concept.value, "holds": self.holds}
        if self.holds:
            return out
        w = self.witness
        if isinstance(w, GreedyMove):
            kind = w.kind.name
            targets = [w.target] if w.old_target is None else [w.old_target, w.target]
        else:
            kind, targets = "STRATEGY", sorted(w.targets)
        out["witness"] = {
            "agent": self.agent,
            "kind": kind,
            "targets": targets,
            "cost_before": _cost_str(self.cost_before),
            "cost_after": _cost_str(self.cost_after),
        }
        return out


def _cost_str(c) -> str:
    if c == INFINITE:
        return "inf"
    return format_alpha(Fraction(c))


# --- per-agent best achievable cost (scaled by alpha's denominator) -------


def _best_full(net: Network, cfg: GameConfig, u: int, k: int | None, budget: int) -> tuple[int, int]:
    if k is None:
        if net.n > GLOBAL_GUARD:
            raise SpaceTooLarge(f"global enumeration guarded at n <= {GLOBAL_GUARD}")
        cand = local_candidates(net, u, None)
    else:
        cand = local_candidates(net, u, k)
        _check_budget(net, u, cand, budget)
    return _best_subset(net, cfg, u, cand)


def _full_verdict(net, cfg, k, concept, budget) -> Verdict:
    for u in range(net.n):
        cur = _current_scaled(net, cfg, u)
        best, mask = _best_full(net, cfg, u, k, budget)
        if best < cur:
            return Verdict(concept, False, u, Strategy(u, bits_to_set(mask)),
                           _scaled_to_cost(cur, cfg), _scaled_to_cost(best, cfg))
    return Verdict(concept, True)


def _greedy_verdict(net, cfg, k, concept) -> Verdict:
    for u in range(net.n):
        best, move = best_greedy_scaled(net, cfg, u, k)
        if move is not None:
            return Verdict(concept, False, u, move,
                           _scaled_to_cost(_current_scaled(net, cfg, u), cfg),
                           _scaled_to_cost(best, cfg))
    return Verdict(concept, True)


def _as_cfg(alpha, mode) -> GameConfig:
    return alpha if isinstance(alpha, GameConfig) else GameConfig(alpha, 1, mode)


def is_k_ne(net: Network, cfg: GameConfig, budget: int = DEFAULT_BUDGET) -> Verdict:
    return _full_verdict(net, cfg, cfg.k, Concept.KNE, budget)


def is_k_ge(net: Network, cfg: GameConfig) -> Verdict:
    return _greedy_verdict(net, cfg, cfg.k, Concept.KGE)


def is_ne(net: Network, alpha, mode: Mode = Mode.SUM) -> Verdict:
    return _full_verdict(net, _as_cfg(alpha, mode), None, Concept.NE, DEFAULT_BUDGET)


def is_ge(net: Network, alpha, mode: Mode = Mode.SUM) -> Verdict:
    return _greedy_verdict(net, _as_cfg(alpha, mode), None, Concept.GE)


def is_ase(net: Network, mode: Mode = Mode.SUM) -> Verdict:
    """No agent gains by swapping one of its own edges; the edge price is irrelevant."""
    from .cost import distance_cost

    for u in range(net.n):
        cur = distance_cost(net, u, mode)
        best = None
        for move, d in swap_distance_costs(net, mode, u, None, own_only=True):
            if d < cur and (best is None or (d, move.sort_key()) < (best[1], best[0].sort_key())):
                best = (move, d)
        if best is not None:
            return Verdict(Concept.ASE, False, u, best[0], cur, best[1])
    return Verdict(Concept.ASE, True)


# --- approximation factors ----------------------------------------------------


def agent_approx_factor(net: Network, cfg: GameConfig, u: int, scope: Scope,
                        budget: int = DEFAULT_BUDGET) -> Fraction | float:
    """``cost_u`` over the best cost ``u`` can reach within ``scope``."""
    cur = _current_scaled(net, cfg, u)
    if scope is Scope.LOCAL_FULL:
        best = _best_full(net, cfg, u, cfg.k, budget)[0]
    elif scope is Scope.GLOBAL_FULL:
        best = _best_full(net, cfg, u, None, budget)[0]
    else:
        k = cfg.k if scope is Scope.LOCAL_GREEDY else None
        best = best_greedy_scaled(net, cfg, u, k)[0]
    best = min(best, cur)
    if best >= _INF_SCALED:
        return Fraction(1)  # nothing reachable is finite, so nothing improves
    if cur >= _INF_SCALED:
        return INFINITE
    if best == 0:
        return Fraction(1)
    return Fraction(cur, best)


def approx_factor(net: Network, cfg: GameConfig, scope: Scope | str,
                  budget: int = DEFAULT_BUDGET) -> Fraction | float:
    """Smallest beta such that the network is a beta-approximate equilibrium in ``scope``."""
    scope = Scope(scope) if isinstance(scope, str) else scope
    worst: Fraction | float = Fraction(1)
    for u in range(net.n):
        worst = max(worst, agent_approx_factor(net, cfg, u, scope, budget))
    return worst


# --- full report ----------------------------------------------------------------


ALL_CONCEPTS = (Concept.NE, Concept.KNE, Concept.GE, Concept.KGE, Concept.ASE)


@dataclass
class EquilibriumReport:
    config: GameConfig
    verdicts: dict[Concept, Verdict] = field(default_factory=dict)
    beta_local: Fraction | float | None = None
    beta_global: Fraction | float | None = None

    @property
    def all_hold(self) -> bool:
        return all(v.holds for v in self.verdicts.values())

    def to_dict(self) -> dict:
        def num(x):
            if x is None:
                return None
            return "inf" if x == INFINITE else format_alpha(Fraction(x))

        return {
            "alpha": format_alpha(self.config.alpha),
            "k": self.config.k,
            "mode": self.config.mode.value,
            "verdicts": [self.verdicts[c].to_dict() for c in ALL_CONCEPTS if c in self.verdicts],
            "beta_local": num(self.beta_local),
            "beta_global": num(self.beta_global),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def certify(net: Network, cfg: GameConfig, concepts=ALL_CONCEPTS,
            budget: int = DEFAULT_BUDGET, factors: bool = True) -> EquilibriumReport:
    """Run the requested certifiers.  Global concepts are skipped above the
    global enumeration guard."""
    concepts = tuple(Concept(c) if isinstance(c, str) else c for c in concepts)
    report = EquilibriumReport(cfg)
    small = net.n <= GLOBAL_GUARD
    for c in concepts:
        if c is Concept.KNE:
            report.verdicts[c] = is_k_ne(net, cfg, budget)
        elif c is Concept.KGE:
            report.verdicts[c] = is_k_ge(net, cfg)
        elif c is Concept.GE:
            report.verdicts[c] = is_ge(net, cfg)
        elif c is Concept.ASE:
            report.verdicts[c] = is_ase(net, cfg.mode)
        elif c is Concept.NE and small:
            report.verdicts[c] = is_ne(net, cfg)
    if factors:
        if Concept.KNE in concepts:
            report.beta_local = approx_factor(net, cfg, Scope.LOCAL_FULL, budget)
        if Concept.NE in concepts and small:
            report.beta_global = approx_factor(net, cfg, Scope.GLOBAL_FULL, budget)
    return report


# --- neighbourhood growth in local equilibria ----------------------------------


@dataclass(frozen=True)
class BallCheck:
    """One evaluated neighbourhood-size inequality."""

    rule: str
    agent: int | None
    radius: int
    size: int
    bound: Fraction
    holds: bool


@dataclass
class BallReport:
    n: int
    checks: list[BallCheck] = field(default_factory=list)
    # growth dichotomy per inner radius d: (some-agent branch, every-agent branch)
    dichotomy: dict[int, tuple[bool, bool]] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        direct = all(c.holds for c in self.checks if not c.rule.startswith("growth"))
        return direct and all(a or b for a, b in self.dichotomy.values())


def check_ball_growth(net: Network, cfg: GameConfig, d: int | None = None,
                      budget: int = DEFAULT_BUDGET, certified: bool = False) -> BallReport:
    """Evaluate the neighbourhood-size guarantees of k-local Nash equilibria.

    Rules (each only where its parameter range applies):

    * ``n2``: ``k >= 2``: ``|N_2(v)| > n / (2 alpha)`` for every agent.
    * ``growth``: ``k >= 6`` and ``d <= k/3 - 1`` with ``lambda = min_u |N_d(u)| - 1``:
      either some ``u`` has ``|N_{2d+3}(u)| > n/2`` or every ``v`` has
      ``|N_{3d+3}(v)| > lambda n / alpha``.  Both branches are reported.
    * ``half``: ``k >= 4``, ``alpha < n/2``, ``d <= k/2 - 1``: any ``u`` with
      ``|N_d(u)| >= n/2`` has ``|N_{2d+1}(u)| >= n``.

    ``d`` restricts the growth and half rules to one radius.
    """
    k, alpha, n = cfg.k, cfg.alpha, net.n
    if not certified and not is_k_ne(net, cfg, budget):
        raise PreconditionNotMet("network is not a k-local Nash equilibrium")
    if k < 2:
        raise PreconditionNotMet("neighbourhood bounds need k >= 2")
    if d is not None and not (3 * (d + 1) <= k or 2 * (d + 1) <= k):
        raise PreconditionNotMet(f"radius d={d} is outside every rule's range for k={k}")

    def ball(u, r):
        return k_neighborhood_mask(net.adj, u, r).bit_count()

    report = BallReport(n)
    bound = Fraction(n) / (2 * alpha)
    for v in range(n):
        s = ball(v, 2)
        report.checks.append(BallCheck("n2", v, 2, s, bound, s > bound))

    def radii(limit_ok):
        cands = [d] if d is not None else range(0, n)
        return [r for r in cands if limit_ok(r)]

    if k >= 6:
        for r in radii(lambda r: 3 * (r + 1) <= k):
            lam = min(ball(u, r) for u in range(n)) - 1
            if lam <= 0:
                continue
            half = Fraction(n, 2)
            some = [ball(u, 2 * r + 3) for u in range(n)]
            every = [ball(v, 3 * r + 3) for v in range(n)]
            grow = lam * Fraction(n) / alpha
            for u, s in enumerate(some):
                report.checks.append(BallCheck(f"growth-some[d={r}]", u, 2 * r + 3, s, half, s > half))
            for v, s in enumerate(every):
                report.checks.append(BallCheck(f"growth-every[d={r}]", v, 3 * r + 3, s, grow, s > grow))
            report.dichotomy[r] = (any(s > half for s in some), all(s > grow for s in every))
    if k >= 4 and alpha < Fraction(n, 2):
        for r in radii(lambda r: 2 * (r + 1) <= k):
            for u in range(n):
                if 2 * ball(u, r) >= n:
                    s = ball(u, 2 * r + 1)
                    report.checks.append(BallCheck(f"half[d={r}]", u, 2 * r + 1, s, Fraction(n), s >= n))
    return report

