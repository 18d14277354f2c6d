"""Closed-form distance sums and bounds, each paired with an engine oracle.

The BFS engine is ground truth.  Closed forms are evaluated exactly and
compared; disagreements are reported through :class:`FormulaResult`, never
patched over.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .constructions import complete_binary_tree, h_tree, tree_star
from .cost import Mode, parse_alpha
from .errors import OddDepth
from .graph import Network, iter_bits, k_neighborhood_mask, shortest_paths


@dataclass(frozen=True)
class FormulaResult:
    name: str
    params: tuple
    closed_form: int | Fraction
    oracle: int | Fraction

    @property
    def match(self) -> bool:
        return self.closed_form == self.oracle


def _even(d: int):
    if d < 2 or d % 2:
        raise OddDepth(f"depth must be even and >= 2, got {d}")


def _dist_sum(net: Network, u: int, targets=None) -> int:
    dist = shortest_paths(net, u)
    return sum(dist[v] for v in (targets if targets is not None else range(net.n)))


def _with_edge(net: Network, owner: int, other: int) -> Network:
    return net.with_strategy(owner, net.owned[owner] | 1 << other)


# --- distance sums --------------------------------------------------------------


def h_dist(d: int, l: int) -> int:
    """Distance from ``u`` to ``v`` plus to every agent of the hung tree."""
    if d < 0 or l < 0:
        raise ValueError("need d >= 0 and l >= 0")
    return 2 ** (d + 1) * (d + l) + 1


def h_dist_oracle(d: int, l: int) -> int:
    h = h_tree(d, l)
    return _dist_sum(h.network, h.u, [h.v] + list(range(h.root, h.network.n)))


def t_dist(d: int) -> int:
    """Distance sum of a leaf in the complete binary tree of even depth ``d``."""
    _even(d)
    return 2 ** (d + 1) * (2 * d - 3) + d + 6


def t_dist_oracle(d: int) -> int:
    return _dist_sum(complete_binary_tree(d), 2 ** d - 1)


def tree_star_leaf_dist(d: int, l: int) -> int:
    _even(d)
    return 2 ** (d + 1) * (2 * d - 3) + 3 * d + l * (d + 3) + 9


def tree_star_leaf_dist_oracle(d: int, l: int) -> int:
    ts = tree_star(d, l)
    return _dist_sum(ts.network, ts.leaf)


def after_buy_uz_dist(d: int, l: int) -> int:
    """Leaf distance sum after the leaf buys an edge to the star center."""
    _even(d)
    return 2 ** (d + 1) * d + d - 3 * 2 ** (d // 2 + 2) + 2 ** (d + 2) + 2 * l + 9


def after_buy_uz_dist_oracle(d: int, l: int) -> int:
    ts = tree_star(d, l)
    return _dist_sum(_with_edge(ts.network, ts.leaf, ts.center), ts.leaf)


def after_buy_uy_dist(d: int, l: int) -> int:
    """Leaf distance sum after the leaf buys an edge to the bridge agent."""
    _even(d)
    return 3 * l + 2 ** (d + 1) * d + d - 2 ** (d // 2 + 3) + 2 ** (d + 1) + 9


def after_buy_uy_dist_oracle(d: int, l: int) -> int:
    ts = tree_star(d, l)
    return _dist_sum(_with_edge(ts.network, ts.leaf, ts.bridge), ts.leaf)


def l_min(d: int) -> int:
    """Smallest star size for which the leaf's best single purchase is the star center."""
    _even(d)
    return 2 ** (d + 1) - 2 ** (d // 2 + 2)


# --- maximum greedy purchase gain ----------------------------------------------


class DeltaResult(NamedTuple):
    general_form: int
    oracle: int
    special_case: int | None  # closed form for k in {2, 3}, else None


def delta_general(d: int, k: int, l: int) -> int:
    """The displayed general expression for the maximum k-local purchase gain."""
    c, f = -(-k // 2), k // 2
    return ((k - 1) * (l + 2 ** (d + 1)) - 2 * k * (2 ** c - 1) + f * 2 ** (c + 2)
            - 2 ** (k + 2) + 3 ** (c + 1) - 2)


def delta_special(d: int, k: int, l: int) -> int | None:
    n = 2 ** (d + 1) + l + 1
    if k == 2:
        return n - 3
    if k == 3:
        return 2 * (n - 7)
    return None


def max_buy_gain(net: Network, k: int, mode: Mode = Mode.SUM, agents=None) -> tuple[int, int, int]:
    """Largest distance-cost decrease any agent gets from one k-local purchase.

    Returns ``(gain, agent, target)``; ties go to the lowest agent, then target.
    """
    from .moves import agent_view

    best = (-1, -1, -1)
    for u in agents if agents is not None else range(net.n):
        view = agent_view(net, u, mode)
        fresh = list(iter_bits(k_neighborhood_mask(net.adj, u, k) & ~net.adj[u] & ~(1 << u)))
        if not fresh:
            continue
        cur_vec = view.base_vector(net.owned[u])
        cur = int(view.aggregate(cur_vec)[0])
        after = view.aggregate(np.minimum(view.rows(fresh), cur_vec))
        i = int(after.argmin())
        gain = cur - int(after[i])
        if gain > best[0]:
            best = (gain, u, fresh[i])
    return best


def delta_max_decrease(d: int, k: int, l: int) -> DeltaResult:
    if not 2 <= k <= d:
        raise ValueError("need 2 <= k <= d")
    if l < 2 ** (d + 1):
        raise ValueError("need l >= 2^(d+1)")
    ts = tree_star(d, l)
    return DeltaResult(delta_general(d, k, l), delta_oracle(ts, k), delta_special(d, k, l))


def delta_oracle(ts, k: int, one_star_leaf: bool = False) -> int:
    """Engine value of the maximum k-local purchase gain over all agents of a tree-star.

    Star leaves are interchangeable; ``one_star_leaf`` evaluates only the first.
    """
    agents = range(ts.center + 2) if one_star_leaf else None
    return max_buy_gain(ts.network, k, agents=agents)[0]


# --- bounds -----------------------------------------------------------------------


def diam_bound(alpha, k: int) -> Fraction | float:
    """Largest diameter a k-local Nash equilibrium can have at edge price ``alpha``.

    ``alpha/(k-1) + 3k/2 + 1`` when ``k^2 < 4 alpha``, else ``2 sqrt(alpha)``.  The
    second branch is a float only when ``sqrt(alpha)`` is irrational; use
    :func:`within_diam_bound` for exact comparisons.
    """
    alpha = parse_alpha(alpha)
    if k < 2:
        raise ValueError("need k >= 2")
    if k * k < 4 * alpha:
        return alpha / (k - 1) + Fraction(3 * k, 2) + 1
    root = _exact_sqrt(alpha)
    return 2 * root if root is not None else 2 * math.sqrt(alpha)


def within_diam_bound(diam: int, alpha, k: int) -> bool:
    alpha = parse_alpha(alpha)
    if k * k < 4 * alpha:
        return diam <= diam_bound(alpha, k)
    return diam * diam <= 4 * alpha


def _exact_sqrt(x: Fraction) -> Fraction | None:
    a, b = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if a * a == x.numerator and b * b == x.denominator:
        return Fraction(a, b)
    return None


class NonTreeBound(NamedTuple):
    value: float
    exponent: float
    constant_regime: bool


def nontree_diameter_bound(n: int, k: int, eps: float) -> NonTreeBound:
    """Reporting-only value of ``n^(1 - eps (log2(k-3) - 1))`` (floats allowed here)."""
    if k < 6 or n < 4:
        raise ValueError("need k >= 6 and n >= 4")
    if eps < 1 / math.log2(n) - 1e-12:
        raise ValueError("need eps >= 1/log2(n)")
    growth = math.log2(k - 3) - 1
    exponent = 1 - eps * growth
    return NonTreeBound(n ** exponent, exponent, eps * growth >= 1 - 1e-12)


class Regime(NamedTuple):
    case: int | None
    label: str
    matches: tuple[int, ...]


_LABELS = {
    1: "kNE=NE, PoA=O(1)",
    2: "kNE=NE, PoA=O(1)",
    3: "kNE=NE, PoA=O(3^ceil(1/eps))",
    4: "kNE=NE, PoA=O(5^sqrt(log n) log n)",
    5: "kNE=NE, PoA=O(1)",
}


def regime_classifier(n: int, alpha, k: int, eps: float | None = None) -> Regime:
    """Which parameter ranges guaranteeing that k-local and global Nash
    equilibria coincide contain ``(n, alpha, k)``.

    ``case`` is the first matching range.  For the range parameterised by
    ``eps`` the most favourable admissible value is used unless given.
    Logarithms are base 2.
    """
    alpha = parse_alpha(alpha)
    if n < 2:
        raise ValueError("need n >= 2")
    lg = math.log2(n)
    hits = []
    if alpha < 1 and k >= 2:
        hits.append(1)
    if 1 <= alpha and 2 * alpha * alpha <= n and k >= 6:
        hits.append(2)
    if 1 <= alpha and lg > 0:
        e = eps if eps is not None else 1 - math.log2(alpha) / lg
        if e >= 1 / lg and float(alpha) <= n ** (1 - e) * (1 + 1e-12) and e > 0:
            if k >= 4.667 * 3 ** math.ceil(1 / e) + 8:
                hits.append(3)
    if 1 <= alpha <= 12 * n * lg and k >= 2 * 5 ** (1 + math.sqrt(lg)) + 24 * lg + 3:
        hits.append(4)
    if alpha >= 12 * n * lg and k >= 2:
        hits.append(5)
    if not hits:
        return Regime(None, "no range applies", ())
    return Regime(hits[0], _LABELS[hits[0]], tuple(hits))


# --- grid check ---------------------------------------------------------------------


CLOSED_FORMS = {
    "h_dist": (h_dist, h_dist_oracle),
    "t_dist": (t_dist, t_dist_oracle),
    "tree_star_leaf_dist": (tree_star_leaf_dist, tree_star_leaf_dist_oracle),
    "after_buy_uz_dist": (after_buy_uz_dist, after_buy_uz_dist_oracle),
    "after_buy_uy_dist": (after_buy_uy_dist, after_buy_uy_dist_oracle),
}


def verify(name: str, *params) -> FormulaResult:
    closed, oracle = CLOSED_FORMS[name]
    return FormulaResult(name, params, closed(*params), oracle(*params))


def grid(depths=(2, 4, 6)):
    for d in depths:
        for l in sorted({1, 2 ** (d + 1), 3 ** d}):
            yield d, l


def check_all(depths=(2, 4, 6), with_delta: bool = True) -> list[FormulaResult]:
    """Closed form vs engine on the standard grid.  Delta rows compare the
    k in {2, 3} special cases (and, separately, the general expression)."""
    rows = []
    for d in depths:
        rows.append(verify("t_dist", d))
    for d, l in grid(depths):
        rows.append(verify("h_dist", d, l))
        for name in ("tree_star_leaf_dist", "after_buy_uz_dist", "after_buy_uy_dist"):
            rows.append(verify(name, d, l))
    if with_delta:
        for d, l in grid(depths):
            if l < 2 ** (d + 1):
                continue
            ts = tree_star(d, l)
            for k in (2, 3):
                if k > d:
                    continue
                oracle = delta_oracle(ts, k)
                rows.append(FormulaResult("delta_special", (d, k, l), delta_special(d, k, l), oracle))
                rows.append(FormulaResult("delta_general", (d, k, l), delta_general(d, k, l), oracle))
    return rows


def to_csv(rows: list[FormulaResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["formula", "params", "closed_form", "oracle", "match"])
    for r in rows:
        w.writerow([r.name, " ".join(map(str, r.params)), r.closed_form, r.oracle, int(r.match)])
    return buf.getvalue()
