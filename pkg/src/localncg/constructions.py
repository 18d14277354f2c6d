"""Generators for the named network families.

Ownership is fixed deterministically: wherever a family leaves it open, the
lower index owns the edge.  Complete binary trees use heap numbering (root 0,
children of ``i`` at ``2i+1`` and ``2i+2``) and parents own child edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .cost import GameConfig, Mode
from .graph import Network


def line(n: int) -> Network:
    _need(n >= 2, "line needs n >= 2")
    return Network(n, [(i, i + 1) for i in range(n - 1)])


def star(n: int) -> Network:
    """Spanning star, center 0 owning every edge."""
    _need(n >= 2, "star needs n >= 2")
    return Network(n, [(0, i) for i in range(1, n)])


def clique(n: int) -> Network:
    _need(n >= 2, "clique needs n >= 2")
    return Network(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def balanced_clique(n: int) -> Network:
    """Complete network where each agent owns about half its edges.

    Agent ``i`` owns the edges to ``i+1 .. i+floor((n-1)/2)`` (mod n); for even
    ``n`` the antipodal edge goes to the lower index.
    """
    _need(n >= 2, "clique needs n >= 2")
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            gap = (v - u) % n
            if 2 * gap < n or (2 * gap == n):
                edges.append((u, v))
            else:
                edges.append((v, u))
    return Network(n, edges)


def directed_cycle(n: int) -> Network:
    """Cycle in which agent ``i`` owns the edge to ``i+1 mod n``."""
    _need(n >= 3, "cycle needs n >= 3")
    return Network(n, [(i, (i + 1) % n) for i in range(n)])


def _binary_tree_edges(depth: int, offset: int = 0) -> list[tuple[int, int]]:
    size = 2 ** (depth + 1) - 1
    return [(offset + (c - 1) // 2, offset + c) for c in range(1, size)]


def complete_binary_tree(d: int) -> Network:
    _need(d >= 1, "depth must be >= 1")
    return Network(2 ** (d + 1) - 1, _binary_tree_edges(d))


class HTree(NamedTuple):
    network: Network
    u: int
    v: int
    root: int


def h_tree(d: int, l: int) -> HTree:
    """Depth-``d`` tree whose root is owned-linked from ``v``, with ``v`` at the
    end of an ``l``-edge path starting at ``u = 0``."""
    _need(d >= 0 and l >= 0, "need d >= 0 and l >= 0")
    path = [(i, i + 1) for i in range(l)]
    v, root = l, l + 1
    tree = _binary_tree_edges(d, offset=root)
    n = root + 2 ** (d + 1) - 1
    return HTree(Network(n, path + [(v, root)] + tree), 0, v, root)


@dataclass(frozen=True)
class TreeStar:
    network: Network
    d: int
    l: int
    root: int
    bridge: int          # agent y
    center: int          # star center z

    @property
    def leaf(self) -> int:
        """Leftmost leaf of the binary tree."""
        return 2 ** self.d - 1

    @property
    def tree_size(self) -> int:
        return 2 ** (self.d + 1) - 1

    @property
    def star_leaves(self) -> range:
        return range(self.center + 1, self.center + 1 + self.l)

    def path_to_center(self, v: int) -> list[int]:
        """Agents from ``v`` (a tree agent) up to the root, then y and z."""
        path = [v]
        while path[-1] != self.root:
            path.append((path[-1] - 1) // 2)
        return path + [self.bridge, self.center]


def tree_star(d: int, l: int) -> TreeStar:
    """Binary tree of depth ``d`` joined by a bridge agent to an ``l``-leaf star.

    The bridge owns its edges to the tree root and to the star center; the
    center owns all star edges.  Agents: tree ``0..2^{d+1}-2``, then bridge,
    center and star leaves.
    """
    _need(d >= 1 and l >= 1, "need d >= 1 and l >= 1")
    t = 2 ** (d + 1) - 1
    y, z = t, t + 1
    edges = _binary_tree_edges(d) + [(y, 0), (y, z)]
    edges += [(z, z + 1 + i) for i in range(l)]
    return TreeStar(Network(t + 2 + l, edges), d, l, 0, y, z)


class Reduction(NamedTuple):
    network: Network
    hub: int
    alpha: Fraction


def ds_reduction(g) -> Reduction:
    """Dominating-set instance as a network with a hub agent owning an edge to
    every vertex.  ``g`` is ``(n, edges)`` or anything with ``nodes``/``edges``
    (e.g. a networkx graph on ``0..n-1``)."""
    if isinstance(g, tuple):
        n, pairs = g
    else:
        n, pairs = g.number_of_nodes(), list(g.edges())
    edges = [(min(a, b), max(a, b)) for a, b in pairs]
    edges += [(n, v) for v in range(n)]
    return Reduction(Network(n + 1, edges), n, Fraction(3, 2))


def kne_tree_instance(d: int, k: int) -> tuple[Network, GameConfig]:
    """Complete binary tree with an edge price high enough for k-local stability."""
    _need(2 <= k <= d, "need 2 <= k <= d")
    net = complete_binary_tree(d)
    return net, GameConfig(Fraction((k - 1) * net.n), k, Mode.SUM)


def _need(ok: bool, msg: str):
    if not ok:
        raise ValueError(msg)


class GkInstance(NamedTuple):
    network: Network
    u: int
    alpha: Fraction | None      # price at which u is k-local greedy stable but not (k+1), if found
    cycle_length: int


def _cycle_with_pendants(length: int, pb: int, pd: int, orient: int, pend_out: bool) -> tuple[Network, int]:
    """Cycle ``0..length-1`` (agent 0 plays ``a``), ``u`` pendant at 0 owning its
    edge, and two more pendants at cycle positions ``pb`` and ``pd``."""
    u, bp, dp = length, length + 1, length + 2
    edges = []
    for i in range(length):
        j = (i + 1) % length
        clockwise = orient == 0 or (orient == 2 and i % 2 == 0)
        edges.append((i, j) if clockwise else (j, i))
    edges.append((u, 0))
    for pos, p in ((pb, bp), (pd, dp)):
        edges.append((pos, p) if pend_out else (p, pos))
    return Network(length + 3, edges), u


def _swap_certificate(net: Network, u: int, k: int) -> bool:
    from .cost import Mode, distance_cost
    from .moves import swap_distance_costs

    cur = distance_cost(net, u, Mode.SUM)
    near = swap_distance_costs(net, Mode.SUM, u, k)
    far = swap_distance_costs(net, Mode.SUM, u, k + 1)
    return all(d >= cur for _, d in near) and any(d < cur for _, d in far)


def gk_nontree(k: int, max_extra_length: int = 4, find_alpha: bool = True) -> GkInstance:
    """Non-tree network where agent ``u`` cannot gain by any k-local swap but
    gains by a (k+1)-local one.

    Searched over cycle length (from ``4k-2`` up), pendant positions and edge
    orientation; the first layout passing the swap certificate is returned.  With
    ``find_alpha`` the search also looks for the smallest half-integer edge price
    at which ``u`` has no improving k-local greedy move (buys and deletions
    included) but has an improving (k+1)-local one.
    """
    from .cost import GameConfig
    from .equilibrium import Scope, agent_approx_factor
    from .errors import ConstructionSearchFailed

    if k < 2:
        raise ValueError("need k >= 2")
    fallback = None
    for length in range(4 * k - 2, 4 * k - 1 + max_extra_length):
        # symmetric placement first: one pendant k steps along the cycle, the other mirrored
        positions = [(k, length - k)] + [(pb, pd) for pb in range(1, length) for pd in range(1, length)
                                         if pb != pd and (pb, pd) != (k, length - k)]
        for pb, pd in positions:
            for orient in (0, 1, 2):
                for pend_out in (True, False):
                    net, u = _cycle_with_pendants(length, pb, pd, orient, pend_out)
                    if not _swap_certificate(net, u, k):
                        continue
                    if not find_alpha:
                        return GkInstance(net, u, None, length)
                    for m in range(1, 8 * length + 1):
                        alpha = Fraction(m, 2)
                        near = agent_approx_factor(net, GameConfig(alpha, k), u, Scope.LOCAL_GREEDY)
                        far = agent_approx_factor(net, GameConfig(alpha, k + 1), u, Scope.LOCAL_GREEDY)
                        if near == 1 and far > 1:
                            return GkInstance(net, u, alpha, length)
                    if fallback is None:
                        fallback = GkInstance(net, u, None, length)
    if fallback is not None:
        return fallback
    raise ConstructionSearchFailed(f"no certified instance for k={k}")
