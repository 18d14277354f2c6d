"""Labeled networks with edge ownership.

A network on agents ``0..n-1`` is stored as one bitmask per agent holding the
targets of the edges that agent owns.  Adjacency is derived from that.  Every
undirected pair appears at most once, so two-owner edges cannot be expressed.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections.abc import Iterable, Iterator
from functools import cached_property

import numpy as np

from .errors import InvalidNetwork

INFINITE = math.inf
"""Distance (and cost) of an unreachable agent.  Absorbing under addition."""

# Internal numpy sentinel for "unreachable"; never leaves this package as a distance.
UNREACHABLE = np.int32(1 << 30)


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bits_to_set(mask: int) -> frozenset[int]:
    return frozenset(iter_bits(mask))


def set_to_bits(items: Iterable[int]) -> int:
    mask = 0
    for x in items:
        mask |= 1 << x
    return mask


class Network:
    """Immutable undirected network whose edges each carry a unique owner."""

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 1:
            raise InvalidNetwork(f"need at least one agent, got n={n}")
        owned = [0] * n
        seen: set[tuple[int, int]] = set()
        for edge in edges:
            owner, other = (int(x) for x in edge)
            if not (0 <= owner < n and 0 <= other < n):
                raise InvalidNetwork(f"edge {edge} references an agent outside [0, {n})")
            if owner == other:
                raise InvalidNetwork(f"self-loop at agent {owner}")
            key = (min(owner, other), max(owner, other))
            if key in seen:
                raise InvalidNetwork(f"pair {key} listed twice")
            seen.add(key)
            owned[owner] |= 1 << other
        self.n = n
        self.owned: tuple[int, ...] = tuple(owned)

    @classmethod
    def from_masks(cls, owned: Iterable[int]) -> Network:
        """Build from per-agent ownership masks without re-validating pairs."""
        net = cls.__new__(cls)
        net.owned = tuple(owned)
        net.n = len(net.owned)
        return net

    @cached_property
    def adj(self) -> tuple[int, ...]:
        adj = list(self.owned)
        for u, mask in enumerate(self.owned):
            for v in iter_bits(mask):
                adj[v] |= 1 << u
        return tuple(adj)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Owner-first pairs, sorted."""
        return tuple((u, v) for u in range(self.n) for v in iter_bits(self.owned[u]))

    @property
    def num_edges(self) -> int:
        return sum(m.bit_count() for m in self.owned)

    def strategy(self, u: int) -> frozenset[int]:
        return bits_to_set(self.owned[u])

    def owner(self, u: int, v: int) -> int | None:
        if self.owned[u] >> v & 1:
            return u
        if self.owned[v] >> u & 1:
            return v
        return None

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def degree(self, u: int) -> int:
        return self.adj[u].bit_count()

    def with_strategy(self, u: int, targets_mask: int) -> Network:
        owned = list(self.owned)
        owned[u] = targets_mask
        return Network.from_masks(owned)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Network) and self.owned == other.owned

    def __hash__(self) -> int:
        return hash(self.owned)

    def __repr__(self) -> str:
        return f"Network(n={self.n}, edges={list(self.edges)})"

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> Network:
        try:
            n = data["n"]
            edges = data["edges"]
        except (KeyError, TypeError) as exc:
            raise InvalidNetwork(f"missing field: {exc}") from exc
        if not isinstance(n, int) or isinstance(n, bool):
            raise InvalidNetwork("'n' must be an integer")
        pairs = []
        for e in edges:
            if not isinstance(e, list) or len(e) != 2 or not all(
                isinstance(x, int) and not isinstance(x, bool) for x in e
            ):
                raise InvalidNetwork(f"malformed edge entry {e!r}")
            pairs.append((e[0], e[1]))
        return cls(n, pairs)

    @classmethod
    def from_json(cls, text: str) -> Network:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidNetwork(f"not JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dot(self, name: str = "ncg") -> str:
        lines = [f"digraph {name} {{"]
        lines += [f"  {v};" for v in range(self.n)]
        lines += [f"  {u} -> {v};" for u, v in self.edges]
        lines.append("}")
        return "\n".join(lines) + "\n"


# --- distances -----------------------------------------------------------


def bfs_layers(adj: tuple[int, ...] | list[int], source: int) -> list[int]:
    """Frontier bitmasks by distance from ``source``."""
    layers = []
    seen = frontier = 1 << source
    while frontier:
        layers.append(frontier)
        nxt = 0
        for v in iter_bits(frontier):
            nxt |= adj[v]
        frontier = nxt & ~seen
        seen |= frontier
    return layers


def shortest_paths(net: Network, source: int) -> dict[int, int | float]:
    """Hop distance from ``source`` to every agent; INFINITE when unreachable."""
    if not 0 <= source < net.n:
        raise IndexError(f"agent {source} out of range")
    dist: dict[int, int | float] = dict.fromkeys(range(net.n), INFINITE)
    for d, layer in enumerate(bfs_layers(net.adj, source)):
        for v in iter_bits(layer):
            dist[v] = d
    return dist


def k_neighborhood(net: Network, u: int, k: int) -> frozenset[int]:
    return bits_to_set(k_neighborhood_mask(net.adj, u, k))


def k_neighborhood_mask(adj, u: int, k: int) -> int:
    seen = frontier = 1 << u
    for _ in range(k):
        nxt = 0
        for v in iter_bits(frontier):
            nxt |= adj[v]
        frontier = nxt & ~seen
        if not frontier:
            break
        seen |= frontier
    return seen


def eccentricity(net: Network, u: int) -> int | float:
    layers = bfs_layers(net.adj, u)
    if sum(layer.bit_count() for layer in layers) < net.n:
        return INFINITE
    return len(layers) - 1


def diameter(net: Network) -> int | float:
    return max(eccentricity(net, u) for u in range(net.n))


def is_connected(net: Network) -> bool:
    return sum(layer.bit_count() for layer in bfs_layers(net.adj, 0)) == net.n


def canonical_hash(net: Network) -> str:
    """SHA-256 over ``n`` and the sorted owner-annotated edge list."""
    body = f"{net.n}|" + ";".join(f"{u}>{v}" for u, v in net.edges)
    return hashlib.sha256(body.encode("ascii")).hexdigest()


# --- distance matrices (internal, numpy) ---------------------------------

_SCIPY_THRESHOLD = 48


def distance_rows(adj, sources: Iterable[int], n: int, removed: int | None = None) -> np.ndarray:
    """Distances from each source, as int32 rows with UNREACHABLE for no path.

    With ``removed`` set, that agent is deleted from the graph first (its row
    and column hold UNREACHABLE).
    """
    sources = list(sources)
    if n > _SCIPY_THRESHOLD:
        return _distance_rows_scipy(adj, sources, n, removed)
    out = np.full((len(sources), n), UNREACHABLE, dtype=np.int32)
    if removed is not None:
        keep = ~(1 << removed)
        adj = [a & keep if v != removed else 0 for v, a in enumerate(adj)]
    for i, s in enumerate(sources):
        if s == removed:
            continue
        row = out[i]
        for d, layer in enumerate(bfs_layers(adj, s)):
            for v in iter_bits(layer):
                row[v] = d
    return out


def _distance_rows_scipy(adj, sources, n, removed):
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import shortest_path

    rows, cols = [], []
    for v, mask in enumerate(adj):
        if v == removed:
            continue
        for w in iter_bits(mask):
            if w != removed:
                rows.append(v)
                cols.append(w)
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    out = np.full((len(sources), n), UNREACHABLE, dtype=np.int32)
    live = [i for i, s in enumerate(sources) if s != removed]
    chunk = max(1, 4_000_000 // n)
    for start in range(0, len(live), chunk):
        idx = live[start:start + chunk]
        d = shortest_path(graph, directed=False, unweighted=True,
                          indices=[sources[i] for i in idx])
        d = np.atleast_2d(d)
        finite = np.isfinite(d)
        block = np.where(finite, d, 0).astype(np.int32)
        block[~finite] = UNREACHABLE
        out[idx] = block
    if removed is not None:
        out[:, removed] = UNREACHABLE
    return out
