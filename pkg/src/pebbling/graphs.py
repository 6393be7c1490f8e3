"""Simple undirected graphs, metric queries and the generators used for pebbling.

Vertices are the dense integers ``0..n-1``; labels are decorative only.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

INF = math.inf


class GraphError(ValueError):
    """Raised when a graph violates a precondition (e.g. connectivity)."""


class Graph:
    """Immutable simple undirected graph on vertices ``0..n-1``."""

    __slots__ = ("n", "adj", "labels", "__dict__")

    def __init__(
        self,
        n: int,
        edges: Iterable[tuple[int, int]] = (),
        labels: Sequence[str] | None = None,
    ) -> None:
        if n < 0:
            raise GraphError("vertex count must be nonnegative")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self-loop at {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        self.n = n
        self.adj: tuple[frozenset[int], ...] = tuple(frozenset(s) for s in nbrs)
        if labels is not None and len(labels) != n:
            raise GraphError("label count does not match vertex count")
        self.labels = tuple(labels) if labels is not None else None

    # -- basic structure -------------------------------------------------

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self) -> int:
        return hash((self.n, self.adj))

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edges as ``(u, v)`` with ``u < v`` in lexicographic order."""
        return tuple((u, v) for u in range(self.n) for v in sorted(self.adj[u]) if u < v)

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @cached_property
    def min_degree(self) -> int:
        return min((len(a) for a in self.adj), default=0)

    def closed_nbhd(self, v: int) -> frozenset[int]:
        return self.adj[v] | {v}

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)

    # -- metric ------------------------------------------------------------

    def bfs(self, source: int) -> list[float]:
        dist: list[float] = [INF] * self.n
        dist[source] = 0
        queue = deque([source])
        while queue:
            x = queue.popleft()
            dx = dist[x] + 1
            for y in self.adj[x]:
                if dist[y] == INF:
                    dist[y] = dx
                    queue.append(y)
        return dist

    @cached_property
    def dist(self) -> tuple[tuple[float, ...], ...]:
        """All-pairs shortest-path table; ``INF`` marks disconnected pairs."""
        return tuple(tuple(self.bfs(s)) for s in range(self.n))

    @cached_property
    def is_connected(self) -> bool:
        return self.n > 0 and all(d != INF for d in self.dist[0])

    def require_connected(self) -> None:
        if not self.is_connected:
            raise GraphError("graph must be connected")

    def induced(self, vertices: Iterable[int]) -> tuple[Graph, list[int]]:
        """Induced subgraph; returns it with the list mapping new ids to old ids."""
        old = sorted(set(vertices))
        index = {v: i for i, v in enumerate(old)}
        edges = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        labels = [self.label(v) for v in old] if self.labels is not None else None
        return Graph(len(old), edges, labels), old

    def remove_vertex(self, v: int) -> Graph:
        return self.induced(x for x in range(self.n) if x != v)[0]


# -- metric helpers ---------------------------------------------------------


def distance(g: Graph, u: int, v: int) -> float:
    return g.dist[u][v]


def diameter(g: Graph) -> int:
    g.require_connected()
    return int(max((max(row) for row in g.dist), default=0))


def girth(g: Graph) -> float:
    """Length of a shortest cycle, ``INF`` for forests."""
    best = INF
    for s in range(g.n):
        dist = {s: 0}
        parent = {s: -1}
        queue = deque([s])
        while queue:
            x = queue.popleft()
            if 2 * dist[x] + 1 >= best:
                break
            for y in g.adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
                elif parent[x] != y:
                    best = min(best, dist[x] + dist[y] + 1)
    return best


def k_neighborhood(g: Graph, s: Iterable[int], k: int, closed: bool = True) -> frozenset[int]:
    """``N^k[s]`` (closed) or ``N^k(s)`` (vertices at distance exactly ``k``)."""
    s = frozenset(s)
    if not s:
        raise GraphError("vertex set must be nonempty")
    if k < 0:
        raise GraphError("k must be nonnegative")
    near = {v: min(g.dist[x][v] for x in s) for v in range(g.n)}
    if closed:
        return frozenset(v for v, d in near.items() if d <= k)
    return frozenset(v for v, d in near.items() if d == k)


def dominates(g: Graph, s: Iterable[int]) -> bool:
    covered: set[int] = set()
    for v in s:
        covered |= g.closed_nbhd(v)
    return len(covered) == g.n


def has_dominating_edge(g: Graph) -> tuple[bool, tuple[int, int] | None]:
    for u, v in g.edges:
        if len(g.closed_nbhd(u) | g.closed_nbhd(v)) == g.n:
            return True, (u, v)
    return False, None


# -- special graphs ----------------------------------------------------------


class SpecialFailure(str, Enum):
    DIAMETER = "diameter!=2"
    DOMINATING_EDGE = "dominating edge exists"
    NO_PAIR = "no valid pair"


@dataclass(frozen=True)
class SpecialReport:
    is_special: bool
    witness_pair: tuple[int, int] | None = None
    failure_reason: SpecialFailure | None = None


def is_special_pair(g: Graph, u: int, v: int) -> bool:
    if g.dist[u][v] != 2:
        return False
    if has_dominating_edge(g.remove_vertex(u))[0] or has_dominating_edge(g.remove_vertex(v))[0]:
        return False
    return dominates(g, (g.adj[u] & g.adj[v]) | {u, v})


def is_special(g: Graph) -> SpecialReport:
    """Check the special-graph definition; the witness is the least valid pair."""
    g.require_connected()
    if g.n < 2 or diameter(g) != 2:
        return SpecialReport(False, failure_reason=SpecialFailure.DIAMETER)
    if has_dominating_edge(g)[0]:
        return SpecialReport(False, failure_reason=SpecialFailure.DOMINATING_EDGE)
    for u, v in combinations(range(g.n), 2):
        if is_special_pair(g, u, v):
            return SpecialReport(True, witness_pair=(u, v))
    return SpecialReport(False, failure_reason=SpecialFailure.NO_PAIR)


# -- generators -------------------------------------------------------------


def complete_graph(m: int) -> Graph:
    if m < 1:
        raise GraphError("m must be positive")
    return Graph(m, combinations(range(m), 2))


def path_graph(n: int) -> Graph:
    if n < 1:
        raise GraphError("n must be positive")
    return Graph(n, ((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("a cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> Graph:
    """``K_{1,leaves}`` with the center at vertex 0."""
    return Graph(leaves + 1, ((0, i) for i in range(1, leaves + 1)))


def wheel_graph(rim: int) -> Graph:
    """Hub 0 joined to a rim cycle on ``1..rim``."""
    if rim < 3:
        raise GraphError("rim must have at least 3 vertices")
    edges = [(0, i) for i in range(1, rim + 1)]
    edges += [(i, i % rim + 1) for i in range(1, rim + 1)]
    return Graph(rim + 1, edges)


def cartesian_product(g: Graph, h: Graph) -> Graph:
    """``g □ h``; vertex ``(a, b)`` gets id ``a * h.n + b``."""
    if g.n == 0 or h.n == 0:
        raise GraphError("factors must be nonempty")
    edges = []
    for a in range(g.n):
        for b, b2 in h.edges:
            edges.append((a * h.n + b, a * h.n + b2))
    for a, a2 in g.edges:
        for b in range(h.n):
            edges.append((a * h.n + b, a2 * h.n + b))
    labels = [f"({g.label(a)},{h.label(b)})" for a in range(g.n) for b in range(h.n)]
    return Graph(g.n * h.n, edges, labels)


def complement(g: Graph) -> Graph:
    edges = [(u, v) for u, v in combinations(range(g.n), 2) if v not in g.adj[u]]
    return Graph(g.n, edges, g.labels)


def complement_km_km(m: int) -> Graph:
    """Complement of ``K_m □ K_m``: two cells adjacent iff both coordinates differ."""
    return complement(cartesian_product(complete_graph(m), complete_graph(m)))


def circulant_special(m: int) -> Graph:
    """Circulant on ``2m`` vertices; ``i ~ j`` unless ``i - j`` is ``m`` or ``m +- 1`` mod ``2m``."""
    if m < 5:
        raise GraphError("circulant_special requires m >= 5")
    n = 2 * m
    excluded = {m % n, (m - 1) % n, (m + 1) % n}
    edges = [(i, j) for i, j in combinations(range(n), 2) if (i - j) % n not in excluded]
    return Graph(n, edges, [str(i + 1) for i in range(n)])


def circulant_graph(n: int, jumps: Iterable[int]) -> Graph:
    """``i ~ j`` iff ``i - j`` is congruent to some jump, up to sign, mod ``n``."""
    if n < 1:
        raise GraphError("n must be positive")
    js = set()
    for j in jumps:
        if j % n == 0:
            raise GraphError("a jump of 0 mod n would be a loop")
        js |= {j % n, -j % n}
    return Graph(n, [(i, k) for i, k in combinations(range(n), 2) if (k - i) % n in js])


def small_special() -> Graph:
    """A six-vertex special graph: the 5-cycle 0-1-2-3-4 with a vertex 5 joined to 0 and 3."""
    return Graph(6, [(0, 1), (0, 4), (0, 5), (1, 2), (2, 3), (3, 4), (3, 5)])


# -- block chains --------------------------------------------------------------


class ChainVariant(str, Enum):
    PLAIN = "plain"
    MINUS = "minus"
    PLUS = "plus"


@dataclass(frozen=True)
class ChainSpec:
    """Special blocks ``H_1..H_l`` joined by the edges ``v_i -- u_{i+1}``.

    ``pairs[i]`` is the special pair of block ``i`` in that block's own ids.
    ``None`` pairs are filled with the least witness by :func:`make_chain_spec`.
    """

    blocks: tuple[Graph, ...]
    pairs: tuple[tuple[int, int], ...]
    variant: ChainVariant = ChainVariant.PLAIN
    names: tuple[str, ...] = field(default=(), compare=False)

    @property
    def length(self) -> int:
        return len(self.blocks)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for b in self.blocks:
            out.append(acc)
            acc += b.n
        return tuple(out)

    def u(self, i: int) -> int:
        """Chain id of ``u_i`` (1-based block index) in the plain chain."""
        return self.offsets[i - 1] + self.pairs[i - 1][0]

    def v(self, i: int) -> int:
        return self.offsets[i - 1] + self.pairs[i - 1][1]

    def block_of(self, x: int) -> int:
        """1-based index of the block containing plain-chain vertex ``x``."""
        for i in range(self.length, 0, -1):
            if x >= self.offsets[i - 1]:
                return i
        raise GraphError(f"vertex {x} outside chain")

    def with_variant(self, variant: ChainVariant | str) -> ChainSpec:
        return ChainSpec(self.blocks, self.pairs, ChainVariant(variant), self.names)


def make_chain_spec(
    blocks: Sequence[Graph],
    pairs: Sequence[tuple[int, int] | None] | None = None,
    variant: ChainVariant | str = ChainVariant.PLAIN,
) -> ChainSpec:
    if not blocks:
        raise GraphError("a chain needs at least one block")
    pairs = list(pairs) if pairs is not None else [None] * len(blocks)
    if len(pairs) != len(blocks):
        raise GraphError("one special pair per block is required")
    filled = []
    for i, (b, p) in enumerate(zip(blocks, pairs), start=1):
        if p is None:
            rep = is_special(b)
            if not rep.is_special:
                raise GraphError(f"block {i} is not special: {rep.failure_reason.value}")
            p = rep.witness_pair
        filled.append(tuple(p))
    return ChainSpec(tuple(blocks), tuple(filled), ChainVariant(variant))


def homogeneous_chain(block: Graph, length: int, variant: ChainVariant | str = "plain") -> ChainSpec:
    if length < 1:
        raise GraphError("chain length must be positive")
    return make_chain_spec([block] * length, None, variant)


def _validate_chain(spec: ChainSpec) -> None:
    cache: dict[int, SpecialReport] = {}
    for i, (b, (u, v)) in enumerate(zip(spec.blocks, spec.pairs), start=1):
        if id(b) not in cache:
            cache[id(b)] = is_special(b)
        if not cache[id(b)].is_special:
            raise GraphError(f"block {i} is not special: {cache[id(b)].failure_reason.value}")
        if not (0 <= u < b.n and 0 <= v < b.n) or not is_special_pair(b, u, v):
            raise GraphError(f"block {i}: ({u}, {v}) is not a special pair")


def plain_chain_edges(spec: ChainSpec) -> list[tuple[int, int]]:
    edges = []
    for off, b in zip(spec.offsets, spec.blocks):
        edges.extend((off + x, off + y) for x, y in b.edges)
    for i in range(1, spec.length):
        edges.append((spec.v(i), spec.u(i + 1)))
    return edges


def build_chain(spec: ChainSpec, validate: bool = True) -> Graph:
    """Realise ``G_l``, ``G_l^-`` or ``G_l^+``.

    Plain-chain ids are kept for every variant: the minus variant drops
    ``v_l`` and renumbers the later ids down by one; the plus variant
    appends the leaf as the last vertex.
    """
    if validate:
        _validate_chain(spec)
    n = sum(b.n for b in spec.blocks)
    edges = plain_chain_edges(spec)
    labels = [f"B{spec.block_of(x)}:{spec.blocks[spec.block_of(x) - 1].label(x - spec.offsets[spec.block_of(x) - 1])}"
              for x in range(n)]
    g = Graph(n, edges, labels)
    if spec.variant is ChainVariant.MINUS:
        return g.remove_vertex(spec.v(spec.length))
    if spec.variant is ChainVariant.PLUS:
        return Graph(n + 1, edges + [(spec.u(1), n)], labels + ["leaf"])
    return g


# -- quotients --------------------------------------------------------------


@dataclass(frozen=True)
class QuotientMap:
    source: Graph
    target: Graph
    phi: tuple[int, ...]

    def collapse(self, counts: Sequence[int]) -> list[int]:
        out = [0] * self.target.n
        for g, c in enumerate(counts):
            out[self.phi[g]] += c
        return out

    def preimage(self, h: int) -> list[int]:
        return [g for g, x in enumerate(self.phi) if x == h]


def is_quotient(source: Graph, target: Graph, phi: Sequence[int]) -> bool:
    """Surjectivity plus the edge condition, checked in both directions."""
    if len(phi) != source.n or set(phi) != set(range(target.n)):
        return False
    image = set()
    for a, b in source.edges:
        x, y = phi[a], phi[b]
        if x == y:
            continue  # edge collapsed into one target vertex
        if not target.has_edge(x, y):
            return False
        image.add((min(x, y), max(x, y)))
    return image == set(target.edges)


def collapse_chain(spec: ChainSpec) -> QuotientMap:
    """Collapse a plain chain onto ``P_{3l}``: ``u_i -> p_{3i-2}``, interior ``-> p_{3i-1}``, ``v_i -> p_{3i}``."""
    if spec.variant is not ChainVariant.PLAIN:
        raise GraphError("only plain chains collapse onto a path")
    source = build_chain(spec, validate=False)
    phi = []
    for x in range(source.n):
        i = spec.block_of(x)
        if x == spec.u(i):
            phi.append(3 * i - 3)
        elif x == spec.v(i):
            phi.append(3 * i - 1)
        else:
            phi.append(3 * i - 2)
    target = path_graph(3 * spec.length)
    if not is_quotient(source, target, phi):
        raise GraphError("chain does not collapse onto the path")
    return QuotientMap(source, target, tuple(phi))


# -- text format -------------------------------------------------------------


def parse_graph(text: str) -> Graph:
    """Parse ``n m`` then ``m`` lines ``u v``; ``#`` starts a comment."""
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise GraphError("empty graph description")
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
        edges = [(int(r[0]), int(r[1])) for r in rows[1:]]
    except (ValueError, IndexError) as exc:
        raise GraphError(f"malformed graph text: {exc}") from None
    if len(edges) != m:
        raise GraphError(f"header declares {m} edges, found {len(edges)}")
    g = Graph(n, edges)
    if g.m != m:
        raise GraphError("duplicate edges in graph text")
    return g


def format_graph(g: Graph) -> str:
    return "\n".join([f"{g.n} {g.m}"] + [f"{u} {v}" for u, v in g.edges]) + "\n"
