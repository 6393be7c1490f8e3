"""Pebbling moves, exact k-reachability / k-solvability and the T/H/U classification."""

from __future__ import annotations

import sys
from collections import deque
from graphlib import TopologicalSorter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .graphs import Graph, GraphError

MAX_K = 15
# states a single depth-first search may visit before the integer program takes over
DFS_STATE_LIMIT = 20_000

Move = tuple[int, int]


class PebblingError(ValueError):
    """Illegal move, malformed distribution or violated precondition."""


class Distribution(Mapping[int, int]):
    """Pebble counts on the vertices of one graph.

    Behaves as a read-only mapping ``vertex -> count`` over the support;
    missing vertices hold zero pebbles.
    """

    __slots__ = ("graph", "counts")

    def __init__(self, graph: Graph, counts: Mapping[int, int] | Sequence[int] | None = None) -> None:
        self.graph = graph
        if counts is None:
            dense = [0] * graph.n
        elif isinstance(counts, Mapping):
            dense = [0] * graph.n
            for v, c in counts.items():
                if not 0 <= v < graph.n:
                    raise PebblingError(f"vertex {v} not in graph")
                dense[v] += int(c)
        else:
            dense = [int(c) for c in counts]
            if len(dense) != graph.n:
                raise PebblingError("count vector length must equal the vertex count")
        if any(c < 0 for c in dense):
            raise PebblingError("pebble counts must be nonnegative")
        self.counts: tuple[int, ...] = tuple(dense)

    def __getitem__(self, v: int) -> int:
        if not 0 <= v < self.graph.n:
            raise KeyError(v)
        return self.counts[v]

    def __iter__(self) -> Iterator[int]:
        return (v for v, c in enumerate(self.counts) if c)

    def __len__(self) -> int:
        return sum(1 for c in self.counts if c)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Distribution):
            return self.graph == other.graph and self.counts == other.counts
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.counts)

    def __repr__(self) -> str:
        return f"Distribution({dict(self.items())})"

    @property
    def size(self) -> int:
        return sum(self.counts)

    def subset_sum(self, vertices: Iterable[int]) -> int:
        return sum(self.counts[v] for v in set(vertices))

    def check_graph(self, g: Graph) -> None:
        if self.graph is not g and self.graph != g:
            raise PebblingError("distribution belongs to a different graph")

    def __add__(self, other: Distribution) -> Distribution:
        other.check_graph(self.graph)
        return Distribution(self.graph, [a + b for a, b in zip(self.counts, other.counts)])

    def plus(self, extra: Mapping[int, int]) -> Distribution:
        dense = list(self.counts)
        for v, c in extra.items():
            dense[v] += c
        return Distribution(self.graph, dense)

    def dominates(self, other: Distribution) -> bool:
        """Pointwise ``self >= other``."""
        return all(a >= b for a, b in zip(self.counts, other.counts))


def apply_move(d: Distribution, source: int, target: int) -> Distribution:
    g = d.graph
    if not g.has_edge(source, target):
        raise PebblingError(f"{source} and {target} are not adjacent")
    if d.counts[source] < 2:
        raise PebblingError(f"vertex {source} holds {d.counts[source]} < 2 pebbles")
    dense = list(d.counts)
    dense[source] -= 2
    dense[target] += 1
    return Distribution(g, dense)


def replay(d: Distribution, moves: Iterable[Move]) -> Distribution:
    for a, b in moves:
        d = apply_move(d, a, b)
    return d


# -- search core ---------------------------------------------------------------


class _TooLarge(Exception):
    pass


def _flow_moves(g: Graph, state: Sequence[int], target: int, k: int) -> list[Move] | None:
    """Exact k-reachability as an integer program over move counts.

    A move multiset with ``d(v) + in(v) - 2 out(v) >= 0`` everywhere (and
    ``>= k`` at the target) is realisable once its directed cycles are
    cancelled, which only raises every balance; the acyclic remainder is
    executed in topological order.  Conversely every legal sequence yields
    such a multiset, so feasibility is equivalent to reachability.
    """
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import lil_matrix

    arcs = [(v, x) for v in range(g.n) for x in sorted(g.adj[v])]
    if not arcs:
        return [] if state[target] >= k else None
    a = lil_matrix((g.n, len(arcs)))
    for i, (v, x) in enumerate(arcs):
        a[v, i] -= 2
        a[x, i] += 1
    lower = np.array([-c for c in state], dtype=float)
    lower[target] += k
    total = sum(state)
    res = milp(np.ones(len(arcs)), constraints=LinearConstraint(a.tocsr(), lower, np.inf),
               integrality=np.ones(len(arcs)), bounds=Bounds(0, total))
    if res.status == 2:  # infeasible
        return None
    if res.x is None:
        raise PebblingError(f"integer program failed: {res.message}")
    flow = {arc: int(round(x)) for arc, x in zip(arcs, res.x) if round(x) > 0}
    _cancel_cycles(flow)
    ts = TopologicalSorter({v: set() for v in range(g.n)})
    for v, x in flow:
        ts.add(x, v)
    moves: list[Move] = []
    cur = list(state)
    for v in ts.static_order():
        for (a_, x), f in sorted(flow.items()):
            if a_ == v:
                moves.extend([(v, x)] * f)
                cur[v] -= 2 * f
                cur[x] += f
        if cur[v] < 0:
            raise PebblingError("integer program returned an unrealisable flow")
    if cur[target] < k:
        raise PebblingError("integer program returned a flow short of the target")
    return moves


def _cancel_cycles(flow: dict[Move, int]) -> None:
    while True:
        out: dict[int, list[int]] = {}
        for v, x in flow:
            out.setdefault(v, []).append(x)
        cycle = _find_cycle(out)
        if cycle is None:
            return
        arcs = list(zip(cycle, cycle[1:] + cycle[:1]))
        m = min(flow[a] for a in arcs)
        for a in arcs:
            flow[a] -= m
            if not flow[a]:
                del flow[a]


def _find_cycle(out: dict[int, list[int]]) -> list[int] | None:
    color: dict[int, int] = {}
    for root in out:
        if root in color:
            continue
        stack = [(root, iter(out.get(root, ())))]
        trail = [root]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            for x in it:
                if color.get(x) == 1:
                    return trail[trail.index(x):]
                if x not in color:
                    color[x] = 1
                    trail.append(x)
                    stack.append((x, iter(out.get(x, ()))))
                    break
            else:
                color[v] = 2
                trail.pop()
                stack.pop()
    return None


class _Reacher:
    """Depth-first search over distribution states toward one target.

    Every visited state is remembered; since the search stops at the first
    success, every remembered state is a failure for ``(target, k)``.
    The weight ``sum d(u) 2^-dist(u,t)`` never increases under a move, so
    states whose weight drops below ``k`` are cut immediately.

    Before searching, piles that can never interact with the target's
    neighbourhood are dropped: ``P`` pebbles starting on a set ``S`` never
    leave the ball of radius ``floor(log2 P)`` around ``S`` (the potential
    ``sum d(v) 2^dist(v,S)`` does not grow), so groups whose balls are
    disjoint and non-adjacent evolve independently.
    """

    def __init__(self, g: Graph, target: int, k: int, dominance: bool = False,
                 support_sink: set[int] | None = None) -> None:
        self.adj = [sorted(a, key=lambda w, t=target: g.dist[w][t]) for a in g.adj]
        dt = g.dist[target]
        self.top = int(max(dt))
        self.unit = [1 << (self.top - int(x)) for x in dt]
        self.dt = dt
        self.dist = g.dist
        self.target = target
        self.k = k
        self.need = k << self.top
        self.seen: set[tuple[int, ...]] = set()
        self.failed: list[tuple[int, ...]] = []
        self.dominance = dominance
        self.sink = support_sink
        self.graph = g
        self.limit = DFS_STATE_LIMIT
        self.order = sorted(range(g.n), key=lambda v: dt[v])
        self.deep_first = [v for v in reversed(self.order) if v != target]
        self.closer = [[y for y in self.adj[v] if dt[y] < dt[v]] for v in range(g.n)]

    def weight(self, state: Sequence[int]) -> int:
        return sum(c * u for c, u in zip(state, self.unit))

    def quick_accept(self, state: Sequence[int]) -> bool:
        k, unit, top = self.k, self.unit, self.top
        for v, c in enumerate(state):
            if c and c * unit[v] >= k << top:
                return True
        return False

    def isolate(self, state: tuple[int, ...]) -> tuple[int, ...] | None:
        """The pebbles of the one independent group whose ball holds the target."""
        dist = self.dist
        groups = [([v], c) for v, c in enumerate(state) if c]
        merged = True
        while merged:
            merged = False
            for i in range(len(groups)):
                si, pi = groups[i]
                ri = pi.bit_length() - 1
                for j in range(i + 1, len(groups)):
                    sj, pj = groups[j]
                    reach = ri + pj.bit_length()
                    if any(dist[a][b] <= reach for a in si for b in sj):
                        groups[i] = (si + sj, pi + pj)
                        del groups[j]
                        merged = True
                        break
                if merged:
                    break
        for vs, p in groups:
            if any(self.dt[v] < p.bit_length() for v in vs):
                if len(groups) == 1:
                    return state
                out = [0] * len(state)
                for v in vs:
                    out[v] = state[v]
                return tuple(out)
        return None

    def run(self, state: tuple[int, ...]) -> list[Move] | None:
        if state[self.target] >= self.k or self.quick_accept(state):
            return self._direct(state)
        state = self.isolate(state)
        if state is None:
            return None
        w = self.weight(state)
        if w < self.need:
            return None
        path: list[Move] = []
        try:
            return path if self._dfs(state, w, path) else None
        except _TooLarge:
            return _flow_moves(self.graph, state, self.target, self.k)

    def _greedy(self, state: Sequence[int]) -> list[Move] | None:
        """Push every pile one step closer, deepest first; a cheap sufficient test."""
        cur = list(state)
        moves: list[Move] = []
        for v in self.deep_first:
            c = cur[v]
            if c < 2:
                continue
            # prefer a parent with an odd pile so the arriving pebble pairs up
            p = max(self.closer[v], key=lambda y: (cur[y] & 1, cur[y]))
            s = c >> 1
            cur[v] = c - 2 * s
            cur[p] += s
            moves.extend([(v, p)] * s)
        return moves if cur[self.target] >= self.k else None

    def _direct(self, state: Sequence[int]) -> list[Move]:
        """Moves along a shortest path from a pile that is large enough alone."""
        t = self.target
        if state[t] >= self.k:
            return []
        for v in self.order:
            if state[v] * self.unit[v] >= self.k << self.top:
                break
        moves: list[Move] = []
        need = self.k
        hops = []
        x = v
        while x != t:
            nxt = next(y for y in self.adj[x] if self.dt[y] == self.dt[x] - 1)
            hops.append((x, nxt))
            x = nxt
        # send exactly enough pebbles down the path
        for i, (a, b) in enumerate(hops):
            count = need << (len(hops) - i - 1)
            moves.extend([(a, b)] * count)
        return moves

    def _dominated(self, state: tuple[int, ...]) -> bool:
        for f in self.failed:
            if all(a <= b for a, b in zip(state, f)):
                return True
        return False

    def _dfs(self, state: tuple[int, ...], w: int, path: list[Move], fresh: bool = True) -> bool:
        if state[self.target] >= self.k:
            return True
        if state in self.seen:
            return False
        if self.dominance and self._dominated(state):
            return False
        if self.sink is not None:
            self.sink.update(v for v, c in enumerate(state) if c)
        if fresh:
            quick = self._greedy(state)
            if quick is not None:
                path.extend(quick)
                return True
        self.seen.add(state)
        if len(self.seen) > self.limit:
            raise _TooLarge
        unit, need, adj, seen = self.unit, self.need, self.adj, self.seen
        children = []
        for v in self.order:
            c = state[v]
            if c < 2:
                continue
            lose = unit[v] << 1
            for x in adj[v]:
                nw = w - lose + unit[x]
                if nw < need:
                    continue
                nxt = list(state)
                nxt[v] = c - 2
                nxt[x] += 1
                nxt_t = tuple(nxt)
                if nxt_t in seen:
                    continue
                # one step of lookahead: a sideways move often unlocks the greedy push
                quick = self._greedy(nxt_t)
                if quick is not None:
                    path.append((v, x))
                    path.extend(quick)
                    return True
                children.append((nxt_t, nw, (v, x)))
        for nxt_t, nw, mv in children:
            path.append(mv)
            if self._dfs(nxt_t, nw, path, False):
                return True
            path.pop()
        if self.dominance:
            self.failed.append(state)
        return False


def _check_k(k: int) -> None:
    if not 1 <= k <= MAX_K:
        raise PebblingError(f"k must be in 1..{MAX_K}")


def _prepare(g: Graph, d: Distribution) -> None:
    d.check_graph(g)
    g.require_connected()


def is_k_reachable(g: Graph, d: Distribution, target: int, k: int = 1,
                   dominance: bool = False) -> tuple[bool, list[Move] | None]:
    """Decide whether ``target`` can hold ``k`` pebbles; returns a witness move list."""
    _prepare(g, d)
    _check_k(k)
    if not 0 <= target < g.n:
        raise PebblingError(f"invalid target {target}")
    if sys.getrecursionlimit() < 4 * d.size + 100:
        sys.setrecursionlimit(4 * d.size + 100)
    moves = _Reacher(g, target, k, dominance).run(d.counts)
    return moves is not None, moves


def reachable_set(g: Graph, d: Distribution, k: int = 1, stop_on_fail: bool = False,
                  order: Iterable[int] | None = None) -> set[int]:
    """Vertices that are k-reachable; with ``stop_on_fail`` the scan ends at the first failure."""
    _prepare(g, d)
    _check_k(k)
    if sys.getrecursionlimit() < 4 * d.size + 100:
        sys.setrecursionlimit(4 * d.size + 100)
    state = d.counts
    known: set[int] = set()
    for t in order if order is not None else range(g.n):
        if t in known:
            continue
        sink = set() if k == 1 else None
        ok = _Reacher(g, t, k, support_sink=sink).run(state) is not None
        if sink:
            known |= sink
        if ok:
            known.add(t)
        elif stop_on_fail:
            break
    if k == 1:
        known |= {v for v, c in enumerate(state) if c}
    return known


def is_k_solvable(g: Graph, d: Distribution, k: int = 1) -> tuple[bool, int | None]:
    """True when every vertex is k-reachable; otherwise also the least-id failing vertex."""
    _prepare(g, d)
    _check_k(k)
    if d.size < k:
        return False, 0
    # try the lightest targets first, they fail fastest
    top = max(max(row) for row in g.dist)
    weights = [sum(c << int(top - g.dist[u][v]) for u, c in enumerate(d.counts) if c) for v in range(g.n)]
    order = sorted(range(g.n), key=lambda v: weights[v])
    for t in order:
        if weights[t] < k << int(top):
            bad = t
            break
    else:
        reached = reachable_set(g, d, k, stop_on_fail=True, order=order)
        missing = [v for v in order if v not in reached]
        if not missing:
            return True, None
        bad = missing[0]
    for v in range(bad):
        if not is_k_reachable(g, d, v, k)[0]:
            return False, v
    return False, bad


# -- T / H / U classification ------------------------------------------------


@dataclass(frozen=True)
class ReachabilityReport:
    t_set: frozenset[int]
    h_set: frozenset[int]
    u_set: frozenset[int]
    u_components: tuple[frozenset[int], ...]

    @property
    def reachable(self) -> frozenset[int]:
        return self.t_set | self.h_set


def components(g: Graph, vertices: Iterable[int]) -> list[frozenset[int]]:
    """Connected components of the induced subgraph, ordered by least vertex."""
    left = set(vertices)
    out = []
    for s in sorted(left):
        if s not in left:
            continue
        comp = {s}
        queue = deque([s])
        left.discard(s)
        while queue:
            x = queue.popleft()
            for y in g.adj[x]:
                if y in left:
                    left.discard(y)
                    comp.add(y)
                    queue.append(y)
        out.append(frozenset(comp))
    return out


def classify(g: Graph, d: Distribution) -> ReachabilityReport:
    reach = reachable_set(g, d, 1)
    t_set = frozenset(v for v in reach if g.closed_nbhd(v) <= reach)
    h_set = frozenset(reach) - t_set
    u_set = frozenset(range(g.n)) - reach
    return ReachabilityReport(t_set, h_set, u_set, tuple(components(g, u_set)))


def neighborhood_closure_distances(g: Graph, s: Iterable[int]) -> dict[int, dict[int, float]]:
    """Distances measured inside the subgraph induced by ``N[s]``, keyed by original ids."""
    s = frozenset(s)
    if not s or len(components(g, s)) != 1:
        raise GraphError("s must be nonempty and connected")
    closed = set(s)
    for x in s:
        closed |= g.adj[x]
    b, old = g.induced(closed)
    return {old[i]: {old[j]: b.dist[i][j] for j in range(b.n)} for i in range(b.n)}


# -- text formats ------------------------------------------------------------


def parse_distribution(g: Graph, text: str) -> Distribution:
    """Lines ``vertex count`` (or inline ``v:c,v:c``); omitted vertices hold zero."""
    counts: dict[int, int] = {}
    text = text.strip()
    if text and "\n" not in text and ":" in text:
        items = [tuple(p.split(":")) for p in text.replace(";", ",").split(",") if p.strip()]
    else:
        items = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                items.append(tuple(line.split()))
    for item in items:
        try:
            v, c = int(item[0]), int(item[1])
        except (ValueError, IndexError):
            raise PebblingError(f"malformed distribution entry {item!r}") from None
        counts[v] = counts.get(v, 0) + c
    return Distribution(g, counts)


def format_distribution(d: Distribution) -> str:
    return "".join(f"{v} {c}\n" for v, c in d.items())


def format_moves(moves: Iterable[Move]) -> str:
    return "".join(f"{a}->{b}\n" for a, b in moves)
