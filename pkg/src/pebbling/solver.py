"""Exact optimal pebbling numbers by budgeted enumeration of distributions.

Candidates of size ``s`` are the multisets of ``s`` vertices, visited in
lexicographic order of their sorted vertex tuples (equivalently, count
vectors with the earliest vertex loaded first).  Whole subtrees of the
enumeration are discarded when even the most favourable placement of the
remaining pebbles cannot give some vertex a weight of ``k``.
"""

from __future__ import annotations

import random
import sys
import time
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from math import comb
from typing import Sequence

import networkx as nx

from .engine import Distribution, MAX_K, PebblingError, _Reacher, is_k_reachable, is_k_solvable
from .graphs import (
    ChainSpec,
    ChainVariant,
    Graph,
    GraphError,
    build_chain,
    collapse_chain,
    path_graph,
)


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class LevelCertificate:
    size: int
    total: int
    checked: int = 0
    prefilter_rejects: int = 0
    symmetry_skips: int = 0
    audited: int = 0


@dataclass
class SolverResult:
    k: int
    pi_star: int | None
    witness: Distribution | None
    levels: list[LevelCertificate] = field(default_factory=list)
    exceeded_budget: bool = False
    wall_time: float = 0.0

    @property
    def candidates_checked(self) -> int:
        return sum(lv.checked for lv in self.levels)

    @property
    def prefilter_rejects(self) -> int:
        return sum(lv.prefilter_rejects for lv in self.levels)

    @property
    def symmetry_skips(self) -> int:
        return sum(lv.symmetry_skips for lv in self.levels)

    @property
    def certificate(self) -> LevelCertificate | None:
        """Accounting for the largest size proven unsolvable."""
        if self.pi_star is None:
            return self.levels[-1] if self.levels else None
        below = [lv for lv in self.levels if lv.size == self.pi_star - 1]
        return below[0] if below else None

    def report(self, descriptor: str = "") -> dict:
        return {
            "graph": descriptor,
            "k": self.k,
            "pi_star": self.pi_star,
            "exceeded_budget": self.exceeded_budget,
            "witness": {str(v): c for v, c in self.witness.items()} if self.witness else None,
            "candidates_checked": self.candidates_checked,
            "prefilter_rejects": self.prefilter_rejects,
            "symmetry_skips": self.symmetry_skips,
            "levels": [vars(lv) for lv in self.levels],
            "wall_time": round(self.wall_time, 3),
        }


def automorphisms(g: Graph, limit: int = 2000) -> list[tuple[int, ...]]:
    """Up to ``limit`` non-identity automorphisms, as permutation tuples."""
    nxg = nx.Graph()
    nxg.add_nodes_from(range(g.n))
    nxg.add_edges_from(g.edges)
    out = []
    identity = tuple(range(g.n))
    for iso in nx.algorithms.isomorphism.GraphMatcher(nxg, nxg).isomorphisms_iter():
        perm = tuple(iso[v] for v in range(g.n))
        if perm != identity:
            out.append(perm)
            if len(out) >= limit:
                break
    return out


class _Checker:
    """Solvability test reused across candidates of one graph."""

    def __init__(self, g: Graph, k: int) -> None:
        self.g = g
        self.k = k
        self.reachers = [_Reacher(g, t, k) for t in range(g.n)]
        self.hot: deque[int] = deque(range(g.n))

    def solvable(self, counts: tuple[int, ...]) -> bool:
        # targets that failed recently are tried first
        for t in list(self.hot):
            r = self.reachers[t]
            r.seen = set()
            if r.run(counts) is None:
                self.hot.remove(t)
                self.hot.appendleft(t)
                return False
        return True


class _Search:
    def __init__(self, g: Graph, k: int, autos: Sequence[tuple[int, ...]] | None,
                 prefilter: bool, audit_every: int | None, rng_seed: int = 0) -> None:
        g.require_connected()
        self.g, self.k = g, k
        self.n = g.n
        top = int(max(max(r) for r in g.dist))
        self.top = top
        # unit[u][v]: scaled weight a pebble on u contributes toward v
        self.unit = [[1 << (top - int(g.dist[u][v])) for v in range(g.n)] for u in range(g.n)]
        self.need = k << top
        self.smax = [[0] * g.n for _ in range(g.n + 1)]
        for i in range(g.n - 1, -1, -1):
            self.smax[i] = [max(a, b) for a, b in zip(self.smax[i + 1], self.unit[i])]
        self.autos = list(autos or [])
        self.prefilter = prefilter
        self.audit_every = audit_every
        self.checker = _Checker(g, k)
        self.rng = random.Random(rng_seed)

    def _canonical(self, multiset: tuple[int, ...]) -> bool:
        for perm in self.autos:
            image = tuple(sorted(perm[v] for v in multiset))
            if image < multiset:
                return False
        return True

    def scan(self, s: int, shard: tuple[int, int] = (0, 1), deadline: float | None = None):
        """Lexicographically least solvable multiset of size ``s`` in this shard."""
        cert = LevelCertificate(size=s, total=comb(self.n + s - 1, s))
        index, nshards = shard
        n, need = self.n, self.need
        counts = [0] * n
        weights = [0] * n
        leaf = 0
        found: list[tuple[int, ...]] = []

        def leaf_check() -> bool:
            nonlocal leaf
            mine = leaf % nshards == index
            leaf += 1
            if not mine:
                return False
            if deadline is not None and (leaf & 255) == 0 and time.monotonic() > deadline:
                raise BudgetExceeded(cert)
            if self.prefilter and min(weights) < need:
                cert.prefilter_rejects += 1
                if self.audit_every and cert.prefilter_rejects % self.audit_every == 0:
                    cert.audited += 1
                    if self.checker.solvable(tuple(counts)):
                        raise AssertionError(f"weight prefilter rejected a solvable candidate {counts}")
                return False
            multiset = tuple(v for v in range(n) for _ in range(counts[v]))
            if self.autos and not self._canonical(multiset):
                cert.symmetry_skips += 1
                return False
            cert.checked += 1
            if self.checker.solvable(tuple(counts)):
                found.append(tuple(counts))
                return True
            return False

        def rec(i: int, r: int) -> bool:
            nonlocal leaf
            if self.prefilter and not self.audit_every and r:
                sm = self.smax[i]
                if any(w + r * m < need for w, m in zip(weights, sm)):
                    # whole subtree fails the weight test
                    size = comb(r + n - i - 1, r)
                    mine = _shard_count(leaf, size, index, nshards)
                    cert.prefilter_rejects += mine
                    leaf += size
                    return False
            if i == n - 1 or r == 0:
                counts[i] += r
                row = self.unit[i]
                for v in range(n):
                    weights[v] += r * row[v]
                hit = leaf_check()
                counts[i] -= r
                for v in range(n):
                    weights[v] -= r * row[v]
                return hit
            row = self.unit[i]
            for c in range(r, -1, -1):
                counts[i] = c
                if c:
                    for v in range(n):
                        weights[v] += c * row[v]
                hit = rec(i + 1, r - c)
                if c:
                    for v in range(n):
                        weights[v] -= c * row[v]
                counts[i] = 0
                if hit:
                    return True
            return False

        rec(0, s)
        return (found[0] if found else None), cert


def _shard_count(start: int, size: int, index: int, nshards: int) -> int:
    """How many leaf indices in ``[start, start+size)`` are congruent to ``index``."""
    def upto(x: int) -> int:  # count in [0, x)
        return (x - index + nshards - 1) // nshards if x > index else 0
    return upto(start + size) - upto(start)


def pi_star(g: Graph, k: int = 1, budget: int | None = None, *,
            automorphism_list: Sequence[tuple[int, ...]] | None = None,
            prefilter: bool = True, audit_every: int | None = None,
            shards: int = 1, time_limit: float | None = None,
            start: int = 1) -> SolverResult:
    """Smallest size of a k-solvable distribution, by exhaustive search.

    ``budget`` caps the candidate size (default ``k * n``, always solvable).
    ``shards`` splits each size level into interleaved slices that are
    scanned independently and reduced to the least witness.
    """
    if not 1 <= k <= MAX_K:
        raise PebblingError(f"k must be in 1..{MAX_K}")
    g.require_connected()
    t0 = time.monotonic()
    budget = budget if budget is not None else k * g.n
    deadline = t0 + time_limit if time_limit is not None else None
    search = _Search(g, k, automorphism_list, prefilter, audit_every)
    result = SolverResult(k=k, pi_star=None, witness=None)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * budget + g.n + 200))
    for s in range(start, budget + 1):
        hits = []
        merged = LevelCertificate(size=s, total=comb(g.n + s - 1, s))
        for index in range(shards):
            try:
                hit, cert = search.scan(s, (index, shards), deadline)
            except BudgetExceeded as exc:
                partial = exc.args[0]
                _merge(merged, partial)
                result.levels.append(merged)
                result.exceeded_budget = True
                result.wall_time = time.monotonic() - t0
                return result
            _merge(merged, cert)
            if hit is not None:
                hits.append(hit)
        result.levels.append(merged)
        if hits:
            best = min(hits, key=lambda c: tuple(v for v in range(g.n) for _ in range(c[v])))
            result.pi_star = s
            result.witness = Distribution(g, best)
            if not is_k_solvable(g, result.witness, k)[0]:
                raise AssertionError("solver witness failed re-verification")
            break
    else:
        result.exceeded_budget = True
    result.wall_time = time.monotonic() - t0
    return result


def _merge(into: LevelCertificate, cert: LevelCertificate) -> None:
    into.checked += cert.checked
    into.prefilter_rejects += cert.prefilter_rejects
    into.symmetry_skips += cert.symmetry_skips
    into.audited += cert.audited


def pi_star_chain(spec: ChainSpec, k: int = 1, budget: int | None = None,
                  symmetry: bool = True, time_limit: float | None = None,
                  start: int = 1) -> SolverResult:
    """``pi_star`` on a chain graph with automorphism pruning switched on."""
    g = build_chain(spec)
    autos = automorphisms(g) if symmetry else None
    return pi_star(g, k, budget, automorphism_list=autos, time_limit=time_limit, start=start)


def two_optimal_path_value(n: int) -> int:
    if not 1 <= n <= 8:
        raise GraphError("two_optimal_path_value is limited to 1 <= n <= 8")
    return pi_star(path_graph(n), k=2).pi_star


# -- independent oracle ------------------------------------------------------


def _naive_reachable_max(g: Graph, counts: tuple[int, ...]) -> list[int]:
    """Breadth-first over all move sequences; the most pebbles each vertex ever holds."""
    best = list(counts)
    seen = {counts}
    frontier = [counts]
    while frontier:
        nxt = []
        for state in frontier:
            for v in range(g.n):
                if state[v] >= 2:
                    for w in g.adj[v]:
                        s = list(state)
                        s[v] -= 2
                        s[w] += 1
                        t = tuple(s)
                        if t not in seen:
                            seen.add(t)
                            nxt.append(t)
                            if t[w] > best[w]:
                                best[w] = t[w]
        frontier = nxt
    return best


def oracle_pi_star(g: Graph, k: int = 1) -> int:
    """Plain enumeration with a plain breadth-first decider; test use only."""
    if g.n > 12:
        raise GraphError("oracle is limited to n <= 12")
    g.require_connected()
    for s in range(1, 7):
        for multiset in combinations_with_replacement(range(g.n), s):
            counts = [0] * g.n
            for v in multiset:
                counts[v] += 1
            if min(_naive_reachable_max(g, tuple(counts))) >= k:
                return s
    raise GraphError("oracle is limited to answers <= 6")


# -- decomposition of small chain distributions -------------------------------


@dataclass(frozen=True)
class CutDescription:
    """Cut between path positions ``position`` and ``position + 1`` (1-based)."""

    position: int
    left: frozenset[int]
    right: frozenset[int]
    left_type: str
    right_type: str
    collapsed: tuple[int, ...]


def _part_types(j: int, l: int) -> tuple[str, str]:
    k, r = divmod(j, 3)
    if r == 0:
        return f"G_{k}", f"G_{l - k}"
    if r == 2:
        return f"G_{k + 1}^-", f"G_{l - k - 1}^+"
    # cut inside block k+1 right after u_{k+1}: the mirror image of the previous case
    return f"G_{k}^+ (mirrored)", f"G_{l - k}^- (mirrored)"


def decomposition_check(spec: ChainSpec, d: Distribution) -> CutDescription | None:
    """Split a small solvable chain distribution along an edge no pebble can cross."""
    if spec.variant is not ChainVariant.PLAIN:
        raise GraphError("decomposition needs a plain chain")
    l = spec.length
    if d.size >= 3 * l - 1:
        return None
    q = collapse_chain(spec)
    g = q.source
    d.check_graph(g)
    ok, bad = is_k_solvable(g, d, 1)
    if not ok:
        raise PebblingError(f"distribution is not solvable on the chain (vertex {bad})")
    boosted = d.plus({spec.u(1): 1, spec.v(l): 1})
    path = q.target
    dphi = Distribution(path, q.collapse(boosted.counts))
    two = [is_k_reachable(path, dphi, p, 2)[0] for p in range(path.n)]
    if two[0] is False or two[-1] is False:
        raise AssertionError("end vertices of the collapsed path must be 2-reachable")
    i = two.index(False)
    if i + 1 < path.n and not two[i + 1]:
        a, b = i, i + 1
    elif not two[i - 1]:
        a, b = i - 1, i
    else:
        raise AssertionError("inner vertex with both neighbours 2-reachable")
    for p in (a, b):
        for x in q.preimage(p):
            if is_k_reachable(g, d, x, 2)[0]:
                raise AssertionError(f"vertex {x} over the cut is 2-reachable")
    left = frozenset(x for x in range(g.n) if q.phi[x] <= a)
    right = frozenset(range(g.n)) - left
    lt, rt = _part_types(a + 1, l)
    return CutDescription(a + 1, left, right, lt, rt, tuple(dphi.counts))
