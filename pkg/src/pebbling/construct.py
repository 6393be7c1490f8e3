"""Constructive upper bounds: chain distributions and the 15n/(4(delta+1)) expansion.

The expansion starts from a seed distribution built around edges with a
large joint neighbourhood and then keeps adding small pebble piles.  Every
addition is accounted for by its strengthening ratio, the number of newly
strongly reachable vertices per added pebble.  All thresholds are compared
on integers; nothing here touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .engine import (
    Distribution,
    ReachabilityReport,
    classify,
    is_k_reachable,
    is_k_solvable,
    neighborhood_closure_distances,
)
from .graphs import ChainSpec, ChainVariant, Graph, GraphError, diameter, k_neighborhood

CASE_TAGS = ("A", "B1", "B2", "C1", "C2", "C3", "C4", "D1", "D2a", "D2b", "D3a", "D4", "D5", "D6", "D7")


class ExpansionError(AssertionError):
    """An expansion invariant failed; carries the state that triggered it."""

    def __init__(self, message: str, **diagnostics) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class Ratio:
    """Exact ratio ``delta_t / delta_p``; compared by cross multiplication."""

    delta_t: int
    delta_p: int

    def __post_init__(self) -> None:
        if self.delta_t < 0 or self.delta_p <= 0:
            raise ValueError("need delta_t >= 0 and delta_p > 0")

    def __ge__(self, other: Ratio) -> bool:
        return self.delta_t * other.delta_p >= other.delta_t * self.delta_p

    def __le__(self, other: Ratio) -> bool:
        return other >= self

    def __lt__(self, other: Ratio) -> bool:
        return not self >= other

    def __gt__(self, other: Ratio) -> bool:
        return not self <= other

    def compose(self, other: Ratio) -> Ratio:
        return Ratio(self.delta_t + other.delta_t, self.delta_p + other.delta_p)

    def meets_bound(self, min_degree: int) -> bool:
        """``delta_t / delta_p >= 4 (delta + 1) / 15``."""
        return 15 * self.delta_t >= 4 * (min_degree + 1) * self.delta_p

    @property
    def value(self) -> Fraction:
        return Fraction(self.delta_t, self.delta_p)

    def __str__(self) -> str:
        return f"{self.delta_t}/{self.delta_p}"


def ratio_compose_check(r1: Ratio, r2: Ratio) -> Ratio:
    out = r1.compose(r2)
    if not out >= min(r1, r2):
        raise AssertionError(f"{out} below min({r1}, {r2})")
    return out


# -- seed distribution ---------------------------------------------------------


def star_property(g: Graph, u: int, v: int) -> bool:
    """``|N[u] | N[v]| >= 29/15 (delta + 1)`` for the edge ``(u, v)``."""
    if not g.has_edge(u, v):
        raise GraphError(f"({u}, {v}) is not an edge")
    return 15 * len(g.closed_nbhd(u) | g.closed_nbhd(v)) >= 29 * (g.min_degree + 1)


@dataclass
class StarSets:
    h_set: set[int] = field(default_factory=set)
    a_set: list[int] = field(default_factory=list)
    b_set: list[int] = field(default_factory=list)
    p_pairs: list[tuple[int, int]] = field(default_factory=list)
    r_pairs: list[tuple[int, int]] = field(default_factory=list)
    l_map: dict[tuple[int, int], list[int]] = field(default_factory=dict)

    def neighbourhoods(self, g: Graph) -> list[frozenset[int]]:
        out = [g.closed_nbhd(x) for x in self.a_set + self.b_set]
        out += [g.closed_nbhd(a) | g.closed_nbhd(b) for a, b in self.p_pairs + self.r_pairs]
        return out


def _pair_distance(g: Graph, x: int, pair: tuple[int, int]) -> float:
    return min(g.dist[x][pair[0]], g.dist[x][pair[1]])


def build_d0(g: Graph) -> tuple[Distribution, StarSets]:
    """Seed distribution making both ends of every star edge reachable."""
    g.require_connected()
    st = StarSets()
    star_edges = [e for e in g.edges if star_property(g, *e)]
    h = st.h_set
    # steps 1-2: star edges with both ends outside H become pairs
    while True:
        edge = next(((u, v) for u, v in star_edges if u not in h and v not in h), None)
        if edge is None:
            break
        h |= k_neighborhood(g, edge, 2)
        st.p_pairs.append(edge)
        st.l_map[edge] = []
    # steps 3-5: star edges with exactly one end outside H
    while True:
        edge = next(((u, v) for u, v in star_edges if u not in h or v not in h), None)
        if edge is None:
            break
        u, v = edge if edge[1] not in h else (edge[1], edge[0])
        h |= k_neighborhood(g, [v], 2)
        near = [p for p in st.p_pairs if _pair_distance(g, u, p) == 2]
        if len(near) > 1:
            st.b_set.append(v)
        else:
            st.a_set.append(v)
            if near:
                st.l_map[near[0]].append(v)
    # step 6: heavily used pairs get bigger piles
    for p in list(st.p_pairs):
        if len(st.l_map[p]) >= 5:
            for x in st.l_map[p]:
                st.a_set.remove(x)
                st.b_set.append(x)
            st.p_pairs.remove(p)
            st.r_pairs.append(p)
    counts: dict[int, int] = {}
    for x in st.a_set:
        counts[x] = 4
    for x in st.b_set:
        counts[x] = 3
    for a, b in st.p_pairs:
        counts[a] = counts[b] = 3
    for a, b in st.r_pairs:
        counts[a], counts[b] = 5, 6
    return Distribution(g, counts), st


# -- expansion -----------------------------------------------------------------


@dataclass
class ExpansionStep:
    delta: Distribution
    case_tag: str
    ratio: Ratio
    new_t_vertices: frozenset[int]
    component: frozenset[int] | None = None

    def record(self) -> dict:
        return {
            "case": self.case_tag,
            "delta": {str(v): c for v, c in self.delta.items()},
            "delta_t": self.ratio.delta_t,
            "delta_p": self.ratio.delta_p,
            "ratio": str(self.ratio),
        }


class _Component:
    """A component ``S`` of the unreachable vertices with distances inside ``B = N[S]``."""

    def __init__(self, g: Graph, s: frozenset[int]) -> None:
        self.g = g
        self.s = s
        self.order = sorted(s)
        self.db = neighborhood_closure_distances(g, s)
        self.b = frozenset(self.db)
        self.max_db = max((self.db[x][y] for x, y in combinations(self.order, 2)), default=0)

    def ds(self) -> dict[int, dict[int, float]]:
        sub, old = self.g.induced(self.s)
        return {old[i]: {old[j]: sub.dist[i][j] for j in range(sub.n)} for i in range(sub.n)}

    def s_path(self, a: int, e: int) -> list[int]:
        """Shortest path inside ``S``, ties broken toward small ids."""
        sub, old = self.g.induced(self.s)
        index = {v: i for i, v in enumerate(old)}
        dist = sub.dist[index[e]]
        path = [index[a]]
        while path[-1] != index[e]:
            x = path[-1]
            path.append(min(y for y in sub.adj[x] if dist[y] == dist[x] - 1))
        return [old[i] for i in path]

    def spread_set(self, seed: list[int]) -> list[int]:
        """Greedy maximal extension of ``seed`` keeping B-distances >= 3."""
        out = list(seed)
        for x in self.order:
            if x not in out and all(self.db[x][y] >= 3 for y in out):
                out.append(x)
        return out


def _union_size(g: Graph, *vs: int) -> int:
    out: set[int] = set()
    for v in vs:
        out |= g.closed_nbhd(v)
    return len(out)


def _case_a(g: Graph, rep: ReachabilityReport) -> dict[int, int] | None:
    u_sorted = sorted(rep.u_set)
    h_sorted = sorted(rep.h_set)
    dist = g.dist
    for i, u in enumerate(u_sorted):
        for v in u_sorted[i + 1:]:
            if dist[u][v] != 3:
                continue
            for w in h_sorted:
                if dist[u][w] + dist[w][v] == 3:
                    return {u: 4, v: 3} if dist[w][v] == 1 else {v: 4, u: 3}
    return None


def _case_b(g: Graph, c: _Component) -> tuple[str, dict[int, int]]:
    thr = g.min_degree + 1
    db = c.db
    for u, v in combinations(c.order, 2):
        if db[u][v] == 2 and 15 * _union_size(g, u, v) >= 28 * thr:
            w = min(x for x in c.b if db[u][x] == 1 and db[x][v] == 1)
            return "B1", {u: 2, v: 2, w: 3}
    ds = c.ds()
    for a, e in combinations(c.order, 2):
        if db[a][e] == 4 and ds[a][e] == 4:
            return "B2", {a: 4, e: 4}
    raise ExpansionError("case B without a four-path inside S", component=sorted(c.s))


def _case_c_edge(g: Graph, c: _Component) -> tuple[int, int]:
    thr = g.min_degree + 1
    for u, v in g.edges:
        if u in c.s and v in c.s and 15 * _union_size(g, u, v) >= 20 * thr:
            return u, v
    # fall back to the middle of a three-path inside S
    ds = c.ds()
    for a, d in combinations(c.order, 2):
        if c.db[a][d] == 3 and ds[a][d] == 3:
            p = c.s_path(a, d)
            for x, y in ((p[0], p[1]), (p[2], p[3]), (p[1], p[2])):
                if 15 * _union_size(g, x, y) >= 20 * thr:
                    return min(x, y), max(x, y)
    raise ExpansionError("case C without a 4/3 edge", component=sorted(c.s))


def _case_c(g: Graph, c: _Component) -> tuple[str, dict[int, int]]:
    u, v = _case_c_edge(g, c)
    db = c.db
    if all(db[v][s] <= 2 for s in c.order):
        first = next((a, b) for a, b in combinations(c.order, 2) if db[a][b] >= 3)
        k_set = c.spread_set(list(first))
        delta = {v: 4}
        delta.update({x: 1 for x in k_set})
        return "C1", delta
    if all(min(db[u][s], db[v][s]) <= 2 for s in c.order):
        w = next(s for s in c.order if db[v][s] == 3)
        k_set = c.spread_set([v, w])
        delta = {u: 3, v: 3}
        delta.update({x: 1 for x in k_set if x != v})
        return "C2", delta
    far = [s for s in c.order if db[s][u] == 3 and db[s][v] == 3]
    for s in far:
        k_set = c.spread_set([s, v])
        if len(k_set) > 2:
            delta = {v: 8}
            delta.update({x: 1 for x in k_set if x != v})
            return "C3", delta
    if far:
        return "C4", {far[0]: 4, v: 4}
    raise ExpansionError("case C subcases exhausted", component=sorted(c.s), edge=(u, v))


def _case_d_local(g: Graph, c: _Component, rep: ReachabilityReport) -> tuple[str, dict[int, int]] | None:
    thr = g.min_degree + 1
    s_order = c.order
    size = len(s_order)
    if 15 * size >= 16 * thr:
        return "D1", {s_order[0]: 4}
    for u, v in combinations(s_order, 2):
        if g.has_edge(u, v) and 15 * _union_size(g, u, v) >= 16 * thr:
            return "D2a", {v: 4}
    for u, v in combinations(s_order, 2):
        if g.has_edge(u, v) or 15 * _union_size(g, u, v) < 16 * thr:
            continue
        common = sorted(g.adj[u] & g.adj[v] & c.s)
        if common:
            return "D2b", {common[0]: 4}
    if 15 * size <= 14 * thr:
        if all(g.adj[u] & g.adj[v] & rep.h_set for u, v in combinations(s_order, 2)):
            return "D3a", {s_order[0]: 2}
        raise ExpansionError("small component lacks a common reachable neighbour yet no D2 edge",
                             component=sorted(c.s))
    for v in s_order:
        if all(c.db[v][s] == 1 for s in s_order if s != v):
            return "D4", {v: 2}
    return None


def _case_d_global(g: Graph, comps: list[_Component], rep: ReachabilityReport) -> tuple[str, dict[int, int], _Component]:
    thr = g.min_degree + 1
    owner = {x: i for i, c in enumerate(comps) for x in c.s}
    u_sorted = sorted(owner)
    for i, u in enumerate(u_sorted):
        for v in u_sorted[i + 1:]:
            if owner[u] != owner[v] and g.dist[u][v] == 2:
                return "D5", {u: 4, v: 3}, comps[owner[u]]
    for c in comps:
        closed = set(c.b)
        if 15 * len(closed) >= 16 * thr:
            return "D6", {c.order[0]: 4}, c
    for c in comps:
        for h in sorted(rep.h_set):
            if all(g.dist[h][s] <= 2 for s in c.order):
                return "D7", {h: 3}, c
    c = comps[0]
    raise ExpansionError(
        "no expansion case applies (subcase 8)",
        component=sorted(c.s),
        closed_nbhd=sorted(c.b),
        reachable_boundary=sorted(c.b & rep.h_set),
    )


def choose_delta(g: Graph, rep: ReachabilityReport) -> tuple[str, dict[int, int], frozenset[int] | None]:
    """Pick the first applicable case and its pebble increment."""
    if not rep.u_set:
        raise GraphError("distribution is already solvable")
    delta = _case_a(g, rep)
    if delta is not None:
        return "A", delta, None
    comps = [_Component(g, s) for s in rep.u_components]
    for c in comps:
        if c.max_db >= 4:
            tag, delta = _case_b(g, c)
        elif c.max_db == 3:
            tag, delta = _case_c(g, c)
        else:
            found = _case_d_local(g, c, rep)
            if found is None:
                continue
            tag, delta = found
        return tag, delta, c.s
    tag, delta, c = _case_d_global(g, comps, rep)
    return tag, delta, c.s


def expand_step(g: Graph, d: Distribution, report: ReachabilityReport | None = None,
                check_lemma: bool = True) -> tuple[ExpansionStep, ReachabilityReport]:
    """One expansion; returns the step and the classification after it."""
    report = report if report is not None else classify(g, d)
    tag, delta_map, comp = choose_delta(g, report)
    delta = Distribution(g, delta_map)
    new = d + delta
    after = classify(g, new)
    if not (report.t_set <= after.t_set and after.u_set <= report.u_set):
        raise ExpansionError("T shrank or U grew", case=tag)
    gained = after.t_set - report.t_set
    step = ExpansionStep(delta, tag, Ratio(len(gained), delta.size), frozenset(gained), comp)
    if not gained:
        raise ExpansionError("expansion made no vertex strongly reachable", case=tag, delta=delta_map)
    if not step.ratio.meets_bound(g.min_degree):
        raise ExpansionError(f"case {tag} ratio {step.ratio} below 4(delta+1)/15",
                             case=tag, delta=delta_map, component=sorted(comp or ()))
    if check_lemma and comp is not None and comp <= after.reachable:
        _check_support_lemma(g, delta, comp, after)
    return step, after


def _check_support_lemma(g: Graph, delta: Distribution, comp: frozenset[int], after: ReachabilityReport) -> None:
    """A vertex of S that the increment alone makes 2-reachable has its closed neighbourhood in T."""
    for s in sorted(comp):
        if is_k_reachable(g, delta, s, 2)[0] and not g.closed_nbhd(s) <= after.t_set:
            raise ExpansionError("2-reachable vertex of S with a neighbourhood outside T", vertex=s)


@dataclass
class Construction:
    distribution: Distribution
    d0: Distribution
    stars: StarSets
    d0_ratio: Ratio | None
    steps: list[ExpansionStep]

    @property
    def bound(self) -> Fraction:
        g = self.distribution.graph
        return Fraction(15 * g.n, 4 * (g.min_degree + 1))

    def summary(self) -> dict:
        size = self.distribution.size
        return {
            "size": size,
            "bound": str(self.bound),
            "margin": str(self.bound - size),
            "d0_size": self.d0.size,
            "d0_ratio": str(self.d0_ratio) if self.d0_ratio else "inf",
            "steps": len(self.steps),
        }


def construct_solvable(g: Graph, check_lemma: bool = True) -> Construction:
    """Solvable distribution of size at most ``15 n / (4 (delta + 1))`` for diameter >= 3."""
    g.require_connected()
    if diameter(g) < 3:
        raise GraphError("construction requires diameter >= 3")
    d0, stars = build_d0(g)
    report = classify(g, d0)
    d0_ratio = None
    if d0.size:
        d0_ratio = Ratio(len(report.t_set), d0.size)
        if not d0_ratio.meets_bound(g.min_degree):
            raise ExpansionError(f"seed ratio {d0_ratio} below 4(delta+1)/15", d0=dict(d0.items()))
    d = d0
    steps: list[ExpansionStep] = []
    while report.u_set:
        if len(steps) > g.n:
            raise ExpansionError("expansion did not terminate")
        step, report = expand_step(g, d, report, check_lemma)
        d = d + step.delta
        steps.append(step)
    if 4 * (g.min_degree + 1) * d.size > 15 * g.n:
        raise ExpansionError("final size above 15n/(4(delta+1))", size=d.size)
    ok, bad = is_k_solvable(g, d, 1)
    if not ok:
        raise ExpansionError("final distribution not solvable", vertex=bad)
    return Construction(d, d0, stars, d0_ratio, steps)


# -- chain distributions -------------------------------------------------------


def chain_upper_distribution(spec: ChainSpec) -> Distribution:
    """Piles of 4 at ``v_{3j-2}`` and ``u_{3j}``, with the remainder blocks patched."""
    from .graphs import build_chain

    if spec.variant is not ChainVariant.PLAIN:
        raise GraphError("chain distribution needs a plain chain")
    g = build_chain(spec, validate=False)
    k, r = divmod(spec.length, 3)
    counts: dict[int, int] = {}
    for j in range(1, k + 1):
        counts[spec.v(3 * j - 2)] = 4
        counts[spec.u(3 * j)] = 4
    if r == 1:
        counts[spec.u(3 * k + 1)] = 4
    elif r == 2:
        counts[spec.v(3 * k + 1)] = 3
        counts[spec.u(3 * k + 2)] = 3
    return Distribution(g, counts)


def chain_upper_value(length: int) -> int:
    k, r = divmod(length, 3)
    return 8 * k + (0, 4, 6)[r]


# -- strict bound ---------------------------------------------------------------


def strict_bound_check(g: Graph) -> bool:
    """``pi*(g) < 4 n / (delta + 1)``, via the exact solver."""
    from .solver import pi_star

    if g.n > 12:
        raise GraphError("strict_bound_check is limited to n <= 12")
    res = pi_star(g)
    if res.pi_star is None:
        raise GraphError("solver budget exceeded")
    return (g.min_degree + 1) * res.pi_star < 4 * g.n
