import random
from fractions import Fraction
from itertools import combinations_with_replacement

import pytest
from hypothesis import given, strategies as st

from pebbling import engine
from pebbling.engine import (
    Distribution, PebblingError, apply_move, classify, format_distribution, format_moves,
    is_k_reachable, is_k_solvable, neighborhood_closure_distances, parse_distribution,
    reachable_set, replay,
)
from pebbling.graphs import (
    Graph, complement_km_km, complete_graph, cycle_graph, path_graph, small_special, star_graph,
    wheel_graph,
)


def brute_max(g, counts):
    """Most pebbles each vertex can ever hold, by plain search over move sequences."""
    best = list(counts)
    seen = {tuple(counts)}
    stack = [tuple(counts)]
    while stack:
        s = stack.pop()
        for v in range(g.n):
            if s[v] < 2:
                continue
            for w in g.adj[v]:
                t = list(s)
                t[v] -= 2
                t[w] += 1
                t = tuple(t)
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
                    best[w] = max(best[w], t[w])
    return best


def weight(g, counts, v):
    return sum(Fraction(c, 2 ** g.dist[u][v]) for u, c in enumerate(counts) if c)


@st.composite
def connected_instances(draw, max_n=7, max_size=7):
    n = draw(st.integers(1, max_n))
    # a random spanning tree plus extra edges keeps every sample connected
    edges = [(draw(st.integers(0, v - 1)), v) for v in range(1, n)]
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n))
    edges += [(a, b) for a, b in extra if a != b]
    g = Graph(n, edges)
    counts = draw(st.lists(st.integers(0, 4), min_size=n, max_size=n))
    while sum(counts) > max_size:
        i = counts.index(max(counts))
        counts[i] -= 1
    return g, counts


# -- moves ---------------------------------------------------------------------


def test_apply_move_examples():
    g = path_graph(2)
    assert dict(apply_move(Distribution(g, {0: 2}), 0, 1).items()) == {1: 1}
    assert dict(apply_move(Distribution(g, {0: 4}), 0, 1).items()) == {0: 2, 1: 1}
    with pytest.raises(PebblingError):
        apply_move(Distribution(g, {0: 1}), 0, 1)


def test_apply_move_needs_adjacency():
    with pytest.raises(PebblingError, match="not adjacent"):
        apply_move(Distribution(path_graph(3), {0: 4}), 0, 2)


def test_distribution_basics():
    g = path_graph(4)
    d = Distribution(g, {1: 2, 3: 1})
    assert d.size == 3 and d.subset_sum([1, 2]) == 2 and d[0] == 0
    assert len(d) == 2 and list(d) == [1, 3]
    with pytest.raises(PebblingError):
        Distribution(g, {0: -1})
    with pytest.raises(PebblingError):
        Distribution(g, {7: 1})


def test_cross_graph_use_is_an_error():
    d = Distribution(path_graph(3), {0: 2})
    with pytest.raises(PebblingError):
        is_k_reachable(cycle_graph(4), d, 0)
    with pytest.raises(PebblingError):
        d + Distribution(path_graph(4), {0: 1})


# -- reachability examples -------------------------------------------------------


def test_four_pebbles_reach_everything_at_diameter_two():
    g = complement_km_km(4)
    d = Distribution(g, {5: 4})
    assert reachable_set(g, d) == set(range(g.n))


def test_three_pebbles_at_distance_two_fail():
    g = path_graph(3)
    ok, moves = is_k_reachable(g, Distribution(g, {0: 3}), 2)
    assert not ok and moves is None


def test_two_sided_move_on_p3():
    g = path_graph(3)
    ok, moves = is_k_reachable(g, Distribution(g, {0: 2, 2: 2}), 1, k=2)
    assert ok and sorted(moves) == [(0, 1), (2, 1)]


def test_four_pebbles_across_distance_two():
    g = path_graph(3)
    ok, moves = is_k_reachable(g, Distribution(g, {0: 4}), 2)
    assert ok and moves == [(0, 1), (0, 1), (1, 2)]


def test_k_bounds():
    g = path_graph(2)
    with pytest.raises(PebblingError):
        is_k_reachable(g, Distribution(g, {0: 2}), 1, k=0)
    with pytest.raises(PebblingError):
        is_k_reachable(g, Distribution(g, {0: 2}), 1, k=16)
    with pytest.raises(PebblingError):
        is_k_reachable(g, Distribution(g, {0: 2}), 5)


def test_dominance_option_changes_no_answer():
    g = wheel_graph(6)
    rng = random.Random(3)
    for _ in range(60):
        d = Distribution(g, [rng.randint(0, 2) for _ in range(g.n)])
        for t in range(g.n):
            assert is_k_reachable(g, d, t, 2)[0] == is_k_reachable(g, d, t, 2, dominance=True)[0]


# -- solvability examples ------------------------------------------------------------


def test_k5_two_pebbles_solvable():
    g = complete_graph(5)
    assert is_k_solvable(g, Distribution(g, {2: 2})) == (True, None)


def test_k1_single_pebble():
    g = complete_graph(1)
    assert is_k_solvable(g, Distribution(g, {0: 1})) == (True, None)


def test_special_block_has_no_size_three_solution():
    g = small_special()
    for multi in combinations_with_replacement(range(g.n), 3):
        counts = [multi.count(v) for v in range(g.n)]
        assert not is_k_solvable(g, Distribution(g, counts))[0]


def test_solvable_reports_least_failing_vertex():
    g = path_graph(5)
    assert is_k_solvable(g, Distribution(g, {4: 4})) == (False, 0)
    assert is_k_solvable(g, Distribution(g, {})) == (False, 0)


# -- classification ----------------------------------------------------------------


def test_classify_solvable():
    g = cycle_graph(6)
    rep = classify(g, Distribution(g, {0: 4, 3: 4}))
    assert rep.t_set == frozenset(range(6)) and not rep.h_set and not rep.u_set


def test_classify_empty():
    g = path_graph(4)
    rep = classify(g, Distribution(g))
    assert rep.u_set == frozenset(range(4)) and rep.u_components == (frozenset(range(4)),)


def test_classify_p5_frozen():
    g = path_graph(5)
    rep = classify(g, Distribution(g, {0: 2}))
    assert rep.t_set == {0}
    assert rep.h_set == {1}
    assert rep.u_set == {2, 3, 4}
    assert rep.u_components == (frozenset({2, 3, 4}),)


def test_u_components_are_split():
    g = path_graph(7)
    rep = classify(g, Distribution(g, {3: 4}))
    assert rep.u_components == (frozenset({0}), frozenset({6}))


# -- neighbourhood distances ------------------------------------------------------------


def test_closure_distances_singleton():
    g = path_graph(6)
    table = neighborhood_closure_distances(g, [2])
    assert set(table) == {1, 2, 3}
    assert max(max(row.values()) for row in table.values()) <= 2


def test_closure_distances_wheel_rim():
    g = wheel_graph(8)
    rim = list(range(1, 9))
    table = neighborhood_closure_distances(g, rim)
    assert table[1][5] == 2
    assert g.dist[1][5] == 2


def test_closure_distances_whole_graph():
    g = cycle_graph(7)
    table = neighborhood_closure_distances(g, range(7))
    assert all(table[u][v] == g.dist[u][v] for u in range(7) for v in range(7))


def test_closure_distances_measured_inside():
    # on the 6-cycle, N[{0,1}] = {5,0,1,2}, where 5 and 2 are 3 apart
    g = cycle_graph(6)
    assert neighborhood_closure_distances(g, [0, 1])[5][2] == 3


# -- text formats ---------------------------------------------------------------


def test_distribution_text_round_trip():
    g = path_graph(5)
    d = Distribution(g, {0: 3, 4: 1})
    assert format_distribution(d) == "0 3\n4 1\n"
    assert parse_distribution(g, format_distribution(d)) == d
    assert parse_distribution(g, "0:3,4:1") == d
    assert format_moves([(0, 1), (1, 2)]) == "0->1\n1->2\n"
    with pytest.raises(PebblingError):
        parse_distribution(g, "0 x")


# -- properties ---------------------------------------------------------------------


@given(connected_instances(), st.integers(1, 3))
def test_reachability_matches_brute_force(inst, k):
    g, counts = inst
    d = Distribution(g, counts)
    best = brute_max(g, counts)
    for t in range(g.n):
        ok, moves = is_k_reachable(g, d, t, k)
        assert ok == (best[t] >= k)
        if ok:
            assert len(moves) <= d.size - k
            assert replay(d, moves)[t] >= k


@given(connected_instances(max_n=6, max_size=6))
def test_solvable_and_classify_agree_with_brute_force(inst):
    g, counts = inst
    d = Distribution(g, counts)
    best = brute_max(g, counts)
    reach = {v for v in range(g.n) if best[v] >= 1}
    ok, bad = is_k_solvable(g, d)
    assert ok == (len(reach) == g.n)
    if not ok:
        assert bad == min(set(range(g.n)) - reach)
    rep = classify(g, d)
    assert rep.reachable == reach
    assert rep.t_set == {v for v in reach if g.closed_nbhd(v) <= reach}


@given(connected_instances(), st.data())
def test_weight_never_increases(inst, data):
    g, counts = inst
    d = Distribution(g, counts)
    for _ in range(5):
        sources = [v for v in range(g.n) if d[v] >= 2 and g.adj[v]]
        if not sources:
            break
        a = data.draw(st.sampled_from(sources))
        b = data.draw(st.sampled_from(sorted(g.adj[a])))
        nd = apply_move(d, a, b)
        assert nd.size == d.size - 1
        for v in range(g.n):
            assert weight(g, nd.counts, v) <= weight(g, d.counts, v)
        d = nd


@given(connected_instances(max_size=6), st.data())
def test_extra_pebble_never_hurts(inst, data):
    g, counts = inst
    d = Distribution(g, counts)
    v = data.draw(st.integers(0, g.n - 1))
    before = reachable_set(g, d, 1)
    after = reachable_set(g, d.plus({v: 1}), 1)
    assert before <= after


def test_path_cut_property_small():
    for n in range(3, 6):
        g = path_graph(n)
        for size in range(5):
            for multi in combinations_with_replacement(range(n), size):
                d = Distribution(g, [multi.count(v) for v in range(n)])
                two = [is_k_reachable(g, d, p, 2)[0] for p in range(n)]
                for i in range(1, n - 1):
                    if not two[i]:
                        assert not (two[i - 1] and two[i + 1])


# -- large-state fallback ---------------------------------------------------------------


@given(connected_instances(), st.integers(1, 3), st.data())
def test_flow_fallback_matches_brute_force(inst, k, data):
    # the flow formulation is exact on its own, without the search in front of it
    g, counts = inst
    t = data.draw(st.integers(0, g.n - 1))
    moves = engine._flow_moves(g, tuple(counts), t, k)
    assert (moves is not None) == (brute_max(g, counts)[t] >= k)
    if moves is not None:
        assert replay(Distribution(g, counts), moves)[t] >= k


def test_state_limit_hands_over_to_flow(monkeypatch):
    g = cycle_graph(7)
    d = Distribution(g, {0: 3, 2: 3, 4: 3})
    want = is_k_reachable(g, d, 5, 2)[0]
    monkeypatch.setattr(engine, "DFS_STATE_LIMIT", 0)
    assert is_k_reachable(g, d, 5, 2)[0] == want


def test_flow_fallback_large_instance():
    g = star_graph(12)
    d = Distribution(g, {v: 3 for v in range(1, 13)})
    ok, moves = is_k_reachable(g, d, 0, 12)
    assert ok and replay(d, moves)[0] >= 12
