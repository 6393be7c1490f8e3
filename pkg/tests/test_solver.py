import random

import pytest

from pebbling.construct import chain_upper_distribution
from pebbling.engine import Distribution, PebblingError
from pebbling.graphs import (
    Graph, GraphError, build_chain, circulant_graph, circulant_special, complement_km_km,
    complete_graph, cycle_graph, homogeneous_chain, make_chain_spec, path_graph, small_special,
    star_graph, wheel_graph,
)
from pebbling.solver import (
    automorphisms, decomposition_check, oracle_pi_star, pi_star, pi_star_chain,
    two_optimal_path_value,
)

# values below were computed with oracle_pi_star or by hand and frozen here
FROZEN = [
    (path_graph(3), 2),
    (path_graph(4), 3),
    (cycle_graph(5), 4),
    (star_graph(4), 2),
    (complete_graph(5), 2),
    (wheel_graph(5), 2),
]


@pytest.mark.parametrize("g, value", FROZEN)
def test_frozen_values(g, value):
    res = pi_star(g)
    assert res.pi_star == value
    assert res.certificate is None or res.certificate.size == value - 1


def test_k5():
    res = pi_star(complete_graph(5))
    assert res.pi_star == 2 and res.witness.size == 2


def test_certificate_accounts_for_every_candidate():
    res = pi_star(cycle_graph(5))
    cert = res.certificate
    assert cert.size == 3 and cert.total == 35
    assert cert.checked + cert.prefilter_rejects + cert.symmetry_skips == cert.total


def test_complement_k4_k4_is_four():
    res = pi_star(complement_km_km(4), automorphism_list=automorphisms(complement_km_km(4)))
    assert res.pi_star == 4


def test_small_special_is_four():
    assert pi_star(small_special()).pi_star == 4


def test_circulant_special_value():
    # {0, 3} dominates, so two piles on that edge already solve
    res = pi_star(circulant_special(5))
    assert res.pi_star == 3
    assert dict(res.witness.items()) == {0: 2, 3: 1}


@pytest.mark.xfail(strict=True, reason="circulant_special(5) has a dominating edge and pi* = 3")
def test_circulant_special_value_as_claimed():
    assert pi_star(circulant_special(5)).pi_star == 4


@pytest.mark.parametrize("length, value", [(1, 4), (2, 6)])
def test_chain_values_six_vertex_block(length, value):
    res = pi_star_chain(homogeneous_chain(small_special(), length))
    assert res.pi_star == value


@pytest.mark.slow
def test_chain_g3_six_vertex_block():
    spec = homogeneous_chain(small_special(), 3)
    assert pi_star_chain(spec, start=7).pi_star == 8


def test_chain_values_ten_vertex_block():
    spec = homogeneous_chain(circulant_graph(10, [2, 3]), 2)
    assert pi_star_chain(spec).pi_star == 6


@pytest.mark.xfail(strict=True, reason="circulant_special(5) blocks give pi*(G1) = 3, not 4")
def test_chain_g1_circulant_as_claimed():
    g = circulant_special(5)
    spec = make_chain_spec([g], [(0, 4)])
    assert pi_star(build_chain(spec, validate=False)).pi_star == 4


def test_chain_minus_plus_not_smaller():
    spec = homogeneous_chain(small_special(), 1)
    base = pi_star_chain(spec).pi_star
    assert pi_star_chain(spec.with_variant("minus")).pi_star >= base
    assert pi_star_chain(spec.with_variant("plus")).pi_star >= base


@pytest.mark.parametrize("n, value", [(1, 2), (2, 3), (5, 6)])
def test_two_optimal_path(n, value):
    assert two_optimal_path_value(n) == value


def test_two_optimal_path_range():
    with pytest.raises(GraphError):
        two_optimal_path_value(9)


def test_monotone_in_k():
    for g in (path_graph(3), cycle_graph(4), star_graph(3)):
        values = [pi_star(g, k).pi_star for k in (1, 2, 3)]
        assert values == sorted(values)


@pytest.mark.parametrize("g", [cycle_graph(5), star_graph(4), path_graph(5), wheel_graph(4)])
def test_oracle_agrees(g):
    assert pi_star(g).pi_star == oracle_pi_star(g)


def test_oracle_agrees_on_random_graphs():
    rng = random.Random(5)
    done = 0
    while done < 8:
        n = rng.randint(6, 7)
        g = Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.4])
        if not g.is_connected:
            continue
        assert pi_star(g).pi_star == oracle_pi_star(g)
        done += 1


def test_oracle_guards():
    with pytest.raises(GraphError):
        oracle_pi_star(path_graph(13))


def test_symmetry_pruning_changes_nothing():
    for g in (wheel_graph(6), complement_km_km(3), cycle_graph(8), small_special()):
        plain = pi_star(g)
        pruned = pi_star(g, automorphism_list=automorphisms(g))
        assert plain.pi_star == pruned.pi_star
        assert plain.witness == pruned.witness


def test_shards_do_not_change_the_answer():
    g = path_graph(7)
    one = pi_star(g)
    for shards in (2, 3, 5):
        res = pi_star(g, shards=shards)
        assert res.pi_star == one.pi_star and res.witness == one.witness
        # every level below the answer is scanned in full, whatever the sharding
        for a, b in zip(res.levels[:-1], one.levels[:-1]):
            assert a.checked + a.prefilter_rejects == b.checked + b.prefilter_rejects == a.total


def test_prefilter_is_sound():
    g = cycle_graph(7)
    assert pi_star(g, prefilter=False).witness == pi_star(g).witness
    res = pi_star(g, audit_every=1)
    assert sum(lv.audited for lv in res.levels) == res.prefilter_rejects


def test_budget_exceeded_is_explicit():
    res = pi_star(path_graph(9), budget=3)
    assert res.exceeded_budget and res.pi_star is None and res.witness is None


def test_report_fields():
    rep = pi_star(path_graph(3)).report("path:3")
    assert {"graph", "k", "pi_star", "witness", "candidates_checked", "prefilter_rejects",
            "wall_time"} <= set(rep)
    assert rep["witness"] == {"1": 2}


# -- decomposition ---------------------------------------------------------------


def test_decomposition_guard_on_upper_distribution():
    spec = homogeneous_chain(small_special(), 3)
    assert decomposition_check(spec, chain_upper_distribution(spec)) is None


def test_decomposition_guard_size_six():
    spec = homogeneous_chain(small_special(), 2)
    d = chain_upper_distribution(spec)
    assert d.size == 6 and decomposition_check(spec, d) is None


def test_decomposition_rejects_one_sided_distribution():
    spec = homogeneous_chain(small_special(), 3)
    g = build_chain(spec)
    d = Distribution(g, {0: 4, 1: 3})
    with pytest.raises(PebblingError, match="not solvable"):
        decomposition_check(spec, d)


def test_chain_value_does_not_depend_on_the_pair():
    block = circulant_graph(10, [2, 3])
    pairs = [(0, 1), (0, 4), (0, 5), (1, 2)]
    values = set()
    for p in pairs[:2]:
        for q in pairs:
            g = build_chain(make_chain_spec([block, block], [p, q]))
            values.add(pi_star(g, automorphism_list=automorphisms(g)).pi_star)
    assert values == {6}
