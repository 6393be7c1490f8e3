import math
from fractions import Fraction

import pytest

from pebbling.graphs import (
    Graph, GraphError, build_chain, complement_km_km, cycle_graph, diameter, girth, path_graph,
    homogeneous_chain, k_neighborhood,
)
from pebbling.lab import (
    FIXTURES, GirthParams, _as_fraction, LabError, analytic_bound, ball_size, chain_witness, covering_quadruple,
    degree_corollary_check, diameter2_witness, final_bound, girth_experiment, l_bracket_holds,
    load_fixture, pile_probability,
)


# -- witnesses -----------------------------------------------------------------------


@pytest.mark.parametrize("eps, m, lhs, rhs", [(1, 8, 200, 192), (2, 4, 40, 32), (3, 4, 40, 16)])
def test_diameter2_witness(eps, m, lhs, rhs):
    g, rec = diameter2_witness(eps)
    assert rec["m"] == m and rec["n"] == m * m == g.n
    assert Fraction(rec["lhs"]) == lhs and Fraction(rec["rhs"]) == rhs
    assert rec["verified"] and rec["special"] and rec["diameter"] == 2


def test_diameter2_witness_eps1_a():
    _, rec = diameter2_witness(1)
    assert rec["a"] == pytest.approx(1.1547, abs=1e-4)
    assert rec["a"] / (rec["a"] - 1) == pytest.approx(7.46, abs=0.01)


def test_diameter2_witness_clamps_to_four():
    _, rec = diameter2_witness(Fraction(39, 10))
    assert rec["m"] == 4 and rec["verified"]
    _, rec = diameter2_witness(0.5, verify_special=False)
    assert rec["m"] == 16 and rec["epsilon"] == "1/2"


def test_float_epsilon_is_read_as_written():
    assert _as_fraction(0.1) == Fraction(1, 10)


@pytest.mark.parametrize("eps", [0, 4, -1, Fraction(9, 2)])
def test_diameter2_witness_range(eps):
    with pytest.raises(LabError):
        diameter2_witness(eps)


@pytest.mark.parametrize("d, m, n, diam", [(1, 5, 75, 8), (2, 5, 150, 17)])
def test_chain_witness(d, m, n, diam):
    spec, rec = chain_witness(1, d)
    assert rec["m"] == m and rec["n"] == n and rec["blocks"] == 3 * d
    assert rec["diameter"] == diam == 9 * d - 1
    assert rec["pi_star"] == 8 * d and rec["upper_solvable"] and rec["verified"]
    assert Fraction(rec["lhs"]) > Fraction(rec["rhs"])


def test_chain_witness_m4_diameter():
    chain = build_chain(homogeneous_chain(complement_km_km(4), 3))
    assert diameter(chain) == 8


def test_chain_witness_range():
    with pytest.raises(LabError):
        chain_witness(Fraction(8, 3), 1)
    with pytest.raises(LabError):
        chain_witness(1, 0)


def test_chain_witness_large_d_skips_bfs():
    _, rec = chain_witness(1, 5)
    assert "diameter" not in rec and rec["verified"]


# -- girth formulas --------------------------------------------------------------------


def test_ball_size_t1_k4():
    assert ball_size(4, 1) == 5
    assert pile_probability(4, 1) == pytest.approx(math.log(5 / 2) / 5)
    assert pile_probability(4, 1) == pytest.approx(0.183, abs=1e-3)


def test_ball_size_matches_tree_count():
    # independent count: 1 + k + k(k-1) + ... + k(k-1)^(t-1)
    for k in range(3, 9):
        for t in range(0, 8):
            assert ball_size(k, t) == 1 + sum(k * (k - 1) ** i for i in range(t))


def test_l_bracket():
    assert all(l_bracket_holds(k, t) for k in range(4, 9) for t in range(1, 11))


def test_final_bound_decreases():
    for k in range(4, 9):
        vals = [final_bound(k, t) for t in range(1, 40)]
        # after the first few terms the sequence is decreasing and tends to zero
        tail = vals[5:]
        assert all(a > b for a, b in zip(tail, tail[1:])) and tail[-1] < 1e-3


def test_analytic_bound_below_final():
    for k in range(4, 9):
        for t in range(1, 6):
            assert analytic_bound(k, t) <= final_bound(k, t) + 1e-12


def test_girth_params_validation():
    with pytest.raises(LabError):
        GirthParams(k=3, t=1)
    with pytest.raises(LabError):
        GirthParams(k=4, t=0)
    with pytest.raises(LabError):
        GirthParams(k=4, t=1, seed=-1)
    with pytest.raises(LabError):
        GirthParams(k=4, t=1, p=1.5)
    assert GirthParams(k=4, t=1).L == 5


# -- fixtures ------------------------------------------------------------------------


@pytest.mark.parametrize("name, n, m, deg", [("pg2_3", 26, 52, 4), ("pg2_4", 42, 105, 5)])
def test_fixtures(name, n, m, deg):
    g = load_fixture(name)
    assert (g.n, g.m) == (n, m)
    assert {g.degree(v) for v in range(n)} == {deg}
    assert girth(g) == 6 and diameter(g) == 3


def test_unknown_fixture():
    with pytest.raises(LabError, match="unknown fixture"):
        load_fixture("petersen")
    assert FIXTURES == ("pg2_3", "pg2_4")


# -- experiment ------------------------------------------------------------------------


def test_girth_experiment_small():
    g = load_fixture("pg2_3")
    rep = girth_experiment(g, GirthParams(k=4, t=1, trials=40, seed=7), "fixture:pg2_3")
    assert all(rep.verified) and len(rep.sizes) == 40
    assert rep.mean <= rep.analytic + 3 * rep.stderr
    d = rep.to_dict()
    assert d["seed"] == 7 and d["L"] == 5 and d["per_trial_sizes"] == rep.sizes


def test_girth_experiment_is_reproducible():
    g = load_fixture("pg2_3")
    a = girth_experiment(g, GirthParams(k=4, t=1, trials=15, seed=3))
    b = girth_experiment(g, GirthParams(k=4, t=1, trials=15, seed=3))
    c = girth_experiment(g, GirthParams(k=4, t=1, trials=15, seed=4))
    assert a.sizes == b.sizes and a.sizes != c.sizes


def test_girth_experiment_no_piles_places_n():
    g = load_fixture("pg2_3")
    rep = girth_experiment(g, GirthParams(k=4, t=1, trials=3, p=0.0))
    assert rep.sizes == [g.n] * 3


def test_girth_experiment_preconditions():
    g = cycle_graph(9)
    with pytest.raises(LabError):
        girth_experiment(g, GirthParams(k=4, t=1, trials=2))
    with pytest.warns(UserWarning):
        rep = girth_experiment(g, GirthParams(k=4, t=1, trials=5), strict=False)
    assert all(rep.verified)


# -- corollary ------------------------------------------------------------------------


def test_quadruple_on_p4():
    g = path_graph(4)
    x, u, v, w = covering_quadruple(g)
    covered = k_neighborhood(g, [x], 2) | g.closed_nbhd(u) | g.closed_nbhd(v) | g.closed_nbhd(w)
    assert covered == frozenset(range(4))
    # a centre vertex covers everything within distance two on its own
    assert k_neighborhood(g, [1], 2) == frozenset(range(4))
    assert degree_corollary_check(path_graph(4))


def test_corollary_requires_diameter_three():
    with pytest.raises(GraphError):
        degree_corollary_check(path_graph(5))


def test_corollary_sweep_has_no_counterexample():
    import random
    rng = random.Random(9)
    done = 0
    while done < 60:
        n = rng.randint(4, 12)
        g = Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.35])
        if not g.is_connected or diameter(g) != 3:
            continue
        assert degree_corollary_check(g)
        done += 1
