"""Lower-bound witness families and the randomized high-girth experiment."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np

from .construct import chain_upper_distribution
from .engine import Distribution, is_k_solvable, reachable_set
from .graphs import (ChainSpec, Graph, GraphError, build_chain, complement_km_km, diameter,
                     girth, homogeneous_chain, is_special, k_neighborhood, parse_graph)

FIXTURES = ("pg2_3", "pg2_4")


class LabError(ValueError):
    pass


def load_fixture(name: str) -> Graph:
    """High-girth test graphs shipped with the package (projective plane incidence graphs)."""
    if name not in FIXTURES:
        raise LabError(f"unknown fixture {name!r}; have {', '.join(FIXTURES)}")
    try:
        text = resources.files("pebbling").joinpath("data", f"{name}.txt").read_text()
    except FileNotFoundError as exc:
        raise LabError(f"fixture {name} is missing from the installation") from exc
    return parse_graph(text)


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        # floats go through their shortest repr so 0.1 means 1/10
        return Fraction(repr(x))
    return Fraction(x)


# -- witness families ------------------------------------------------------------


@dataclass(frozen=True)
class WitnessParams:
    epsilon: Fraction
    a: float
    m: int
    d: int | None = None


def _pick_m(a: float, floor: int) -> int:
    # smallest integer strictly above max(a/(a-1), floor)
    bound = max(a / (a - 1), floor)
    return math.floor(bound) + 1


def diameter2_witness(epsilon, verify_special: bool = True) -> tuple[Graph, dict]:
    """complement(Km x Km) with pi* = 4 > (4 - eps) n / (delta + 1)."""
    eps = _as_fraction(epsilon)
    if not 0 < eps < 4:
        raise LabError("epsilon must lie in (0, 4)")
    a = math.sqrt(4 / (4 - eps))
    m = max(_pick_m(a, 2), 4)  # the complement is only special from m = 4 on
    rest = 4 - eps
    # float only picks m; the inequality itself is checked in exact rationals
    while not 4 * ((m - 1) ** 2 + 1) > rest * m * m:
        m += 1
    n, delta = m * m, (m - 1) ** 2
    lhs, rhs = 4 * (delta + 1), rest * n
    g = complement_km_km(m)
    rec = {
        "family": "complement-km-km",
        "epsilon": str(eps),
        "a": a,
        "m": m,
        "n": n,
        "delta": delta,
        "pi_star": 4,
        "lhs": str(lhs),
        "rhs": str(rhs),
        "inequality": f"4*(delta+1) = {lhs} > (4-eps)*n = {rhs}",
        "a_squared_exceeds_ratio": 4 * (m - 1) ** 2 > rest * m * m,
        "verified": lhs > rhs,
    }
    if g.n != n or g.min_degree != delta:
        raise LabError("generated graph does not have the expected order and degree")
    if verify_special:
        rep = is_special(g)
        rec["special"] = rep.is_special
        rec["diameter"] = diameter(g)
        rec["verified"] = rec["verified"] and rep.is_special and rec["diameter"] == 2
    if not rec["verified"]:
        raise LabError(f"witness for epsilon={eps} failed verification")
    return g, rec


def chain_witness(epsilon, d: int, check_diameter: bool | None = None) -> tuple[ChainSpec, dict]:
    """G_{3d} over complement(Km x Km) blocks: pi* = 8d against (8/3 - eps) n / (delta + 1)."""
    eps = _as_fraction(epsilon)
    third = Fraction(8, 3)
    if not 0 < eps < third:
        raise LabError("epsilon must lie in (0, 8/3)")
    if d < 1:
        raise LabError("d must be positive")
    a = math.sqrt(float(third / (third - eps)))
    m = _pick_m(a, 3)
    rest = third - eps
    while not 8 * d * ((m - 1) ** 2 + 1) > rest * 3 * d * m * m:
        m += 1
    n, delta = 3 * d * m * m, (m - 1) ** 2
    spec = homogeneous_chain(complement_km_km(m), 3 * d)
    lhs, rhs = 8 * d * (delta + 1), rest * n
    rec = {
        "family": "chain",
        "epsilon": str(eps),
        "a": a,
        "m": m,
        "d": d,
        "blocks": 3 * d,
        "n": n,
        "delta": delta,
        "pi_star": 8 * d,
        "lhs": str(lhs),
        "rhs": str(rhs),
        "inequality": f"8d*(delta+1) = {lhs} > (8/3-eps)*n = {rhs}",
        "a_squared_exceeds_ratio": third * (m - 1) ** 2 > rest * m * m,
        "verified": lhs > rhs,
    }
    if check_diameter is None:
        check_diameter = d <= 2
    if check_diameter:
        g = build_chain(spec)
        if g.n != n or g.min_degree != delta:
            raise LabError("chain does not have the expected order and degree")
        rec["diameter"] = diameter(g)
        # the upper half of pi* = 8d: the explicit chain distribution solves G_{3d}
        upper = chain_upper_distribution(spec)
        rec["upper_solvable"] = upper.size == 8 * d and is_k_solvable(g, upper)[0]
        rec["verified"] = rec["verified"] and rec["diameter"] == 9 * d - 1 and rec["upper_solvable"]
    if not rec["verified"]:
        raise LabError(f"chain witness for epsilon={eps}, d={d} failed verification")
    return spec, rec


# -- high girth --------------------------------------------------------------------


def ball_size(k: int, t: int) -> int:
    """Vertices within distance t of a vertex of a k-regular tree."""
    if k < 3 or t < 0:
        raise LabError("need k >= 3 and t >= 0")
    return 1 + k * ((k - 1) ** t - 1) // (k - 2)


def pile_probability(k: int, t: int) -> float:
    L = ball_size(k, t)
    return math.log(L / 2 ** t) / L


def analytic_bound(k: int, t: int, p: float | None = None) -> float:
    """Expected pebbles per vertex: 2^t p + (1-p)^L."""
    L = ball_size(k, t)
    if p is None:
        p = pile_probability(k, t)
    return 2 ** t * p + (1 - p) ** L


def final_bound(k: int, t: int) -> float:
    return (2 + t * math.log(k - 1)) * (2 / (k - 1)) ** t


def l_bracket_holds(k: int, t: int) -> bool:
    L = ball_size(k, t)
    return (k - 1) ** t < L < 3 * (k - 1) ** t


@dataclass(frozen=True)
class GirthParams:
    k: int
    t: int
    trials: int = 200
    seed: int = 0
    p: float | None = None

    @property
    def L(self) -> int:
        return ball_size(self.k, self.t)

    @property
    def prob(self) -> float:
        return self.p if self.p is not None else pile_probability(self.k, self.t)

    def __post_init__(self) -> None:
        if self.k < 4:
            raise LabError("k must be at least 4")
        if self.t < 1:
            raise LabError("t must be positive")
        if self.trials < 1:
            raise LabError("trials must be positive")
        if not 0 <= self.seed < 1 << 64:
            raise LabError("seed must be an unsigned 64-bit integer")
        if not 0 <= self.prob <= 1:
            raise LabError("pile probability outside [0, 1]")


@dataclass
class GirthReport:
    descriptor: str
    params: GirthParams
    n: int
    sizes: list[int] = field(default_factory=list)
    verified: list[bool] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.sizes))

    @property
    def stderr(self) -> float:
        if len(self.sizes) < 2:
            return 0.0
        return float(np.std(self.sizes, ddof=1) / math.sqrt(len(self.sizes)))

    @property
    def analytic(self) -> float:
        return analytic_bound(self.params.k, self.params.t, self.params.prob) * self.n

    @property
    def final(self) -> float:
        return final_bound(self.params.k, self.params.t) * self.n

    def to_dict(self) -> dict:
        p = self.params
        return {
            "graph": self.descriptor,
            "k": p.k,
            "t": p.t,
            "L": p.L,
            "p": p.prob,
            "seed": p.seed,
            "trials": p.trials,
            "mean_pebbles": self.mean,
            "stderr": self.stderr,
            "analytic_bound": self.analytic,
            "final_bound": self.final,
            "all_verified": all(self.verified),
            "per_trial_sizes": list(self.sizes),
        }


def _trial(g: Graph, params: GirthParams, rng: np.random.Generator, balls: list[frozenset[int]],
           verify: bool) -> tuple[Distribution, bool]:
    t = params.t
    piles = rng.random(g.n) < params.prob
    counts = [(1 << t) if x else 0 for x in piles]
    covered: set[int] = set()
    for v in range(g.n):
        if piles[v]:
            covered |= balls[v]
    step1 = Distribution(g, counts)
    rest = [v for v in range(g.n) if v not in covered]
    if rest and any(counts):
        reach = reachable_set(g, step1, 1, order=rest)
        rest = [v for v in rest if v not in reach]
    for v in rest:
        counts[v] += 1
    final = Distribution(g, counts)
    ok = is_k_solvable(g, final)[0] if verify else True
    return final, ok


def girth_experiment(g: Graph, params: GirthParams, descriptor: str = "",
                     verify_every: int = 1, strict: bool = True) -> GirthReport:
    """Place 2^t piles with probability p, then cover whatever the piles cannot reach."""
    g.require_connected()
    gi = girth(g)
    if g.min_degree < params.k or gi < 2 * params.t + 1:
        msg = f"need min degree >= {params.k} and girth >= {2 * params.t + 1}"
        if strict:
            raise LabError(msg)
        warnings.warn(msg + "; the analytic bound does not apply", stacklevel=2)
    balls = [k_neighborhood(g, [v], params.t) for v in range(g.n)]
    seeds = np.random.SeedSequence(params.seed).spawn(params.trials)
    rep = GirthReport(descriptor, params, g.n)
    for i, ss in enumerate(seeds):
        rng = np.random.Generator(np.random.Philox(ss))
        dist, ok = _trial(g, params, rng, balls, verify_every > 0 and i % verify_every == 0)
        rep.sizes.append(dist.size)
        rep.verified.append(ok)
        if not ok:
            raise LabError(f"trial {i} produced an unsolvable distribution {dict(dist.items())}")
    return rep


# -- domination corollary ---------------------------------------------------------


def covering_quadruple(g: Graph) -> tuple[int, int, int, int] | None:
    """Some (x, u, v, w) with N2[x] | N[u] | N[v] | N[w] = V, or None."""
    full = (1 << g.n) - 1
    n1 = [sum(1 << y for y in g.closed_nbhd(v)) for v in range(g.n)]
    n2 = [sum(1 << y for y in k_neighborhood(g, [v], 2)) for v in range(g.n)]
    for x in range(g.n):
        if n2[x] == full:
            return x, x, x, x
        for u, v, w in itertools.combinations_with_replacement(range(g.n), 3):
            if n2[x] | n1[u] | n1[v] | n1[w] == full:
                return x, u, v, w
    return None


def degree_corollary_check(g: Graph) -> bool:
    """Without a covering quadruple a diameter-3 graph must have 32(delta+1) <= 15n."""
    g.require_connected()
    if diameter(g) != 3:
        raise GraphError("graph must have diameter 3")
    if g.n > 12:
        raise LabError("exhaustive check limited to n <= 12")
    if covering_quadruple(g) is not None:
        return True
    return 32 * (g.min_degree + 1) <= 15 * g.n
