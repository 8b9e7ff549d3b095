import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given

from bdgrowth import bounds as B
from bdgrowth import chains as C
from bdgrowth import graph as G
from bdgrowth.graph import Graph
from bdgrowth.simulate import SimConfig, estimate_gamma
from bdgrowth.star import gamma_star_series

from conftest import connected_graphs

FIXTURES = {
    "K1": G.complete(1), "K5": G.complete(5), "C4": G.cycle(4), "C7": G.cycle(7),
    "P2": G.path(2), "P5": G.path(5), "S3": G.star(3), "S4": G.star(4), "S9": G.star(9),
    "petersen": G.petersen(), "butterfly": G.butterfly(), "R6": G.cocktail_party(6),
    "T114": G.theorem1_family(1, 1, 4), "T122": G.theorem1_family(1, 2, 2),
}


def test_spectral_radius_examples():
    assert B.spectral_radius_A_plus_I(G.complete(5)) == pytest.approx(5, abs=1e-10)
    assert B.spectral_radius_A_plus_I(G.cycle(7)) == pytest.approx(3, abs=1e-10)
    assert B.spectral_radius_A_plus_I(G.star(4)) == pytest.approx(1 + math.sqrt(3), abs=1e-10)
    assert B.spectral_radius_A_plus_I(G.petersen()) == pytest.approx(4, abs=1e-10)
    assert B.upper_bound(G.complete(5)) == pytest.approx(5 * math.e, abs=1e-9)


@given(connected_graphs(max_n=7))
def test_spectral_radius_matches_eigensolver(g):
    A = g.adjacency_matrix().astype(float) + np.eye(g.n)
    assert B.spectral_radius_A_plus_I(g) == pytest.approx(np.linalg.eigvalsh(A).max(), abs=1e-8)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_rho_equals_degree_plus_one_iff_regular(name):
    g = FIXTURES[name]
    m = G.metrics(g)
    rho = B.spectral_radius_A_plus_I(g)
    assert rho <= m.max_degree + 1 + 1e-10
    assert (abs(rho - (m.max_degree + 1)) < 1e-9) == m.is_regular


def test_weighted_graph_uses_clones():
    w = Graph(3, [(0, 1), (1, 2)], [2, 1, 2])
    assert B.spectral_radius_A_plus_I(w) == pytest.approx(
        B.spectral_radius_A_plus_I(G.clone_vertices(w)), abs=1e-12)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_bounds_enclose_known_values(name):
    g = FIXTURES[name]
    known = C.known_gamma(g)
    if known is None:
        pytest.skip("no exact value for this graph")
    rep = B.corollary1_sandwich(g)
    assert rep.gamma_ref == known
    assert rep.lower <= known + 1e-9 <= rep.upper
    assert rep.consistent


def test_upper_bound_dominates_all_exact_values():
    for key, val in C.theorem1_closed_forms.items():
        assert val <= B.upper_bound(G.theorem1_family(*key))
    for n in range(2, 13):
        assert gamma_star_series(n).value <= B.upper_bound(G.star(n))
    for n in range(1, 8):
        assert n <= B.upper_bound(G.complete(n))
    assert 2 + 2 / math.sqrt(3) <= B.upper_bound(G.cycle(4))


def test_limit_chain():
    r = B.lower_bound_chain(25)
    assert r.error < 1e-9
    assert B.lower_bound_limit() == pytest.approx((2 * math.e - 1) / (math.e - 1) ** 2, abs=0)
    for M in (2, 3, 7):
        c = B.lower_bound_chain(M)
        assert c.is_stationary()
        assert sum(c.p) == 1
        assert c.p[0] == 1 / sum(Fraction(1, math.factorial(k)) for k in range(1, M + 1))
    with pytest.raises(ValueError):
        B.lower_bound_chain(1)


def test_limit_chain_product_converges_monotonically():
    errs = [B.lower_bound_chain(M).error for M in range(3, 16)]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_finite_degree_chain():
    r = B.finite_m_lower_chain(1000, 10)
    assert abs(r.normalised - B.LIMIT) / B.LIMIT < 0.05
    vals = [B.finite_m_lower_chain(50, M).bound for M in range(2, 9)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert sum(r.p) == 1
    for bad in [(5, 5), (3, 8), (10, 1)]:
        with pytest.raises(ValueError):
            B.finite_m_lower_chain(*bad)


def test_renewal_rate_limit():
    # long-run rate of the idealised chain tends to m / (e - 2)
    r = B.finite_m_lower_chain(100_000, 14)
    assert r.time_average / r.m == pytest.approx(1 / (math.e - 2), rel=1e-3)
    assert r.rigorous <= r.time_average


@pytest.fixture(scope="module")
def petersen_mc():
    return estimate_gamma(G.petersen(), SimConfig(seed=17, steps=200_000, replicas=16))


def test_petersen_rigorous_bound(petersen_mc):
    for M in (2, 3):
        low = B.regular_girth5_lower_bound(G.petersen(), M)
        assert low <= petersen_mc.gamma_hat + 3 * petersen_mc.stderr
        assert low > 0


def test_petersen_product_expression_is_not_a_bound(petersen_mc):
    # the pre-limit product overshoots the simulated value at small degree
    prod = B.finite_m_lower_chain(4, 3).bound
    assert prod > petersen_mc.gamma_hat + 3 * petersen_mc.stderr


def test_degree_chain_rejects_other_graphs():
    for g in (G.cycle(4), G.star(4), G.complete(4)):
        with pytest.raises(ValueError):
            B.regular_girth5_lower_bound(g, 2)
    with pytest.raises(ValueError):
        B.regular_girth5_lower_bound(Graph(5, [(i, (i + 1) % 5) for i in range(5)], [2] * 5), 2)


def test_sandwich_complete_graph():
    rep = B.corollary1_sandwich(G.complete(5))
    assert rep.lower == pytest.approx(2.92204, abs=1e-5)
    assert rep.upper == pytest.approx(5 * math.e, abs=1e-9)
    assert rep.gamma_ref == 5 and rep.consistent


def test_sandwich_cycle_with_simulation():
    mc = estimate_gamma(G.cycle(6), SimConfig(seed=5, steps=100_000, replicas=16))
    rep = B.corollary1_sandwich(G.cycle(6), mc=mc)
    assert rep.lower == pytest.approx(2 + 1 / math.sqrt(5), abs=1e-9)
    assert rep.upper == pytest.approx(3 * math.e, abs=1e-9)
    assert rep.gamma_ref == mc.gamma_hat and rep.gamma_ref_stderr == mc.stderr
    assert rep.consistent
    d = rep.to_dict()
    assert d["consistent"] and len(d["witnesses"]) == 3


def test_sandwich_star_is_tight_below():
    rep = B.corollary1_sandwich(G.star(9))
    assert rep.lower == pytest.approx(rep.gamma_ref, abs=1e-12)
    assert rep.upper == pytest.approx(math.e * (1 + math.sqrt(8)), abs=1e-9)


def test_report_consistency_flag():
    assert not B.BoundReport(1.0, 2.0, 1.5, gamma_ref=2.5).consistent
    assert B.BoundReport(1.0, 2.0, 1.5, gamma_ref=2.05, gamma_ref_stderr=0.02).consistent
    assert not B.BoundReport(1.0, 1.0, 1.5).consistent
