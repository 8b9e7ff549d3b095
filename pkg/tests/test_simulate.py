import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bdgrowth import graph as G
from bdgrowth.graph import Graph
from bdgrowth.simulate import (SimConfig, clt_sample, contraction_run, coupled_run, estimate_gamma,
                               replica_rng, run_continuous, run_discrete, step, step_nn)

from conftest import connected_graphs

S3 = 2 + 1 / math.sqrt(5)
C4 = 2 + 2 / math.sqrt(3)


# -- single steps -------------------------------------------------------------

def test_step_examples():
    s3 = G.star(3)  # centre 0
    assert step(s3, [0, 0, 0], 0).tolist() == [1, 0, 0]
    p3 = G.path(3)  # leaf, centre, leaf
    assert step(p3, [0, 0, 5], 1).tolist() == [0, 6, 5]
    for x in range(3):
        out = step(G.complete(3), [2, 2, 2], x)
        assert out[x] == 3 and out.sum() == 7


def test_step_nn_examples():
    e = G.path(2)
    assert step_nn(e, [0, 0], 1).tolist() == [0, 1]
    assert step_nn(e, [0, 5], 0).tolist() == [5, 5]
    assert step_nn(e, [5, 0], 0).tolist() == [6, 0]


@pytest.mark.parametrize("fn", [step, step_nn])
def test_invalid_vertex(fn):
    for bad in (-1, 3, 1.0, "0"):
        with pytest.raises(ValueError):
            fn(G.path(3), [0, 0, 0], bad)


@given(connected_graphs(max_n=7), st.data())
def test_growth_is_monotone(g, data):
    h = np.array(data.draw(st.lists(st.integers(0, 9), min_size=g.n, max_size=g.n)))
    x = data.draw(st.integers(0, g.n - 1))
    for fn in (step, step_nn):
        out = fn(g, h, x)
        assert np.all(out >= h)
        changed = np.flatnonzero(out != h)
        assert set(changed) <= {x}
    assert step(g, h, x)[x] > h[x]
    assert np.all(step_nn(g, h, x) <= step(g, h, x))


def test_config_validation():
    for kw in [dict(), dict(steps=10, horizon=1.0), dict(steps=0), dict(horizon=0.0),
               dict(steps=5, replicas=0), dict(steps=5, intensity_mode="other"),
               dict(steps=5, seed=-1), dict(steps=5, checkpoints=0)]:
        with pytest.raises(ValueError):
            SimConfig(**kw)
    with pytest.raises(ValueError):
        run_discrete(G.path(2), SimConfig(horizon=1.0))
    with pytest.raises(ValueError):
        run_continuous(G.path(2), SimConfig(steps=1))
    with pytest.raises(ValueError):
        run_discrete(G.path(2), SimConfig(steps=1), rule="nnnn")


# -- trajectories --------------------------------------------------------------

def test_single_vertex():
    t = run_discrete(G.complete(1), SimConfig(steps=10))[0]
    assert t.max[-1] == 10 and t.min[-1] == 10


def shadow_run(g, seed, steps, rule=step):
    """Unnormalised replay of replica 0 using the same vertex stream."""
    rng = replica_rng(seed, 0)
    seq = rng.integers(0, g.n, size=steps, dtype=np.int64)
    h = np.zeros(g.n, dtype=np.int64)
    out = []
    for x in seq:
        h = rule(g, h, int(x))
        out.append((h.max(), h.min()))
    return np.array(out)


@given(connected_graphs(max_n=6), st.integers(0, 2**31))
def test_normalised_engine_matches_shadow(g, seed):
    steps, cps = 300, 10
    t = run_discrete(g, SimConfig(seed=seed, steps=steps, checkpoints=cps))[0]
    ref = shadow_run(g, seed, steps)
    idx = np.arange(1, cps + 1) * steps // cps - 1
    assert np.array_equal(t.max, ref[idx, 0])
    assert np.array_equal(t.min, ref[idx, 1])
    assert t.final_state.min() == 0
    t_nn = run_discrete(g, SimConfig(seed=seed, steps=steps, checkpoints=cps), rule="nn")[0]
    assert np.array_equal(t_nn.max, shadow_run(g, seed, steps, step_nn)[idx, 0])


def test_determinism_and_threads():
    cfg = SimConfig(seed=42, steps=20_000, replicas=6, checkpoints=4)
    a = run_discrete(G.petersen(), cfg)
    b = run_discrete(G.petersen(), cfg)
    c = run_discrete(G.petersen(), SimConfig(seed=42, steps=20_000, replicas=6, checkpoints=4,
                                             threads=3))
    for x, y, z in zip(a, b, c):
        assert np.array_equal(x.max, y.max) and np.array_equal(x.max, z.max)
        assert np.array_equal(x.min, z.min)
    d = run_discrete(G.petersen(), SimConfig(seed=43, steps=20_000, replicas=6, checkpoints=4))
    assert any(not np.array_equal(x.max, y.max) for x, y in zip(a, d))


def test_chunking_does_not_change_results():
    a = run_discrete(G.cycle(5), SimConfig(seed=3, steps=5000))[0]
    b = run_discrete(G.cycle(5), SimConfig(seed=3, steps=5000, chunk=77))[0]
    assert a.max[-1] == b.max[-1] and a.min[-1] == b.min[-1]


def test_initial_heights():
    t = run_discrete(G.path(2), SimConfig(steps=1), initial=[7, 3])[0]
    assert t.max[-1] == 8 and t.min[-1] in (3, 7)
    with pytest.raises(ValueError):
        run_discrete(G.path(2), SimConfig(steps=1), initial=[-1, 0])
    with pytest.raises(ValueError):
        run_discrete(G.path(2), SimConfig(steps=1), initial=[0, 0, 0])


def test_trajectory_csv():
    t = run_discrete(G.path(3), SimConfig(steps=100, checkpoints=4))[0]
    lines = t.to_csv().strip().splitlines()
    assert lines[0] == "replica,clock,max,min,offset"
    assert len(lines) == 5


# -- estimates -------------------------------------------------------------------

def test_complete_graph_growth_is_exact():
    r = estimate_gamma(G.complete(3), SimConfig(seed=1, steps=3000, replicas=4))
    assert r.gamma_hat == 3 and r.stderr == 0 and r.sigma2_hat == 0
    assert r.covers(3)


def test_cycle4_discrete():
    r = estimate_gamma(G.cycle(4), SimConfig(seed=5, steps=1_000_000, replicas=8))
    assert abs(r.gamma_hat - C4) < 3 * r.stderr


def test_butterfly_interval():
    r = estimate_gamma(G.butterfly(), SimConfig(seed=2, steps=200_000, replicas=16))
    assert r.covers(11 / 3)
    assert r.stderr >= 0 and r.ci95[0] <= r.gamma_hat <= r.ci95[1] and r.sigma2_hat >= 0


def test_weighted_graph_matches_clone():
    w = Graph(3, [(0, 1), (1, 2)], [2, 1, 2])
    r = estimate_gamma(w, SimConfig(seed=9, steps=200_000, replicas=16))
    assert abs(r.gamma_hat - 11 / 3) < 3 * r.stderr


def test_uniform_mode_ignores_intensities():
    w = Graph(3, [(0, 1), (1, 2)], [5, 1, 5])
    r = estimate_gamma(w, SimConfig(seed=4, steps=200_000, replicas=16, intensity_mode="uniform"))
    assert abs(r.gamma_hat - S3) < 3 * r.stderr


def test_single_replica_flags_missing_stderr():
    r = estimate_gamma(G.cycle(4), SimConfig(steps=1000))
    assert r.no_stderr and math.isnan(r.stderr)


def test_report_fields():
    r = estimate_gamma(G.path(3), SimConfig(seed=7, steps=1000, replicas=3))
    d = r.to_dict()
    assert set(d) == {"gamma_hat", "stderr", "ci95_lo", "ci95_hi", "sigma2_hat", "seed",
                      "replicas", "steps", "horizon", "rule"}
    assert d["seed"] == 7 and d["steps"] == 1000


def test_batch_means():
    cfg = SimConfig(seed=1, steps=400_000, replicas=4, checkpoints=40, batch_means=True)
    r = estimate_gamma(G.star(3), cfg)
    assert 0.05 < r.sigma2_hat < 0.25
    with pytest.raises(ValueError):
        estimate_gamma(G.star(3), SimConfig(steps=10, batch_means=True))


def test_continuous_single_vertex_is_poisson():
    r = estimate_gamma(G.complete(1), SimConfig(seed=3, horizon=10_000.0, replicas=20))
    assert abs(r.gamma_hat - 1) < 3 * r.stderr
    assert r.horizon == 10_000.0 and r.steps is None


def test_continuous_star3():
    r = estimate_gamma(G.star(3), SimConfig(seed=8, horizon=1e5, replicas=20))
    assert abs(r.gamma_hat - S3) < 3 * r.stderr


def test_continuous_and_discrete_agree():
    c5 = G.cycle(5)
    a = estimate_gamma(c5, SimConfig(seed=11, horizon=1e5, replicas=20))
    b = estimate_gamma(c5, SimConfig(seed=12, steps=500_000, replicas=20))
    assert abs(a.gamma_hat - b.gamma_hat) < 3 * math.hypot(a.stderr, b.stderr)


def test_continuous_jump_counts():
    trajs = run_continuous(G.cycle(4), SimConfig(seed=0, horizon=50.0, replicas=200))
    jumps = np.array([t.jumps[-1] for t in trajs])
    # Poisson(4 * 50): mean 200, sd ~14
    assert abs(jumps.mean() - 200) < 3 * math.sqrt(200 / 200)


# -- couplings ----------------------------------------------------------------------

def test_coupling_cycle_in_complete():
    rep = coupled_run(G.cycle(4), G.complete(4), None, SimConfig(seed=1, steps=200_000, replicas=8))
    assert rep.dominated and rep.violations == 0
    assert rep.gamma_sub.gamma_hat < rep.gamma_sup.gamma_hat


def test_coupling_identical_graphs():
    rep = coupled_run(G.petersen(), G.petersen(), list(range(10)),
                      SimConfig(seed=3, steps=5000, replicas=2), keep_paths=True)
    assert rep.identical and rep.dominated
    assert np.array_equal(rep.max_sub[0], rep.max_sup[0])


def test_coupling_added_leaf():
    rep = coupled_run(G.star(3), G.star(4), [0, 1, 2], SimConfig(seed=2, steps=20_000, replicas=4),
                      keep_paths=True)
    assert rep.dominated and rep.violations == 0
    for a, b in zip(rep.max_sub, rep.max_sup):
        assert np.all(a <= b)


def test_coupling_rejects_bad_embedding():
    with pytest.raises(ValueError):
        coupled_run(G.complete(4), G.cycle(4), None, SimConfig(steps=10))
    with pytest.raises(ValueError):
        coupled_run(G.path(3), G.path(3), [0, 0, 1], SimConfig(steps=10))


@given(connected_graphs(min_n=2, max_n=7), st.integers(0, 2**31))
def test_nn_below_nnn_pointwise(g, seed):
    rng = np.random.default_rng(seed)
    a = np.zeros(g.n, dtype=np.int64)
    b = np.zeros(g.n, dtype=np.int64)
    for x in rng.integers(0, g.n, 300):
        a = step_nn(g, a, int(x))
        b = step(g, b, int(x))
        assert np.all(a <= b)
    rep = coupled_run(g, g, list(range(g.n)), SimConfig(seed=seed, steps=1000),
                      rule="nn", rule_prime="nnn")
    assert rep.dominated and rep.violations == 0


@given(connected_graphs(min_n=2, max_n=7), st.integers(0, 2**31), st.data())
def test_contraction(g, seed, data):
    ha = data.draw(st.lists(st.integers(0, 6), min_size=g.n, max_size=g.n))
    hb = data.draw(st.lists(st.integers(0, 6), min_size=g.n, max_size=g.n))
    d = contraction_run(g, ha, hb, 1000, seed=seed)
    start = max(abs(x - y) for x, y in zip(ha, hb))
    assert d[0] <= start
    assert np.all(np.diff(d) <= 0)


# -- CLT sampling ------------------------------------------------------------------

def test_clt_complete_graph_degenerate():
    z = clt_sample(G.complete(5), SimConfig(seed=0, steps=10_000, replicas=50))
    assert np.all(z == 0)


def test_clt_uses_estimate_when_gamma_unknown():
    z = clt_sample(G.cycle(6), SimConfig(seed=1, steps=20_000, replicas=40))
    assert abs(z.mean()) < 4 * z.std(ddof=1) / math.sqrt(40) + 0.05
    z_min = clt_sample(G.star(3), SimConfig(seed=1, steps=20_000, replicas=40), use_min=True)
    assert z_min.size == 40
