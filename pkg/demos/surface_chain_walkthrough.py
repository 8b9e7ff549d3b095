"""How the surface chain sees the growth process.

A state is the height vector minus its minimum.  One move grows a vertex,
renormalises, and pays reward 1 when the maximum height goes up.  Vertices
hidden below a higher vertex in every neighbourhood they belong to cannot
influence anything, so they are pushed to the bottom (lumping), which keeps
the truncated chains small.
"""
import numpy as np

from bdgrowth import chains, graph
from bdgrowth.simulate import step

g = graph.path(4)
s = chains.reset_state(g)
print("path on 4 vertices, reset state", s)
rng = np.random.default_rng(3)
h = np.array(s)
for y in rng.integers(0, g.n, 8):
    nxt = chains.surface_transition(g, s, int(y))
    r = chains.reward_g2(g, s, nxt)
    h = step(g, h, int(y))
    print(f"  grow {y}: {s} -> {nxt}  reward {r}  true heights {h.tolist()}  lumped {chains.lump_dominated(g, nxt)}")
    s = nxt

print("\ntruncation at height M: states and error for the 5-cycle")
exact = chains.surface_gamma(graph.cycle(5), tol=1e-10).gamma
for M in (5, 6, 7):
    plain = chains.build_truncated_surface_chain(graph.cycle(5), M, lump=False)
    e = chains.stationary(plain).gamma_value - exact
    print(f"  plain  M={M:2d}: {plain.size:6d} states, error {e:+.1e}")
for M in (6, 8, 10, 12, 14):
    lumped = chains.build_truncated_surface_chain(graph.cycle(5), M)
    e = chains.stationary(lumped).gamma_value - exact
    print(f"  lumped M={M:2d}: {lumped.size:6d} states, error {e:+.1e}")
print(f"  gamma(C5) = {exact:.10f}")

c = chains.build_truncated_surface_chain(graph.star(3), 16)
print("\nvariance constant of the 3-star: %.8f" % chains.sigma2_exact(c))
