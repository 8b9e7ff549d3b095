"""Spectral upper bound, star lower bound, and the growth of long cycles."""
import math

from bdgrowth import bounds, graph
from bdgrowth.simulate import SimConfig, estimate_gamma

for name, g in [("K5", graph.complete(5)), ("Petersen", graph.petersen()), ("S9", graph.star(9)),
                ("C12", graph.cycle(12))]:
    rep = bounds.corollary1_sandwich(g)
    ref = "" if rep.gamma_ref is None else f"  exact {rep.gamma_ref:.4f}"
    print(f"{name:9s} lower {rep.lower:.4f}  upper {rep.upper:.4f}{ref}")

print("\nlarge-degree constant (2e-1)/(e-1)^2 = %.6f" % bounds.LIMIT)
for M in (3, 6, 12, 25):
    print(f"  memory {M:2d}: {bounds.lower_bound_chain(M).product:.12f}")

print("\ncycles from n = 5 on stay inside (3.21, 5.35); the sequence creeps towards 4")
for n in (5, 8, 12, 20, 40):
    r = estimate_gamma(graph.cycle(n), SimConfig(seed=n, steps=400_000, replicas=16))
    print(f"  C{n:<3d} {r.gamma_hat:.4f} +- {r.stderr:.4f}")
print("  e * 3 = %.4f" % (3 * math.e))
