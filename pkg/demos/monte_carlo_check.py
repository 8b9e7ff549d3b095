"""Monte Carlo estimates against exact values, and the Gaussian fluctuations.

Takes about ten seconds on one core.
"""
import math

from scipy import stats

from bdgrowth import chains, graph
from bdgrowth.simulate import SimConfig, clt_sample, estimate_gamma

cases = [("K4", graph.complete(4)), ("C4", graph.cycle(4)), ("S3", graph.star(3)),
         ("butterfly", graph.butterfly()), ("Petersen", graph.petersen())]
for name, g in cases:
    r = estimate_gamma(g, SimConfig(seed=1, steps=1_000_000, replicas=16))
    exact = chains.known_gamma(g)
    ref = "unknown" if exact is None else f"{exact:.5f}"
    print(f"{name:10s} {r.gamma_hat:.5f} +- {r.stderr:.5f}   exact {ref}")

n, R = 100_000, 400
s3 = graph.star(3)
gamma = chains.known_gamma(s3)
z = clt_sample(s3, SimConfig(seed=2, steps=n, replicas=R), gamma=gamma)
z_min = clt_sample(s3, SimConfig(seed=3, steps=n, replicas=R), gamma=gamma, use_min=True)
var = z.var(ddof=1)
print(f"\n3-star, {R} replicas of {n} steps")
print(f"  standardised max: mean {z.mean():+.4f}, variance {var:.4f}, "
      f"KS p-value {stats.kstest(z, 'norm', args=(0, math.sqrt(var))).pvalue:.3f}")
print(f"  standardised min: variance {z_min.var(ddof=1):.4f}")
print(f"  exact variance constant {chains.sigma2_exact(chains.build_truncated_surface_chain(s3, 16)):.4f}")
