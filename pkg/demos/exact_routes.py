"""Four independent exact routes to the growth parameter of small graphs.

Run with ``python3 demos/exact_routes.py``.
"""
import math

from bdgrowth import chains, graph, star

S3 = 2 + 1 / math.sqrt(5)

print("3-star (2 + 1/sqrt 5 = %.15f)" % S3)
print("  max-load series         %.15f" % star.gamma_star_series(3).value)
print("  Poisson quadrature      %.15f" % star.gamma_star_poisson(3))
print("  generating function     %.15f" % star.gamma_via_g(1 / 9, 1 / 3))
print("  reduced chain, M=40     %.15f" % chains.stationary(chains.s3_reduced_chain(40)).gamma_value)
sol = chains.stationary(chains.build_truncated_surface_chain(graph.star(3), 16))
print("  surface chain, M=16     %.15f" % sol.gamma_value)

print("\nbutterfly (11/3)")
print("  closed form             %.15f" % chains.gamma_theorem1(1, 2, 2))
print("  generating function     %.15f" % star.gamma_via_g(2 / 25, 2 / 5))
for M in (6, 8, 10, 12):
    c = chains.build_truncated_surface_chain(graph.butterfly(), M)
    err = chains.stationary(c).gamma_value - 11 / 3
    print(f"  surface chain, M={M:<2}    {c.size:4d} states, error {err:+.2e}")

print("\ndominant vertices plus cocktail party graphs")
for key, value in sorted(chains.theorem1_closed_forms.items()):
    delta = chains.stationary(chains.delta_chain_theorem1(*key, M=60)).gamma_value
    print(f"  (N, n, m) = {key}: closed form {value:.12f}, two-class chain {delta:.12f}")

print("\nnearest-neighbour rule on complete graphs")
for n in range(1, 6):
    r = chains.gamma_nn_complete(n)
    print(f"  K{n}: {r.exact} = {r.value:.12f}")
