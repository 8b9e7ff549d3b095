"""Growth parameter of next-nearest-neighbour ballistic deposition on finite graphs.

Modules
-------
graph      graphs with vertex intensities, metrics, families, reduction
simulate   Monte Carlo for the discrete and continuous processes
chains     surface Markov chain, solved chains and exact values
star       star graphs through balls-in-bins maximum loads
bounds     spectral upper bound and chain lower bounds
cli        command-line front end
"""
__version__ = "0.1.0"

from .graph import Graph, GraphMetrics, from_family, load_graph, metrics, reduce_irreducible
from .simulate import SimConfig, estimate_gamma
from .chains import (
    build_truncated_surface_chain,
    gamma_from_chain,
    gamma_theorem1,
    known_gamma,
    sigma2_exact,
    stationary,
    surface_gamma,
)
from .star import gamma_star_series
from .bounds import corollary1_sandwich, spectral_radius_A_plus_I, upper_bound
