"""Spectral upper bound and chain-based lower bounds for the growth parameter.

Upper bound: ``gamma(G) <= e * rho`` where ``rho`` is the Perron eigenvalue
of ``A + I``.  Lower bounds: the star on ``Delta + 1`` vertices embeds in
any graph of maximal degree ``Delta``, so ``gamma(G) >= gamma(S_{Delta+1})``;
for regular graphs of girth at least 5 a slowed-down growth process that
remembers at most ``M`` neighbours gives a bound of order ``Delta``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graph import Graph, clone_vertices, metrics

__all__ = [
    "BoundReport",
    "LowerBoundChain",
    "FiniteChainBound",
    "spectral_radius_A_plus_I",
    "upper_bound",
    "lower_bound_chain",
    "lower_bound_limit",
    "finite_m_lower_chain",
    "regular_girth5_lower_bound",
    "corollary1_sandwich",
]

LIMIT = (2 * math.e - 1) / (math.e - 1) ** 2


def _unit(g: Graph) -> Graph:
    # intensities are equivalent to cloned vertices
    return g if g.is_unit else clone_vertices(g)


def spectral_radius_A_plus_I(g: Graph, tol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Perron eigenvalue of ``A + I`` by power iteration from the all-ones
    vector; stops when successive Rayleigh quotients differ by < ``tol``.

    Graphs with intensities are first expanded into their cloned unit graph.
    """
    h = _unit(g)
    B = h.adjacency_matrix().astype(float) + np.eye(h.n)
    x = np.ones(h.n) / math.sqrt(h.n)
    lam = float(x @ B @ x)
    for _ in range(max_iter):
        y = B @ x
        x = y / np.linalg.norm(y)
        new = float(x @ B @ x)
        if abs(new - lam) < tol:
            return new
        lam = new
    raise ArithmeticError(f"power iteration did not converge in {max_iter} steps "
                          f"(last change {abs(new - lam):.3e})")


def upper_bound(g: Graph, tol: float = 1e-12) -> float:
    """``e * rho(A + I)``."""
    return math.e * spectral_radius_A_plus_I(g, tol)


@dataclass(frozen=True)
class LowerBoundChain:
    """Limit chain for large degree: from ``k`` go to ``k+1`` with probability
    ``1/(k+1)`` and back to 1 with probability ``k/(k+1)``; ``M`` returns to 1."""

    M: int
    p: tuple
    factor_rate: Fraction
    factor_reward: Fraction
    product: float

    @property
    def error(self) -> float:
        return abs(self.product - LIMIT)

    def transition_matrix(self) -> list[list[Fraction]]:
        M = self.M
        P = [[Fraction(0)] * M for _ in range(M)]
        for k in range(1, M):
            P[k - 1][k] = Fraction(1, k + 1)
            P[k - 1][0] += Fraction(k, k + 1)
        P[M - 1][0] = Fraction(1)
        return P

    def is_stationary(self) -> bool:
        P = self.transition_matrix()
        M = self.M
        return all(sum(self.p[i] * P[i][j] for i in range(M)) == self.p[j] for j in range(M))


def lower_bound_chain(M: int) -> LowerBoundChain:
    """``p_M(k) = 1 / (k! sum_{j<=M} 1/j!)`` and the product
    ``(sum_{k<M} p(k)(k+1)) * (sum_{k<M} p(k) k/(k+1))`` in exact arithmetic.
    The product tends to ``(2e-1)/(e-1)**2`` as ``M`` grows."""
    if M < 2:
        raise ValueError("M must be >= 2")
    w = [Fraction(1, math.factorial(k)) for k in range(1, M + 1)]
    total = sum(w)
    p = tuple(x / total for x in w)
    a = sum(p[k - 1] * (k + 1) for k in range(1, M))
    b = sum(p[k - 1] * Fraction(k, k + 1) for k in range(1, M))
    return LowerBoundChain(M, p, a, b, float(a * b))


def lower_bound_limit() -> float:
    return LIMIT


@dataclass(frozen=True)
class FiniteChainBound:
    """Degree-chain quantities for degree ``m - 1`` and memory ``M``.

    ``bound`` is the product of the mean jump rate and the mean probability
    that a jump raises the maximum, both under the stationary law ``p`` of
    the jump chain with the idealised rates ``km`` (back to 1) and ``m - k``
    (up).  Divided by ``m`` it tends to ``(2e-1)/(e-1)**2`` as ``m`` and
    then ``M`` grow.  It is an asymptotic expression: a product of two means
    is not the long-run rate of the process, and the idealised rates
    overcount moves when ``m`` is small.

    ``time_average`` is the long-run rate of max increments for the
    idealised rates, ``E_p[reward] / E_p[1/rate]``.

    ``rigorous`` is the long-run rate with the moves counted exactly in a
    regular graph of girth at least 5: back to 1 at rate ``k(m-2)`` (a
    neighbour, other than the middle vertex, of the top vertex or of one of
    the ``k-1`` remembered vertices grows) and up at rate ``m-1-k`` (another
    neighbour of the middle vertex grows).  The slowed process never
    outgrows the real one, so this is a lower bound on ``gamma``.
    """

    m: int
    M: int
    p: tuple
    bound: float
    time_average: float
    rigorous: float

    @property
    def normalised(self) -> float:
        return self.bound / self.m


def _degree_chain(up, back):
    rate = [u + b for u, b in zip(up, back)]
    # jump chain: p(k+1) = p(k) * up(k)/rate(k)
    w = [Fraction(1)]
    for k in range(len(up) - 1):
        w.append(w[-1] * up[k] / rate[k])
    total = sum(w)
    p = tuple(x / total for x in w)
    mean_rate = sum(pk * r for pk, r in zip(p, rate))
    reward = sum(pk * b / r for pk, b, r in zip(p, back, rate))
    hold = sum(pk / r for pk, r in zip(p, rate))
    return p, mean_rate * reward, reward / hold


def finite_m_lower_chain(m: int, M: int) -> FiniteChainBound:
    """Continuous-time chain on ``1..M`` counting remembered neighbours.

    From ``k`` the process returns to 1 (max grows; at ``k = 1`` this is a
    loop) or moves to ``k + 1`` for ``k < M``.  Solved exactly in rationals.
    """
    if M < 2:
        raise ValueError("M must be >= 2")
    if m <= M:
        raise ValueError(f"need m > M (got m={m}, M={M})")
    ks = range(1, M + 1)
    up = [Fraction(m - k) if k < M else Fraction(0) for k in ks]
    back = [Fraction(k * m) for k in ks]
    p, product, avg = _degree_chain(up, back)
    up_c = [Fraction(m - 1 - k) if k < M else Fraction(0) for k in ks]
    back_c = [Fraction(k * (m - 2)) for k in ks]
    _, _, rig = _degree_chain(up_c, back_c)
    return FiniteChainBound(m, M, p, float(product), float(avg), float(rig))


def regular_girth5_lower_bound(g: Graph, M: int) -> float:
    """Rigorous degree-chain lower bound for a regular unit graph of girth
    at least 5 (other graphs are rejected); ``m = Delta + 1``."""
    if not g.is_unit:
        raise ValueError("the degree chain bound applies to unit-intensity graphs")
    gm = metrics(g)
    if not gm.is_regular or gm.girth < 5:
        raise ValueError("the degree chain bound needs a regular graph of girth >= 5")
    return finite_m_lower_chain(gm.max_degree + 1, M).rigorous


@dataclass
class BoundReport:
    rho: float
    upper: float
    lower: float
    gamma_ref: float | None = None
    gamma_ref_stderr: float | None = None
    witnesses: list = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        if not self.lower <= self.upper:
            return False
        if self.gamma_ref is None:
            return True
        slack = 3 * self.gamma_ref_stderr if self.gamma_ref_stderr else 1e-9
        return self.lower - slack <= self.gamma_ref <= self.upper + slack

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "upper": self.upper,
            "lower": self.lower,
            "gamma_ref": self.gamma_ref,
            "gamma_ref_stderr": self.gamma_ref_stderr,
            "consistent": self.consistent,
            "witnesses": list(self.witnesses),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def corollary1_sandwich(g: Graph, gamma_ref: float | None = None, stderr: float | None = None,
                        mc=None) -> BoundReport:
    """Lower bound from the largest embedded star, upper bound ``e * rho``.

    ``gamma_ref`` defaults to the exact value when ``g`` is in a solved
    family.  ``mc`` may be an ``EstimateReport``; its estimate and standard
    error then serve as the reference.  Raises if lower exceeds upper.
    """
    from .chains import known_gamma
    from .star import gamma_star_series

    h = _unit(g)
    delta = metrics(h).max_degree
    rho = spectral_radius_A_plus_I(h)
    upper = math.e * rho
    lower = gamma_star_series(delta + 1).value
    wit = [
        f"upper: e * rho(A+I) with rho = {rho:.12g}",
        f"lower: growth parameter of the star on {delta + 1} vertices (max degree {delta})",
    ]
    if mc is not None:
        gamma_ref, stderr = mc.gamma_hat, mc.stderr
        wit.append(f"reference: Monte Carlo, {mc.replicas} replicas")
    elif gamma_ref is None:
        gamma_ref = known_gamma(g)
        if gamma_ref is not None:
            wit.append("reference: exact value of a solved family")
    elif gamma_ref is not None:
        wit.append("reference: supplied by caller")
    if not lower <= upper:
        raise AssertionError(f"lower bound {lower} exceeds upper bound {upper}")
    return BoundReport(rho, upper, lower, gamma_ref, stderr, wit)
