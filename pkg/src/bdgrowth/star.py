"""Growth on star graphs via balls-in-bins maximum loads.

On a star with ``n`` vertices the centre height is a renewal process: between
two centre growths the leaves receive a geometric number of deposits, so

    gamma(S_n) = 1 + E[Z_{n-1, Y}],

where ``Z_{N,k}`` is the maximal load after ``k`` uniform balls are thrown
into ``N`` bins and ``Y`` is geometric on ``{0, 1, ...}`` with success
probability ``1/n``.  Equivalently ``gamma(S_n) = 1 + (1/n) sum_k
a_{n-1,k} / n**k`` with ``a_{N,k} = N**k E[Z_{N,k}]``, and by poissonisation
``gamma(S_n) = 1 + int_0^inf exp(-l) f_{n-1}(l) dl`` where ``f_N(l)`` is the
expected maximum of ``N`` independent Poisson(``l``) variables.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate, special, stats

__all__ = [
    "SeriesValue",
    "max_load_expectation",
    "max_load_table",
    "a2_closed_form",
    "a2_recurrence_check",
    "A230137_PREFIX",
    "gamma_star_series",
    "gamma_star_series_direct",
    "gamma_star_poisson",
    "poisson_max_mean",
    "generating_function_g",
    "generating_function_g_prime",
    "gamma_via_g",
    "gonnet_trend",
    "gonnet_trend_csv",
]

# First terms a_{2,1..20} of sum_l C(k,l) max(l, k-l), taken from the two
# closed forms for even and odd k.
A230137_PREFIX = (
    2, 6, 18, 44, 110, 252, 588, 1304, 2934, 6380, 14036, 30120, 65260,
    138712, 297240, 627248, 1332902, 2796876, 5904516, 12333320,
)


@dataclass(frozen=True)
class SeriesValue:
    value: float
    error: float
    terms: int

    def __float__(self):
        return self.value


def max_load_expectation(n: int, k: int) -> Fraction:
    """Exact ``E[Z_{n,k}]``: mean maximal bin load, ``k`` balls, ``n`` bins.

    Dynamic programme over (bins processed, balls used, running max) with
    binomial weights, so the numerator is ``a_{n,k}``.
    """
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    states = {(0, 0): 1}
    for _ in range(n):
        nxt: dict = {}
        for (used, mx), w in states.items():
            left = k - used
            for r in range(left + 1):
                key = (used + r, max(mx, r))
                nxt[key] = nxt.get(key, 0) + w * math.comb(left, r)
        states = nxt
    a = sum(w * mx for (used, mx), w in states.items() if used == k)
    return Fraction(a, n**k)


def max_load_table(n: int, k_max: int) -> list[int]:
    """``[a_{n,0}, ..., a_{n,k_max}]`` as exact integers.

    Uses ``a_{n,k} = sum_{t>=1} (n**k - W_t(k))`` where ``W_t(k)`` counts
    words of length ``k`` over ``n`` letters with every letter used fewer
    than ``t`` times; one pass over the letters gives ``W_t`` for all ``k``.
    """
    if n < 1 or k_max < 0:
        raise ValueError("need n >= 1 and k_max >= 0")
    binom = [[math.comb(j, r) for r in range(j + 1)] for j in range(k_max + 1)]
    a = [0] * (k_max + 1)
    for t in range(1, k_max + 1):
        w = [1] + [0] * k_max
        for _ in range(n):
            w = [sum(binom[j][r] * w[j - r] for r in range(min(t - 1, j) + 1)) for j in range(k_max + 1)]
        for k in range(t, k_max + 1):
            a[k] += n**k - w[k]
    return a


def a2_closed_form(k: int) -> int:
    """``a_{2,k}`` from the even/odd closed forms."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return 0
    h = k // 2
    if k % 2 == 0:
        return h * 4**h + h * math.comb(2 * h, h)
    return k * 4**h + k * math.comb(2 * h, h)


def a2_recurrence_check(k_max: int) -> bool:
    """Check the three-term recurrence for ``a_{2,k}`` exactly up to ``k_max``,
    and the stored prefix."""
    if k_max < 3:
        raise ValueError("k_max must be >= 3")
    a = max_load_table(2, k_max)
    for k in range(3, k_max + 1):
        rhs = (2 * Fraction(k, k - 1) * a[k - 1] + 4 * Fraction(k - 3, k - 2) * a[k - 2]
               - 8 * a[k - 3])
        if rhs != a[k]:
            return False
    m = min(k_max, len(A230137_PREFIX))
    return tuple(a[1:m + 1]) == A230137_PREFIX[:m]


@lru_cache(maxsize=None)
def _threshold_terms(n: int, t_max: int) -> tuple:
    """``P(Z_{n-1,Y} >= t)`` for ``t = 1..t_max`` in double precision.

    For each threshold the probability that every bin stays below ``t`` is
    ``(1/n) sum_k k! [x^k] (sum_{r<t} x^r/r!)^{n-1} / n^k``; the sum over
    ``k`` is finite and is accumulated bin by bin with positive terms only.
    """
    N = n - 1
    L = N * (t_max - 1)
    j = np.arange(L + 1, dtype=float)
    coef = np.zeros((t_max, L + 1))
    coef[0] = 1.0
    for r in range(1, t_max):
        coef[r] = coef[r - 1] * np.clip(j - r + 1, 0, None) / (r * n)
    out = []
    for t in range(1, t_max + 1):
        v = np.ones(1)
        for _ in range(N):
            # new[j] = sum_r v[j-r] C(j,r) n^-r
            new = np.zeros(v.size + t - 1)
            for r in range(t):
                new[r:r + v.size] += v * coef[r, r:r + v.size]
            v = new
        p_below = v.sum() / n
        out.append(max(0.0, 1.0 - p_below))
    return tuple(out)


def gamma_star_series(n: int, tol: float = 1e-14, t_budget: int = 400) -> SeriesValue:
    """Growth parameter of the star on ``n`` vertices with a certified error.

    The double series is summed threshold by threshold:
    ``gamma = 1 + sum_{t>=1} P(Z_{n-1,Y} >= t)``.  A single bin reaches
    ``t`` balls before the geometric stop with probability ``2**-t``, so
    the tail after ``T`` thresholds is at most ``(n-1) * 2**-T``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return SeriesValue(1.0, 0.0, 0)
    if not tol > 0:
        raise ValueError("tol must be positive")
    N = n - 1
    T = max(1, math.ceil(math.log2(N / tol)))
    if T > t_budget:
        raise RuntimeError(f"tol={tol} needs {T} thresholds, over the budget of {t_budget}")
    terms = _threshold_terms(n, T)
    rounding = 1e-15 * T * N
    return SeriesValue(1.0 + math.fsum(terms), N * 2.0**-T + rounding, T)


def gamma_star_series_direct(n: int, k_max: int) -> tuple[Fraction, float]:
    """Partial sum of ``1 + (1/n) sum_{k<=k_max} a_{n-1,k} / n**k`` in exact
    arithmetic, with a bound on the omitted tail.

    ``E[Z_{n-1,k}] <= k`` gives the tail majorant
    ``(1/n) sum_{k>K} k q**k = n q**(K+1) (K + 1 - K q)`` with ``q = (n-1)/n``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    a = max_load_table(n - 1, k_max)
    s = Fraction(0)
    for k in range(1, k_max + 1):
        s += Fraction(a[k], n**k)
    q = (n - 1) / n
    tail = n * q ** (k_max + 1) * (k_max + 1 - k_max * q)
    return 1 + s / n, tail


def poisson_max_mean(N: int, lam: float, tol: float = 1e-17) -> float:
    """``E[max of N iid Poisson(lam)]`` via ``sum_t (1 - F(t-1)**N)``."""
    if lam <= 0:
        return 0.0
    # Poisson tails beyond lam + 12 sqrt(lam) + 40 are far below double precision
    top = int(lam + 12 * math.sqrt(lam) + 3 * math.log(N + 1) - math.log(tol) + 10)
    t = np.arange(1, top + 1)
    cdf = stats.poisson.cdf(t - 1, lam)
    sf = stats.poisson.sf(t - 1, lam)
    with np.errstate(divide="ignore"):
        log_f = np.where(cdf < 0.5, np.log(cdf), np.log1p(-sf))
    # 1 - F**N without cancellation when F is close to 1
    return float(-np.expm1(N * log_f).sum())


def gamma_star_poisson(n: int, tol: float = 1e-10) -> float:
    """``1 + int_0^inf exp(-l) f_{n-1}(l) dl`` by adaptive quadrature."""
    if n < 2:
        raise ValueError("n must be >= 2")
    N = n - 1
    # f_N(l) <= l + N-dependent constant, so exp(-l) f_N(l) is negligible past ``upper``
    upper = 60.0 + 2 * math.log(N + 1)
    knots = [0.0, 1.0, 3.0, 8.0, 20.0, upper]
    total = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        val, err = integrate.quad(lambda l: math.exp(-l) * poisson_max_mean(N, l),
                                  lo, hi, epsabs=tol / 10, epsrel=1e-13, limit=200)
        if not err < tol:
            raise ArithmeticError(f"quadrature on [{lo}, {hi}] did not converge (err={err})")
        total += val
    return 1.0 + total


def generating_function_g(s: float) -> float:
    """``g(s) = sum_k a_{2,k} s**k / k`` in closed form, ``0 <= s < 1/2``."""
    if not 0 <= s < 0.5:
        raise ValueError("g is defined on [0, 1/2)")
    return (4 * s - 1 + math.sqrt(1 - 4 * s * s)) / (2 - 4 * s)


def generating_function_g_prime(s: float) -> float:
    if not 0 <= s < 0.5:
        raise ValueError("g is defined on [0, 1/2)")
    r = math.sqrt(1 - 4 * s * s)
    num = (4 - 4 * s / r) * (2 - 4 * s) + 4 * (4 * s - 1 + r)
    return num / (2 - 4 * s) ** 2


def gamma_via_g(weight: float, point: float) -> float:
    """``1 + weight * g'(point)``; ``(1/9, 1/3)`` gives the 3-star, ``(2/25, 2/5)``
    the butterfly."""
    return 1.0 + weight * generating_function_g_prime(point)


def gonnet_trend(n_list, tol: float = 1e-8) -> list[dict]:
    """``gamma(S_n)`` with ``gamma * log log n / log n`` for each ``n >= 3``.

    Raises if the values are not strictly increasing in ``n``.
    """
    rows = []
    for n in sorted(set(int(v) for v in n_list)):
        if n < 3:
            raise ValueError("the log log ratio needs n >= 3")
        g = gamma_star_series(n, tol).value
        rows.append({"n": n, "gamma": g, "ratio": g * math.log(math.log(n)) / math.log(n)})
    for a, b in zip(rows, rows[1:]):
        if not b["gamma"] > a["gamma"]:
            raise AssertionError(f"gamma(S_n) not increasing at n={b['n']}")
    return rows


def gonnet_trend_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["n", "gamma", "ratio"])
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
