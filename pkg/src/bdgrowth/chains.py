"""Exact Markov-chain machinery for the growth parameter.

The surface process is the height vector minus its minimum.  It is a Markov
chain on the set ``S`` of non-negative integer vectors with minimum 0 and no
two adjacent vertices at the same height.  When vertex ``y`` grows,

    m_y   = min_{x != y} h_x
    h'_x  = h_x - m_y                     (x != y)
    h'_y  = 1 + max_{[y]} h - m_y

and the maximal height increases by one exactly when the closed
neighbourhood of ``y`` contains a globally maximal vertex.  Averaging that
0/1 reward under the stationary law and multiplying by the total intensity
gives the growth parameter.

Besides the generic (truncated) surface chain this module holds the small
hand-reduced chains whose stationary laws are known in closed form: the
birth-death chain with resets for dominant vertices joined to a cloned
cocktail-party graph, the reduced chain of the 3-vertex star, and the
nearest-neighbour chain on the complete graph.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import linalg, sparse, special
from scipy.sparse import linalg as splinalg

from .graph import Graph, complete, non_decreasing_permutation, reduce_irreducible

__all__ = [
    "ChainSpec",
    "StationarySolution",
    "ScheduleResult",
    "NNCompleteResult",
    "in_state_space",
    "surface_transition",
    "transition_reward",
    "reward_g2",
    "reset_state",
    "lump_dominated",
    "build_truncated_surface_chain",
    "stationary",
    "gamma_from_chain",
    "sigma2_exact",
    "surface_gamma",
    "gamma_theorem1",
    "theorem1_closed_forms",
    "delta_chain_theorem1",
    "theorem1_pi",
    "s3_reduced_chain",
    "nn_complete_chain",
    "gamma_nn_complete",
    "nn_complete_eq18",
    "identify_theorem1",
    "known_gamma",
    "doeblin_witness",
]

DENSE_LIMIT = 2000


# -- chain containers --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChainSpec:
    """A finite Markov chain stored as transition triplets.

    Several triplets may share ``(row, col)``; they are different moves that
    happen to land on the same state and may carry different rewards.

    Attributes
    ----------
    states : tuple
        State labels (height tuples for surface chains).
    rows, cols : ndarray of int
        Source and target indices of each transition.
    probs : ndarray of float
        Transition probabilities; every row sums to one.
    rewards : ndarray of float or None
        Per-transition reward (the max-height increment).
    rate : float
        Multiplier turning the mean reward per step into the growth
        parameter (the total intensity for surface chains).
    truncation_level : int or None
        Height cap, if the chain is a truncation of a countable one.
    boundary : ndarray of bool or None
        States at the cap; their stationary mass is reported as tail bound.
    """

    states: tuple
    rows: np.ndarray
    cols: np.ndarray
    probs: np.ndarray
    rewards: np.ndarray | None = None
    rate: float = 1.0
    truncation_level: int | None = None
    boundary: np.ndarray | None = None
    name: str = ""
    closure_moves: int = 0
    _matrix: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        for a in (self.rows, self.cols, self.probs, self.rewards, self.boundary):
            if a is not None:
                a.setflags(write=False)
        n = len(self.states)
        if self.rows.size and (self.rows.max() >= n or self.cols.max() >= n):
            raise ValueError("transition index out of range")
        if np.any(self.probs < 0):
            raise ValueError("negative transition probability")
        if self.rewards is not None and not np.all(np.isfinite(self.rewards)):
            raise ValueError("rewards must be finite")
        sums = np.bincount(self.rows, weights=self.probs, minlength=n)
        if np.max(np.abs(sums - 1.0)) > 1e-12:
            raise ValueError(f"rows do not sum to one (worst {sums[np.argmax(np.abs(sums - 1))]!r})")

    @property
    def size(self) -> int:
        return len(self.states)

    def matrix(self) -> sparse.csr_matrix:
        if not self._matrix:
            n = self.size
            P = sparse.csr_matrix((self.probs, (self.rows, self.cols)), shape=(n, n))
            P.sum_duplicates()
            self._matrix.append(P)
        return self._matrix[0]

    def mean_reward(self) -> np.ndarray:
        """Expected reward of the next move from each state."""
        if self.rewards is None:
            raise ValueError("chain has no rewards")
        return np.bincount(self.rows, weights=self.probs * self.rewards, minlength=self.size)

    def index(self, state) -> int:
        return self.states.index(tuple(state) if isinstance(state, (list, np.ndarray)) else state)

    def export(self) -> str:
        """Sparse triplet text: a legend of state labels, then
        ``source target probability reward`` lines."""
        lines = [f"# chain {self.name or 'unnamed'}", f"# states {self.size}"]
        if self.truncation_level is not None:
            lines.append(f"# truncation_level {self.truncation_level}")
        lines.append("# legend")
        for i, s in enumerate(self.states):
            label = " ".join(str(v) for v in s) if isinstance(s, tuple) else str(s)
            lines.append(f"{i} {label}")
        lines.append("# transitions")
        rew = self.rewards if self.rewards is not None else np.full(self.probs.size, np.nan)
        for i, j, p, r in zip(self.rows, self.cols, self.probs, rew):
            lines.append(f"{int(i)} {int(j)} {float(p)!r} {float(r)!r}")
        return "\n".join(lines) + "\n"


def _make_chain(states, triplets, **kw) -> ChainSpec:
    t = np.array(triplets, dtype=float).reshape(-1, 4)
    return ChainSpec(
        states=tuple(states),
        rows=t[:, 0].astype(np.int64),
        cols=t[:, 1].astype(np.int64),
        probs=t[:, 2].copy(),
        rewards=t[:, 3].copy(),
        **kw,
    )


@dataclass(frozen=True)
class StationarySolution:
    distribution: np.ndarray
    residual: float
    gamma_value: float | None
    tail_bound: float
    method: str

    def as_dict(self) -> dict:
        return {
            "residual": self.residual,
            "gamma_value": self.gamma_value,
            "tail_bound": self.tail_bound,
            "method": self.method,
            "states": int(self.distribution.size),
        }


# -- surface process ---------------------------------------------------------

def in_state_space(g: Graph, s) -> bool:
    """Whether ``s`` is a normalised surface state of ``g``."""
    s = tuple(s)
    if len(s) != g.n or any(int(v) != v or v < 0 for v in s) or min(s) != 0:
        return False
    return all(s[a] != s[b] for a, b in g.edges)


def _check_state(g: Graph, s) -> tuple:
    s = tuple(int(v) for v in s)
    if not in_state_space(g, s):
        raise ValueError(f"{s} is not a surface state of this graph")
    return s


def _closed_lists(g: Graph) -> list[tuple]:
    return [tuple(sorted(g.closed(x))) for x in range(g.n)]


def _raw_move(closed, s, y):
    """Surface transition plus reward, without validation."""
    n = len(s)
    top = max(s[x] for x in closed[y])
    if n == 1:
        return s, 1
    m = min(s[x] for x in range(n) if x != y)
    new = tuple(top + 1 - m if x == y else s[x] - m for x in range(n))
    return new, int(top == max(s))


def surface_transition(g: Graph, s, y) -> tuple:
    """Normalised state after vertex ``y`` grows from surface state ``s``."""
    s = _check_state(g, s)
    if not isinstance(y, (int, np.integer)) or not 0 <= y < g.n:
        raise ValueError(f"invalid vertex {y!r}")
    return _raw_move(_closed_lists(g), s, int(y))[0]


def transition_reward(g: Graph, s, y) -> int:
    """Max-height increment when ``y`` grows from ``s``: 1 iff the closed
    neighbourhood of ``y`` holds a globally maximal vertex."""
    s = _check_state(g, s)
    return int(max(s[x] for x in g.closed(y)) == max(s))


def reward_g2(g: Graph, s, s_next) -> int:
    """Max-height increment read off two consecutive surface states.

    The growing vertex is the unique coordinate that increased.
    """
    s = _check_state(g, s)
    s_next = tuple(int(v) for v in s_next)
    if g.n == 1:
        if s_next != s:
            raise ValueError("not a one-step transition")
        return 1
    up = [x for x in range(g.n) if len(s_next) == g.n and s_next[x] > s[x]]
    if len(up) != 1 or surface_transition(g, s, up[0]) != s_next:
        raise ValueError(f"{s_next} is not reachable from {s} in one step")
    return transition_reward(g, s, up[0])


def reset_state(g: Graph, root: int = 0) -> tuple:
    """Normalised heights after growing every vertex once, from flat, in
    non-decreasing distance order from ``root``.  This state lies in ``S``."""
    h = [0] * g.n
    for x in non_decreasing_permutation(g, root):
        h[x] = 1 + max(h[y] for y in g.closed(x))
    m = min(h)
    return tuple(v - m for v in h)


def _collapse(h: tuple, M: int) -> tuple:
    """Remove unoccupied height levels, highest first, until ``max <= M``.

    Deleting a level nobody sits on keeps every strict order and every
    equality between coordinates, so the result stays in ``S`` and the
    vertices on top stay on top."""
    h = list(h)
    top = max(h)
    occupied = set(h)
    level = top - 1
    while top > M:
        while level in occupied:
            level -= 1
        if level <= 0:
            raise ValueError("no free level to remove; M is too small")
        h = [v - 1 if v > level else v for v in h]
        occupied = set(h)
        top -= 1
        level -= 1
    return tuple(h)


def lump_dominated(g: Graph, s) -> tuple:
    """Canonical representative of ``s`` up to heights that cannot matter.

    Call ``v`` dominated when, in every closed neighbourhood ``[w]`` that
    contains it, some vertex other than ``v`` is strictly higher.  Then ``v``
    supplies no neighbourhood maximum, keeps that property until it grows,
    and its own height does not enter its next growth.  Lowering it changes
    no neighbourhood maximum and no other vertex's status, so its height is
    invisible to every future move and reward.

    Dominated vertices are moved below every other vertex: in id order each
    takes the level ``base - 1 - c``, where ``base`` is the lowest height of
    a non-dominated vertex and ``c`` the smallest colour not used by an
    already placed dominated neighbour.  The state is then renormalised.  The result depends only on the set of dominated
    vertices and the heights of the others, and the map is idempotent.
    """
    return _lump(_closed_lists(g), [g.neighbours(x) for x in range(g.n)], tuple(int(v) for v in s))


def _lump(closed, nbrs, s: tuple) -> tuple:
    n = len(s)
    dom = []
    for v in range(n):
        hv = s[v]
        for w in closed[v]:
            if max((s[x] for x in closed[w] if x != v), default=-1) <= hv:
                break
        else:
            dom.append(v)
    if not dom:
        return s
    dset = set(dom)
    h = list(s)
    base = min(s[x] for x in range(n) if x not in dset)
    # greedy colouring keeps adjacent dominated vertices distinct
    colour = {}
    for v in dom:
        used = {colour[u] for u in nbrs[v] if u in colour}
        c = 0
        while c in used:
            c += 1
        colour[v] = c
        h[v] = base - 1 - c
    m = min(h)
    return tuple(v - m for v in h)


def build_truncated_surface_chain(g: Graph, M: int, closure: str = "collapse",
                                  budget: int = 2_000_000, lump: bool = True) -> ChainSpec:
    """Surface chain restricted to states with every height at most ``M``.

    States are enumerated breadth-first from ``reset_state(g)``.  A move that
    would lift the grown vertex above ``M`` is projected back: empty height
    levels are deleted from the top down until the maximum is ``M``
    (``closure="collapse"``).  The projection keeps membership in ``S`` and
    the relative order of all heights, so the chain stays irreducible and
    the vertices that see the maximum are unchanged.

    Capping the grown vertex at ``M`` instead (``closure="saturate"``, with a
    self-loop when that would tie it with a neighbour) is available for
    comparison.  It is a poor closure: a vertex parked at ``M`` can never be
    overtaken, so stationary mass piles up on the cap.

    With ``lump`` (the default) states are also passed through
    ``lump_dominated``, an exact lumping that forgets heights no future move
    can see; without it the chain is the plain surface chain.

    The reward of every move is the true max increment.  ``boundary`` marks
    states with a projected move; their stationary mass is the tail bound.
    """
    if closure not in ("collapse", "saturate"):
        raise ValueError("closure must be 'collapse' or 'saturate'")
    M = int(M)
    if M < g.n:
        raise ValueError(f"height cap M={M} must be at least the vertex count {g.n}")
    closed = _closed_lists(g)
    nbrs = [g.neighbours(x) for x in range(g.n)]
    lam = g.total_intensity
    weights = [w / lam for w in g.intensities]
    start = reset_state(g)
    if lump:
        start = _lump(closed, nbrs, start)
    index = {start: 0}
    states = [start]
    rows, cols, probs, rews = [], [], [], []
    boundary = []
    closures = 0
    queue = deque([start])
    while queue:
        s = queue.popleft()
        i = index[s]
        hit = False
        for y in range(g.n):
            new, r = _raw_move(closed, s, y)
            if new[y] > M:
                hit = True
                closures += 1
                if closure == "collapse":
                    new = _collapse(new, M)
                elif all(new[z] != M for z in nbrs[y]):
                    new = new[:y] + (M,) + new[y + 1:]
                else:
                    new = s
            if lump:
                new = _lump(closed, nbrs, new)
            j = index.get(new)
            if j is None:
                if len(states) >= budget:
                    raise MemoryError(f"surface chain exceeds the state budget ({budget} states) at M={M}")
                j = len(states)
                index[new] = j
                states.append(new)
                queue.append(new)
            rows.append(i)
            cols.append(j)
            probs.append(weights[y])
            rews.append(r)
        boundary.append(hit)
    return ChainSpec(
        states=tuple(states),
        rows=np.array(rows, dtype=np.int64),
        cols=np.array(cols, dtype=np.int64),
        probs=np.array(probs),
        rewards=np.array(rews, dtype=float),
        rate=float(lam),
        truncation_level=M,
        boundary=np.array(boundary, dtype=bool),
        name=f"surface M={M} closure={closure}",
        closure_moves=closures,
    )


# -- linear algebra ------------------------------------------------------------

def _pinned_system(P: sparse.csr_matrix, transpose: bool) -> sparse.csc_matrix:
    """``I - P`` (or its transpose) with row 0 replaced by the unit row ``e_0``.

    For an irreducible chain this is non-singular and stays as sparse as
    ``P``; a full normalisation row would cause heavy fill-in in the LU.
    """
    n = P.shape[0]
    A = (sparse.identity(n, format="csr") - (P.T if transpose else P)).tocsr()
    keep = np.ones(n)
    keep[0] = 0.0
    A = sparse.diags(keep) @ A + sparse.csr_matrix(([1.0], ([0], [0])), shape=(n, n))
    return A.tocsc()


def _factor(A: sparse.csc_matrix, dense: bool):
    """Factorise once and return a solver for repeated right-hand sides."""
    if dense:
        lu = linalg.lu_factor(A.toarray())
        return lambda b: linalg.lu_solve(lu, b)
    # minimum degree on A^T + A gives far less fill than COLAMD on these chains
    lu = splinalg.splu(A, permc_spec="MMD_AT_PLUS_A")
    return lu.solve


def _refine(A, b, solve, tol):
    x = solve(b)
    for _ in range(3):
        res = b - A @ x
        if not np.all(np.isfinite(x)) or np.max(np.abs(res)) < tol * 1e-2 * np.max(np.abs(x)):
            break
        x = x + solve(res)
    return x


def _solve_pinned(P, tol):
    """Sparse solve with ``pi_0 = 1``; ``None`` when state 0 is transient."""
    A = _pinned_system(P, transpose=True)
    b = np.zeros(P.shape[0])
    b[0] = 1.0
    try:
        x = _refine(A, b, _factor(A, False), tol)
    except RuntimeError:
        return None
    if not np.all(np.isfinite(x)) or np.any(x < -1e-9 * np.max(np.abs(x))):
        return None
    return x


def _solve_normalised(P, tol, dense):
    """Solve with row 0 replaced by ``sum(pi) = 1``; works for any chain with
    a single recurrent class."""
    n = P.shape[0]
    A = (sparse.identity(n, format="csr") - P.T).tolil()
    A[0, :] = 1.0
    A = A.tocsc()
    b = np.zeros(n)
    b[0] = 1.0
    try:
        return _refine(A, b, _factor(A, dense), tol)
    except (linalg.LinAlgError, RuntimeError) as exc:
        raise ArithmeticError(f"stationary system is singular: {exc}") from None


def stationary(chain: ChainSpec, tol: float = 1e-12, method: str = "auto",
               max_iter: int = 1_000_000) -> StationarySolution:
    """Stationary distribution by a direct solve or by power iteration.

    ``"auto"`` picks a dense solve up to 2000 states and a sparse LU solve
    beyond, each followed by iterative refinement; ``"power"`` iterates the
    lazy chain ``(I + P) / 2`` until ``max |pi P - pi| < tol``.
    """
    P = chain.matrix()
    n = chain.size
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "sparse"
    if method in ("dense", "sparse"):
        pi = None
        if method == "sparse":
            pi = _solve_pinned(P, tol)
        if pi is None:
            pi = _solve_normalised(P, tol, method == "dense")
    elif method == "power":
        pi = np.full(n, 1.0 / n)
        PT = P.T.tocsr()
        for it in range(max_iter):
            nxt = PT @ pi
            if np.max(np.abs(nxt - pi)) < tol:
                pi = nxt
                break
            pi = 0.5 * (pi + nxt)
        else:
            raise ArithmeticError(f"power iteration did not converge in {max_iter} iterations "
                                  f"(residual {np.max(np.abs(nxt - pi)):.3e})")
    else:
        raise ValueError(f"unknown method {method!r}")
    if np.any(pi < -1e-12):
        raise ArithmeticError("stationary solve produced negative mass; is the chain irreducible?")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = float(np.max(np.abs(P.T @ pi - pi)))
    if residual > max(tol, 1e-9):
        raise ArithmeticError(f"stationary residual {residual:.3e} above tolerance")
    tail = float(pi[chain.boundary].sum()) if chain.boundary is not None else 0.0
    gamma = None
    if chain.rewards is not None:
        gamma = float(chain.rate * (pi @ chain.mean_reward()))
    pi.setflags(write=False)
    return StationarySolution(pi, residual, gamma, tail, method)


def gamma_from_chain(chain: ChainSpec, pi: StationarySolution | None = None,
                     vertex_total: float | None = None) -> float:
    """``rate * sum_s pi(s) sum_t P(t) reward(t)``: the growth parameter."""
    if chain.rewards is None:
        raise ValueError("chain has no rewards")
    if pi is None:
        pi = stationary(chain)
    rate = chain.rate if vertex_total is None else vertex_total
    return float(rate * (pi.distribution @ chain.mean_reward()))


def sigma2_exact(chain: ChainSpec, pi: StationarySolution | None = None,
                 gamma: float | None = None, vertex_total: float | None = None) -> float:
    """Asymptotic variance per step of the accumulated reward.

    With ``f = reward - gamma / rate`` on each move, solve the Poisson
    equation ``(I - P) u = Pf`` (``Pf`` the mean of ``f`` from each state,
    ``u_0 = 0``) and return
    ``sum_s pi(s) sum_t P(t) (f_t**2 + 2 f_t u(target_t))``.
    This is the variance constant of ``max_x H_x(n)`` per discrete step.
    """
    if chain.rewards is None:
        raise ValueError("chain has no rewards")
    if pi is None:
        pi = stationary(chain)
    rate = chain.rate if vertex_total is None else vertex_total
    if gamma is None:
        gamma = gamma_from_chain(chain, pi, rate)
    mean = gamma / rate
    f = chain.rewards - mean
    fbar = np.bincount(chain.rows, weights=chain.probs * f, minlength=chain.size)
    A = _pinned_system(chain.matrix(), transpose=False)
    b = fbar.copy()
    b[0] = 0.0
    dense = chain.size <= DENSE_LIMIT
    try:
        u = _factor(A, dense)(b)
    except (linalg.LinAlgError, RuntimeError) as exc:
        raise ArithmeticError(f"Poisson equation is singular: {exc}") from None
    if not np.all(np.isfinite(u)):
        raise ArithmeticError("Poisson equation is singular")
    w = chain.probs * (f * f + 2.0 * f * u[chain.cols])
    per_state = np.bincount(chain.rows, weights=w, minlength=chain.size)
    return float(max(pi.distribution @ per_state, 0.0))


@dataclass(frozen=True)
class ScheduleResult:
    gamma: float
    extrapolated: float
    M: int
    estimates: tuple
    tail_bound: float
    converged: bool

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "extrapolated": self.extrapolated,
            "M": self.M,
            "estimates": [list(e) for e in self.estimates],
            "tail_bound": self.tail_bound,
            "converged": self.converged,
        }


def _aitken(a: float, b: float, c: float) -> float:
    d1, d2 = b - a, c - b
    if d1 == d2 or d1 * d2 <= 0 or abs(d2) >= abs(d1):
        return c
    return c - d2 * d2 / (d2 - d1)


def surface_gamma(g: Graph, tol: float = 1e-6, M_start: int | None = None, step: int = 4,
                  M_max: int = 40, closure: str = "collapse", reduce: bool = True,
                  budget: int = 2_000_000) -> ScheduleResult:
    """Growth parameter from truncated surface chains at ``M, M+step, ...``.

    Stops once two successive values differ by less than ``tol``.  With three
    or more values the geometric convergence is accelerated by Aitken's
    delta-squared step; ``gamma`` is the last raw value.  Equivalent vertices
    are merged first unless ``reduce`` is false.
    """
    h = reduce_irreducible(g) if reduce else g
    M = max(h.n, 4) if M_start is None else int(M_start)
    est = []
    tail = math.inf
    while M <= M_max:
        chain = build_truncated_surface_chain(h, M, closure, budget)
        sol = stationary(chain)
        est.append((M, sol.gamma_value))
        tail = sol.tail_bound
        if len(est) >= 2 and abs(est[-1][1] - est[-2][1]) < tol:
            break
        M += step
    vals = [v for _, v in est]
    extra = _aitken(*vals[-3:]) if len(vals) >= 3 else vals[-1]
    converged = len(vals) >= 2 and abs(vals[-1] - vals[-2]) < tol
    return ScheduleResult(vals[-1], extra, est[-1][0], tuple(est), tail, converged)


def doeblin_witness(chain: ChainSpec, targets, vertex_total: int, n_max: int = 30):
    """Smallest ``n <= n_max`` with ``P^n(s, t) >= vertex_total**-n`` for every
    state ``s`` and every target ``t``, or ``None``.  Dense; small chains only."""
    P = chain.matrix().toarray()
    idx = [chain.index(t) for t in targets]
    Q = np.eye(chain.size)
    for n in range(1, n_max + 1):
        Q = Q @ P
        if Q[:, idx].min() >= float(vertex_total) ** -n:
            return n
    return None


# -- dominant vertices plus a cloned cocktail-party graph ---------------------

def _theorem1_check(N, n, m):
    for v in (N, n, m):
        if int(v) != v:
            raise ValueError("N, n, m must be integers")
    if N < 0 or n < 1 or m < 2 or m % 2:
        raise ValueError("need N >= 0, n >= 1 and even m >= 2")
    if m == 2 and N < 1:
        raise ValueError("m = 2 requires N >= 1")


def gamma_theorem1(N: int, n: int, m: int) -> float:
    """Closed form for ``N`` dominant vertices joined to the cocktail-party
    graph on ``m`` vertices with every vertex cloned ``n`` times.

    With ``V = N + nm``, ``kappa = V / (2n)`` and
    ``tau = 1 / (sqrt(kappa**2 - 1) - kappa + 1)``,
    ``gamma = V - (n**2 m / V) * tau / (tau + 1 / (2 kappa))``.
    """
    _theorem1_check(N, n, m)
    V = N + n * m
    kappa = V / (2 * n)
    tau = 1.0 / (math.sqrt(kappa * kappa - 1.0) - kappa + 1.0)
    return V - (n * n * m / V) * tau / (tau + 1.0 / (2 * kappa))


# The eight tabulated instances, written from their surd forms.
theorem1_closed_forms = {
    (1, 1, 2): 2 + 1 / math.sqrt(5),
    (0, 1, 4): 2 + 2 / math.sqrt(3),
    (2, 1, 2): 3 + 1 / math.sqrt(3),
    (1, 2, 2): 11 / 3,
    (0, 1, 6): 3 + 3 / math.sqrt(2),
    (1, 1, 4): 3 + 2 * math.sqrt(21) / 7,
    (2, 2, 2): 4 + 2 / math.sqrt(5),
    (1, 3, 2): 4 + 3 / math.sqrt(13),
}


def theorem1_pi(N: int, n: int, m: int, k_max: int) -> np.ndarray:
    """Closed-form stationary law ``Pi(0..k_max)`` of the untruncated chain:
    ``Pi(k) = c1 r**(k-1)`` for ``k >= 1`` with ``r = kappa - sqrt(kappa**2 - 1)``,
    ``c1 = (nm / V) / (tau + 1/(2 kappa))`` and ``Pi(0) = 1 - c1 tau``."""
    _theorem1_check(N, n, m)
    V = N + n * m
    kappa = V / (2 * n)
    root = math.sqrt(kappa * kappa - 1.0)
    tau = 1.0 / (root - kappa + 1.0)
    c1 = (n * m / V) / (tau + 1.0 / (2 * kappa))
    r = kappa - root
    out = np.empty(k_max + 1)
    out[0] = 1.0 - c1 * tau
    out[1:] = c1 * r ** np.arange(k_max)
    return out


def delta_chain_theorem1(N: int, n: int, m: int, M: int = 60) -> ChainSpec:
    """Chain of the height of the cloned cocktail-party part above the
    dominant vertices, truncated at ``M``.

    State 0: a dominant vertex is on top.  State ``k >= 1``: the top is a
    cocktail-party class, ``k`` above the highest vertex it is not adjacent
    to (only its own matching partner can lag behind).  Moves with their
    probabilities times ``V``:

    * dominant grows (``N``): to 0, max +1;
    * top class grows (``n``): up by one, max +1;
    * partner class grows (``n``): down by one (from 1 to 0), max unchanged;
    * other cocktail classes grow (``n(m-2)``): to 1, max +1; from state 0
      any cocktail growth (``nm``) leads to 1.

    At ``M`` the upward move becomes a self-loop.  The reward is the max
    increment, so ``gamma = V * E[reward] = V - n (1 - Pi(0))``.
    """
    _theorem1_check(N, n, m)
    if M < 3:
        raise ValueError("M must be >= 3")
    V = N + n * m
    t = []
    t.append((0, 0, N / V, 1))
    t.append((0, 1, n * m / V, 1))
    for k in range(1, M + 1):
        t.append((k, min(k + 1, M), n / V, 1))
        t.append((k, k - 1, n / V, 0))
        if m > 2:
            t.append((k, 1, n * (m - 2) / V, 1))
        if N:
            t.append((k, 0, N / V, 1))
    return _make_chain(range(M + 1), t, rate=float(V), truncation_level=M,
                       boundary=np.arange(M + 1) == M, name=f"theorem1 ({N},{n},{m}) M={M}")


def s3_reduced_chain(M: int = 40) -> ChainSpec:
    """Reduced chain of the 3-vertex star.

    ``"z"``: a leaf is flat and the centre is above the other leaf.  State
    ``k``: either the centre is flat and the leaves differ by ``k``, or a
    leaf is flat and the other leaf is ``k >= 1`` above the centre.  Each
    vertex grows with probability 1/3; the max increases on every move
    except a descent ``k -> k-1``.
    """
    if M < 3:
        raise ValueError("M must be >= 3")
    third = 1.0 / 3.0
    labels = ["z"] + list(range(M + 1))
    z, idx = 0, lambda k: k + 1
    t = [(z, z, third, 1), (z, idx(1), 2 * third, 1),
         (idx(0), idx(1), 2 * third, 1), (idx(0), z, third, 1)]
    for k in range(1, M + 1):
        t.append((idx(k), idx(min(k + 1, M)), third, 1))
        t.append((idx(k), idx(k - 1), third, 0))
        t.append((idx(k), z, third, 1))
    return _make_chain(labels, t, rate=3.0, truncation_level=M,
                       boundary=np.array([lab == M for lab in labels]), name=f"reduced 3-star M={M}")


# -- nearest-neighbour growth on the complete graph ---------------------------

def nn_complete_chain(n: int) -> ChainSpec:
    """Number of vertices at maximal height under the nearest-neighbour rule
    on ``K_n``.  From ``k``: a maximal vertex grows (prob ``k/n``, max +1,
    back to 1) or another vertex catches up (prob ``(n-k)/n``)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    t = []
    for k in range(1, n + 1):
        t.append((k - 1, 0, k / n, 1))
        if k < n:
            t.append((k - 1, k, (n - k) / n, 0))
    return _make_chain(range(1, n + 1), t, rate=float(n), name=f"nn complete n={n}")


@dataclass(frozen=True)
class NNCompleteResult:
    n: int
    exact: Fraction
    value: float
    eq_value: float
    pi: tuple

    def as_dict(self) -> dict:
        return {"n": self.n, "exact": str(self.exact), "value": self.value,
                "incomplete_gamma_value": self.eq_value}


def nn_complete_eq18(n: int) -> float:
    """``n / (e**n n**-n Gamma(n+1, n) - 1)`` evaluated in logarithms."""
    if n < 1:
        raise ValueError("n must be >= 1")
    log_upper = special.gammaln(n + 1) + math.log(special.gammaincc(n + 1, n))
    return n / math.expm1(n - n * math.log(n) + log_upper)


def gamma_nn_complete(n: int, check: bool = True) -> NNCompleteResult:
    """Exact rational growth rate of the nearest-neighbour rule on ``K_n``:
    ``Pi(k) = Pi(1) prod_{l<k} (n-l)/n`` and ``gamma = sum_k k Pi(k)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    w = [Fraction(1)]
    for l in range(1, n):
        w.append(w[-1] * Fraction(n - l, n))
    total = sum(w)
    pi = tuple(x / total for x in w)
    exact = sum((k + 1) * p for k, p in enumerate(pi))
    eq = nn_complete_eq18(n)
    if check and abs(eq - float(exact)) > 1e-10 * max(1.0, float(exact)):
        raise ArithmeticError(f"incomplete-gamma form {eq} disagrees with chain value {float(exact)}")
    return NNCompleteResult(n, exact, float(exact), eq, pi)


# -- recognising solvable graphs ------------------------------------------------

def identify_theorem1(g: Graph):
    """``(N, n, m)`` such that ``g`` has the same reduced graph as
    ``theorem1_family(N, n, m)`` up to isomorphism, else ``None``.

    After merging equivalent vertices such a graph is either a cocktail-party
    graph with a common intensity ``n``, or that plus one vertex adjacent to
    everything with intensity ``N``.  Uniform scaling of intensities is
    allowed, which matches cloning every vertex the same number of times.
    """
    h = reduce_irreducible(g)
    k = h.n
    dom = [x for x in range(k) if h.degree(x) == k - 1]
    if len(dom) > 1:
        return None
    N = h.intensities[dom[0]] if dom else 0
    rest = [x for x in range(k) if x not in dom]
    m = len(rest)
    if m < 2 or m % 2 or (m == 2 and N == 0):
        return None
    ws = {h.intensities[x] for x in rest}
    if len(ws) != 1:
        return None
    n = ws.pop()
    rs = set(rest)
    for x in rest:
        missing = rs - set(h.neighbours(x)) - {x}
        if len(missing) != 1:
            return None
    return (N, n, m)


def known_gamma(g: Graph) -> float | None:
    """Exact growth parameter when ``g`` is in a family solved in closed form
    (complete graphs and anything reducing to one vertex, unit stars, the
    dominant-plus-cocktail-party family), else ``None``."""
    from .star import gamma_star_series

    h = reduce_irreducible(g)
    if h.n == 1:
        return float(h.total_intensity)
    if g.is_unit and g.n >= 3:
        centre = [x for x in range(g.n) if g.degree(x) == g.n - 1]
        if centre and g.n - 1 == len(g.edges):
            return gamma_star_series(g.n).value
    ident = identify_theorem1(g)
    if ident is not None:
        return gamma_theorem1(*ident)
    return None
