"""Monte Carlo engine for the discrete and continuous deposition processes.

Random streams
--------------
Replica ``r`` of a run with root seed ``s`` draws from
``PCG64(SeedSequence([s, r]))``.  Replicas never share a stream, so a run
with any number of worker threads produces the same numbers as a serial run.

Continuous time is simulated through the embedded jump chain: all clocks
together jump at rate ``total_intensity`` and the jumping vertex is chosen
proportionally to its intensity.  Over a time window of length ``dt`` the
number of jumps is Poisson(``total_intensity * dt``), which is how the
window is advanced.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import _kernels
from .graph import Graph, _embedding

__all__ = [
    "SimConfig",
    "Trajectory",
    "EstimateReport",
    "CoupledReport",
    "replica_rng",
    "step",
    "step_nn",
    "run_discrete",
    "run_continuous",
    "estimate_gamma",
    "coupled_run",
    "contraction_run",
    "clt_sample",
]

RULES = {"nnn": _kernels.NNN, "nn": _kernels.NN}


def _rule(rule: str) -> int:
    try:
        return RULES[rule]
    except KeyError:
        raise ValueError(f"unknown rule {rule!r}; use 'nnn' or 'nn'") from None


@dataclass(frozen=True)
class SimConfig:
    """Run parameters.  Give exactly one of ``steps`` and ``horizon``.

    ``intensity_mode`` is ``"proportional"`` (vertices chosen with
    probability proportional to their intensity) or ``"uniform"``.
    """

    seed: int = 0
    steps: int | None = None
    horizon: float | None = None
    replicas: int = 1
    intensity_mode: str = "proportional"
    checkpoints: int = 1
    threads: int = 1
    batch_means: bool = False
    chunk: int = 1 << 16

    def __post_init__(self):
        if (self.steps is None) == (self.horizon is None):
            raise ValueError("give exactly one of steps and horizon")
        if self.steps is not None and int(self.steps) < 1:
            raise ValueError("steps must be >= 1")
        if self.horizon is not None and not self.horizon > 0:
            raise ValueError("horizon must be > 0")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.checkpoints < 1:
            raise ValueError("checkpoints must be >= 1")
        if self.intensity_mode not in ("proportional", "uniform"):
            raise ValueError("intensity_mode must be 'proportional' or 'uniform'")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def continuous(self) -> bool:
        return self.horizon is not None


@dataclass
class Trajectory:
    """Per-checkpoint summary of one replica.

    ``clock`` holds step counts (discrete) or times (continuous); ``max`` and
    ``min`` are true heights, ``offset`` the normalisation shift applied to
    the stored state at that checkpoint.
    """

    clock: np.ndarray
    max: np.ndarray
    min: np.ndarray
    offset: np.ndarray
    jumps: np.ndarray
    replica: int
    seed: int
    final_state: np.ndarray = field(repr=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["replica", "clock", "max", "min", "offset"])
        for row in zip(self.clock, self.max, self.min, self.offset):
            w.writerow([self.replica, *[x.item() for x in row]])
        return buf.getvalue()


@dataclass
class EstimateReport:
    gamma_hat: float
    stderr: float
    ci95: tuple
    sigma2_hat: float
    n_effective: int
    seed: int
    replicas: int
    steps: int | None = None
    horizon: float | None = None
    rule: str = "nnn"
    no_stderr: bool = False
    samples: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "gamma_hat": self.gamma_hat,
            "stderr": self.stderr,
            "ci95_lo": self.ci95[0],
            "ci95_hi": self.ci95[1],
            "sigma2_hat": self.sigma2_hat,
            "seed": self.seed,
            "replicas": self.replicas,
            "steps": self.steps,
            "horizon": self.horizon,
            "rule": self.rule,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def covers(self, value: float) -> bool:
        return self.ci95[0] <= value <= self.ci95[1]


def replica_rng(seed: int, replica: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(replica)])))


def _sampler(g: Graph, mode: str):
    n = g.n
    if mode == "uniform" or g.is_unit:
        return lambda rng, k: rng.integers(0, n, size=k, dtype=np.int64)
    cum = np.cumsum(np.asarray(g.intensities, dtype=float))
    cum /= cum[-1]

    def draw(rng, k):
        return np.searchsorted(cum, rng.random(k), side="right").astype(np.int64)

    return draw


def _rate(g: Graph, mode: str) -> int:
    return g.n if mode == "uniform" else g.total_intensity


def step(g: Graph, h, x) -> np.ndarray:
    """One deposition at ``x``: its height becomes 1 + max over its closed neighbourhood."""
    x = _vertex(g, x)
    h = np.array(h, dtype=np.int64)
    h[x] = 1 + max(h[y] for y in g.closed(x))
    return h


def step_nn(g: Graph, h, x) -> np.ndarray:
    """Nearest-neighbour rule: ``h_x <- max(h_x + 1, max of neighbour heights)``."""
    x = _vertex(g, x)
    h = np.array(h, dtype=np.int64)
    h[x] = max([h[x] + 1] + [h[y] for y in g.neighbours(x)])
    return h


def _vertex(g, x):
    if not isinstance(x, (int, np.integer)) or not 0 <= x < g.n:
        raise ValueError(f"invalid vertex {x!r}")
    return int(x)


def _checkpoints(total, count):
    return [total * (i + 1) / count for i in range(count)]


def _run_one(g: Graph, cfg: SimConfig, rule: int, replica: int, initial=None) -> Trajectory:
    rng = replica_rng(cfg.seed, replica)
    draw = _sampler(g, cfg.intensity_mode)
    indptr, indices = g.csr()
    h = np.zeros(g.n, dtype=np.int64) if initial is None else np.array(initial, dtype=np.int64)
    if h.shape != (g.n,) or (h < 0).any():
        raise ValueError("initial heights must be a non-negative vector, one entry per vertex")
    offset = int(h.min())
    h -= offset
    clocks, mx, mn, offs, jumps = [], [], [], [], []
    done = 0
    last = 0.0
    for target in _checkpoints(cfg.horizon if cfg.continuous else int(cfg.steps), cfg.checkpoints):
        if cfg.continuous:
            todo = int(rng.poisson(_rate(g, cfg.intensity_mode) * (target - last)))
            last = target
        else:
            todo = int(round(target)) - done
        while todo > 0:
            k = min(todo, cfg.chunk)
            _kernels.grow(h, indptr, indices, draw(rng, k), rule)
            todo -= k
            done += k
        low = int(h.min())
        h -= low
        offset += low
        clocks.append(target)
        mx.append(int(h.max()) + offset)
        mn.append(offset)
        offs.append(offset)
        jumps.append(done)
    return Trajectory(
        clock=np.asarray(clocks),
        max=np.asarray(mx, dtype=np.int64),
        min=np.asarray(mn, dtype=np.int64),
        offset=np.asarray(offs, dtype=np.int64),
        jumps=np.asarray(jumps, dtype=np.int64),
        replica=replica,
        seed=cfg.seed,
        final_state=h,
    )


def _map_replicas(fn, cfg: SimConfig):
    if cfg.threads > 1 and cfg.replicas > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(fn, range(cfg.replicas)))
    return [fn(r) for r in range(cfg.replicas)]


def run_discrete(g: Graph, cfg: SimConfig, rule: str = "nnn", initial=None) -> list[Trajectory]:
    """Discrete-time runs, one trajectory per replica."""
    if cfg.continuous:
        raise ValueError("run_discrete needs cfg.steps")
    r = _rule(rule)
    return _map_replicas(lambda i: _run_one(g, cfg, r, i, initial), cfg)


def run_continuous(g: Graph, cfg: SimConfig, rule: str = "nnn", initial=None) -> list[Trajectory]:
    """Continuous-time runs up to ``cfg.horizon``, one trajectory per replica."""
    if not cfg.continuous:
        raise ValueError("run_continuous needs cfg.horizon")
    r = _rule(rule)
    return _map_replicas(lambda i: _run_one(g, cfg, r, i, initial), cfg)


def _ci(samples: np.ndarray):
    R = samples.size
    mean = float(samples.mean())
    if R < 2:
        return mean, math.nan, (math.nan, math.nan), True
    se = float(samples.std(ddof=1) / math.sqrt(R))
    q = float(stats.t.ppf(0.975, R - 1))
    return mean, se, (mean - q * se, mean + q * se), False


def estimate_gamma(g: Graph, cfg: SimConfig, rule: str = "nnn") -> EstimateReport:
    """Replica estimate of the growth parameter.

    Discrete runs use ``rate * max / steps`` per replica, where ``rate`` is
    the total intensity (``#V`` for unit graphs); continuous runs use
    ``max / horizon``.  ``sigma2_hat`` is the replica variance of
    ``max / sqrt(steps)`` (discrete) or of ``max / sqrt(horizon)``
    (continuous).  With ``cfg.batch_means`` it is instead the batch-means
    estimate over the checkpoint increments of each path, averaged over
    replicas.
    """
    trajs = run_continuous(g, cfg, rule) if cfg.continuous else run_discrete(g, cfg, rule)
    final = np.array([t.max[-1] for t in trajs], dtype=float)
    if cfg.continuous:
        scale = float(cfg.horizon)
        per = final / scale
    else:
        scale = float(cfg.steps)
        per = _rate(g, cfg.intensity_mode) * final / scale
    gamma_hat, se, ci, flag = _ci(per)
    if cfg.batch_means:
        if cfg.checkpoints < 2:
            raise ValueError("batch means need at least 2 checkpoints")
        ests = []
        for t in trajs:
            inc = np.diff(np.concatenate([[0], t.max]))
            ests.append(inc.var(ddof=1) / (scale / cfg.checkpoints))
        sigma2 = float(np.mean(ests))
    elif len(final) > 1:
        sigma2 = float(final.var(ddof=1) / scale)
    else:
        sigma2 = math.nan
    return EstimateReport(
        gamma_hat=gamma_hat,
        stderr=se,
        ci95=ci,
        sigma2_hat=sigma2,
        n_effective=len(final),
        seed=cfg.seed,
        replicas=cfg.replicas,
        steps=None if cfg.continuous else int(cfg.steps),
        horizon=cfg.horizon,
        rule=rule,
        no_stderr=flag,
        samples=per,
    )


@dataclass
class CoupledReport:
    """Paired run of a graph inside a supergraph driven by one jump stream."""

    gamma_sub: EstimateReport
    gamma_sup: EstimateReport
    dominated: bool
    violations: int
    identical: bool
    max_sub: list = field(repr=False, default_factory=list)
    max_sup: list = field(repr=False, default_factory=list)


def coupled_run(g: Graph, g_prime: Graph, embedding, cfg: SimConfig,
                rule: str = "nnn", rule_prime: str = "nnn",
                keep_paths: bool = False) -> CoupledReport:
    """Run ``g`` and ``g_prime`` on shared randomness.

    Jumps are drawn on ``g_prime``'s vertices; a jump landing on the image of
    a vertex of ``g`` also grows that vertex in ``g``, other jumps are
    ignored by ``g`` (thinning).  ``embedding=None`` is the identity map.  Both growth rates are reported in the time
    units of ``g_prime``'s clock.  Domination of ``g``'s max height by
    ``g_prime``'s is checked after every step.
    """
    if cfg.continuous:
        raise ValueError("coupled_run works in discrete steps")
    emb = _embedding(g, g_prime, embedding)
    for a, b in g.edges:
        if not g_prime.has_edge(emb[a], emb[b]):
            raise ValueError(f"edge {(a, b)} of g is not mapped onto an edge of g_prime")
    preimage = np.full(g_prime.n, -1, dtype=np.int64)
    for x, y in enumerate(emb):
        preimage[y] = x
    r_sub, r_sup = _rule(rule), _rule(rule_prime)
    ip_sub, ix_sub = g.csr()
    ip_sup, ix_sup = g_prime.csr()
    draw = _sampler(g_prime, cfg.intensity_mode)
    rate = _rate(g_prime, cfg.intensity_mode)
    steps = int(cfg.steps)

    def one(rep):
        rng = replica_rng(cfg.seed, rep)
        h_sub = np.zeros(g.n, dtype=np.int64)
        h_sup = np.zeros(g_prime.n, dtype=np.int64)
        todo = steps
        dominated = True
        identical = True
        viol = 0
        paths_sub, paths_sup = [], []
        while todo > 0:
            k = min(todo, cfg.chunk)
            seq = draw(rng, k)
            o_sub = np.empty(k, dtype=np.int64)
            o_sup = np.empty(k, dtype=np.int64)
            viol += _kernels.grow_coupled(h_sub, ip_sub, ix_sub, r_sub, h_sup, ip_sup, ix_sup,
                                          r_sup, preimage, seq, o_sub, o_sup)
            dominated &= bool(np.all(o_sub <= o_sup))
            identical &= bool(np.array_equal(o_sub, o_sup))
            if keep_paths:
                paths_sub.append(o_sub)
                paths_sup.append(o_sup)
            todo -= k
        return (rate * h_sub.max() / steps, rate * h_sup.max() / steps, dominated, identical,
                viol, paths_sub, paths_sup)

    res = _map_replicas(one, cfg)

    def rep(vals):
        m, se, ci, flag = _ci(np.asarray(vals, dtype=float))
        return EstimateReport(m, se, ci, math.nan, len(vals), cfg.seed, cfg.replicas,
                              steps=steps, no_stderr=flag, samples=np.asarray(vals))

    return CoupledReport(
        gamma_sub=rep([r[0] for r in res]),
        gamma_sup=rep([r[1] for r in res]),
        dominated=all(r[2] for r in res),
        violations=sum(r[4] for r in res),
        identical=all(r[3] for r in res),
        max_sub=[np.concatenate(r[5]) if r[5] else None for r in res],
        max_sup=[np.concatenate(r[6]) if r[6] else None for r in res],
    )


def contraction_run(g: Graph, h_a, h_b, steps: int, seed: int = 0, rule: str = "nnn",
                    intensity_mode: str = "proportional") -> np.ndarray:
    """Sup-norm distance between two runs from different initial heights
    driven by identical vertex choices, recorded after every step."""
    rng = replica_rng(seed, 0)
    a = np.array(h_a, dtype=np.int64)
    b = np.array(h_b, dtype=np.int64)
    indptr, indices = g.csr()
    seq = _sampler(g, intensity_mode)(rng, int(steps))
    out = np.empty(int(steps), dtype=np.int64)
    _kernels.grow_pair_supnorm(a, b, indptr, indices, seq, _rule(rule), out)
    return out


def clt_sample(g: Graph, cfg: SimConfig, n: int | None = None, gamma: float | None = None,
               use_min: bool = False, rule: str = "nnn") -> np.ndarray:
    """Standardised heights ``(H_n - n * gamma / rate) / sqrt(n)`` per replica.

    ``H_n`` is the max height after ``n`` steps (or the min with
    ``use_min``).  Without an explicit ``gamma`` the exact value is used when
    the graph is in a solvable family, otherwise a separate long-run
    estimate on ten times as many steps.
    """
    if n is None:
        n = cfg.steps
    n = int(n)
    run_cfg = SimConfig(seed=cfg.seed, steps=n, replicas=cfg.replicas,
                        intensity_mode=cfg.intensity_mode, threads=cfg.threads,
                        chunk=cfg.chunk)
    rate = _rate(g, cfg.intensity_mode)
    if gamma is None:
        gamma = _centre(g, cfg, n, rule)
    trajs = run_discrete(g, run_cfg, rule)
    H = np.array([t.min[-1] if use_min else t.max[-1] for t in trajs], dtype=float)
    return (H - n * gamma / rate) / math.sqrt(n)


def _centre(g: Graph, cfg: SimConfig, n: int, rule: str) -> float:
    if rule == "nnn" and cfg.intensity_mode == "proportional":
        from .chains import known_gamma

        val = known_gamma(g)
        if val is not None:
            return val
    long_cfg = SimConfig(seed=cfg.seed + 1_000_003, steps=10 * n,
                         replicas=max(cfg.replicas // 10, 2),
                         intensity_mode=cfg.intensity_mode, threads=cfg.threads)
    return estimate_gamma(g, long_cfg, rule).gamma_hat
