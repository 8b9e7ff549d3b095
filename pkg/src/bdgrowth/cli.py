"""Command-line front end.

Every command prints one result record (JSON by default) to stdout or to
``--out``.  A record echoes the full configuration, the numeric results,
provenance and wall-clock duration, plus the assertions that were checked.
The exit code is 0 iff all assertions pass, 1 if one fails and 2 for usage
errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

import numpy as np

from . import __version__
from . import bounds as bnd
from . import chains, simulate, star
from .graph import load_graph, metrics, reduce_irreducible

METHODS = ("mc", "chain", "closed-form", "series", "bounds")
MAX_COUNT = 2**62


class UsageError(Exception):
    pass


def parse_count(text: str) -> int:
    """Parse ``"1000"``, ``"1e6"`` or ``"2.5e3"`` to an exact non-negative int."""
    try:
        d = Decimal(str(text).strip())
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not d.is_finite() or d != d.to_integral_value():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if d < 0 or d > MAX_COUNT:
        raise argparse.ArgumentTypeError(f"out of range: {text!r}")
    return int(d)


def parse_range(text: str) -> list[int]:
    """``"4..40"``, ``"4..40:2"`` or ``"3,5,8"``."""
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, _, rest = part.partition("..")
                hi, _, stp = rest.partition(":")
                out.extend(range(int(lo), int(hi) + 1, int(stp) if stp else 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return sorted(set(out))


def point_seed(root: int, *key: int) -> int:
    """Seed for one sweep point, derived from the root seed and the point."""
    return int(np.random.SeedSequence([root, *key]).generate_state(1, dtype=np.uint32)[0])


@dataclass
class ResultRecord:
    command: str
    config: dict
    results: dict
    provenance: dict
    duration_s: float = 0.0
    assertions: dict = field(default_factory=dict)
    rows: list | None = None

    @property
    def ok(self) -> bool:
        return all(self.assertions.values())

    def to_dict(self) -> dict:
        d = {
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "provenance": self.provenance,
            "duration_s": self.duration_s,
            "assertions": self.assertions,
            "ok": self.ok,
        }
        if self.rows is not None:
            d["rows"] = self.rows
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_jsonable)

    def to_csv(self) -> str:
        rows = self.rows if self.rows is not None else [_flatten(self.results)]
        buf = io.StringIO()
        keys = []
        for r in rows:
            keys.extend(k for k in r if k not in keys)
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _jsonable(v) if isinstance(v, (np.generic,)) else v for k, v in r.items()})
        return buf.getvalue()


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return str(v)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = json.dumps(v, default=_jsonable)
        else:
            out[key] = v
    return out


def _provenance(module: str, operation: str) -> dict:
    return {"module": module, "operation": operation, "version": __version__}


def _graph(spec):
    if spec is None:
        raise UsageError("--graph is required")
    try:
        return load_graph(spec)
    except FileNotFoundError as exc:
        raise UsageError(f"graph file not found: {exc}") from None
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load graph {spec!r}: {exc}") from None


def _sim_config(args, seed=None) -> simulate.SimConfig:
    try:
        return simulate.SimConfig(seed=args.seed if seed is None else seed, steps=args.steps,
                                  replicas=args.replicas, threads=args.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- gamma ----------------------------------------------------------------------

def _gamma_closed_form(g):
    h = reduce_irreducible(g)
    if h.n == 1:
        return {"gamma": float(h.total_intensity), "family": "complete (single class)"}
    ident = chains.identify_theorem1(g)
    if ident is None:
        raise UsageError("closed-form needs a complete graph or a dominant-plus-cocktail-party graph")
    return {"gamma": chains.gamma_theorem1(*ident), "family": "theorem1", "parameters": list(ident)}


def _is_unit_star(g) -> bool:
    if not g.is_unit:
        return False
    if g.n <= 2:
        return True
    return len(g.edges) == g.n - 1 and any(g.degree(x) == g.n - 1 for x in range(g.n))


def _gamma_series(g, tol):
    if not _is_unit_star(g):
        raise UsageError("series applies to unit-intensity star graphs only")
    sv = star.gamma_star_series(g.n, tol)
    return {"gamma": sv.value, "error_bound": sv.error, "terms": sv.terms}


def _gamma_chain(g, args):
    try:
        r = chains.surface_gamma(g, tol=args.tol, M_start=args.M, M_max=args.M_max,
                                 budget=args.budget)
    except MemoryError as exc:
        raise UsageError(str(exc)) from None
    d = r.as_dict()
    d["gamma_raw"] = d.pop("gamma")
    d["gamma"] = d["extrapolated"]
    return d


def _gamma_mc(g, args):
    rep = simulate.estimate_gamma(g, _sim_config(args))
    d = rep.to_dict()
    d["gamma"] = rep.gamma_hat
    return d


def _gamma_bounds(g):
    d = bnd.corollary1_sandwich(g).to_dict()
    d["gamma"] = d["gamma_ref"]
    return d


def _run_method(method, g, args):
    if method == "closed-form":
        return _gamma_closed_form(g)
    if method == "series":
        return _gamma_series(g, args.tol)
    if method == "chain":
        return _gamma_chain(g, args)
    if method == "mc":
        return _gamma_mc(g, args)
    if method == "bounds":
        return _gamma_bounds(g)
    raise UsageError(f"unknown method {method!r}")


def cmd_gamma(args) -> ResultRecord:
    g = _graph(args.graph)
    results = {}
    assertions = {}
    if args.cross_check:
        for method in ("closed-form", "series", "chain", "mc"):
            if method == "chain" and reduce_irreducible(g).n > args.chain_max_vertices:
                continue
            try:
                results[method] = _run_method(method, g, args)
            except UsageError:
                continue
        vals = {k: v["gamma"] for k, v in results.items()}
        names = sorted(vals)
        worst = 0.0
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                worst = max(worst, abs(vals[a] - vals[b]))
        results["max_discrepancy"] = worst
        exact = [vals[k] for k in ("closed-form", "series", "chain") if k in vals]
        if len(exact) > 1:
            assertions["exact_methods_agree"] = max(exact) - min(exact) <= max(args.tol, 1e-6) * 10
        if "mc" in results and exact:
            mc = results["mc"]
            se = mc["stderr"] if mc["stderr"] is not None else 0.0
            assertions["mc_within_4se"] = abs(mc["gamma"] - exact[0]) <= 4 * se + 1e-12
        op = "cross_check"
    else:
        results[args.method] = _run_method(args.method, g, args)
        results["gamma"] = results[args.method]["gamma"]
        if args.method == "bounds":
            assertions["bounds_consistent"] = results[args.method]["consistent"]
        op = args.method
    return ResultRecord("gamma", {}, results, _provenance("bdgrowth.cli", f"gamma/{op}"),
                        assertions=assertions)


# -- bounds -----------------------------------------------------------------------

def cmd_bounds(args) -> ResultRecord:
    g = _graph(args.graph)
    mc = None
    if args.steps:
        mc = simulate.estimate_gamma(g, _sim_config(args))
    rep = bnd.corollary1_sandwich(g, mc=mc)
    results = rep.to_dict()
    gm = metrics(g)
    results["max_degree"] = gm.max_degree
    results["is_regular"] = gm.is_regular
    if g.is_unit and gm.is_regular and gm.girth >= 5 and args.M < gm.max_degree + 1:
        fb = bnd.finite_m_lower_chain(gm.max_degree + 1, args.M)
        results["degree_chain"] = {"m": fb.m, "M": fb.M, "product": fb.bound,
                                   "time_average": fb.time_average, "rigorous": fb.rigorous}
    return ResultRecord("bounds", {}, results, _provenance("bdgrowth.bounds", "corollary1_sandwich"),
                        assertions={"bounds_consistent": rep.consistent})


# -- clt ------------------------------------------------------------------------------

def cmd_clt(args) -> ResultRecord:
    from scipy import stats

    g = _graph(args.graph)
    cfg = _sim_config(args)
    gamma = chains.known_gamma(g)
    z = simulate.clt_sample(g, cfg, gamma=gamma)
    z_min = simulate.clt_sample(g, _sim_config(args, seed=args.seed + 1), gamma=gamma, use_min=True)
    var, var_min = float(np.var(z, ddof=1)), float(np.var(z_min, ddof=1))
    results = {"gamma_centre": gamma, "sample_variance": var, "sample_variance_min": var_min,
               "replicas": cfg.replicas, "steps": cfg.steps}
    assertions = {}
    if var < args.degenerate:
        results["degenerate"] = True
        assertions["degenerate_variance"] = var_min < args.degenerate
    else:
        sd = math.sqrt(var)
        ks = stats.kstest(z, "norm", args=(0.0, sd))
        ks_min = stats.kstest(z_min, "norm", args=(0.0, math.sqrt(var_min)))
        f = var / var_min
        dfn = dfd = len(z) - 1
        p_f = 2 * min(stats.f.cdf(f, dfn, dfd), stats.f.sf(f, dfn, dfd))
        results.update({"ks_statistic": float(ks.statistic), "ks_pvalue": float(ks.pvalue),
                        "ks_statistic_min": float(ks_min.statistic), "ks_pvalue_min": float(ks_min.pvalue),
                        "f_statistic": f, "f_pvalue": float(p_f), "alpha": args.alpha})
        assertions["ks_max"] = ks.pvalue >= args.alpha
        assertions["ks_min"] = ks_min.pvalue >= args.alpha
        assertions["variances_equal"] = p_f >= args.alpha
    return ResultRecord("clt", {}, results, _provenance("bdgrowth.simulate", "clt_sample"),
                        assertions=assertions)


# -- nn -----------------------------------------------------------------------------

def cmd_nn(args) -> ResultRecord:
    results = {}
    assertions = {}
    if args.n is not None:
        if args.n < 1:
            raise UsageError("--n must be >= 1")
        r = chains.gamma_nn_complete(args.n, check=False)
        results.update(r.as_dict())
        assertions["incomplete_gamma_agrees"] = abs(r.eq_value - r.value) <= 1e-10 * max(1.0, r.value)
    if args.graph is not None:
        g = _graph(args.graph)
        rep = simulate.estimate_gamma(g, _sim_config(args), rule="nn")
        results["mc"] = rep.to_dict()
    if not results:
        raise UsageError("give --n and/or --graph")
    return ResultRecord("nn", {}, results, _provenance("bdgrowth.chains", "gamma_nn_complete"),
                        assertions=assertions)


# -- sweep ------------------------------------------------------------------------------

def cmd_sweep(args) -> ResultRecord:
    from .graph import from_family

    rows = []
    for n in args.n:
        try:
            g = from_family(f"{args.family}:{n}")
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        seed = point_seed(args.seed, n)
        row = {"family": args.family, "n": n, "method": args.method, "seed": seed}
        if args.method == "mc":
            rep = simulate.estimate_gamma(g, _sim_config(args, seed=seed))
            row.update({"gamma": rep.gamma_hat, "stderr": rep.stderr,
                        "ci95_lo": rep.ci95[0], "ci95_hi": rep.ci95[1]})
        else:
            res = _run_method(args.method, g, args)
            row.update({"gamma": res["gamma"]})
        rows.append(row)
    results = {"points": len(rows)}
    return ResultRecord("sweep", {}, results, _provenance("bdgrowth.cli", f"sweep/{args.method}"),
                        rows=rows)


# -- graph-info ---------------------------------------------------------------------

def cmd_graph_info(args) -> ResultRecord:
    g = _graph(args.graph)
    gm = metrics(g)
    h = reduce_irreducible(g)
    results = gm.as_dict()
    results.update({"vertices": g.n, "edges": len(g.edges), "intensities": list(g.intensities),
                    "reduced_vertices": h.n, "reduced_intensities": list(h.intensities)})
    return ResultRecord("graph-info", {}, results, _provenance("bdgrowth.graph", "metrics"))


# -- parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root random seed (default 0)")
    common.add_argument("--out", help="write the record to this file instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=int, default=1, help="worker threads for replicas")
    common.add_argument("--cross-check", action="store_true",
                        help="run every applicable method and compare")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--steps", type=parse_count, default=None,
                     help="discrete steps per replica (scientific notation allowed)")
    sim.add_argument("--replicas", type=parse_count, default=32)

    chain = argparse.ArgumentParser(add_help=False)
    chain.add_argument("--M", type=int, default=None, help="first height cap of the chain schedule")
    chain.add_argument("--M-max", dest="M_max", type=int, default=40)
    chain.add_argument("--budget", type=parse_count, default=2_000_000, help="chain state budget")
    chain.add_argument("--tol", type=float, default=1e-9)
    chain.add_argument("--chain-max-vertices", type=int, default=8,
                       help="skip the chain in cross-checks above this reduced size")

    p = argparse.ArgumentParser(prog="bdgrowth", description=__doc__.splitlines()[0],
                                parents=[common])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gamma", parents=[common, sim, chain], help="compute or estimate gamma")
    s.add_argument("--graph", required=True, help="family string such as cycle:7, or a JSON file")
    s.add_argument("--method", choices=METHODS, default="chain")

    s = sub.add_parser("bounds", parents=[common, sim], help="upper and lower bounds")
    s.add_argument("--graph", required=True)
    s.add_argument("--M", type=int, default=3, help="memory of the degree chain")

    s = sub.add_parser("clt", parents=[common, sim], help="central limit theorem check")
    s.add_argument("--graph", required=True)
    s.add_argument("--alpha", type=float, default=0.01)
    s.add_argument("--degenerate", type=float, default=1e-3,
                   help="sample variance below which the limit is treated as degenerate")

    s = sub.add_parser("nn", parents=[common, sim], help="nearest-neighbour model")
    s.add_argument("--n", type=int, help="complete graph size for the exact solve")
    s.add_argument("--graph", help="estimate the nearest-neighbour rate on this graph by MC")

    s = sub.add_parser("sweep", parents=[common, sim, chain], help="gamma over a family")
    s.add_argument("--family", required=True)
    s.add_argument("--n", type=parse_range, required=True, help="e.g. 4..40 or 3,5,8")
    s.add_argument("--method", choices=METHODS, default="mc")

    s = sub.add_parser("graph-info", parents=[common], help="graph metrics")
    s.add_argument("--graph", required=True)
    return p


COMMANDS = {
    "gamma": cmd_gamma,
    "bounds": cmd_bounds,
    "clt": cmd_clt,
    "nn": cmd_nn,
    "sweep": cmd_sweep,
    "graph-info": cmd_graph_info,
}

NEEDS_STEPS = {"clt": 100_000}


def _defaults(args):
    if getattr(args, "steps", "absent") is None:
        if args.command in ("gamma", "sweep") and (args.method == "mc" or args.cross_check):
            args.steps = 1_000_000
        elif args.command in NEEDS_STEPS:
            args.steps = NEEDS_STEPS[args.command]
        elif args.command == "nn" and args.graph is not None:
            args.steps = 1_000_000
    if hasattr(args, "replicas") and args.replicas is not None and args.replicas < 1:
        raise UsageError("--replicas must be >= 1")
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")


def run(argv=None) -> tuple[ResultRecord, argparse.Namespace]:
    parser = build_parser()
    args = parser.parse_args(argv)
    _defaults(args)
    config = {k: v for k, v in vars(args).items() if k != "out"}
    t0 = time.perf_counter()
    rec = COMMANDS[args.command](args)
    rec.duration_s = time.perf_counter() - t0
    rec.config = config
    return rec, args


def main(argv=None) -> int:
    try:
        rec, args = run(argv)
    except UsageError as exc:
        print(f"bdgrowth: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    text = rec.to_json() + "\n" if args.format == "json" else rec.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if rec.ok else 1


if __name__ == "__main__":
    sys.exit(main())
