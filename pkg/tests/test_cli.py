import argparse
import csv
import io
import json
import math
import subprocess
import sys
from fractions import Fraction

import pytest

from bdgrowth import cli
from bdgrowth.graph import Graph, dump_graph


def run_json(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, json.loads(out) if out.strip() else None, err


# -- argument parsing -------------------------------------------------------------

def test_parse_count():
    assert cli.parse_count("1000") == 1000
    assert cli.parse_count("1e6") == 1_000_000
    assert cli.parse_count("2.5e3") == 2500
    assert cli.parse_count("12345678901234567") == 12345678901234567
    for bad in ("1.5", "abc", "-3", "inf", "1e400", "nan"):
        with pytest.raises(argparse.ArgumentTypeError):
            cli.parse_count(bad)


def test_parse_range():
    assert cli.parse_range("4..8") == [4, 5, 6, 7, 8]
    assert cli.parse_range("4..10:3") == [4, 7, 10]
    assert cli.parse_range("8,3,5,3") == [3, 5, 8]
    assert cli.parse_range("3,6..7") == [3, 6, 7]
    for bad in ("a..b", "", "4..8:x"):
        with pytest.raises(argparse.ArgumentTypeError):
            cli.parse_range(bad)


def test_point_seeds_are_distinct_and_stable():
    seeds = [cli.point_seed(7, n) for n in range(4, 41)]
    assert len(set(seeds)) == len(seeds)
    assert seeds == [cli.point_seed(7, n) for n in range(4, 41)]
    assert cli.point_seed(8, 4) != cli.point_seed(7, 4)


# -- gamma --------------------------------------------------------------------------

def test_gamma_closed_form(capsys):
    code, rec, _ = run_json(capsys, "gamma", "--graph", "theorem1:0,1,4", "--method", "closed-form")
    assert code == 0
    assert rec["results"]["gamma"] == pytest.approx(2 + 2 / math.sqrt(3), rel=1e-12)
    assert rec["config"]["seed"] == 0
    assert rec["provenance"]["version"]
    assert rec["duration_s"] >= 0


def test_gamma_series(capsys):
    code, rec, _ = run_json(capsys, "gamma", "--graph", "star:3", "--method", "series", "--tol", "1e-9")
    assert code == 0
    assert abs(rec["results"]["gamma"] - (2 + 1 / math.sqrt(5))) < 1e-9


def test_gamma_chain(capsys):
    code, rec, _ = run_json(capsys, "gamma", "--graph", "butterfly", "--method", "chain", "--tol", "1e-7")
    assert code == 0
    assert abs(rec["results"]["gamma"] - 11 / 3) < 1e-6


def test_gamma_mc_complete(capsys):
    code, rec, _ = run_json(capsys, "gamma", "--graph", "complete:6", "--method", "mc", "--steps", "1e5",
                            "--replicas", "8", "--seed", "7")
    assert code == 0
    mc = rec["results"]["mc"]
    assert mc["ci95_lo"] <= 6 <= mc["ci95_hi"]
    assert mc["seed"] == 7


def test_gamma_bounds_method(capsys):
    code, rec, _ = run_json(capsys, "gamma", "--graph", "petersen", "--method", "bounds")
    assert code == 0
    b = rec["results"]["bounds"]
    assert b["lower"] <= b["upper"] and rec["assertions"]["bounds_consistent"]


def test_gamma_cross_check(capsys):
    code, rec, _ = run_json(capsys, "gamma", "--graph", "star:3", "--cross-check", "--steps", "2e5",
                            "--replicas", "16")
    assert code == 0
    r = rec["results"]
    assert {"closed-form", "series", "chain", "mc"} <= set(r)
    assert rec["assertions"] == {"exact_methods_agree": True, "mc_within_4se": True}
    assert r["max_discrepancy"] < 0.05


@pytest.mark.parametrize("argv", [
    ["gamma", "--graph", "cycle:5", "--method", "closed-form"],
    ["gamma", "--graph", "cycle:5", "--method", "series"],
    ["gamma", "--graph", "wheel:5"],
    ["gamma", "--graph", "cycle:2"],
    ["gamma", "--graph", "/nonexistent/g.json"],
    ["gamma", "--graph", "cycle:5", "--method", "mc", "--steps", "1.5"],
    ["gamma", "--graph", "cycle:5", "--method", "unknown"],
    ["frobnicate"],
    ["nn"],
    ["sweep", "--family", "cycle", "--n", "1..3", "--method", "closed-form"],
])
def test_usage_errors(capsys, argv):
    assert cli.main(argv) == 2
    out, err = capsys.readouterr()
    assert out == "" and err


def test_malformed_graph_file(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"vertices": 3, "edges": [[0, 5]]}')
    assert cli.main(["graph-info", "--graph", str(p)]) == 2
    p.write_text("not json")
    assert cli.main(["graph-info", "--graph", str(p)]) == 2


# -- other commands -------------------------------------------------------------------

def test_graph_info_from_file(tmp_path, capsys):
    p = tmp_path / "g.json"
    p.write_text(dump_graph(Graph(3, [(0, 1), (1, 2)], [2, 1, 2])))
    code, rec, _ = run_json(capsys, "graph-info", "--graph", str(p))
    assert code == 0
    r = rec["results"]
    assert r["vertices"] == 3 and r["max_degree"] == 2 and r["intensities"] == [2, 1, 2]


def test_nn_exact(capsys):
    code, rec, _ = run_json(capsys, "nn", "--n", "5")
    assert code == 0
    r = rec["results"]
    assert Fraction(r["exact"]) == Fraction(3125, 1569)
    assert r["value"] == pytest.approx(3125 / 1569, abs=1e-15)


def test_nn_graph_estimate(capsys):
    code, rec, _ = run_json(capsys, "nn", "--graph", "complete:3", "--steps", "1e5", "--replicas", "8")
    assert code == 0
    mc = rec["results"]["mc"]
    assert mc["rule"] == "nn"
    assert abs(mc["gamma_hat"] - 27 / 17) < 4 * mc["stderr"]


def test_bounds_command(capsys):
    code, rec, _ = run_json(capsys, "bounds", "--graph", "petersen", "--M", "3")
    assert code == 0
    r = rec["results"]
    assert r["rho"] == pytest.approx(4)
    assert r["degree_chain"]["rigorous"] <= r["upper"]
    code, rec, _ = run_json(capsys, "bounds", "--graph", "cycle:6", "--steps", "5e4", "--replicas", "8")
    assert code == 0 and rec["results"]["gamma_ref_stderr"] > 0


def test_clt_degenerate(capsys):
    code, rec, _ = run_json(capsys, "clt", "--graph", "complete:5", "--steps", "1e5", "--replicas", "50")
    assert code == 0
    assert rec["results"]["degenerate"] and rec["assertions"] == {"degenerate_variance": True}


def test_clt_star(capsys):
    code, rec, _ = run_json(capsys, "clt", "--graph", "star:3", "--steps", "2e4", "--replicas", "200")
    r = rec["results"]
    assert set(rec["assertions"]) == {"ks_max", "ks_min", "variances_equal"}
    assert 0 <= r["ks_statistic"] <= 1 and 0 <= r["ks_pvalue"] <= 1
    assert code == (0 if all(rec["assertions"].values()) else 1)


def test_failed_assertion_gives_exit_one(capsys):
    # a test level close to 1 rejects every sample
    code, rec, _ = run_json(capsys, "clt", "--graph", "star:3", "--steps", "1e4", "--replicas", "100",
                            "--alpha", "0.999999")
    assert code == 1 and not rec["ok"]


def test_sweep_rows_and_seeds(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code = cli.main(["sweep", "--family", "cycle", "--n", "5..7", "--steps", "2e4", "--replicas", "4",
                     "--seed", "3", "--format", "csv", "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out == ""
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [int(r["n"]) for r in rows] == [5, 6, 7]
    assert [int(r["seed"]) for r in rows] == [cli.point_seed(3, n) for n in (5, 6, 7)]
    assert all(3.0 < float(r["gamma"]) < 5.5 for r in rows)


def test_sweep_exact_method(capsys):
    code, rec, _ = run_json(capsys, "sweep", "--family", "star", "--n", "3..5", "--method", "series")
    assert code == 0
    assert [r["n"] for r in rec["rows"]] == [3, 4, 5]
    assert rec["rows"][0]["gamma"] == pytest.approx(2 + 1 / math.sqrt(5), abs=1e-9)


def test_reproducible_from_config_echo(capsys):
    argv = ["gamma", "--graph", "cycle:5", "--method", "mc", "--steps", "3e4", "--replicas", "4",
            "--seed", "11", "--threads", "2"]
    _, first, _ = run_json(capsys, *argv)
    cfg = first["config"]
    replay = ["gamma", "--graph", cfg["graph"], "--method", cfg["method"], "--steps", str(cfg["steps"]),
              "--replicas", str(cfg["replicas"]), "--seed", str(cfg["seed"])]
    _, second, _ = run_json(capsys, *replay)
    assert first["results"] == second["results"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bdgrowth", "nn", "--n", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert Fraction(json.loads(proc.stdout)["results"]["exact"]) == Fraction(27, 17)
    assert proc.stderr == ""
