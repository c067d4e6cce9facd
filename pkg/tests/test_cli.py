from __future__ import annotations

import json

import numpy as np
import pytest

from asydim.cli import main
from asydim.discretization import write_edge_list
from asydim.io import read_csv
from asydim.spaces import cycle_graph, path_graph


def summary(path):
    _, cols, rows = read_csv(path)
    return {r[0]: r[1] for r in rows}


def strip_created(path):
    return [l for l in open(path).read().splitlines() if not l.startswith("# created")]


@pytest.fixture
def line_points(tmp_path):
    out = tmp_path / "pts.csv"
    assert main(["gen", "lattice", "--dim", "1", "--halfwidth", "10", "--out", str(out)]) == 0
    return out


def test_gen_lattice_rows_and_header(line_points):
    comments, cols, rows = read_csv(line_points)
    assert len(rows) == 21 and cols == ["id", "c0"]
    assert any(c.startswith("command: asydim gen lattice") for c in comments)
    assert any(c.startswith("seed: ") for c in comments)


def test_dim_on_line(tmp_path):
    pts = tmp_path / "line.csv"
    main(["gen", "lattice", "--dim", "1", "--halfwidth", "200", "--out", str(pts)])
    out = tmp_path / "dim.csv"
    assert main(["dim", "--input", str(pts), "--mode", "limsup", "--base", "200",
                 "--out", str(out)]) == 0
    _, _, rows = read_csv(out)
    value = float(rows[-1][-1])
    assert rows[-1][0] == "summary" and 0.8 <= value <= 1.2


def test_check_lemma111(line_points, tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["check", "lemma111", "--input", str(line_points), "--r", "1.5",
                 "--out", str(out)]) == 0
    s = summary(out)
    assert (s["n_r"], s["nu_r"], s["n_2r"]) == ("7", "7", "5")
    assert "holds" in capsys.readouterr().err


def test_check_net_and_heat(line_points, tmp_path):
    out = tmp_path / "net.csv"
    assert main(["check", "net", "--input", str(line_points), "--eps", "3", "--R", "3",
                 "--out", str(out)]) == 0
    assert summary(out)["centers"] == "7"
    g = tmp_path / "c.tsv"
    write_edge_list(cycle_graph(12), g)
    out = tmp_path / "h.csv"
    assert main(["check", "heat", "--graph", str(g), "--out", str(out)]) == 0
    _, _, rows = read_csv(out)
    assert all(float(r[1]) < 1e-8 and float(r[2]) < 1e-8 for r in rows)


def test_gen_end_tables(tmp_path):
    out = tmp_path / "vol.csv"
    assert main(["gen", "end", "--profile", "davies", "--N", "2", "--D", "3", "--r", "1..1e6",
                 "--out", str(out)]) == 0
    _, cols, rows = read_csv(out)
    r = np.array([float(x[0]) for x in rows])
    v = np.array([float(x[1]) for x in rows])
    assert cols == ["r", "volume"] and np.allclose(v, ((1 + r) ** 3 - 1) / 3)
    out = tmp_path / "osc.csv"
    assert main(["gen", "end", "--profile", "oscillating", "--max-n", "3", "--out", str(out)]) == 0
    comments, _, rows = read_csv(out)
    assert len(rows) == 6 and any(c.startswith("limsup") for c in comments)


def test_heat_output_columns(tmp_path):
    g = tmp_path / "p.tsv"
    write_edge_list(path_graph(128), g)
    out = tmp_path / "theta.csv"
    assert main(["heat", "--graph", str(g), "--t", "1..1e4:geometric:20", "--out", str(out)]) == 0
    _, cols, rows = read_csv(out)
    assert cols == ["t", "theta", "sup_pt", "t_sat_flag"]
    flags = [int(r[3]) for r in rows]
    assert flags[0] == 0 and flags[-1] == 1
    assert "saturation cutoff" in (tmp_path / "theta.csv.log").read_text()


@pytest.mark.parametrize("kind,power,lo,hi", [("path", 1, 0.85, 1.15), ("cycle", 1, 0.85, 1.15),
                                              ("path512", 2, 1.8, 2.2)])
def test_ns_pipeline(tmp_path, kind, power, lo, hi):
    g = tmp_path / "g.tsv"
    graph = {"path": path_graph(4096), "cycle": cycle_graph(4096),
             "path512": path_graph(512)}[kind]
    write_edge_list(graph, g)
    out = tmp_path / "ns.csv"
    assert main(["ns", "--graph", str(g), "--power", str(power), "--t", "10..1e4:geometric:40",
                 "--out", str(out)]) == 0
    s = summary(out)
    assert lo <= float(s["alpha0_theta"]) <= hi
    assert abs(float(s["alpha0_theta"]) - float(s["alpha0_N"])) <= 0.2
    assert (tmp_path / "ns_theta.csv").exists() and (tmp_path / "ns_N.csv").exists()


def test_ns_saturated_window_exits_3(tmp_path):
    g = tmp_path / "g.tsv"
    write_edge_list(path_graph(32), g)
    assert main(["ns", "--graph", str(g), "--t", "1e3..1e5:geometric:10",
                 "--out", str(tmp_path / "x.csv")]) == 3


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "c.json"
    out = tmp_path / "a.csv"
    cfg.write_text(json.dumps({"command": "gen", "kind": "lattice", "dim": 2, "halfwidth": 2,
                               "out": str(out)}))
    assert main(["--config", str(cfg)]) == 0
    assert len(read_csv(out)[2]) == 25
    assert main(["gen", "--config", str(cfg), "--halfwidth", "1"]) == 0
    assert len(read_csv(out)[2]) == 9
    cfg.write_text(json.dumps({"command": "gen", "bogus": 1}))
    assert main(["gen", "--config", str(cfg)]) == 2
    assert main(["gen", "--config", str(tmp_path / "missing.json")]) == 2


def test_missing_input_and_dry_run(tmp_path, capsys):
    assert main(["dim", "--input", str(tmp_path / "nope.csv")]) == 2
    g = tmp_path / "g.tsv"
    write_edge_list(path_graph(16), g)
    capsys.readouterr()
    assert main(["heat", "--graph", str(g), "--t", "1..100:geometric:5", "--dry-run"]) == 0
    resolved = json.loads(capsys.readouterr().out)
    assert resolved["dry_run"] and len(resolved["t"]) == 5
    for argv in (["gen", "lattice", "--dry-run"], ["gen", "end", "--dry-run"]):
        assert main(argv) == 0


def test_reruns_identical_except_timestamp(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        main(["gen", "region", "--alpha", "0.5", "--x-max", "30", "--out", str(p)])
    a, b = (strip_created(p) for p in paths)
    # the command line differs in the output path only
    assert [l for l in a if "command" not in l] == [l for l in b if "command" not in l]


def test_trace_actions(tmp_path):
    from asydim.spectral import MonotoneFunction, write_monotone
    mu = tmp_path / "mu.csv"
    write_monotone(MonotoneFunction.power_law(-1.0), mu)
    half = tmp_path / "half.csv"
    write_monotone(MonotoneFunction.power_law(-0.5), half)
    out = tmp_path / "o.csv"
    assert main(["trace", "eccentric", "--mu", str(mu), "--out", str(out)]) == 0
    assert summary(out)["label"] == "eccentric"
    assert main(["trace", "alpha", "--mu", str(half), "--out", str(out)]) == 0
    assert float(summary(out)["alpha"]) == pytest.approx(2.0)
    assert main(["trace", "singular", "--mu", str(mu), "--mu-a", str(mu), "--out", str(out)]) == 0
    assert float(summary(out)["trace"]) == 1.0
    assert main(["trace", "singular", "--mu", str(half), "--mu-a", str(half)]) == 2
    step = tmp_path / "s.csv"
    write_monotone(MonotoneFunction([1.0, 2.0], [1.0, 0.0], head=3.0), step)
    assert main(["trace", "rearrange", "--mu", str(step), "--out", str(out)]) == 0
    assert "interp=step_right_continuous" in out.read_text()


def test_threads_env(monkeypatch, tmp_path):
    monkeypatch.setenv("ASYDIM_THREADS", "2")
    pts = tmp_path / "z.csv"
    main(["gen", "lattice", "--dim", "1", "--halfwidth", "300", "--out", str(pts)])
    out = tmp_path / "d.csv"
    assert main(["dim", "--input", str(pts), "--base", "300", "--r", "1,2,4",
                 "--out", str(out)]) == 0
    monkeypatch.setenv("ASYDIM_THREADS", "x")
    assert main(["dim", "--input", str(pts), "--base", "300", "--out", str(out)]) == 2
