import json

import numpy as np
import pytest

from m3ma import cli, diagnostics


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _config(tmp_path, **over):
    cfg = {
        "game": {"m": 2, "scores": {"a": 1, "b": -1, "c": 0, "epsilon": 0.1}},
        "regularizer": "entropic",
        "mode": "dual",
        "step": 0.02,
        "horizon": 20,
        "record_every": 1,
        "inits": {"count": 2, "seed": 7, "kind": "random_interior"},
        "outputs": {"trajectory_csv": "traj.csv", "summary_json": "summary.json"},
    }
    cfg.update(over)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_equilibria_listing(capsys):
    code, out, _ = _run(capsys, "equilibria", "--m", "3", "--alpha", "0.1", "--gamma", "-0.3", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and len(rep["points"]) == 7
    assert all(max(p["gains"]) <= 1e-9 for p in rep["points"])
    assert sum(sorted(p["strategy"]) == pytest.approx([0.25, 0.25, 0.5]) for p in rep["points"]) == 3

    code, out, _ = _run(capsys, "equilibria", "--m", "3", "--alpha", "0", "--gamma", "0")
    assert code == 0 and "continuum" in out
    code, out, _ = _run(capsys, "equilibria", "--m", "2", "--alpha", "-0.1", "--gamma", "0")
    assert "points: 1" in out and "(0.5, 0.5)" in out


def test_equilibria_errors(capsys):
    assert _run(capsys, "equilibria", "--m", "1", "--alpha", "0", "--gamma", "0")[0] == 2
    assert _run(capsys, "equilibria", "--m", "3", "--alpha", "0", "--gamma", "3", "--beta", "2")[0] == 2
    code, _, err = _run(capsys, "equilibria", "--m", "3", "--alpha", "0.1", "--gamma", "0.2", "--beta", "2")
    assert code == 0 and "beta" in err
    assert _run(capsys, "nonsense")[0] == 2


def test_verify(capsys, tmp_path):
    assert _run(capsys, "verify", "--profile", "0.5,0.5")[0] == 0
    code, out, _ = _run(capsys, "verify", "--profile", "1,0", "--alpha", "-0.1", "--format", "json")
    rep = json.loads(out)
    assert code == 1 and rep["gains"] == pytest.approx([0.1] * 3)
    assert _run(capsys, "verify", "--profile", "0.5,0.25,0.25", "--alpha", "0.1", "--gamma", "-0.3")[0] == 0
    assert _run(capsys, "verify", "--profile", "0.5,0.7")[0] == 2
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"x": [0.5, 0.5], "y": [0.5, 0.5], "z": [0.5, 0.5]}))
    assert _run(capsys, "verify", "--file", str(f))[0] == 0


def test_simulate_outputs(capsys, tmp_path):
    cfg = _config(tmp_path)
    out_dir = tmp_path / "out"
    code, _, _ = _run(capsys, "simulate", "--config", str(cfg), "--out-dir", str(out_dir))
    assert code == 0
    lines = (out_dir / "traj_0.csv").read_text().splitlines()
    assert lines[0] == "t,x_1,x_2,y_1,y_2,z_1,z_2,V,G"
    assert len(lines) == 1 + 1001
    row = np.array(lines[1].split(","), dtype=float)
    assert row[0] == 0 and row[1] + row[2] == pytest.approx(1)
    summary = json.loads((out_dir / "summary.json").read_text())
    assert [e["seed"] for e in summary["per_init"]] == [7, 8]
    assert summary["game"]["alpha"] == pytest.approx(0.1)
    assert (out_dir / "traj_1.csv").exists()


def test_simulate_is_deterministic(capsys, tmp_path):
    cfg = _config(tmp_path)
    for d in ("a", "b"):
        assert _run(capsys, "simulate", "--config", str(cfg), "--out-dir", str(tmp_path / d))[0] == 0
    for name in ("traj_0.csv", "traj_1.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    # a different seed changes the trajectories
    assert _run(capsys, "simulate", "--config", str(cfg), "--out-dir", str(tmp_path / "c"), "--seed", "99")[0] == 0
    assert (tmp_path / "c" / "traj_0.csv").read_bytes() != (tmp_path / "a" / "traj_0.csv").read_bytes()


def test_simulate_config_errors(capsys, tmp_path):
    assert _run(capsys, "simulate")[0] == 2
    bad = _config(tmp_path, game={"m": 2, "scores": {"a": 1, "b": 2, "c": 0, "epsilon": 0}})
    assert _run(capsys, "simulate", "--config", str(bad), "--out-dir", str(tmp_path))[0] == 2
    bad = _config(tmp_path, colour="red")
    code, _, err = _run(capsys, "simulate", "--config", str(bad), "--out-dir", str(tmp_path))
    assert code == 2 and "colour" in err
    both = _config(tmp_path, game={"m": 2, "scores": {"a": 1, "b": -1, "c": 0, "epsilon": 0},
                                   "derived": {"alpha": 0, "beta": 2, "gamma": 0}})
    assert _run(capsys, "simulate", "--config", str(both), "--out-dir", str(tmp_path))[0] == 2


def test_simulate_blowup_exit(capsys, tmp_path):
    cfg = _config(tmp_path, game={"m": 2, "derived": {"alpha": 0.9, "beta": 2, "gamma": 0.5, "offset": 1e5}},
                  step=1.0, horizon=100, inits={"count": 1, "seed": 0, "kind": "random_interior"})
    code, _, err = _run(capsys, "simulate", "--config", str(cfg), "--out-dir", str(tmp_path / "o"))
    assert code == 3 and "blow-up" in err
    assert (tmp_path / "o" / "summary.json").exists()


def test_explicit_inits(capsys, tmp_path):
    pts = [[[0.2, 0.8], [0.6, 0.4], [0.5, 0.5]]]
    cfg = _config(tmp_path, inits={"kind": "explicit", "points": pts})
    assert _run(capsys, "simulate", "--config", str(cfg), "--out-dir", str(tmp_path / "e"))[0] == 0
    first = (tmp_path / "e" / "traj.csv").read_text().splitlines()[1].split(",")
    assert [float(v) for v in first[1:7]] == pytest.approx([0.2, 0.8, 0.6, 0.4, 0.5, 0.5])


def test_sweep(capsys, tmp_path):
    cfg = _config(tmp_path, horizon=4, inits={"count": 1, "seed": 0, "kind": "random_interior"})
    out = tmp_path / "sw"
    code, _, _ = _run(capsys, "sweep", "--config", str(cfg), "--out-dir", str(out), "--alphas", "0,0.1", "--gammas", "0,2.5")
    assert code == 0
    index = json.loads((out / "index.json").read_text())
    by = {(c["alpha"], c["gamma"]): c for c in index["cells"]}
    assert by[(0.0, 2.5)]["status"] == "error" and "infeasible" in by[(0.0, 2.5)]["error"]
    assert by[(0.0, 0.0)]["status"] == "ok"
    assert (out / "cell_0_0" / "summary.json").exists()


def test_sweep_all_cells_fail(capsys, tmp_path):
    cfg = _config(tmp_path)
    code, _, _ = _run(capsys, "sweep", "--config", str(cfg), "--out-dir", str(tmp_path / "x"), "--alphas", "0", "--gammas", "3")
    assert code == 3


def test_selftest_passes_and_is_deterministic(capsys):
    code, first, _ = _run(capsys, "selftest", "--seed", "3")
    assert code == 0 and "FAIL" not in first
    assert _run(capsys, "selftest", "--seed", "3")[1] == first


def test_selftest_catches_sign_flip(capsys, monkeypatch):
    real = diagnostics.v_dot_analytic
    monkeypatch.setattr(diagnostics, "v_dot_analytic", lambda *a, **k: -real(*a, **k))
    code, out, _ = _run(capsys, "selftest")
    assert code == 1
    assert "FAIL v_monotone_two_action" in out and "FAIL v_monotone_replicator" in out
