import json
import math
import subprocess
import sys

import numpy as np
import pytest

from hnls_lab.cli import main
from hnls_lab.experiments.config import ExperimentConfig, load_config
from hnls_lab.experiments.results import HEADER, ResultRow, read_csv, recompute_pass, rows_to_csv
from hnls_lab.errors import ConfigError


def write_config(path, **kw):
    path.write_text(json.dumps(kw))
    return path


def test_verify_traces_passes(tmp_path):
    assert main(["verify", "traces", "--seed", "1", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "verify_traces.csv")
    assert tuple(rows[0].keys()) == HEADER
    assert all(r["pass"] in ("true", "") for r in rows)
    manifest = json.loads((tmp_path / "verify_traces_manifest.json").read_text())
    assert manifest["seed"] == 1
    assert manifest["failures"] == 0
    assert {"python", "numpy", "scipy", "hnls_lab"} <= set(manifest["versions"])
    assert manifest["config"]["n_points"] == ExperimentConfig().n_points


def test_forced_tolerance_failure(tmp_path):
    assert main(["verify", "traces", "--seed", "1", "--tolerance-scale", "0", "--out", str(tmp_path)]) == 1
    rows = read_csv(tmp_path / "verify_traces.csv")
    assert any(r["pass"] == "false" for r in rows)


def test_usage_errors(tmp_path, capsys):
    assert main(["verify"]) == 2
    assert main(["verify", ""]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["simulate", "--seed", "x"]) == 2
    bad = write_config(tmp_path / "bad.json", n_points=256, colour="red")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 2
    unresolved = write_config(tmp_path / "wide.json", data={"kind": "gaussian", "width": 100.0})
    assert main(["simulate", "--config", str(unresolved), "--out", str(tmp_path)]) == 2


def test_config_defaults_and_validation():
    cfg = load_config(None, {"seed": 5, "threads": None})
    assert cfg.seed == 5 and cfg.threads == 1
    d = cfg.to_dict()
    assert ExperimentConfig.from_dict(d) == cfg
    for bad in ({"k_list": [0.0]}, {"n_range": [2, 1]}, {"sp_list": [[0, 1]]}, {"p": math.inf}, {"dealias": "x"}, {"n_points": 100}):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(bad)


def test_simulate_zero_data(tmp_path):
    cfg = write_config(tmp_path / "zero.json", data={"kind": "zero"}, t_final=0.5, dt=0.1, n_range=[-1, 1])
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "simulate.csv")
    assert all(float(r["value"]) == 0.0 for r in rows)
    traj = np.load(tmp_path / "trajectory.npz")
    assert traj["samples"].shape == (6, 256)
    assert not np.any(traj["samples"])


def test_simulate_plane_wave(tmp_path):
    cfg = write_config(
        tmp_path / "pw.json",
        data={"kind": "planewave", "amplitude": 0.5, "carrier": 1.0},
        n_points=64,
        length_pi=16,
        t_final=0.2,
        dt=0.005,
        k_list=[],
    )
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    rows = [r for r in read_csv(tmp_path / "simulate.csv") if r["quantity"] == "linf_error_vs_exact"]
    assert rows and max(float(r["value"]) for r in rows) <= 1e-8


def test_simulate_blow_up_flagged(tmp_path):
    cfg = write_config(
        tmp_path / "big.json",
        data={"kind": "gaussian", "amplitude": 30.0, "width": 3.0},
        n_points=64,
        length_pi=16,
        t_final=5.0,
        dt=0.5,
        k_list=[],
    )
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 3
    manifest = json.loads((tmp_path / "simulate_manifest.json").read_text())
    assert "exceeded" in manifest["aborted"]
    assert (tmp_path / "simulate.csv").exists()


def test_pass_flags_recomputable_and_deterministic(tmp_path):
    cfg = write_config(tmp_path / "c.json", t_final=0.3, snapshot_every=0.1, n_range=[-1, 1], k_list=[1.0])
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    a, b = ((o / "simulate.csv").read_bytes() for o in outs)
    assert a == b
    for r in read_csv(outs[0] / "simulate.csv"):
        assert r["pass"] == recompute_pass(r)


def test_alpha_scan_matches_simulate(tmp_path):
    cfg = write_config(tmp_path / "c.json", t_final=0.2, snapshot_every=0.1, n_range=[0, 0], k_list=[1.0])
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert main(["alpha-scan", "--config", str(cfg), "--out", str(tmp_path), "--threads", "2"]) == 0
    sim = {(r["t"], r["k"]): float(r["value"]) for r in read_csv(tmp_path / "simulate.csv") if r["quantity"] == "alpha"}
    scan = {(r["t"], r["k"]): float(r["value"]) for r in read_csv(tmp_path / "alpha_scan.csv") if r["quantity"] == "alpha"}
    assert sim.keys() == scan.keys()
    for key in sim:
        assert abs(sim[key] - scan[key]) <= 1e-12 * abs(sim[key])


def test_apriori_and_norms_commands(tmp_path):
    cfg = write_config(tmp_path / "c.json", t_final=1.0, data={"kind": "gaussian", "amplitude": 0.01, "width": 4.0})
    assert main(["apriori", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "apriori.csv")
    assert any(r["quantity"] == "sup_norm_ratio" for r in rows)
    assert main(["norms", "--config", str(cfg), "--out", str(tmp_path)]) == 0


def test_rows_sorted_and_formatted():
    rows = [ResultRow("e", "b", 1.0, t=0.2), ResultRow("e", "a", 0.1, 0.5), ResultRow("e", "b", 2.0, t=0.1)]
    text = rows_to_csv(rows).splitlines()
    assert text[0] == ",".join(HEADER)
    assert text[1] == "e,a,,,,,,0.1,0.5,true"
    assert text[2].startswith("e,b,0.1,")
    assert ResultRow("e", "x", math.nan, 1.0).passed is False


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "hnls_lab.cli", "verify", "identities", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "0 failed" in proc.stdout
