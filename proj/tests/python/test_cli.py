"""End-to-end checks of the command-line interface."""

import json
import math
import os
import subprocess

import numpy as np
import pytest

CLI = os.environ.get("TKSMOOTH_CLI")

pytestmark = pytest.mark.skipif(CLI is None, reason="TKSMOOTH_CLI not set")


def run_cli(*args, cwd=None):
    return subprocess.run([CLI, *args], capture_output=True, text=True, cwd=cwd)


def spline_config(n_steps):
    dt = 0.04 * math.pi
    return {
        "model": "matrix",
        "n": 2,
        "m": 1,
        "N": n_steps,
        "G": [[1.0, 0.0], [dt, 1.0]],
        "H": [[0.0, 1.0]],
        "Qinv": [[4.0 / dt, -6.0 / dt**2], [-6.0 / dt**2, 12.0 / dt**3]],
        "Rinv": [[4.0]],
        "g0": [-1.0, -dt],
        "partition": {"preset": "t-robust", "r": 4.0, "s": 4.0},
    }


def write_measurements(path, n_steps, noise=0.0, blank_rows=()):
    dt = 0.04 * math.pi
    rng = np.random.default_rng(5)
    lines = ["t,z_1"]
    for k in range(1, n_steps + 1):
        t = dt * k
        z = -math.sin(t) + noise * rng.standard_normal()
        if k - 1 in blank_rows:
            lines.append(f"{t},")
        else:
            lines.append(f"{t},{z}")
    path.write_text("\n".join(lines) + "\n")


def test_experiment_is_byte_deterministic(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    for out in (out1, out2):
        res = run_cli("experiment", "spline", "--runs", "1", "--seed", "7", "-o", str(out))
        assert res.returncode == 0, res.stderr
    assert (out1 / "stats.csv").read_bytes() == (out2 / "stats.csv").read_bytes()
    assert (out1 / "stats.json").read_bytes() == (out2 / "stats.json").read_bytes()


def test_experiment_stats_structure(tmp_path):
    res = run_cli(
        "experiment", "spline", "--scheme", "gauss:0.1:100", "--runs", "20",
        "--seed", "7", "-o", str(tmp_path),
    )
    assert res.returncode == 0, res.stderr
    doc = json.loads((tmp_path / "stats.json").read_text())
    assert doc["experiment"] == "spline"
    labels = [s["label"] for s in doc["smoothers"]]
    assert labels == ["l2", "t-robust"]
    for s in doc["smoothers"]:
        assert len(s["mse"]) == 20
        assert s["failures"] == 0
    header = (tmp_path / "stats.csv").read_text().splitlines()[0]
    assert header == "smoother,runs,failures,median_mse,q025_mse,q975_mse,mean_iterations"


def test_unknown_experiment_exits_2(tmp_path):
    res = run_cli("experiment", "pendulum", "-o", str(tmp_path))
    assert res.returncode == 2


def test_trajectory_dump(tmp_path):
    res = run_cli(
        "experiment", "jump", "--runs", "2", "--seed", "3",
        "--dump-trajectories", "-o", str(tmp_path),
    )
    assert res.returncode == 0, res.stderr
    dumps = sorted(p.name for p in tmp_path.glob("traj_run*.csv"))
    assert dumps == [
        "traj_run0000_l2.csv",
        "traj_run0000_t-trend.csv",
        "traj_run0001_l2.csv",
        "traj_run0001_t-trend.csv",
    ]
    header = (tmp_path / dumps[0]).read_text().splitlines()[0]
    assert header == "t,truth_1,truth_2,x_1,x_2"


def test_smooth_recovers_clean_sinusoid(tmp_path):
    config = tmp_path / "model.json"
    config.write_text(json.dumps(spline_config(60)))
    data = tmp_path / "meas.csv"
    write_measurements(data, 60, noise=0.05)

    res = run_cli("smooth", "--model", str(config), "--data", str(data), "-o", str(tmp_path))
    assert res.returncode == 0, res.stderr

    rows = (tmp_path / "states.csv").read_text().splitlines()
    assert rows[0] == "t,x_1,x_2"
    worst = 0.0
    for line in rows[1:]:
        t, _, x2 = (float(c) for c in line.split(","))
        worst = max(worst, abs(x2 - (-math.sin(t))))
    assert worst < 0.2  # within the noise floor

    trace_header = (tmp_path / "trace.csv").read_text().splitlines()[0]
    assert trace_header == "iter,objective,delta,step,grad_norm,backtracks"
    weights = (tmp_path / "weights.csv").read_text().splitlines()
    assert weights[0] == "t,omega,tau"
    assert len(weights) == 61


def test_smooth_blank_cells_match_zero_precision_rows(tmp_path):
    # blank cells in the CSV must behave exactly like rows whose precision
    # the config zeroes out, whatever value happens to sit in the cell
    disabled = (7, 23)
    blank_cfg = tmp_path / "blank_model.json"
    blank_cfg.write_text(json.dumps(spline_config(40)))
    blank_csv = tmp_path / "blank.csv"
    write_measurements(blank_csv, 40, noise=0.05, blank_rows=disabled)
    out_blank = tmp_path / "out_blank"
    res = run_cli("smooth", "--model", str(blank_cfg), "--data", str(blank_csv),
                  "-o", str(out_blank))
    assert res.returncode == 0, res.stderr

    zeroed = spline_config(40)
    zeroed["Rinv"] = [[[0.0]] if k in disabled else [[4.0]] for k in range(40)]
    zero_cfg = tmp_path / "zero_model.json"
    zero_cfg.write_text(json.dumps(zeroed))
    full_csv = tmp_path / "full.csv"
    write_measurements(full_csv, 40, noise=0.05)  # junk values in disabled rows
    out_zero = tmp_path / "out_zero"
    res = run_cli("smooth", "--model", str(zero_cfg), "--data", str(full_csv),
                  "-o", str(out_zero))
    assert res.returncode == 0, res.stderr

    assert (out_blank / "states.csv").read_bytes() == (out_zero / "states.csv").read_bytes()


def test_smooth_rejects_nonmonotone_time(tmp_path):
    config = tmp_path / "model.json"
    config.write_text(json.dumps(spline_config(3)))
    data = tmp_path / "meas.csv"
    data.write_text("t,z_1\n0.2,1.0\n0.1,2.0\n0.3,0.5\n")
    res = run_cli("smooth", "--model", str(config), "--data", str(data), "-o", str(tmp_path))
    assert res.returncode == 2


def test_smooth_rejects_unknown_config_keys(tmp_path):
    config_dict = spline_config(3)
    config_dict["surprise"] = True
    config = tmp_path / "model.json"
    config.write_text(json.dumps(config_dict))
    data = tmp_path / "meas.csv"
    write_measurements(data, 3)
    res = run_cli("smooth", "--model", str(config), "--data", str(data), "-o", str(tmp_path))
    assert res.returncode == 2


def test_check_passes_on_shipped_config(tmp_path):
    config = tmp_path / "model.json"
    config.write_text(json.dumps(spline_config(12)))
    res = run_cli("check", "--model", str(config))
    assert res.returncode == 0, res.stdout + res.stderr
    assert "[ok]" in res.stdout


def test_check_flags_indefinite_precision(tmp_path):
    config_dict = spline_config(12)
    config_dict["Qinv"] = [[1.0, 2.0], [2.0, 1.0]]  # eigenvalues 3 and -1
    config = tmp_path / "model.json"
    config.write_text(json.dumps(config_dict))
    res = run_cli("check", "--model", str(config))
    assert res.returncode == 1
    assert "positive definite" in (res.stdout + res.stderr)
