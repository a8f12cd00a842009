"""Smoke tests for the tksmooth extension module."""

import math

import numpy as np
import pytest

import tksmooth


def spline_model(n_steps, dt=0.04 * math.pi):
    G = np.array([[1.0, 0.0], [dt, 1.0]])
    H = np.array([[0.0, 1.0]])
    Qinv = np.array([[4.0 / dt, -6.0 / dt**2], [-6.0 / dt**2, 12.0 / dt**3]])
    Rinv = np.array([[4.0]])
    g0 = np.array([-1.0, -dt])
    t = dt * np.arange(1, n_steps + 1)
    return G, H, Qinv, Rinv, g0, t


def test_cauchy_tail_ratio():
    assert abs(tksmooth.cauchy_tail_ratio(100.0) - 0.5) < 1e-3
    assert 0.0 < tksmooth.cauchy_tail_ratio(1.0) < 1.0


def test_student_weight_and_density():
    assert tksmooth.student_weight(4.0, 4.0) == pytest.approx(0.5)
    val = tksmooth.student_log_density(
        np.zeros(1), np.zeros(1), np.eye(1), 1.0
    )
    assert val == pytest.approx(math.log(1.0 / math.pi), rel=1e-9)


def test_smooth_linear_recovers_sinusoid():
    rng = np.random.default_rng(42)
    G, H, Qinv, Rinv, g0, t = spline_model(100)
    truth = np.column_stack([-np.cos(t), -np.sin(t)])
    z = truth[:, [1]] + 0.5 * rng.standard_normal((100, 1))

    out = tksmooth.smooth_linear(G, H, Qinv, Rinv, g0, z, preset="l2")
    assert out["status"] == "converged"
    assert out["iterations"] == 1
    assert tksmooth.mse(truth, out["x"]) < 0.2

    # heavy contamination: the robust preset holds up, least squares does not
    z_bad = z.copy()
    bad = rng.random(100) < 0.3
    z_bad[bad, 0] += rng.normal(0.0, 10.0, bad.sum())
    l2 = tksmooth.smooth_linear(G, H, Qinv, Rinv, g0, z_bad, preset="l2")
    robust = tksmooth.smooth_linear(G, H, Qinv, Rinv, g0, z_bad, preset="t-robust", s=4.0)
    assert tksmooth.mse(truth, robust["x"]) < tksmooth.mse(truth, l2["x"])

    # the objective trace never increases
    objs = robust["trace"]["objective"]
    assert np.all(np.diff(objs) <= 0.0)
    assert np.all(robust["trace"]["delta"] <= 0.0)


def test_missing_measurements_are_ignored():
    rng = np.random.default_rng(7)
    G, H, Qinv, Rinv, g0, t = spline_model(40)
    z = -np.sin(t)[:, None] + 0.3 * rng.standard_normal((40, 1))

    z_missing = z.copy()
    z_missing[10, 0] = np.nan
    z_junk = z_missing.copy()
    a = tksmooth.smooth_linear(G, H, Qinv, Rinv, g0, z_missing)
    b = tksmooth.smooth_linear(G, H, Qinv, Rinv, g0, z_junk)
    np.testing.assert_array_equal(a["x"], b["x"])

    # the disabled step carries no weight in the diagnostics either
    assert a["tau"][10] == 1.0


def test_custom_partition_and_x0():
    G, H, Qinv, Rinv, g0, t = spline_model(20)
    z = -np.sin(t)[:, None]
    out = tksmooth.smooth_linear(
        G, H, Qinv, Rinv, g0, z, proc_student=[0, 1], meas_student=[0], r=4.0, s=4.0,
        x0=np.zeros((20, 2)), epsilon=1e-10,
    )
    assert out["status"] == "converged"
    assert out["x"].shape == (20, 2)


def test_run_experiment_deterministic():
    a = tksmooth.run_experiment("spline", runs=3, seed=11)
    b = tksmooth.run_experiment("spline", runs=3, seed=11)
    assert [s["label"] for s in a["smoothers"]] == ["l2", "t-robust"]
    np.testing.assert_array_equal(a["smoothers"][0]["mse"], b["smoothers"][0]["mse"])
    assert all(s["failures"] == 0 for s in a["smoothers"])


def test_block_tridiag_solve_matches_numpy():
    rng = np.random.default_rng(3)
    n, N = 2, 5
    diag, sub = [], []
    for k in range(N):
        a = rng.standard_normal((n, n))
        diag.append(a @ a.T + n * np.eye(n))
        if k + 1 < N:
            sub.append(0.1 * rng.standard_normal((n, n)))
    dense = np.zeros((n * N, n * N))
    for k in range(N):
        dense[k * n:(k + 1) * n, k * n:(k + 1) * n] = diag[k]
        if k + 1 < N:
            dense[(k + 1) * n:(k + 2) * n, k * n:(k + 1) * n] = sub[k]
            dense[k * n:(k + 1) * n, (k + 1) * n:(k + 2) * n] = sub[k].T
    rhs = rng.standard_normal(n * N)
    y = tksmooth.block_tridiag_solve(diag, sub, rhs)
    np.testing.assert_allclose(y, np.linalg.solve(dense, rhs), rtol=1e-9, atol=1e-12)


def test_not_positive_definite_raises():
    diag = [np.array([[1.0]]), np.array([[1.0]])]
    sub = [np.array([[2.0]])]
    with pytest.raises(tksmooth.NotPositiveDefinite):
        tksmooth.block_tridiag_solve(diag, sub, np.ones(2))
