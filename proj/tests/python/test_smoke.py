"""Smoke tests for the acrl_py bindings."""

import json
import math

import numpy as np
import pytest

import acrl_py


def test_preference_simplex():
    lam = acrl_py.Preference(0.7)
    assert lam.lambda_r == pytest.approx(0.7)
    assert lam.lambda_c == pytest.approx(0.3)
    with pytest.raises(ValueError):
        acrl_py.Preference(1.5)


def test_ball_membership_and_projection():
    spec = acrl_py.ball_constraint(1.0, 2)
    state = np.zeros(1)
    assert acrl_py.is_feasible(spec, state, np.array([0.5, 0.5]))
    assert not acrl_py.is_feasible(spec, state, np.array([3.0, 4.0]))
    projected, moved, residual = acrl_py.project(spec, state, np.array([3.0, 4.0]))
    assert moved
    assert residual <= 1e-8
    assert np.allclose(projected, [0.6, 0.8], atol=1e-9)


def test_box_projection_is_clamping():
    spec = acrl_py.box_constraint(np.array([-1.0, 0.0]), np.array([1.0, 2.0]))
    projected, moved, _ = acrl_py.project(spec, np.zeros(1), np.array([5.0, -5.0]))
    assert moved
    assert np.allclose(projected, [1.0, 0.0])


def test_env_constraints_exist():
    for env_id in ["BallReach", "BSS3z", "BSS5z", "NSFnetLite"]:
        acrl_py.constraint_for_env(env_id)
    with pytest.raises(Exception):
        acrl_py.constraint_for_env("NoSuchEnv")


def test_scalarize():
    assert acrl_py.scalarize(0.9, 1.0, -0.1) == pytest.approx(0.9 * 1.0 + 0.1 * -0.1)


def test_tabular_equivalence():
    mdp = acrl_py.random_mdp(seed=3)
    assert 1 <= mdp.n_states <= 8
    assert 1 <= mdp.n_actions <= 6
    ok, gap = acrl_py.verify_equivalence(mdp, penalty=0.1, lambda_r=0.5)
    assert ok
    assert gap < 1e-8

    grid = acrl_py.grid_tab(0.9)
    assert grid.n_states == 9
    ok, _ = acrl_py.verify_equivalence(grid, penalty=0.1, lambda_r=0.5)
    assert ok


def test_arm_sample_is_feasible():
    spec = acrl_py.constraint_for_env("BallReach")
    action, attempts, fallback = acrl_py.arm_sample_env("BallReach", seed=5)
    assert attempts >= 1
    assert float(np.dot(action, action)) <= 0.05 + 1e-12


def test_verify_prop1_emits_json():
    failures, lines = acrl_py.verify_prop1(instances=3, seed=1)
    assert failures == 0
    rows = [json.loads(line) for line in lines.splitlines() if line.strip()]
    assert len(rows) == 3
    assert all(row["ok"] for row in rows)


def test_training_run_writes_metrics(tmp_path):
    cfg = acrl_py.RunConfig()
    cfg.env_id = "BallReach"
    cfg.seed = 0
    cfg.total_steps = 100
    cfg.metrics_path = str(tmp_path / "metrics.csv")
    cfg.checkpoint_path = str(tmp_path / "checkpoint.bin")
    acrl_py.apply_override(cfg, "eval_interval", "50")
    acrl_py.apply_override(cfg, "eval_episodes", "1")
    acrl_py.apply_override(cfg, "warmup_steps", "20")
    acrl_py.apply_override(cfg, "hidden", "8x8")
    assert acrl_py.run(cfg) == 0
    header = (tmp_path / "metrics.csv").read_text().splitlines()[0]
    assert header.startswith("step,wall_ms,eval_return,valid_action_rate,qp_count_cum")
