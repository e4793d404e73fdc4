import math

import numpy as np
import pytest

from suturelfd import (
    DegenerateScalingWarning,
    PhaseStopState,
    RolloutConfig,
    TimedPoseTrajectory,
    TooFewSamples,
    UnitQuat,
    dtw_align,
    exp_map,
    fit_orientation,
    geodesic_angle,
    goal_switch_orientation,
    orientation_error_term,
    rollout_orientation,
)
from suturelfd.dmp_orientation import OrientationDmpModel, scaling_diagonal
from helpers import make_demo, random_unit_quat, rotate_about

RNG = np.random.default_rng(5)
IDENTITY = UnitQuat.identity()


def sweep_demo(angle_deg=90.0, axis=(1.0, 0.0, 0.0), q0=None, n=500):
    q0 = q0 or IDENTITY
    g = rotate_about(q0, axis, math.radians(angle_deg))
    return make_demo(np.zeros(3), np.array([0.1, 0.0, 0.0]), q0=q0, g_o=g, n=n), g


def zero_weight_model(base, q0, g_o):
    return OrientationDmpModel(
        alpha_z=base.alpha_z, beta_z=base.beta_z, alpha_x=base.alpha_x,
        basis=base.basis, weights=np.zeros_like(base.weights),
        q0=q0, g_o=g_o, scaling=scaling_diagonal(q0, g_o), duration=1.0,
    )


class TestErrorTerm:
    def test_zero_at_goal(self):
        q = random_unit_quat(RNG)
        assert np.array_equal(orientation_error_term(q, q), np.zeros(3))

    def test_quarter_turn_value(self):
        g = exp_map([math.pi / 4, 0.0, 0.0])
        err = orientation_error_term(IDENTITY, g)
        assert np.allclose(err, [math.pi / 2, 0.0, 0.0], atol=1e-12)

    def test_magnitude_matches_geodesic_angle(self):
        for _ in range(100):
            q, g = random_unit_quat(RNG), random_unit_quat(RNG)
            err = orientation_error_term(q, g)
            assert np.linalg.norm(err) == pytest.approx(
                math.radians(geodesic_angle(q, g)), abs=1e-9)


class TestFit:
    def test_constant_demo_degenerates_everywhere(self):
        t = np.linspace(0.0, 1.0, 50)
        q = random_unit_quat(RNG)
        traj = TimedPoseTrajectory(t, np.zeros((50, 3)), [q] * 50)
        with pytest.warns(DegenerateScalingWarning):
            model = fit_orientation(traj)
        assert np.array_equal(model.weights, np.zeros_like(model.weights))

    def test_slerp_sweep_reproduction(self):
        demo, g = sweep_demo(90.0)
        model = fit_orientation(demo, n_bfs_o=40)
        out = rollout_orientation(model, RolloutConfig(n_pts=500))
        res = dtw_align(demo, out, metric="orientation")
        assert res.mean_cost <= 0.5

    def test_table_defaults(self):
        demo, _ = sweep_demo(45.0)
        model = fit_orientation(demo)
        assert model.alpha_z == 25.0 and model.beta_z == 6.25
        assert model.basis.n_bfs == 40

    def test_too_few_samples(self):
        t = np.linspace(0.0, 1.0, 3)
        traj = TimedPoseTrajectory(t, np.zeros((3, 3)))
        with pytest.raises(TooFewSamples):
            fit_orientation(traj)

    def test_scaling_diagonal_consistency_enforced(self):
        demo, g = sweep_demo(60.0)
        model = fit_orientation(demo)
        recomputed = scaling_diagonal(model.q0, model.g_o)
        assert np.max(np.abs(model.scaling - recomputed)) < 1e-12
        with pytest.raises(ValueError):
            OrientationDmpModel(
                alpha_z=25.0, beta_z=6.25, alpha_x=1.0, basis=model.basis,
                weights=model.weights, q0=model.q0, g_o=model.g_o,
                scaling=model.scaling + 1e-6, duration=1.0,
            )


class TestRollout:
    def test_equilibrium(self):
        demo, g = sweep_demo(30.0)
        base = fit_orientation(demo)
        q = random_unit_quat(RNG)
        model = zero_weight_model(base, q, q)
        out = rollout_orientation(model, RolloutConfig(n_pts=100))
        for qq in out.orientations:
            assert geodesic_angle(qq, q) < 1e-9

    def test_zero_weight_convergence(self):
        demo, _ = sweep_demo(30.0)
        base = fit_orientation(demo)
        g = rotate_about(IDENTITY, [1.0, 0.0, 0.0], math.pi / 2)
        model = zero_weight_model(base, IDENTITY, g)
        out = rollout_orientation(model, RolloutConfig(n_pts=500, horizon_scale=2.0))
        assert geodesic_angle(out.orientations[-1], g) <= 0.1

    def test_zero_weight_convergence_wide_separations(self):
        demo, _ = sweep_demo(30.0)
        base = fit_orientation(demo)
        for _ in range(10):
            q0 = random_unit_quat(RNG)
            angle = RNG.uniform(5.0, 170.0)
            axis = RNG.normal(size=3)
            g = rotate_about(q0, axis, math.radians(angle))
            model = zero_weight_model(base, q0, g)
            out = rollout_orientation(model, RolloutConfig(n_pts=500, horizon_scale=2.0))
            assert geodesic_angle(out.orientations[-1], g) <= 0.1

    def test_first_sample_is_effective_start(self):
        demo, _ = sweep_demo(60.0)
        model = fit_orientation(demo)
        q_start = random_unit_quat(RNG)
        out = rollout_orientation(
            model, RolloutConfig(n_pts=50, start_quat_override=q_start))
        assert np.array_equal(out.orientations[0].wxyz, q_start.wxyz)

    def test_unit_norm_throughout(self):
        demo, _ = sweep_demo(110.0)
        model = fit_orientation(demo)
        out = rollout_orientation(model, RolloutConfig(n_pts=500, horizon_scale=2.0))
        for q in out.orientations:
            n = math.sqrt(q.v**2 + float(q.u @ q.u))
            assert abs(n - 1.0) < 1e-9

    def test_goal_orientation_error_small(self):
        demo, g = sweep_demo(90.0)
        model = fit_orientation(demo)
        out = rollout_orientation(model, RolloutConfig(n_pts=500))
        assert geodesic_angle(out.orientations[-1], g) < 1.0

    def test_hemisphere_invariance(self):
        demo, g = sweep_demo(75.0)
        model = fit_orientation(demo)
        cfg = RolloutConfig(n_pts=200)
        plain = rollout_orientation(model, cfg)
        flipped_goal = rollout_orientation(
            model, RolloutConfig(n_pts=200, goal_quat_override=-model.g_o))
        flipped_start = rollout_orientation(
            model, RolloutConfig(n_pts=200, start_quat_override=-model.q0))
        for a, b in zip(plain.orientations, flipped_goal.orientations):
            assert geodesic_angle(a, b) == 0.0
        for a, b in zip(plain.orientations, flipped_start.orientations):
            assert geodesic_angle(a, b) < 1e-12


class TestPhaseStop:
    def test_zero_error_is_bitwise_identical(self):
        demo, _ = sweep_demo(90.0)
        model = fit_orientation(demo)
        cfg = RolloutConfig(n_pts=200)
        plain = rollout_orientation(model, cfg)
        stopped = rollout_orientation(model, cfg, PhaseStopState(error_gain=5.0, external_error=0.0))
        for a, b in zip(plain.orientations, stopped.orientations):
            assert np.array_equal(a.wxyz, b.wxyz)

    def test_constant_error_slows_progress(self):
        demo, g = sweep_demo(90.0)
        model = fit_orientation(demo)
        cfg = RolloutConfig(n_pts=200)
        plain = rollout_orientation(model, cfg)
        stopped = rollout_orientation(model, cfg, PhaseStopState(error_gain=10.0, external_error=0.5))
        # the slowed rollout lags the nominal one toward the goal at mid-run
        k = 100
        lag_plain = geodesic_angle(plain.orientations[k], model.q0)
        lag_stopped = geodesic_angle(stopped.orientations[k], model.q0)
        assert lag_stopped < lag_plain

    def test_negative_gain_rejected(self):
        with pytest.raises(ValueError):
            PhaseStopState(error_gain=-1.0)


class TestGoalSwitch:
    def test_same_goal_identical(self):
        demo, g = sweep_demo(90.0)
        model = fit_orientation(demo)
        cfg = RolloutConfig(n_pts=200)
        plain = rollout_orientation(model, cfg)
        switched = goal_switch_orientation(model, model.g_o, alpha_g=10.0, cfg=cfg)
        for a, b in zip(plain.orientations, switched.orientations):
            assert np.array_equal(a.wxyz, b.wxyz)

    def test_negated_goal_identical(self):
        demo, g = sweep_demo(90.0)
        model = fit_orientation(demo)
        cfg = RolloutConfig(n_pts=200)
        plain = rollout_orientation(model, cfg)
        switched = goal_switch_orientation(model, -model.g_o, alpha_g=10.0, cfg=cfg)
        for a, b in zip(plain.orientations, switched.orientations):
            assert geodesic_angle(a, b) == 0.0

    def test_mid_rollout_switch_converges(self):
        demo, g = sweep_demo(60.0)
        model = fit_orientation(demo)
        new_g = rotate_about(model.g_o, [0.0, 0.0, 1.0], math.radians(30.0))
        out = goal_switch_orientation(
            model, new_g, alpha_g=25.0,
            cfg=RolloutConfig(n_pts=600, horizon_scale=3.0), switch_time=0.5)
        assert geodesic_angle(out.orientations[-1], new_g) <= 0.5

    def test_omega_continuous_at_switch(self):
        demo, g = sweep_demo(60.0)
        model = fit_orientation(demo)
        new_g = rotate_about(model.g_o, [0.0, 1.0, 0.0], math.radians(40.0))
        out = goal_switch_orientation(
            model, new_g, alpha_g=10.0,
            cfg=RolloutConfig(n_pts=400, horizon_scale=2.0), switch_time=0.5)
        angles = [geodesic_angle(a, b) for a, b in zip(out.orientations, out.orientations[1:])]
        # per-step rotation stays bounded through the switch instant
        assert max(angles) < 2.0
