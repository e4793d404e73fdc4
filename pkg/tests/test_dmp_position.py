import numpy as np
import pytest

from suturelfd import (
    DegenerateRegressionWarning,
    NonMonotonicTime,
    RolloutConfig,
    TimedPoseTrajectory,
    TooFewSamples,
    dtw_align,
    fit_position,
    goal_switch_position,
    rollout_position,
)
from suturelfd.dmp_position import position_forcing_targets
from helpers import make_demo

RNG = np.random.default_rng(3)


def minjerk_demo(scale=0.1, n=500):
    start = np.zeros(3)
    goal = np.array([scale, 0.0, 0.0])
    return make_demo(start, goal, n=n)


class TestFit:
    def test_stationary_demo_degenerates(self):
        t = np.linspace(0.0, 1.0, 50)
        pos = np.tile([0.01, 0.02, 0.03], (50, 1))
        with pytest.warns(DegenerateRegressionWarning):
            model = fit_position(TimedPoseTrajectory(t, pos))
        assert np.max(np.abs(model.weights)) < 1e-9

    def test_minjerk_reproduction_within_a_millimeter(self):
        demo = make_demo(np.zeros(3), np.array([0.1, 0.0, 0.0]))
        model = fit_position(demo, n_bfs=100)
        out = rollout_position(model, RolloutConfig(n_pts=500))
        res = dtw_align(demo, out, metric="position")
        assert res.mean_cost <= 1e-3

    def test_default_gains_match_profile(self):
        model = fit_position(minjerk_demo())
        assert model.alpha_y == 25.0
        assert model.beta_y == 6.25
        assert model.basis.n_bfs == 100

    def test_records_boundaries_and_duration(self):
        demo = make_demo(np.array([0.01, 0.0, 0.0]), np.array([0.05, 0.02, -0.01]), duration=2.5)
        model = fit_position(demo)
        assert np.array_equal(model.y0, demo.positions[0])
        assert np.array_equal(model.g, demo.positions[-1])
        assert model.duration == pytest.approx(2.5)

    def test_too_few_samples(self):
        t = np.linspace(0.0, 1.0, 4)
        with pytest.raises(TooFewSamples):
            fit_position(TimedPoseTrajectory(t, np.zeros((4, 3)) + np.linspace(0, 1, 4)[:, None]))

    def test_nonmonotonic_time_rejected_at_construction(self):
        t = np.array([0.0, 0.5, 0.4, 0.8, 1.0])
        with pytest.raises(NonMonotonicTime):
            TimedPoseTrajectory(t, np.zeros((5, 3)))

    def test_forcing_targets_match_independent_recompute(self):
        demo = minjerk_demo(n=200)
        phases, offsets, f_des = position_forcing_targets(demo, 25.0, 6.25, 1.0)
        # recompute with hand-written stencils on the same normalized time
        t = (demo.stamps - demo.stamps[0]) / demo.duration
        h = t[1] - t[0]
        pos = demo.positions
        vel = np.empty_like(pos)
        vel[1:-1] = (pos[2:] - pos[:-2]) / (2 * h)
        vel[0] = (-3 * pos[0] + 4 * pos[1] - pos[2]) / (2 * h)
        vel[-1] = (3 * pos[-1] - 4 * pos[-2] + pos[-3]) / (2 * h)
        acc = np.empty_like(pos)
        acc[1:-1] = (vel[2:] - vel[:-2]) / (2 * h)
        acc[0] = (-3 * vel[0] + 4 * vel[1] - vel[2]) / (2 * h)
        acc[-1] = (3 * vel[-1] - 4 * vel[-2] + vel[-3]) / (2 * h)
        g = pos[-1]
        expect = acc - 25.0 * (6.25 * (g - pos) - vel)
        denom = np.maximum(np.abs(expect), 1.0)
        assert np.max(np.abs(f_des - expect) / denom) < 1e-8


class TestRollout:
    def test_equilibrium_stays_put(self):
        demo = minjerk_demo()
        model = fit_position(demo)
        model = type(model)(
            alpha_y=model.alpha_y, beta_y=model.beta_y, alpha_x=model.alpha_x,
            basis=model.basis, weights=np.zeros_like(model.weights),
            y0=np.array([0.02, 0.01, 0.0]), g=np.array([0.02, 0.01, 0.0]),
            duration=1.0,
        )
        out = rollout_position(model, RolloutConfig(n_pts=100))
        assert np.max(np.abs(out.positions - model.g)) < 1e-12

    def test_zero_weight_convergence_critically_damped(self):
        demo = minjerk_demo()
        base = fit_position(demo)
        model = type(base)(
            alpha_y=25.0, beta_y=6.25, alpha_x=1.0, basis=base.basis,
            weights=np.zeros_like(base.weights),
            y0=np.zeros(3), g=np.array([0.1, 0.0, 0.0]), duration=1.0,
        )
        out = rollout_position(model, RolloutConfig(n_pts=500, horizon_scale=2.0))
        final_err = np.linalg.norm(out.positions[-1] - model.g)
        assert final_err <= 1e-3 * np.linalg.norm(model.g - model.y0)
        # critically damped: no overshoot beyond 5 percent
        assert np.max(out.positions[:, 0]) <= 0.1 * 1.05

    def test_start_exactness_bitwise(self):
        model = fit_position(minjerk_demo())
        start = np.array([0.123456789, -0.02, 0.0072])
        out = rollout_position(model, RolloutConfig(n_pts=50, start_override=start))
        assert np.array_equal(out.positions[0], start)

    def test_fitted_self_rollout_goal_error_tiny(self):
        demo = minjerk_demo()
        model = fit_position(demo)
        out = rollout_position(model, RolloutConfig(n_pts=500))
        assert np.linalg.norm(out.positions[-1] - model.g) < 5e-5  # well under a tenth of a millimeter

    def test_bounded_random_weights_still_converge(self):
        base = fit_position(minjerk_demo())
        for _ in range(20):
            w = RNG.uniform(-0.5, 0.5, size=base.weights.shape)
            y0 = RNG.uniform(-0.05, 0.05, 3)
            g = y0 + RNG.uniform(0.01, 0.15) * _unit(RNG)
            model = type(base)(
                alpha_y=25.0, beta_y=6.25, alpha_x=1.0, basis=base.basis,
                weights=w, y0=y0, g=g, duration=1.0,
            )
            out = rollout_position(model, RolloutConfig(n_pts=200, horizon_scale=2.0))
            tol = 1e-3 * max(np.linalg.norm(g - y0), 1e-3)
            assert np.linalg.norm(out.positions[-1] - g) <= tol

    def test_self_distillation_weight_drift_below_one_percent(self):
        demo = minjerk_demo()
        model = fit_position(demo)
        out = rollout_position(model, RolloutConfig(n_pts=500))
        refit = fit_position(out)
        rms = np.sqrt(np.mean((refit.weights - model.weights) ** 2))
        scale = np.sqrt(np.mean(model.weights ** 2))
        assert rms / scale < 0.01

    def test_stamps_map_back_to_nominal_duration(self):
        demo = make_demo(np.zeros(3), np.array([0.1, 0.0, 0.0]), duration=3.0)
        model = fit_position(demo)
        out = rollout_position(model, RolloutConfig(n_pts=100))
        assert out.stamps[0] == 0.0
        assert out.stamps[-1] == pytest.approx(3.0, rel=1e-9)


def _unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


class TestGoalSwitch:
    def test_same_goal_identical_to_plain_rollout(self):
        model = fit_position(minjerk_demo())
        cfg = RolloutConfig(n_pts=200)
        plain = rollout_position(model, cfg)
        switched = goal_switch_position(model, model.g, alpha_g=10.0, cfg=cfg)
        assert np.array_equal(plain.positions, switched.positions)

    def test_large_gain_approaches_plain_rollout_to_new_goal(self):
        model = fit_position(minjerk_demo())
        new_g = model.g + np.array([0.0, 0.05, 0.0])
        cfg = RolloutConfig(n_pts=400, horizon_scale=2.0)
        direct = rollout_position(model, RolloutConfig(n_pts=400, horizon_scale=2.0, goal_override=new_g))
        switched = goal_switch_position(model, new_g, alpha_g=2000.0, cfg=cfg)
        # after the fast filter settles the trajectories should nearly agree
        assert np.linalg.norm(direct.positions[-1] - switched.positions[-1]) < 1e-4

    def test_mid_rollout_switch_converges_to_new_goal(self):
        model = fit_position(minjerk_demo())
        new_g = model.g + np.array([0.02, -0.03, 0.01])
        out = goal_switch_position(
            model, new_g, alpha_g=25.0,
            cfg=RolloutConfig(n_pts=600, horizon_scale=3.0), switch_time=0.5,
        )
        scale = max(np.linalg.norm(new_g - model.y0), 1e-3)
        assert np.linalg.norm(out.positions[-1] - new_g) <= 1e-3 * scale

    def test_velocity_continuous_at_switch(self):
        model = fit_position(minjerk_demo())
        new_g = model.g + np.array([0.0, 0.04, 0.0])
        out = goal_switch_position(
            model, new_g, alpha_g=15.0,
            cfg=RolloutConfig(n_pts=500), switch_time=0.4,
        )
        vel = np.diff(out.positions, axis=0) / np.diff(out.stamps)[:, None]
        jump = np.max(np.linalg.norm(np.diff(vel, axis=0), axis=1))
        # no velocity discontinuity beyond ordinary integration steps
        assert jump < 0.05

    def test_rejects_nonpositive_gain(self):
        model = fit_position(minjerk_demo())
        with pytest.raises(ValueError):
            goal_switch_position(model, model.g, alpha_g=0.0)


class TestRolloutConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            RolloutConfig(n_pts=1)
        with pytest.raises(ValueError):
            RolloutConfig(horizon_scale=0.5)
