"""Discrete position DMP: fit forcing weights from a demonstration and
regenerate position trajectories toward arbitrary start/goal states.

The transformation system is the damped spring

    ydd = alpha_y * (beta_y * (g - y) - yd) + f(x)

with the forcing term f(x) a phase-gated Gaussian mixture scaled by the
movement amplitude (g - y0). The forcing target is extracted from the
demonstration by solving the same equation for f, weights come from the
closed-form LWR solve, and rollouts integrate with explicit Euler at the
requested point count. Demonstrations are rescaled to unit duration before
fitting; rollouts map stamps back to the nominal duration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSet, CanonicalSystem, LwrProblem, eval_basis, lwr_fit, make_basis
from .errors import NonMonotonicTime, TooFewSamples
from .quat import UnitQuat
from .trajectory import TimedPoseTrajectory

__all__ = [
    "PositionDmpModel",
    "RolloutConfig",
    "fit_position",
    "position_forcing_targets",
    "rollout_position",
    "goal_switch_position",
]


@dataclass(frozen=True)
class PositionDmpModel:
    """Fitted position model: gains, basis, per-axis weights, boundaries."""

    alpha_y: float
    beta_y: float
    alpha_x: float
    basis: BasisSet
    weights: np.ndarray  # (3, n_bfs)
    y0: np.ndarray
    g: np.ndarray
    duration: float

    def __post_init__(self):
        if self.alpha_y <= 0 or self.beta_y <= 0 or self.alpha_x <= 0:
            raise ValueError("gains must be positive")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (3, self.basis.n_bfs):
            raise ValueError(f"weights must have shape (3, {self.basis.n_bfs})")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "y0", np.asarray(self.y0, dtype=float).reshape(3))
        object.__setattr__(self, "g", np.asarray(self.g, dtype=float).reshape(3))


@dataclass(frozen=True)
class RolloutConfig:
    """Sampling and boundary overrides for regeneration.

    ``horizon_scale`` >= 1 stretches integration past the nominal duration
    so the goal attractor can settle; overrides left as None keep the
    demonstrated boundary states.
    """

    n_pts: int = 500
    goal_override: np.ndarray | None = None
    start_override: np.ndarray | None = None
    horizon_scale: float = 1.0
    start_quat_override: UnitQuat | None = None
    goal_quat_override: UnitQuat | None = None

    def __post_init__(self):
        if self.n_pts < 2:
            raise ValueError("n_pts must be >= 2")
        if self.horizon_scale < 1.0:
            raise ValueError("horizon_scale must be >= 1")
        for name in ("goal_override", "start_override"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.asarray(v, dtype=float).reshape(3))


def position_forcing_targets(demo: TimedPoseTrajectory, alpha_y: float, beta_y: float, alpha_x: float):
    """Demonstration-derived forcing targets on normalized time.

    Returns (phases, offsets, targets): the phase at each sample, the
    per-axis amplitude g - y0, and the (n, 3) array

        f_des = ydd_demo - alpha_y * (beta_y * (g - y_demo) - yd_demo)

    with derivatives taken by central differences (second-order one-sided
    at the endpoints) on unit-duration time.
    """
    t = (demo.stamps - demo.stamps[0]) / demo.duration
    pos = demo.positions
    vel = np.gradient(pos, t, axis=0, edge_order=2)
    acc = np.gradient(vel, t, axis=0, edge_order=2)
    g = pos[-1]
    f_des = acc - alpha_y * (beta_y * (g - pos) - vel)
    phases = np.exp(-alpha_x * t)
    return phases, g - pos[0], f_des


def fit_position(
    demo: TimedPoseTrajectory,
    alpha_y: float = 25.0,
    beta_y: float = 6.25,
    n_bfs: int = 100,
    alpha_x: float = 1.0,
) -> PositionDmpModel:
    """Fit a position DMP to a demonstration.

    The demo needs at least 5 samples with strictly increasing stamps
    (enforced by the trajectory type). Axes whose start and goal coincide
    have a vanishing forcing scale; their weights are zeroed and a
    DegenerateRegressionWarning is emitted, leaving the pure spring-damper
    on that axis.
    """
    if len(demo) < 5:
        raise TooFewSamples(f"need at least 5 samples to fit, got {len(demo)}")
    if np.any(np.diff(demo.stamps) <= 0):
        raise NonMonotonicTime("demonstration stamps must be strictly increasing")

    cs = CanonicalSystem(alpha_x=alpha_x)
    basis = make_basis(cs, n_bfs, 1.0)
    phases, offsets, f_des = position_forcing_targets(demo, alpha_y, beta_y, alpha_x)

    weights = np.zeros((3, n_bfs))
    for axis in range(3):
        problem = LwrProblem(phases, phases * offsets[axis], f_des[:, axis])
        weights[axis], _ = lwr_fit(problem, basis)

    return PositionDmpModel(
        alpha_y=alpha_y,
        beta_y=beta_y,
        alpha_x=alpha_x,
        basis=basis,
        weights=weights,
        y0=demo.positions[0].copy(),
        g=demo.positions[-1].copy(),
        duration=demo.duration,
    )


def _integrate_position(model: PositionDmpModel, cfg: RolloutConfig, goal_schedule=None) -> TimedPoseTrajectory:
    """Explicit Euler integration of the transformation system.

    ``goal_schedule(g_active, t_norm, dt)`` may move the active goal each
    step; the forcing amplitude follows the active goal so the trajectory
    stays continuous through a switch.
    """
    y0 = model.y0 if cfg.start_override is None else cfg.start_override
    g = model.g if cfg.goal_override is None else cfg.goal_override

    n = cfg.n_pts
    dt = cfg.horizon_scale / (n - 1)
    basis = model.basis

    out = np.empty((n, 3))
    out[0] = y0  # first sample is the effective start, bit for bit
    y = y0.astype(float).copy()
    v = np.zeros(3)
    g_active = g.astype(float).copy()
    stamps = np.empty(n)
    stamps[0] = 0.0
    t = 0.0
    for k in range(n - 1):
        x = np.exp(-model.alpha_x * t)
        psi = eval_basis(basis, x)
        den = float(psi.sum())
        mix = (model.weights @ psi) / den if den > 0.0 else np.zeros(3)
        f = mix * x * (g_active - y0)
        acc = model.alpha_y * (model.beta_y * (g_active - y) - v) + f
        y = y + v * dt
        v = v + acc * dt
        t += dt
        if goal_schedule is not None:
            g_active = goal_schedule(g_active, t, dt)
        out[k + 1] = y
        stamps[k + 1] = t
    return TimedPoseTrajectory(stamps * model.duration, out)


def rollout_position(model: PositionDmpModel, cfg: RolloutConfig) -> TimedPoseTrajectory:
    """Regenerate a position trajectory from the model.

    Integrates the spring-damper plus forcing with explicit Euler over
    ``n_pts`` samples spanning ``horizon_scale`` times the unit duration;
    stamps are mapped back to the nominal demo duration. Because the
    forcing is gated by the decaying phase, the trajectory converges to the
    effective goal for any bounded weights.
    """
    return _integrate_position(model, cfg)


def goal_switch_position(
    model: PositionDmpModel,
    new_g,
    alpha_g: float,
    cfg: RolloutConfig | None = None,
    switch_time: float = 0.0,
) -> TimedPoseTrajectory:
    """Rollout with the active goal filtered toward ``new_g``.

    The active goal starts at the model goal and follows
    gd = alpha_g * (new_g - g_active) once normalized time passes
    ``switch_time``; the filter is stepped by its exact exponential
    solution so any gain stays stable. Position and velocity remain
    continuous at the switch, and with ``new_g`` equal to the original
    goal the rollout is identical to the plain one.
    """
    if alpha_g <= 0:
        raise ValueError("alpha_g must be positive")
    if cfg is None:
        cfg = RolloutConfig()
    new_g = np.asarray(new_g, dtype=float).reshape(3)

    def schedule(g_active, t, dt):
        if t < switch_time:
            return g_active
        return new_g + (g_active - new_g) * np.exp(-alpha_g * dt)

    return _integrate_position(model, cfg, goal_schedule=schedule)
