"""Quaternion orientation DMP with phase stopping and goal switching.

Angular velocity obeys the damped spring on the rotation error

    omega_d = alpha_z * (beta_z * 2 log(g_o * conj(q)) - omega) + f_o(x)

and the quaternion itself is advanced with the exponential-map update
q(t+dt) = exp(omega * dt / 2) * q(t), which keeps every sample on S^3.
The forcing term is the shared Gaussian mixture scaled per axis by the
diagonal D_o = diag(2 log(g_o * conj(q0))) of the boundary rotation offset.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .basis import BasisSet, CanonicalSystem, LwrProblem, eval_basis, lwr_fit, make_basis
from .errors import DegenerateScalingWarning, DomainError, TooFewSamples
from .quat import UnitQuat, conj, exp_map, geodesic_angle, log_map, quat_mul, slerp
from .preprocess import angular_velocities
from .trajectory import TimedPoseTrajectory
from .dmp_position import RolloutConfig

__all__ = [
    "OrientationDmpModel",
    "PhaseStopState",
    "fit_orientation",
    "rollout_orientation",
    "goal_switch_orientation",
    "orientation_error_term",
    "scaling_diagonal",
]

# Scaling diagonals smaller than this leave their axis unforced.
DEGENERATE_SCALE = 1e-10


def orientation_error_term(q: UnitQuat, g_o: UnitQuat) -> np.ndarray:
    """Scaled rotation error 2 log(g_o * conj(q)) as a radian 3-vector.

    The product is flipped onto the positive-scalar hemisphere first so the
    log returns the short-way rotation; the vector's magnitude then equals
    the geodesic angle between q and g_o in radians.
    """
    e = quat_mul(g_o, conj(q))
    if e.v < 0.0:
        e = -e
    return 2.0 * log_map(e)


def scaling_diagonal(q0: UnitQuat, g_o: UnitQuat) -> np.ndarray:
    """Diagonal of D_o: the boundary rotation offset 2 log(g_o * conj(q0))."""
    return orientation_error_term(q0, g_o)


@dataclass(frozen=True)
class OrientationDmpModel:
    """Fitted orientation model: gains, basis, per-axis weights, boundaries."""

    alpha_z: float
    beta_z: float
    alpha_x: float
    basis: BasisSet
    weights: np.ndarray  # (3, n_bfs)
    q0: UnitQuat
    g_o: UnitQuat
    scaling: np.ndarray  # diagonal of D_o, radians
    duration: float

    def __post_init__(self):
        if self.alpha_z <= 0 or self.beta_z <= 0 or self.alpha_x <= 0:
            raise ValueError("gains must be positive")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (3, self.basis.n_bfs):
            raise ValueError(f"weights must have shape (3, {self.basis.n_bfs})")
        # any boundary pair has rotation angle <= 180 degrees, inside the log
        # domain; at exactly 180 the direction tie is resolved by the
        # deterministic hemisphere flip in orientation_error_term
        d = np.asarray(self.scaling, dtype=float).reshape(3)
        if np.max(np.abs(d - scaling_diagonal(self.q0, self.g_o))) > 1e-12:
            raise ValueError("stored scaling diagonal does not match the boundary states")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "scaling", d)


@dataclass(frozen=True)
class PhaseStopState:
    """External-error coupling that slows the phase clock.

    The phase advance each step is divided by (1 + error_gain *
    external_error^2); with a zero gain or zero error the phase evolves
    exactly as the nominal canonical system.
    """

    error_gain: float = 0.0
    external_error: float = 0.0

    def __post_init__(self):
        if self.error_gain < 0:
            raise ValueError("error_gain must be >= 0")

    @property
    def slowdown(self) -> float:
        return 1.0 + self.error_gain * self.external_error ** 2


def fit_orientation(
    demo: TimedPoseTrajectory,
    alpha_z: float = 25.0,
    beta_z: float = 6.25,
    n_bfs_o: int = 40,
    alpha_x: float = 1.0,
) -> OrientationDmpModel:
    """Fit an orientation DMP to a quaternion demonstration.

    Angular velocity comes from forward differences of relative rotations,
    its derivative from central differences, and per-axis weights from the
    LWR solve of

        (mixture) * x = D_o^{-1} (omega_d - alpha_z (beta_z e - omega))

    on unit-duration time. Axes whose scaling diagonal is below
    ``DEGENERATE_SCALE`` keep zero weights and raise a
    DegenerateScalingWarning; a fully constant demo degenerates on all
    three axes and the rollout reduces to the spring-damper (which holds
    the goal).
    """
    if len(demo) < 5:
        raise TooFewSamples(f"need at least 5 samples to fit, got {len(demo)}")

    t = (demo.stamps - demo.stamps[0]) / demo.duration
    unit = TimedPoseTrajectory(t, demo.positions, demo.orientations)
    q0, g_o = unit.orientations[0], unit.orientations[-1]

    omega = angular_velocities(unit)
    omega_dot = np.gradient(omega, t, axis=0, edge_order=2)
    errs = np.stack([orientation_error_term(q, g_o) for q in unit.orientations])
    d = scaling_diagonal(q0, g_o)

    cs = CanonicalSystem(alpha_x=alpha_x)
    basis = make_basis(cs, n_bfs_o, 1.0)
    phases = np.exp(-alpha_x * t)

    weights = np.zeros((3, n_bfs_o))
    degenerate_axes = []
    rhs = omega_dot - alpha_z * (beta_z * errs - omega)
    for axis in range(3):
        if abs(d[axis]) < DEGENERATE_SCALE:
            degenerate_axes.append("xyz"[axis])
            continue
        problem = LwrProblem(phases, phases, rhs[:, axis] / d[axis])
        weights[axis], _ = lwr_fit(problem, basis)
    if degenerate_axes:
        warnings.warn(
            f"axes {','.join(degenerate_axes)} have no net rotation; their weights stay 0",
            DegenerateScalingWarning,
            stacklevel=2,
        )

    return OrientationDmpModel(
        alpha_z=alpha_z,
        beta_z=beta_z,
        alpha_x=alpha_x,
        basis=basis,
        weights=weights,
        q0=q0,
        g_o=g_o,
        scaling=d,
        duration=demo.duration,
    )


def _integrate_orientation(
    model: OrientationDmpModel,
    cfg: RolloutConfig,
    phase_stop: PhaseStopState | None,
    goal_schedule=None,
) -> TimedPoseTrajectory:
    """Euler steps for omega, exponential-map updates for q."""
    q0 = model.q0 if cfg.start_quat_override is None else cfg.start_quat_override
    g = model.g_o if cfg.goal_quat_override is None else cfg.goal_quat_override
    if float(q0.wxyz @ g.wxyz) < 0.0:
        g = -g  # hemisphere alignment; the rotation is unchanged
    if phase_stop is None:
        phase_stop = PhaseStopState()

    d_eff = scaling_diagonal(q0, g)
    n = cfg.n_pts
    dt = cfg.horizon_scale / (n - 1)
    basis = model.basis

    quats = [q0]
    q = q0
    omega = np.zeros(3)
    g_active = g
    stamps = np.empty(n)
    stamps[0] = 0.0
    t = 0.0       # real time
    t_phase = 0.0 # phase clock, slowed by the coupling
    for k in range(n - 1):
        x = np.exp(-model.alpha_x * t_phase)
        psi = eval_basis(basis, x)
        den = float(psi.sum())
        mix = (model.weights @ psi) / den if den > 0.0 else np.zeros(3)
        f = d_eff * mix * x
        try:
            # continuous log branch: the goal representative was fixed once
            # above, so the spring direction cannot jump when the error
            # passes through 180 degrees (a per-step short-way flip would)
            err = 2.0 * log_map(quat_mul(g_active, conj(q)))
            omega_dot = model.alpha_z * (model.beta_z * err - omega) + f
            q = quat_mul(exp_map(omega * (dt / 2.0)), q)
        except DomainError as exc:
            raise DomainError(str(exc), step=k) from exc
        omega = omega + omega_dot * dt
        t += dt
        t_phase += dt / phase_stop.slowdown
        if goal_schedule is not None:
            g_active = goal_schedule(g_active, t, dt)
        quats.append(q)
        stamps[k + 1] = t

    positions = np.zeros((n, 3))
    return TimedPoseTrajectory(stamps * model.duration, positions, quats)


def rollout_orientation(
    model: OrientationDmpModel,
    cfg: RolloutConfig,
    phase_stop: PhaseStopState | None = None,
) -> TimedPoseTrajectory:
    """Regenerate an orientation trajectory from the model.

    The first sample equals the effective start orientation and every
    sample stays unit-norm because the update multiplies by exponential-map
    quaternions. Boundary overrides rescale the forcing through the
    recomputed D_o of the effective boundary pair. A mid-rollout domain
    violation (antipodal goal error) raises :class:`DomainError` carrying
    the step index.
    """
    return _integrate_orientation(model, cfg, phase_stop)


def goal_switch_orientation(
    model: OrientationDmpModel,
    new_g_o: UnitQuat,
    alpha_g: float,
    cfg: RolloutConfig | None = None,
    switch_time: float = 0.0,
    phase_stop: PhaseStopState | None = None,
) -> TimedPoseTrajectory:
    """Rollout with the active goal filtered along the geodesic to ``new_g_o``.

    Each step moves the active goal by slerp(g_active, new_g_o,
    1 - exp(-alpha_g * dt)), the geodesic analog of the first-order vector
    filter, so omega stays continuous at the switch. Passing the original
    goal (or its negation, the same rotation) reproduces the plain rollout.
    """
    if alpha_g <= 0:
        raise ValueError("alpha_g must be positive")
    if cfg is None:
        cfg = RolloutConfig()

    def schedule(g_active, t, dt):
        if t < switch_time:
            return g_active
        return slerp(g_active, new_g_o, 1.0 - np.exp(-alpha_g * dt))

    return _integrate_orientation(model, cfg, phase_stop, goal_schedule=schedule)
