"""Shared fixtures: synthetic demonstrations and independent oracles."""

import numpy as np

from suturelfd import TimedPoseTrajectory, UnitQuat, exp_map, quat_mul, slerp


def minjerk(t):
    """Smooth 0->1 profile with zero boundary velocity and acceleration."""
    return 10 * t**3 - 15 * t**4 + 6 * t**5


def minjerk_vel(t, duration=1.0):
    return (30 * t**2 - 60 * t**3 + 30 * t**4) / duration


def random_unit_quat(rng, max_angle=np.pi - 0.2):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0, max_angle)
    return exp_map(axis * angle / 2)


def rotate_about(q, axis, angle):
    """q rotated by `angle` radians about the world-frame axis."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return quat_mul(exp_map(axis * angle / 2), q)


def make_demo(start, goal, q0=None, g_o=None, duration=1.0, n=500):
    """Minimum-jerk positions composed with a smooth slerp orientation sweep."""
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    t = np.linspace(0.0, duration, n)
    s = minjerk(t / duration)
    pos = start[None, :] + s[:, None] * (goal - start)[None, :]
    quats = None
    if q0 is not None:
        quats = [slerp(q0, g_o, float(sk)) for sk in s]
    return TimedPoseTrajectory(t, pos, quats)


def dtw_oracle(cost):
    """Independent top-down memoized DP over the same step set."""
    import functools

    n, m = cost.shape

    @functools.lru_cache(maxsize=None)
    def rec(i, j):
        if i == 0 and j == 0:
            return cost[0, 0]
        best = np.inf
        if i > 0 and j > 0:
            best = min(best, rec(i - 1, j - 1))
        if i > 0:
            best = min(best, rec(i - 1, j))
        if j > 0:
            best = min(best, rec(i, j - 1))
        return cost[i, j] + best

    return rec(n - 1, m - 1)
