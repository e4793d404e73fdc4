"""Demonstration conditioning: segmentation, resampling, derivatives, DTW.

Raw teleoperation recordings pause between subtasks, so a velocity filter
splits them; fitting wants dense uniform samples, so positions are
resampled with piecewise quintic Hermite interpolation and orientations
with per-interval slerp; evaluation compares trajectories of different
lengths, so a classical dynamic-time-warping alignment is provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BPoly

from .errors import NonUniformStamps
from .quat import UnitQuat, conj, log_map, quat_mul, slerp
from .trajectory import TimedPoseTrajectory

__all__ = [
    "SegmentationConfig",
    "DtwResult",
    "TrajectoryDerivatives",
    "segment_by_velocity",
    "resample_uniform",
    "derivatives",
    "dtw_align",
    "angular_velocities",
]


@dataclass(frozen=True)
class SegmentationConfig:
    """Thresholds for the velocity-based splitter.

    A pause is a maximal run of samples slower than ``speed_threshold``
    lasting at least ``dwell_min`` seconds; segments shorter than
    ``min_segment`` are dropped.
    """

    speed_threshold: float = 0.002  # m/s
    dwell_min: float = 0.2          # s
    min_segment: float = 0.5        # s

    def __post_init__(self):
        if self.speed_threshold <= 0 or self.dwell_min <= 0 or self.min_segment <= 0:
            raise ValueError("all segmentation thresholds must be positive")


@dataclass(frozen=True)
class DtwResult:
    """Alignment path with its total and per-step mean cost."""

    path: list[tuple[int, int]]
    total_cost: float
    mean_cost: float


@dataclass(frozen=True)
class TrajectoryDerivatives:
    velocity: np.ndarray
    acceleration: np.ndarray
    angular_velocity: np.ndarray
    angular_acceleration: np.ndarray


def segment_by_velocity(traj: TimedPoseTrajectory, cfg: SegmentationConfig) -> list[TimedPoseTrajectory]:
    """Split a trajectory at sustained low-speed dwells.

    Returns the segments between qualifying pauses, in order; an
    all-stationary input yields no segments and a never-pausing one is
    returned whole.
    """
    t = traj.stamps
    dp = np.linalg.norm(np.diff(traj.positions, axis=0), axis=1)
    dt = np.diff(t)
    slow = dp / dt < cfg.speed_threshold  # per interval

    # maximal runs of slow intervals, kept as cuts when they dwell long enough
    cuts = []  # (first_interval, last_interval)
    k = 0
    n_int = slow.size
    while k < n_int:
        if not slow[k]:
            k += 1
            continue
        j = k
        while j + 1 < n_int and slow[j + 1]:
            j += 1
        if t[j + 1] - t[k] >= cfg.dwell_min:
            cuts.append((k, j))
        k = j + 1

    segments = []
    start = 0  # sample index
    for a, b in cuts:
        if a > start:
            segments.append((start, a + 1))  # samples start..a inclusive
        start = b + 1
    if start < len(traj) - 1:
        segments.append((start, len(traj)))

    out = []
    for lo, hi in segments:
        if hi - lo < 2:
            continue
        if t[hi - 1] - t[lo] >= cfg.min_segment:
            out.append(traj.slice(lo, hi))
    return out


def _knot_derivatives(stamps: np.ndarray, values: np.ndarray):
    """Per-knot value/velocity/acceleration from local polynomial stencils.

    Each knot gets a polynomial of degree min(5, n-1) through its nearest
    deg+1 samples, so data that came from a single global quintic yields its
    exact derivatives.
    """
    n = len(stamps)
    deg = min(5, n - 1)
    win = deg + 1
    out = np.zeros((n, 3, values.shape[1]))
    for k in range(n):
        lo = min(max(k - win // 2, 0), n - win)
        ts = stamps[lo:lo + win] - stamps[k]  # center for conditioning
        block = values[lo:lo + win]
        for j in range(values.shape[1]):
            cf = np.polyfit(ts, block[:, j], deg)
            out[k, 0, j] = cf[-1]
            out[k, 1, j] = cf[-2] if deg >= 1 else 0.0
            out[k, 2, j] = 2.0 * cf[-3] if deg >= 2 else 0.0
    return out


def resample_uniform(traj: TimedPoseTrajectory, n_pts: int) -> TimedPoseTrajectory:
    """Resample to n_pts uniform stamps over [first, last].

    Positions use piecewise quintic Hermite interpolation with knot
    velocities and accelerations estimated by local quintic stencils, which
    reproduces globally quintic paths exactly; orientations use
    per-interval slerp. Endpoint samples are copied through unchanged.
    """
    if n_pts < 2:
        raise ValueError("n_pts must be >= 2")
    t = traj.stamps
    knot_data = _knot_derivatives(t, traj.positions)
    poly = BPoly.from_derivatives(t, knot_data)
    tq = np.linspace(t[0], t[-1], n_pts)
    pos = poly(tq)
    pos[0] = traj.positions[0]
    pos[-1] = traj.positions[-1]

    quats = []
    idx = np.clip(np.searchsorted(t, tq, side="right") - 1, 0, len(t) - 2)
    for tk, i in zip(tq, idx):
        frac = (tk - t[i]) / (t[i + 1] - t[i])
        quats.append(slerp(traj.orientations[i], traj.orientations[i + 1], float(frac)))
    quats[0] = traj.orientations[0]
    quats[-1] = traj.orientations[-1]
    return TimedPoseTrajectory(tq, pos, quats, label=traj.label)


def angular_velocities(traj: TimedPoseTrajectory) -> np.ndarray:
    """Angular velocity per sample from relative-rotation forward differences.

    omega_k = 2 log(q_{k+1} * conj(q_k)) / dt, with the last sample holding
    the final interval's value.
    """
    n = len(traj)
    om = np.zeros((n, 3))
    q = traj.orientations
    dt = np.diff(traj.stamps)
    for k in range(n - 1):
        om[k] = 2.0 * log_map(quat_mul(q[k + 1], conj(q[k]))) / dt[k]
    om[-1] = om[-2]
    return om


def derivatives(traj: TimedPoseTrajectory) -> TrajectoryDerivatives:
    """Velocity/acceleration sequences by central differences.

    Interior samples use central differences and the endpoints second-order
    one-sided ones; requires at least 3 uniformly spaced samples (resample
    first), otherwise :class:`NonUniformStamps` is raised.
    """
    t = traj.stamps
    if len(traj) < 3:
        raise ValueError("derivatives need at least 3 samples")
    dt = np.diff(t)
    if np.max(np.abs(dt - dt.mean())) > 1e-6 * traj.duration:
        raise NonUniformStamps("stamps are not uniform; resample_uniform first")
    vel = np.gradient(traj.positions, t, axis=0, edge_order=2)
    acc = np.gradient(vel, t, axis=0, edge_order=2)
    om = angular_velocities(traj)
    omd = np.gradient(om, t, axis=0, edge_order=2)
    return TrajectoryDerivatives(vel, acc, om, omd)


def _pairwise_cost(ref, test, metric: str) -> np.ndarray:
    if metric == "position":
        a = np.asarray(ref, dtype=float)
        b = np.asarray(test, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        if b.ndim == 1:
            b = b[:, None]
        return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    if metric == "orientation":
        a = np.stack([q.wxyz for q in ref])
        b = np.stack([q.wxyz for q in test])
        # hemisphere-aligned chord length keeps full precision near zero,
        # matching the scalar geodesic_angle formula
        diff = a[:, None, :] - b[None, :, :]
        summ = a[:, None, :] + b[None, :, :]
        chord = np.minimum(np.linalg.norm(diff, axis=2), np.linalg.norm(summ, axis=2))
        return 4.0 * np.degrees(np.arcsin(np.clip(0.5 * chord, 0.0, 1.0)))
    raise ValueError(f"unknown metric {metric!r}")


def _extract(seq, metric):
    if isinstance(seq, TimedPoseTrajectory):
        return seq.positions if metric == "position" else seq.orientations
    return seq


def dtw_align(ref, test, metric: str = "position") -> DtwResult:
    """Dynamic time warping with the symmetric step set {(1,0),(0,1),(1,1)}.

    Cost is Euclidean distance in meters for ``position`` and the geodesic
    rotation angle in degrees for ``orientation``. Inputs may be
    trajectories or raw sequences (points, scalars, or UnitQuat lists).
    mean_cost divides the accumulated cost by the alignment path length.
    """
    a = _extract(ref, metric)
    b = _extract(test, metric)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("dtw_align requires nonempty sequences")
    cost = _pairwise_cost(a, b, metric)
    n, m = cost.shape

    # accumulate along anti-diagonals so each sweep is a vector op
    acc = np.full((n, m), np.inf)
    acc[0, 0] = cost[0, 0]
    for s in range(1, n + m - 1):
        i0 = max(0, s - m + 1)
        i1 = min(n - 1, s)
        ii = np.arange(i0, i1 + 1)
        jj = s - ii
        up = np.where(ii > 0, acc[np.maximum(ii - 1, 0), jj], np.inf)
        left = np.where(jj > 0, acc[ii, np.maximum(jj - 1, 0)], np.inf)
        diag = np.where((ii > 0) & (jj > 0), acc[np.maximum(ii - 1, 0), np.maximum(jj - 1, 0)], np.inf)
        acc[ii, jj] = cost[ii, jj] + np.minimum(np.minimum(up, left), diag)

    # backtrack, preferring the diagonal on ties
    path = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while i > 0 or j > 0:
        candidates = []
        if i > 0 and j > 0:
            candidates.append((acc[i - 1, j - 1], 0, i - 1, j - 1))
        if i > 0:
            candidates.append((acc[i - 1, j], 1, i - 1, j))
        if j > 0:
            candidates.append((acc[i, j - 1], 2, i, j - 1))
        _, _, i, j = min(candidates)
        path.append((i, j))
    path.reverse()
    total = float(acc[n - 1, m - 1])
    return DtwResult(path=path, total_cost=total, mean_cost=total / len(path))
