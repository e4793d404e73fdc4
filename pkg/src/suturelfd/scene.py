"""Suturing scene geometry and the evaluation metrics built on it.

The scene is two markers (entry and exit) on a locally flat surface; the
needle is a circular arc. Scoring asks whether a regenerated needle-tip
path pierces the surface near the entry marker and re-emerges near the
exit marker, and grades partial completions on the four-level scale
{1.0, 0.8, 0.4, 0}.

Needle body-frame convention (used consistently by tip kinematics and goal
derivation): the needle circle of the given radius lies in the body x-y
plane centered at the body origin, and the tip sits at angle +arc/2 from
the +x axis.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from statistics import median

import numpy as np

from .errors import DegenerateScene, MissingReferenceWarning
from .preprocess import dtw_align
from .quat import UnitQuat, geodesic_angle, rotate_vector
from .trajectory import TimedPoseTrajectory

__all__ = [
    "NeedleGeometry",
    "SutureScene",
    "ErrorReport",
    "GeneralityScore",
    "CompletionReason",
    "Pose",
    "needle_tip_path",
    "error_report",
    "summarize_reports",
    "score_generality",
    "mean_generality",
    "derive_task_goals",
    "aggregate_success",
    "SuccessTable",
    "duration_stats",
]


@dataclass(frozen=True)
class NeedleGeometry:
    """Circular-arc needle: radius in meters, arc angle in radians."""

    radius: float = 0.01018
    arc_angle: float = 2.0 * math.pi / 3.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if not 0 < self.arc_angle < 2 * math.pi:
            raise ValueError("arc_angle must lie in (0, 2*pi)")

    @property
    def tip_offset(self) -> np.ndarray:
        """Tip position in the needle body frame."""
        half = self.arc_angle / 2.0
        return np.array([self.radius * math.cos(half), self.radius * math.sin(half), 0.0])

    @property
    def tail_offset(self) -> np.ndarray:
        """Trailing arc end in the needle body frame."""
        half = self.arc_angle / 2.0
        return np.array([self.radius * math.cos(half), -self.radius * math.sin(half), 0.0])


@dataclass(frozen=True)
class SutureScene:
    """Entry/exit markers with capture radii on a flat local surface."""

    entry: np.ndarray
    exit: np.ndarray
    entry_tol: float = 0.0015
    exit_tol: float = 0.0015
    surface_normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        entry = np.asarray(self.entry, dtype=float).reshape(3)
        exit_ = np.asarray(self.exit, dtype=float).reshape(3)
        normal = np.asarray(self.surface_normal, dtype=float).reshape(3)
        if np.allclose(entry, exit_):
            raise ValueError("entry and exit markers must differ")
        if self.entry_tol <= 0 or self.exit_tol <= 0:
            raise ValueError("tolerances must be positive")
        nn = np.linalg.norm(normal)
        if nn < 1e-12:
            raise ValueError("surface normal must be nonzero")
        object.__setattr__(self, "entry", entry)
        object.__setattr__(self, "exit", exit_)
        object.__setattr__(self, "surface_normal", normal / nn)


class CompletionReason(enum.Enum):
    COMPLETE = "complete"
    MISSED_EXIT = "missed_exit"
    MISSED_ENTRY_REASONABLE = "missed_entry_reasonable"
    OTHER_FAILURE = "other_failure"


_LEVEL_OF_REASON = {
    CompletionReason.COMPLETE: 1.0,
    CompletionReason.MISSED_EXIT: 0.8,
    CompletionReason.MISSED_ENTRY_REASONABLE: 0.4,
    CompletionReason.OTHER_FAILURE: 0.0,
}


@dataclass(frozen=True)
class GeneralityScore:
    """Four-level completion grade; level and reason are locked together."""

    level: float
    reason: CompletionReason

    def __post_init__(self):
        if _LEVEL_OF_REASON[self.reason] != self.level:
            raise ValueError(f"level {self.level} does not correspond to reason {self.reason}")


@dataclass(frozen=True)
class ErrorReport:
    """Start/goal/trajectory errors: positions in mm, orientations in degrees."""

    start_pos: float
    goal_pos: float
    traj_pos: float
    start_ori: float
    goal_ori: float
    traj_ori: float

    FIELDS = ("start_pos", "goal_pos", "traj_pos", "start_ori", "goal_ori", "traj_ori")


@dataclass(frozen=True)
class Pose:
    """Needle-center pose: position in meters plus orientation."""

    position: np.ndarray
    orientation: UnitQuat

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))


def needle_tip_path(center_poses: TimedPoseTrajectory, geom: NeedleGeometry) -> np.ndarray:
    """World-frame tip positions, one per pose sample, shape (n, 3)."""
    tip = geom.tip_offset
    return np.stack([
        p + rotate_vector(q, tip)
        for p, q in zip(center_poses.positions, center_poses.orientations)
    ])


def error_report(ref: TimedPoseTrajectory, test: TimedPoseTrajectory) -> ErrorReport:
    """Endpoint and DTW-mean errors of a test trajectory against a reference."""
    start_pos = float(np.linalg.norm(ref.positions[0] - test.positions[0])) * 1000.0
    goal_pos = float(np.linalg.norm(ref.positions[-1] - test.positions[-1])) * 1000.0
    traj_pos = dtw_align(ref, test, metric="position").mean_cost * 1000.0
    start_ori = geodesic_angle(ref.orientations[0], test.orientations[0])
    goal_ori = geodesic_angle(ref.orientations[-1], test.orientations[-1])
    traj_ori = dtw_align(ref, test, metric="orientation").mean_cost
    return ErrorReport(start_pos, goal_pos, traj_pos, start_ori, goal_ori, traj_ori)


def summarize_reports(reports) -> dict[str, dict[str, float]]:
    """Mean, std, and median per error field over a batch of reports.

    Medians matter because a few abrupt outliers can dominate the averages.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to summarize")
    out = {}
    for name in ErrorReport.FIELDS:
        vals = [getattr(r, name) for r in reports]
        out[name] = {
            "mean": float(np.mean(vals)),
            "std": float(np.std(vals)),
            "median": float(median(vals)),
        }
    return out


def _plane_crossings(tips: np.ndarray, scene: SutureScene, direction: str, band: float):
    """Interpolated points where the path pierces the surface plane.

    The plane passes through the entry marker with the scene normal;
    ``direction`` selects downward (into the tissue) or upward crossings.
    The pierce level sits ``band`` below the surface so paths that start or
    settle exactly on the plane still classify deterministically.
    """
    h = (tips - scene.entry) @ scene.surface_normal + band
    if direction == "down":
        mask = (h[:-1] >= 0) & (h[1:] < 0)
    else:
        mask = (h[:-1] < 0) & (h[1:] >= 0)
    points = []
    for k in np.nonzero(mask)[0]:
        frac = h[k] / (h[k] - h[k + 1])
        points.append(tips[k] + frac * (tips[k + 1] - tips[k]))
    return points


def score_generality(
    tip_path: np.ndarray,
    scene: SutureScene,
    reference: np.ndarray | None = None,
    reasonable_tol: float = 0.005,
) -> GeneralityScore:
    """Grade a needle-tip path against the scene.

    entry hit: the path comes within entry_tol of the entry marker and
    pierces the surface plane downward within entry_tol of it (the pierce
    level sits a tenth of the capture radius below the surface); exit hit:
    analogous with an upward crossing near the exit marker. Levels:
    1.0 both hit, 0.8 entry only, 0.4 entry missed but the path stays
    within ``reasonable_tol`` DTW-mean of a reference tip path, 0.0
    otherwise. Reaching the 0.4 branch without a reference emits a warning
    and falls back to 0.0.
    """
    tips = np.asarray(tip_path, dtype=float)
    if tips.ndim != 2 or tips.shape[0] < 1 or tips.shape[1] != 3:
        raise ValueError("tip_path must be an (n, 3) array")

    def hit(marker, tol, direction):
        if np.min(np.linalg.norm(tips - marker, axis=1)) > tol:
            return False
        crossings = _plane_crossings(tips, scene, direction, band=0.1 * tol)
        return any(np.linalg.norm(c - marker) <= tol for c in crossings)

    entry_hit = hit(scene.entry, scene.entry_tol, "down")
    exit_hit = hit(scene.exit, scene.exit_tol, "up")

    if entry_hit and exit_hit:
        return GeneralityScore(1.0, CompletionReason.COMPLETE)
    if entry_hit:
        return GeneralityScore(0.8, CompletionReason.MISSED_EXIT)
    if reference is None:
        warnings.warn(
            "entry missed and no reference path given; scoring 0.0",
            MissingReferenceWarning,
            stacklevel=2,
        )
        return GeneralityScore(0.0, CompletionReason.OTHER_FAILURE)
    if dtw_align(tips, np.asarray(reference, dtype=float), metric="position").mean_cost <= reasonable_tol:
        return GeneralityScore(0.4, CompletionReason.MISSED_ENTRY_REASONABLE)
    return GeneralityScore(0.0, CompletionReason.OTHER_FAILURE)


def mean_generality(levels) -> float:
    """Exactly rounded mean of a multiset of generality levels."""
    levels = list(levels)
    if not levels:
        raise ValueError("no levels to average")
    return math.fsum(levels) / len(levels)


def _quat_from_frame(ex, ey, ez) -> UnitQuat:
    """Quaternion whose rotation maps the standard basis onto the given frame."""
    m = np.column_stack([ex, ey, ez])
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0:
        s = math.sqrt(tr + 1.0) * 2.0
        return UnitQuat(0.25 * s, np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]]) / s)
    if m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        return UnitQuat((m[2, 1] - m[1, 2]) / s, np.array([0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]))
    if m[1, 1] > m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        return UnitQuat((m[0, 2] - m[2, 0]) / s, np.array([(m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]))
    s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
    return UnitQuat((m[1, 0] - m[0, 1]) / s, np.array([(m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]))


def _in_plane_frame(angle: float, e1, e2, normal) -> UnitQuat:
    """Pose orientation whose body x-y plane spans (e1, e2), body x at ``angle``."""
    ex = math.cos(angle) * e1 + math.sin(angle) * e2
    ey = math.cos(angle + math.pi / 2.0) * e1 + math.sin(angle + math.pi / 2.0) * e2
    return _quat_from_frame(ex, ey, normal)


def derive_task_goals(scene: SutureScene, geom: NeedleGeometry, task: str) -> tuple[Pose, Pose]:
    """Closed-form start and goal needle-center poses for a task.

    The needle circle is placed in the suture plane spanned by the
    entry-exit chord and the surface normal. For ``insert`` the start pose
    puts the tip exactly at the entry marker with its tangent driving into
    the surface, and the goal pose puts the tip at the exit marker having
    emerged; the needle turns half a revolution about the plane normal in
    between. ``extract`` continues the same motion: it starts at the insert
    goal and ends with the trailing arc end cleared through the exit.
    """
    if task not in ("insert", "extract"):
        raise ValueError(f"unknown task {task!r}")
    chord = scene.exit - scene.entry
    e1 = chord / np.linalg.norm(chord)
    n_perp = scene.surface_normal - (scene.surface_normal @ e1) * e1
    nn = np.linalg.norm(n_perp)
    if nn < 1e-9:
        raise DegenerateScene("entry-exit chord is parallel to the surface normal")
    e2 = n_perp / nn
    plane_normal = np.cross(e1, e2)

    half = geom.arc_angle / 2.0
    r = geom.radius
    # tip world angle theta means the tip offset is r*(cos th, sin th) in (e1, e2);
    # body x sits at theta - half. Start: tip at entry pointing down (theta=pi);
    # insert goal: tip at exit pointing up (theta=2*pi after a half turn).
    start_insert = Pose(scene.entry + r * e1, _in_plane_frame(math.pi - half, e1, e2, plane_normal))
    goal_insert = Pose(scene.exit - r * e1, _in_plane_frame(2.0 * math.pi - half, e1, e2, plane_normal))
    if task == "insert":
        return start_insert, goal_insert
    # extract: keep turning by the arc angle until the tail has passed the exit
    goal_extract = Pose(scene.exit - r * e1, _in_plane_frame(2.0 * math.pi - half + geom.arc_angle, e1, e2, plane_normal))
    return goal_insert, goal_extract


@dataclass(frozen=True)
class SuccessTable:
    """Per-subtask success counts.

    ``individual`` holds (successes, attempts) where a subtask is attempted
    only by trials that succeeded every earlier one; ``cumulative`` counts
    trials that succeeded through each subtask, out of ``n_trials``.
    """

    n_trials: int
    individual: list[tuple[int, int]]
    cumulative: list[int]

    @property
    def overall_rate(self) -> float:
        return self.cumulative[-1] / self.n_trials


def aggregate_success(outcomes) -> SuccessTable:
    """Chain per-trial subtask booleans into individual and cumulative counts.

    A trial that fails subtask k never attempts the later ones, so its
    recorded values there are ignored.
    """
    arr = np.asarray(outcomes, dtype=bool)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("outcomes must be a nonempty (trials x subtasks) array")
    n_trials, n_sub = arr.shape
    alive = np.ones(n_trials, dtype=bool)
    individual = []
    cumulative = []
    for k in range(n_sub):
        attempts = int(alive.sum())
        alive = alive & arr[:, k]
        successes = int(alive.sum())
        individual.append((successes, attempts))
        cumulative.append(successes)
    return SuccessTable(n_trials=n_trials, individual=individual, cumulative=cumulative)


def duration_stats(groups: dict[str, list[TimedPoseTrajectory]]) -> dict:
    """Mean and std of trajectory durations per group, plus ratios.

    Ratios are each group's mean over the first group's mean, in the given
    order. Empty groups are rejected before any computation.
    """
    if not groups:
        raise ValueError("no groups given")
    for name, trajs in groups.items():
        if not trajs:
            raise ValueError(f"group {name!r} is empty")
    stats = {}
    for name, trajs in groups.items():
        durations = [t.duration for t in trajs]
        stats[name] = {"mean": float(np.mean(durations)), "std": float(np.std(durations))}
    first = next(iter(stats))
    base = stats[first]["mean"]
    ratios = {name: stats[name]["mean"] / base for name in stats}
    return {"groups": stats, "ratios": ratios}
