"""Line-oriented text formats for trajectories, models, and scenes.

All floats are written with 17 significant digits, which round-trips
doubles exactly, so write -> read -> write is byte-stable. Units are fixed
(meters, seconds, scalar-first quaternions) and declared in headers;
mismatching declarations are rejected rather than converted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import BasisSet
from .dmp_orientation import OrientationDmpModel
from .dmp_position import PositionDmpModel
from .quat import UnitQuat
from .scene import SutureScene
from .trajectory import TimedPoseTrajectory

__all__ = [
    "FormatError",
    "ModelBundle",
    "write_trajectory",
    "read_trajectory",
    "write_model",
    "read_model",
    "write_scene_library",
    "read_scene_library",
]

TRAJ_MAGIC = "#trajectory v1"
MODEL_MAGIC = "#model v1"
SCENE_MAGIC = "#scene v1"
UNITS = "m s quat-scalar-first"


class FormatError(ValueError):
    """Malformed file content; message names the offending line."""


def _fmt(x: float) -> str:
    return "%.17g" % float(x)


def _fmt_vec(v) -> str:
    return " ".join(_fmt(x) for x in np.asarray(v, dtype=float))


@dataclass(frozen=True)
class ModelBundle:
    """What a model file stores: one or both fitted models."""

    kind: str  # position | orientation | paired
    position: PositionDmpModel | None = None
    orientation: OrientationDmpModel | None = None

    def __post_init__(self):
        want = {
            "position": (True, False),
            "orientation": (False, True),
            "paired": (True, True),
        }
        if self.kind not in want:
            raise ValueError(f"unknown model kind {self.kind!r}")
        has = (self.position is not None, self.orientation is not None)
        if has != want[self.kind]:
            raise ValueError(f"model kind {self.kind!r} does not match the supplied models")


# ---------------------------------------------------------------- trajectories

def write_trajectory(path, traj: TimedPoseTrajectory) -> None:
    lines = [TRAJ_MAGIC, f"#units {UNITS}", "#frame world"]
    if traj.label:
        lines.append(f"#label {traj.label}")
    for t, p, q in zip(traj.stamps, traj.positions, traj.orientations):
        lines.append(f"{_fmt(t)} {_fmt_vec(p)} {_fmt_vec(q.wxyz)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trajectory(path) -> TimedPoseTrajectory:
    stamps, positions, quats = [], [], []
    label = None
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != TRAJ_MAGIC:
            raise FormatError(f"{path}:1: not a trajectory file (expected {TRAJ_MAGIC!r})")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(" ")
                if key == "units" and value != UNITS:
                    raise FormatError(f"{path}:{lineno}: units {value!r} do not match {UNITS!r}")
                if key == "label":
                    label = value
                continue
            parts = line.split()
            if len(parts) != 8:
                raise FormatError(f"{path}:{lineno}: expected 8 fields (t p q), got {len(parts)}")
            try:
                vals = [float(x) for x in parts]
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            q = np.array(vals[4:8])
            norm = float(np.linalg.norm(q))
            if abs(norm - 1.0) > 1e-6:
                raise FormatError(f"{path}:{lineno}: quaternion norm {norm:.8f} deviates from 1 by more than 1e-6")
            stamps.append(vals[0])
            positions.append(vals[1:4])
            quats.append(UnitQuat.from_wxyz(q))
    if len(stamps) < 2:
        raise FormatError(f"{path}: trajectory needs at least 2 rows")
    try:
        return TimedPoseTrajectory(np.array(stamps), np.array(positions), quats, label=label)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


# --------------------------------------------------------------------- models

def _model_common_lines(prefix, basis: BasisSet, weights, alpha, beta) -> list[str]:
    return [
        f"{prefix}.alpha {_fmt(alpha)}",
        f"{prefix}.beta {_fmt(beta)}",
        f"{prefix}.n_bfs {basis.n_bfs}",
        f"{prefix}.centers {_fmt_vec(basis.centers)}",
        f"{prefix}.widths {_fmt_vec(basis.widths)}",
        f"{prefix}.weights.x {_fmt_vec(weights[0])}",
        f"{prefix}.weights.y {_fmt_vec(weights[1])}",
        f"{prefix}.weights.z {_fmt_vec(weights[2])}",
    ]


def write_model(path, bundle: ModelBundle) -> None:
    lines = [MODEL_MAGIC, f"kind {bundle.kind}"]
    some = bundle.position or bundle.orientation
    lines.append(f"duration {_fmt(some.duration)}")
    lines.append(f"alpha_x {_fmt(some.alpha_x)}")
    if bundle.position is not None:
        m = bundle.position
        lines += _model_common_lines("position", m.basis, m.weights, m.alpha_y, m.beta_y)
        lines.append(f"position.y0 {_fmt_vec(m.y0)}")
        lines.append(f"position.g {_fmt_vec(m.g)}")
    if bundle.orientation is not None:
        m = bundle.orientation
        lines += _model_common_lines("orientation", m.basis, m.weights, m.alpha_z, m.beta_z)
        lines.append(f"orientation.q0 {_fmt_vec(m.q0.wxyz)}")
        lines.append(f"orientation.g_o {_fmt_vec(m.g_o.wxyz)}")
        lines.append(f"orientation.scaling {_fmt_vec(m.scaling)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_kv_lines(path, fh, start_lineno):
    entries = {}
    for lineno, raw in enumerate(fh, start=start_lineno):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition(" ")
        if not value:
            raise FormatError(f"{path}:{lineno}: expected 'key value...'")
        entries[key] = value
    return entries


def _floats(entries, key, path):
    try:
        return np.array([float(x) for x in entries[key].split()])
    except KeyError:
        raise FormatError(f"{path}: missing key {key!r}") from None
    except ValueError as exc:
        raise FormatError(f"{path}: key {key!r}: {exc}") from None


def _scalar(entries, key, path) -> float:
    vals = _floats(entries, key, path)
    if vals.size != 1:
        raise FormatError(f"{path}: key {key!r} expects a single value")
    return float(vals[0])


def read_model(path) -> ModelBundle:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != MODEL_MAGIC:
            raise FormatError(f"{path}:1: not a model file (expected {MODEL_MAGIC!r})")
        entries = _parse_kv_lines(path, fh, 2)

    kind = entries.get("kind")
    if kind not in ("position", "orientation", "paired"):
        raise FormatError(f"{path}: unrecognized model kind {kind!r}")
    duration = _scalar(entries, "duration", path)
    alpha_x = _scalar(entries, "alpha_x", path)

    def read_half(prefix):
        n_bfs = int(_scalar(entries, f"{prefix}.n_bfs", path))
        centers = _floats(entries, f"{prefix}.centers", path)
        widths = _floats(entries, f"{prefix}.widths", path)
        if centers.size != n_bfs or widths.size != n_bfs:
            raise FormatError(f"{path}: {prefix} basis arrays do not match n_bfs={n_bfs}")
        weights = np.stack([_floats(entries, f"{prefix}.weights.{ax}", path) for ax in "xyz"])
        if weights.shape[1] != n_bfs:
            raise FormatError(f"{path}: {prefix} weights do not match n_bfs={n_bfs}")
        alpha = _scalar(entries, f"{prefix}.alpha", path)
        beta = _scalar(entries, f"{prefix}.beta", path)
        return BasisSet(centers, widths), weights, alpha, beta

    position = orientation = None
    if kind in ("position", "paired"):
        basis, weights, alpha, beta = read_half("position")
        position = PositionDmpModel(
            alpha_y=alpha, beta_y=beta, alpha_x=alpha_x, basis=basis, weights=weights,
            y0=_floats(entries, "position.y0", path),
            g=_floats(entries, "position.g", path),
            duration=duration,
        )
    if kind in ("orientation", "paired"):
        basis, weights, alpha, beta = read_half("orientation")
        orientation = OrientationDmpModel(
            alpha_z=alpha, beta_z=beta, alpha_x=alpha_x, basis=basis, weights=weights,
            q0=UnitQuat.from_wxyz(_floats(entries, "orientation.q0", path)),
            g_o=UnitQuat.from_wxyz(_floats(entries, "orientation.g_o", path)),
            scaling=_floats(entries, "orientation.scaling", path),
            duration=duration,
        )
    return ModelBundle(kind=kind, position=position, orientation=orientation)


# --------------------------------------------------------------------- scenes

def write_scene_library(path, scenes: dict[str, SutureScene]) -> None:
    if not scenes:
        raise ValueError("scene library needs at least one pair")
    lines = [SCENE_MAGIC]
    for name, scene in scenes.items():
        lines.append(
            f"pair {name} {_fmt_vec(scene.entry)} {_fmt_vec(scene.exit)} "
            f"{_fmt(scene.entry_tol)} {_fmt(scene.exit_tol)} {_fmt_vec(scene.surface_normal)}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_scene_library(path) -> dict[str, SutureScene]:
    scenes: dict[str, SutureScene] = {}
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != SCENE_MAGIC:
            raise FormatError(f"{path}:1: not a scene file (expected {SCENE_MAGIC!r})")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] != "pair" or len(parts) != 13:
                raise FormatError(f"{path}:{lineno}: expected 'pair NAME entry(3) exit(3) tols(2) normal(3)'")
            name = parts[1]
            try:
                vals = [float(x) for x in parts[2:]]
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            scenes[name] = SutureScene(
                entry=vals[0:3], exit=vals[3:6],
                entry_tol=vals[6], exit_tol=vals[7],
                surface_normal=vals[8:11],
            )
    if not scenes:
        raise FormatError(f"{path}: scene file holds no pairs")
    return scenes
