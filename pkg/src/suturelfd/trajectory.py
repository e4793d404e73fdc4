"""Timestamped pose trajectories, the common currency between modules."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonMonotonicTime
from .quat import UnitQuat, continuity_fix

__all__ = ["TimedPoseTrajectory"]


@dataclass
class TimedPoseTrajectory:
    """Timestamps, Cartesian positions (meters), and unit-quaternion orientations.

    Orientations are made hemisphere-continuous on construction (consecutive
    dot products non-negative), which leaves every rotation unchanged. A
    trajectory built without orientations gets identities so position-only
    rollouts still produce complete poses.
    """

    stamps: np.ndarray
    positions: np.ndarray
    orientations: list[UnitQuat] | None = None
    label: str | None = None

    def __post_init__(self):
        stamps = np.asarray(self.stamps, dtype=float)
        positions = np.asarray(self.positions, dtype=float)
        n = stamps.size
        if n < 2:
            raise ValueError("trajectory needs at least 2 samples")
        if positions.shape != (n, 3):
            raise ValueError(f"positions must have shape ({n}, 3), got {positions.shape}")
        if np.any(np.diff(stamps) <= 0):
            raise NonMonotonicTime("timestamps must be strictly increasing")
        if self.orientations is None:
            quats = [UnitQuat.identity() for _ in range(n)]
        else:
            quats = list(self.orientations)
            if len(quats) != n:
                raise ValueError("orientations length must match stamps")
            quats = continuity_fix(quats)
        self.stamps = stamps
        self.positions = positions
        self.orientations = quats

    def __len__(self) -> int:
        return self.stamps.size

    @property
    def duration(self) -> float:
        return float(self.stamps[-1] - self.stamps[0])

    def quat_array(self) -> np.ndarray:
        """Orientations as an (n, 4) scalar-first array."""
        return np.stack([q.wxyz for q in self.orientations])

    def slice(self, start: int, stop: int) -> "TimedPoseTrajectory":
        """Contiguous sub-trajectory over sample indices [start, stop)."""
        return TimedPoseTrajectory(
            self.stamps[start:stop].copy(),
            self.positions[start:stop].copy(),
            self.orientations[start:stop],
            label=self.label,
        )
