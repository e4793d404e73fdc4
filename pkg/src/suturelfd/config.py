"""Hyperparameter profiles and the plain-text config file format.

Defaults are the task-ii profile; the task-iv profile shrinks the sample
and basis counts. A config file is line-oriented ``key value`` text; unset
keys keep their defaults.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass

ENV_CONFIG = "SUTURELFD_CONFIG"

_PROFILE_FIELDS = {
    "task-ii": {"n_pts": 500, "n_bfs": 100, "n_bfs_o": 40},
    "task-iv": {"n_pts": 100, "n_bfs": 50, "n_bfs_o": 20},
}


@dataclass(frozen=True)
class Config:
    """All tunables in one place; defaults match the task-ii profile."""

    alpha_x: float = 1.0
    alpha_y: float = 25.0
    beta_y: float = 6.25
    alpha_z: float = 25.0
    beta_z: float = 6.25
    n_pts: int = 500
    n_bfs: int = 100
    n_bfs_o: int = 40
    # segmentation
    speed_threshold: float = 0.002
    dwell_min: float = 0.2
    min_segment: float = 0.5
    # scene
    entry_tol: float = 0.0015
    exit_tol: float = 0.0015
    reasonable_tol: float = 0.005
    needle_radius: float = 0.01018
    needle_arc: float = 2.0 * math.pi / 3.0

    def with_profile(self, profile: str) -> "Config":
        if profile not in _PROFILE_FIELDS:
            raise ValueError(f"unknown profile {profile!r}; expected one of {sorted(_PROFILE_FIELDS)}")
        return dataclasses.replace(self, **_PROFILE_FIELDS[profile])


_INT_FIELDS = {"n_pts", "n_bfs", "n_bfs_o"}
_FIELD_NAMES = {f.name for f in dataclasses.fields(Config)}


def load_config(path: str) -> Config:
    """Read ``key value`` lines; '#' starts a comment."""
    overrides = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'key value', got {raw.rstrip()!r}")
            key, value = parts
            if key not in _FIELD_NAMES:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            overrides[key] = int(value) if key in _INT_FIELDS else float(value)
    return dataclasses.replace(Config(), **overrides)


def resolve_config(path: str | None, profile: str | None) -> Config:
    """Config from an explicit path, the environment, or defaults, then profile."""
    if path is None:
        path = os.environ.get(ENV_CONFIG)
    cfg = load_config(path) if path else Config()
    if profile:
        cfg = cfg.with_profile(profile)
    return cfg
