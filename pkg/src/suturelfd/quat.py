"""Unit-quaternion algebra for orientation dynamics.

Quaternions are scalar-first: q = (v, u) with scalar part v and vector part
u in R^3, constrained to the unit sphere S^3. q and -q encode the same
rotation; use :func:`continuity_fix` to pick a consistent hemisphere along a
sequence. Rotation vectors (the image of :func:`log_map`) are plain length-3
numpy arrays in radians with norm below pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "UnitQuat",
    "quat_mul",
    "conj",
    "exp_map",
    "log_map",
    "slerp",
    "geodesic_angle",
    "continuity_fix",
    "rotate_vector",
]

# Norm deviations below this are left untouched so file round-trips stay
# byte-stable; larger deviations get renormalized at construction.
_NORM_SKIP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class UnitQuat:
    """Unit quaternion (v, u) on S^3, normalized at construction."""

    v: float
    u: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.shape != (3,):
            raise ValueError(f"vector part must have shape (3,), got {u.shape}")
        v = float(self.v)
        n2 = v * v + float(u @ u)
        if n2 < 1e-12:
            raise ValueError("zero quaternion is not a rotation")
        if abs(n2 - 1.0) > _NORM_SKIP_TOL:
            inv = 1.0 / math.sqrt(n2)
            v *= inv
            u = u * inv
        u = u.copy()
        u.flags.writeable = False
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "u", u)

    @classmethod
    def identity(cls) -> "UnitQuat":
        return cls(1.0, np.zeros(3))

    @classmethod
    def from_wxyz(cls, arr) -> "UnitQuat":
        arr = np.asarray(arr, dtype=float)
        return cls(float(arr[0]), arr[1:4])

    @property
    def wxyz(self) -> np.ndarray:
        """Scalar-first 4-vector [v, ux, uy, uz]."""
        return np.concatenate(([self.v], self.u))

    def __neg__(self) -> "UnitQuat":
        return UnitQuat(-self.v, -self.u)

    def __repr__(self):
        ux, uy, uz = self.u
        return f"UnitQuat({self.v:.6g}, [{ux:.6g}, {uy:.6g}, {uz:.6g}])"


def quat_mul(a: UnitQuat, b: UnitQuat) -> UnitQuat:
    """Hamilton product a*b."""
    v = a.v * b.v - float(a.u @ b.u)
    u = a.v * b.u + b.v * a.u + np.cross(a.u, b.u)
    return UnitQuat(v, u)


def conj(q: UnitQuat) -> UnitQuat:
    """Quaternion conjugate (v, -u); the inverse for unit quaternions."""
    return UnitQuat(q.v, -q.u)


def exp_map(r) -> UnitQuat:
    """Map a rotation vector r (norm < pi) to the unit quaternion (cos|r|, sin|r| r/|r|).

    The zero vector maps to the identity quaternion, which is the continuous
    limit. Raises :class:`DomainError` for |r| >= pi where the map stops
    being one-to-one.
    """
    r = np.asarray(r, dtype=float)
    theta = float(np.linalg.norm(r))
    if theta >= math.pi:
        raise DomainError(f"rotation vector norm {theta:.6g} >= pi is outside the exp-map domain")
    # sinc form is stable through theta = 0 and yields exactly the identity there
    return UnitQuat(math.cos(theta), np.sinc(theta / math.pi) * r)


def log_map(q: UnitQuat) -> np.ndarray:
    """Inverse of :func:`exp_map`: rotation vector arccos(v) u/|u|.

    Defined on S^3 minus the antipodal point (-1, 0); raises
    :class:`DomainError` there since every direction is a valid logarithm.
    """
    un = float(np.linalg.norm(q.u))
    if un < 1e-12:
        if q.v <= -1.0 + 1e-12:
            raise DomainError("log map is undefined at the antipodal quaternion (-1, 0)")
        return np.zeros(3)
    angle = math.acos(min(1.0, max(-1.0, q.v)))
    return (angle / un) * q.u


def slerp(a: UnitQuat, b: UnitQuat, s: float) -> UnitQuat:
    """Constant-speed geodesic interpolation from a to b, s in [0, 1].

    b is sign-flipped onto a's hemisphere first so the short arc is taken;
    at an exact 180-degree tie (dot = 0) b's given sign is kept, which makes
    the choice deterministic.
    """
    aw, bw = a.wxyz, b.wxyz
    d = float(aw @ bw)
    if d < 0.0:
        bw = -bw
        d = -d
    if d > 1.0 - 1e-10:
        # nearly parallel: linear blend then renormalize
        out = aw + s * (bw - aw)
        return UnitQuat.from_wxyz(out)
    theta = math.acos(min(1.0, d))
    st = math.sin(theta)
    out = (math.sin((1.0 - s) * theta) * aw + math.sin(s * theta) * bw) / st
    return UnitQuat.from_wxyz(out)


def geodesic_angle(a: UnitQuat, b: UnitQuat) -> float:
    """Rotation angle in degrees between two orientations, in [0, 180].

    Equals 2*arccos(|<a, b>|), so q and -q are zero degrees apart. Computed
    through the chord length of the hemisphere-aligned pair, which keeps
    full precision near zero where arccos alone loses it.
    """
    aw, bw = a.wxyz, b.wxyz
    if float(aw @ bw) < 0.0:
        bw = -bw
    half_chord = 0.5 * float(np.linalg.norm(aw - bw))
    return 4.0 * math.degrees(math.asin(min(1.0, half_chord)))


def continuity_fix(quats) -> list[UnitQuat]:
    """Sign-flip elements so consecutive dot products are non-negative.

    Rotations are unchanged; only the S^3 representative may flip.
    """
    quats = list(quats)
    if not quats:
        raise ValueError("empty quaternion sequence")
    out = [quats[0]]
    for q in quats[1:]:
        if float(out[-1].wxyz @ q.wxyz) < 0.0:
            q = -q
        out.append(q)
    return out


def rotate_vector(q: UnitQuat, vec) -> np.ndarray:
    """Rotate a 3-vector by the rotation q encodes (q * (0, vec) * conj(q))."""
    vec = np.asarray(vec, dtype=float)
    t = 2.0 * np.cross(q.u, vec)
    return vec + q.v * t + np.cross(q.u, t)
