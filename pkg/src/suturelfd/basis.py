"""Canonical phase system, Gaussian basis functions, and the LWR solver.

Both movement models share the same machinery: a first-order phase variable
x(t) = exp(-alpha_x * t) that decays from 1 toward 0, a set of Gaussian
basis functions psi_i(x) = exp(-h_i (x - c_i)^2), and a per-basis weighted
least-squares solve for the forcing weights.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRegressionWarning

__all__ = [
    "CanonicalSystem",
    "BasisSet",
    "LwrProblem",
    "phase_at",
    "make_basis",
    "eval_basis",
    "lwr_fit",
    "forcing_from_weights",
]

# Denominators at or below this are treated as degenerate and yield a zero weight.
DEGENERATE_DENOM = 1e-12


@dataclass(frozen=True)
class CanonicalSystem:
    """Exponential phase system x(t) = exp(-alpha_x * t / tau).

    The time constant tau is fixed at 1; demonstrations are rescaled to unit
    duration before fitting, and rollouts map back to real durations.
    """

    alpha_x: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        if self.alpha_x <= 0:
            raise ValueError("alpha_x must be positive")
        if self.tau != 1.0:
            raise ValueError("time constant is fixed at 1; rescale time instead")


@dataclass(frozen=True)
class BasisSet:
    """Gaussian basis centers and widths over the phase interval (0, 1]."""

    centers: np.ndarray
    widths: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        h = np.asarray(self.widths, dtype=float)
        if c.ndim != 1 or c.shape != h.shape or c.size < 1:
            raise ValueError("centers and widths must be equal-length 1-D arrays")
        if np.any(c <= 0) or np.any(c > 1):
            raise ValueError("centers must lie in (0, 1]")
        if c.size > 1 and np.any(np.diff(c) >= 0):
            raise ValueError("centers must be strictly decreasing")
        if np.any(h <= 0):
            raise ValueError("widths must be positive")
        c = c.copy(); c.flags.writeable = False
        h = h.copy(); h.flags.writeable = False
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "widths", h)

    @property
    def n_bfs(self) -> int:
        return self.centers.size


@dataclass(frozen=True)
class LwrProblem:
    """One-dimensional regression data: phases, scale track s_k, and targets."""

    phases: np.ndarray
    scale_track: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.phases, dtype=float)
        s = np.asarray(self.scale_track, dtype=float)
        f = np.asarray(self.targets, dtype=float)
        if not (x.shape == s.shape == f.shape) or x.ndim != 1 or x.size < 2:
            raise ValueError("phases, scale_track and targets must be equal-length 1-D arrays of >= 2 samples")
        object.__setattr__(self, "phases", x)
        object.__setattr__(self, "scale_track", s)
        object.__setattr__(self, "targets", f)


def phase_at(cs: CanonicalSystem, t):
    """Phase value exp(-alpha_x * t); accepts scalars or arrays, t >= 0."""
    return np.exp(-cs.alpha_x * np.asarray(t, dtype=float) / cs.tau)


def make_basis(cs: CanonicalSystem, n_bfs: int, duration: float) -> BasisSet:
    """Place n_bfs Gaussians at the phases of uniformly spaced times.

    Centers are c_i = x((i-1) * duration / (n_bfs-1)) so temporal coverage is
    uniform despite the exponential phase decay; widths follow
    h_i = n_bfs^1.5 / (alpha_x * c_i). A single basis sits at mid-duration.
    """
    if n_bfs < 1:
        raise ValueError("n_bfs must be >= 1")
    if duration <= 0:
        raise ValueError("duration must be positive")
    if n_bfs == 1:
        times = np.array([0.5 * duration])
    else:
        times = np.linspace(0.0, duration, n_bfs)
    centers = np.asarray(phase_at(cs, times))
    widths = n_bfs ** 1.5 / (cs.alpha_x * centers)
    return BasisSet(centers, widths)


def eval_basis(b: BasisSet, x):
    """Evaluate all Gaussians at phase x.

    Scalar x gives shape (n_bfs,); an array of m phases gives (m, n_bfs).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return np.exp(-b.widths * (x - b.centers) ** 2)
    return np.exp(-b.widths[None, :] * (x[:, None] - b.centers[None, :]) ** 2)


def lwr_fit(problem: LwrProblem, basis: BasisSet):
    """Closed-form per-basis weights w_i = s^T Psi_i F / (s^T Psi_i s).

    Each weight independently minimizes the locally weighted cost
    sum_k psi_i(x_k) (f_k - w_i s_k)^2. Bases whose denominator falls at or
    below ``DEGENERATE_DENOM`` (for instance when the goal offset is zero)
    get weight 0 and are flagged in the returned mask, with a
    :class:`DegenerateRegressionWarning`.

    Returns
    -------
    weights : ndarray, shape (n_bfs,)
    degenerate : ndarray of bool, shape (n_bfs,)
    """
    psi = eval_basis(basis, problem.phases)  # (m, n_bfs)
    s = problem.scale_track
    num = psi.T @ (s * problem.targets)
    den = psi.T @ (s * s)
    degenerate = den <= DEGENERATE_DENOM
    weights = np.where(degenerate, 0.0, num / np.where(degenerate, 1.0, den))
    if degenerate.any():
        warnings.warn(
            f"{int(degenerate.sum())} of {basis.n_bfs} basis weights set to 0 "
            "(vanishing regression denominator)",
            DegenerateRegressionWarning,
            stacklevel=2,
        )
    return weights, degenerate


def forcing_from_weights(basis: BasisSet, weights, x: float, scale: float) -> float:
    """Forcing value (sum psi_i w_i / sum psi_i) * x * scale at phase x.

    The normalized mixture is a convex combination of the weights, so the
    magnitude never exceeds max|w_i| * x * |scale|; it vanishes identically
    at x = 0.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (basis.n_bfs,):
        raise ValueError("weights length must equal the basis count")
    if x == 0.0:
        return 0.0
    psi = eval_basis(basis, x)
    den = float(psi.sum())
    if den == 0.0:
        # far outside basis support every Gaussian underflowed; the mixture limit is 0
        return 0.0
    return float(psi @ weights) / den * x * scale
