"""Exponential-interpolation reference trajectory between two profiles.

The controller does not chase the final target directly; it follows a
moving intermediate target

    Tref(x, t) = T0(x) + (1 - exp(-mu t / tf)) * (Tbar(x) - T0(x))

which starts at the initial state and saturates at the target with ramp
sharpness mu. Every profile is pinned to zero at x = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import RadialGrid, _as_profile

__all__ = [
    "ReferenceTrajectory",
    "make_reference",
    "parabolic_pedestal_profiles",
    "profile_from_csv",
    "reference_at",
    "reference_rate",
]

_T_SLACK = 1e-12  # tolerance for t range checks against rounding


@dataclass(frozen=True)
class ReferenceTrajectory:
    T0: np.ndarray
    Tbar: np.ndarray
    mu: float
    tf: float


def make_reference(g: RadialGrid, T0, Tbar, mu: float, tf: float) -> ReferenceTrajectory:
    """Validate and freeze a reference trajectory.

    Both endpoint profiles must be finite, nonnegative, and vanish at
    x = 1 (Dirichlet compatibility).
    """
    T0a = _as_profile(g, T0, "T0")
    Tba = _as_profile(g, Tbar, "Tbar")
    if mu <= 0.0:
        raise ValueError(f"mu must be > 0, got {mu}")
    if tf <= 0.0:
        raise ValueError(f"tf must be > 0, got {tf}")
    scale = max(np.max(np.abs(T0a)), np.max(np.abs(Tba)), 1.0)
    for name, arr in (("T0", T0a), ("Tbar", Tba)):
        if abs(arr[-1]) > 1e-12 * scale:
            raise ValueError(f"{name} must vanish at x = 1")
        if np.any(arr < 0.0):
            raise ValueError(f"{name} must be nonnegative")
    return ReferenceTrajectory(T0=T0a.copy(), Tbar=Tba.copy(), mu=float(mu), tf=float(tf))


def parabolic_pedestal_profiles(
    g: RadialGrid,
    t_core0: float,
    t_coref: float,
    shape_gamma: float = 1.5,
    pedestal_amp: float = 0.12,
    pedestal_center: float = 0.9,
    pedestal_width: float = 0.06,
):
    """Synthetic initial / target profile pair shaped like an H-mode step.

    The initial state is a plain parabola t_core0 * (1 - x^2). The target
    is t_coref * (1 - x^2)^gamma modulated by a Gaussian bump near the
    edge, mimicking a pedestal; the (1 - x^2) factor keeps the Dirichlet
    zero exact.
    """
    x = g.nodes
    T0 = t_core0 * (1.0 - x * x)
    bump = pedestal_amp * np.exp(-(((x - pedestal_center) / pedestal_width) ** 2))
    Tbar = t_coref * (1.0 - x * x) ** shape_gamma * (1.0 + bump)
    return T0, Tbar


def profile_from_csv(path, g: RadialGrid) -> np.ndarray:
    """Load a profile from a two-column CSV (header ``x,value``).

    Values are linearly interpolated onto the grid nodes; the file must
    cover [0, 1] with strictly increasing x.
    """
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if raw.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns x,value")
    x, val = raw[:, 0], raw[:, 1]
    if np.any(np.diff(x) <= 0.0):
        raise ValueError(f"{path}: x column must be strictly increasing")
    if x[0] > 0.0 or x[-1] < 1.0:
        raise ValueError(f"{path}: x range must cover [0, 1]")
    return np.interp(g.nodes, x, val)


def _check_time(ref: ReferenceTrajectory, t: float) -> float:
    if not (-_T_SLACK <= t <= ref.tf + _T_SLACK):
        raise ValueError(f"t = {t} outside [0, {ref.tf}]")
    return min(max(t, 0.0), ref.tf)


def reference_at(ref: ReferenceTrajectory, t: float) -> np.ndarray:
    """Intermediate target profile at time t."""
    t = _check_time(ref, t)
    ramp = 1.0 - np.exp(-ref.mu * t / ref.tf)
    return ref.T0 + ramp * (ref.Tbar - ref.T0)


def reference_rate(ref: ReferenceTrajectory, t: float) -> np.ndarray:
    """Time derivative of the intermediate target at time t."""
    t = _check_time(ref, t)
    factor = ref.mu / ref.tf * np.exp(-ref.mu * t / ref.tf)
    return factor * (ref.Tbar - ref.T0)
