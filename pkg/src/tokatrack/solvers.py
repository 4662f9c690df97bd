"""Implicit time stepping for the controlled state, the backward adjoint,
and the quasi-steady adjoint inverse problem.

All three reduce to tridiagonal solves on the non-Dirichlet block
(nodes 0 .. n-2). Systems are assembled in the symmetric, volume-scaled
form (W + theta dt A) or (W / alpha + A), where A is the SPD stiffness of
the cylindrical operator and W the diagonal of cell volumes, so they are
strictly diagonally dominant and the Thomas algorithm applies without
pivoting.

The diffusivity passed in is frozen over a step; callers refresh it
between steps, which linearizes the gradient-dependent transport model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._thomas import thomas
from .grid import RadialGrid, _as_profile, apply_cylindrical_operator, stiffness_tridiagonal

__all__ = [
    "TridiagonalSystem",
    "TimeStepConfig",
    "tridiagonal_solve",
    "step_state",
    "step_adjoint_backward",
    "solve_quasi_steady_adjoint",
]


@dataclass
class TridiagonalSystem:
    """Tridiagonal system with the dominance invariant checked up front.

    ``lower[i]`` couples row i to i-1 (``lower[0]`` unused), ``upper[i]``
    couples row i to i+1 (``upper[-1]`` unused).
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.diag = np.asarray(self.diag, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        m = self.diag.shape[0]
        if m < 1:
            raise ValueError("empty system")
        for name in ("lower", "upper", "rhs"):
            if getattr(self, name).shape != (m,):
                raise ValueError(f"{name} must have shape ({m},)")
        off = np.abs(self.lower) + np.abs(self.upper)
        off[0] = abs(self.upper[0])
        off[-1] = abs(self.lower[-1])
        slack = 1e-12 * (np.abs(self.diag) + off) + 1e-300
        if np.any(np.abs(self.diag) + slack < off):
            raise ValueError("system is not (weakly) diagonally dominant")


def tridiagonal_solve(sys: TridiagonalSystem) -> np.ndarray:
    """Solve the system; residual is at rounding level for dominant systems."""
    return thomas(sys.lower, sys.diag, sys.upper, sys.rhs)


@dataclass(frozen=True)
class TimeStepConfig:
    """Step size and implicitness weight.

    theta = 1 is backward Euler (default, unconditionally stable and
    energy-dissipating); theta = 0.5 is the trapezoidal rule. Values below
    0.5 would lose the unconditional energy decay and are rejected.
    """

    dt: float
    theta: float = 1.0

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not 0.5 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0.5, 1], got {self.theta}")


def _check_dirichlet(v: np.ndarray, name: str):
    scale = max(float(np.max(np.abs(v))), 1.0)
    if abs(v[-1]) > 1e-9 * scale:
        raise ValueError(f"{name} must vanish at x = 1 (got {v[-1]!r})")


def _check_chi(chi: np.ndarray):
    if np.any(chi < 0.0):
        raise ValueError("chi must be nonnegative")
    if np.min(chi) <= 0.0:
        raise ValueError("chi must be strictly positive (apply the floor upstream)")


def _theta_step(g: RadialGrid, v, chi, source, cfg: TimeStepConfig) -> np.ndarray:
    """One theta-implicit step of dv/dt = L v + source with frozen chi."""
    lower, diag, upper = stiffness_tridiagonal(g, chi)
    w = g.cell_weights[:-1]
    dt, th = cfg.dt, cfg.theta
    sys_lower = th * dt * lower
    sys_diag = w + th * dt * diag
    sys_upper = th * dt * upper

    rhs = v[:-1].copy()
    if th < 1.0:
        rhs += (1.0 - th) * dt * apply_cylindrical_operator(g, chi, v)[:-1]
    if source is not None:
        rhs += dt * source[:-1]
    out = np.zeros(g.n)
    out[:-1] = thomas(sys_lower, sys_diag, sys_upper, w * rhs)
    return out


def step_state(g: RadialGrid, T, chi, u, cfg: TimeStepConfig) -> np.ndarray:
    """Advance the heated state one step: dT/dt = L T + u.

    T must carry the boundary conditions (zero value at x = 1, symmetric
    axis); the output satisfies T(1) = 0 exactly. With u = 0 and
    theta >= 0.5 the step never increases the Dirichlet energy of T.
    """
    Ta = _as_profile(g, T, "T")
    ca = _as_profile(g, chi, "chi")
    ua = _as_profile(g, u, "u")
    _check_chi(ca)
    _check_dirichlet(Ta, "T")
    return _theta_step(g, Ta, ca, ua, cfg)


def step_adjoint_backward(g: RadialGrid, p_next, chi, cfg: TimeStepConfig) -> np.ndarray:
    """Step the adjoint one dt earlier in time.

    The adjoint satisfies dp/dt = -L p, which is an ordinary diffusion in
    reversed time; stepping backward is therefore the stable direction and
    contracts the profile. For theta = 1 this map is exactly the transpose
    (in the weighted inner product) of the state propagator, which is what
    makes discrete gradients consistent.
    """
    pa = _as_profile(g, p_next, "p_next")
    ca = _as_profile(g, chi, "chi")
    _check_chi(ca)
    _check_dirichlet(pa, "p_next")
    return _theta_step(g, pa, ca, None, cfg)


def solve_quasi_steady_adjoint(g: RadialGrid, chi, alpha: float, T, dThat_dt) -> np.ndarray:
    """Solve (Id / alpha - L) p = L T - dTref/dt with p(1) = 0.

    This is the elliptic inverse problem that replaces backward-in-time
    adjoint integration in the receding-horizon controller. The system is
    SPD for any alpha > 0 since -L is positive semidefinite.
    """
    if alpha <= 0.0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    Ta = _as_profile(g, T, "T")
    ca = _as_profile(g, chi, "chi")
    ra = _as_profile(g, dThat_dt, "dThat_dt")
    _check_chi(ca)

    rhs_full = apply_cylindrical_operator(g, ca, Ta) - ra
    lower, diag, upper = stiffness_tridiagonal(g, ca)
    w = g.cell_weights[:-1]
    p = np.zeros(g.n)
    p[:-1] = thomas(lower, w / alpha + diag, upper, w * rhs_full[:-1])
    return p
