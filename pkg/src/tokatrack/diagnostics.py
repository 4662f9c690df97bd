"""Objective functionals, energy norms, and the control-energy certificate.

Three quadratic functionals drive the analysis:

* objective J(t): half squared distance of the state to the final target,
* tracking_cost J1(t): same against the moving intermediate target,
* reference_gap J2(t): same between the intermediate and final targets,
  which decays exactly like exp(-2 mu t / tf) for the exponential ramp.

They satisfy J <= 2 (J1 + J2) pointwise in time at quadrature level.

energy_bound evaluates the a priori certificate for the feedback control

    ||u||^2_{L2x} + lam1 alpha ||u||^2_{L2xchi}
        <= ||dTref/dt||^2_{L2x} + ||T||^2_{H1xchi} / alpha

with lam1 the first Dirichlet eigenvalue of the x chi weighted Rayleigh
quotient. For the quasi-steady adjoint solve with the same discrete
operators the inequality holds exactly, so violations flag stale
eigenvalues or operator mismatches rather than controller defects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import RadialGrid, sobolev_seminorm_sq, weighted_inner_product
from .reference import ReferenceTrajectory, reference_at

__all__ = [
    "BoundReport",
    "objective",
    "tracking_cost",
    "reference_gap",
    "energy_bound",
    "dirichlet_energy",
    "control_energy_norm",
]

_BOUND_RTOL = 1e-9  # rounding allowance when classifying lhs <= rhs


@dataclass(frozen=True)
class BoundReport:
    """One evaluation of the control-energy certificate."""

    lhs: float
    rhs: float
    satisfied: bool
    t: float


def _half_sq_distance(g: RadialGrid, a, b) -> float:
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    ones = np.ones(g.n)
    return 0.5 * weighted_inner_product(g, diff, diff, ones)


def objective(g: RadialGrid, T, Tbar) -> float:
    """J: half squared L2x distance of T to the final target."""
    return _half_sq_distance(g, T, Tbar)


def tracking_cost(g: RadialGrid, T, That) -> float:
    """J1: half squared L2x distance of T to the intermediate target."""
    return _half_sq_distance(g, T, That)


def reference_gap(ref: ReferenceTrajectory, g: RadialGrid, t: float) -> float:
    """J2: half squared L2x distance of the intermediate target to the
    final target.

    Measured against the final target (not the ramp endpoint), this obeys
    the exact decay identity J2(t) = exp(-2 mu t / tf) J2(0) and makes the
    envelope J <= 2 (J1 + J2) algebraically exact.
    """
    return _half_sq_distance(g, reference_at(ref, t), ref.Tbar)


def energy_bound(g: RadialGrid, chi, alpha: float, u, T, dThat_dt, lambda1: float, t: float = 0.0) -> BoundReport:
    """Evaluate both sides of the control-energy certificate at one time."""
    if alpha <= 0.0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    ones = np.ones(g.n)
    u_l2x_sq = weighted_inner_product(g, u, u, ones)
    u_l2xchi_sq = weighted_inner_product(g, u, u, chi)
    rate_l2x_sq = weighted_inner_product(g, dThat_dt, dThat_dt, ones)
    T_h1_sq = sobolev_seminorm_sq(g, chi, T)
    lhs = u_l2x_sq + lambda1 * alpha * u_l2xchi_sq
    rhs = rate_l2x_sq + T_h1_sq / alpha
    satisfied = lhs <= rhs * (1.0 + _BOUND_RTOL)
    return BoundReport(lhs=lhs, rhs=rhs, satisfied=satisfied, t=t)


def dirichlet_energy(g: RadialGrid, chi, T) -> float:
    """Weighted Dirichlet energy of T; free diffusion never increases it."""
    return sobolev_seminorm_sq(g, chi, T)


def control_energy_norm(g: RadialGrid, u) -> float:
    """L2x norm of the control, the injected-power measure."""
    ones = np.ones(g.n)
    return float(np.sqrt(max(weighted_inner_product(g, u, u, ones), 0.0)))
