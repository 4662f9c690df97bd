"""Radial mesh, weighted inner products, and the cylindrical diffusion operator.

The domain is the normalized radius x in [0, 1] carrying the cylindrical
measure x dx. Nodes are uniform; quadrature weights are the exact cell
integrals of x over finite-volume cells, so the weight vector sums to 1/2
exactly and the discrete operator below is self-adjoint in the induced
inner product.

Discretization of L v = (1/x) d/dx ( x chi dv/dx ):

* conservative flux form with face diffusivity = arithmetic mean of the
  adjacent nodes,
* zero flux through the axis face (symmetry; equivalent to the removable
  singularity limit L v -> 2 chi v'' at x = 0),
* homogeneous Dirichlet at x = 1 handled by eliminating the boundary
  unknown (the returned row there is zero).

With cell volumes as weights, W L is symmetric on the non-Dirichlet block
and <-L v, v> equals the face-quadrature Dirichlet energy exactly for any
v vanishing at x = 1 (discrete summation by parts).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._thomas import thomas
from .errors import NumericalError

__all__ = [
    "RadialGrid",
    "BoundaryConditions",
    "make_grid",
    "weighted_inner_product",
    "norm_l2x",
    "apply_cylindrical_operator",
    "sobolev_seminorm_sq",
    "first_dirichlet_eigenvalue",
]


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial mesh on [0, 1] with x dx quadrature weights."""

    n: int
    nodes: np.ndarray
    cell_weights: np.ndarray
    h: float
    face_x: np.ndarray  # face midpoints, length n - 1


@dataclass(frozen=True)
class BoundaryConditions:
    """Marker for the boundary conditions assumed by the discrete operator.

    Both the state and the adjoint use zero flux through the axis and a
    homogeneous Dirichlet value at x = 1; the marker mainly documents which
    field a solver step is configured for.
    """

    applies_to: str = "state"  # "state" | "adjoint"
    left: str = "neumann-axis"
    right: str = "dirichlet-zero"

    def __post_init__(self):
        if self.applies_to not in ("state", "adjoint"):
            raise ValueError(f"applies_to must be 'state' or 'adjoint', got {self.applies_to!r}")
        if self.left != "neumann-axis" or self.right != "dirichlet-zero":
            raise ValueError("only neumann-axis / dirichlet-zero boundaries are supported")


def make_grid(n: int) -> RadialGrid:
    """Build the uniform n-node grid with exact finite-volume weights.

    The weight of node i is the integral of x over its cell
    [x_i - h/2, x_i + h/2] clamped to [0, 1]; the weights are nonnegative
    and sum to 1/2 up to rounding.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValueError(f"node count must be an integer, got {n!r}")
    if n < 3:
        raise ValueError(f"node count must be >= 3, got {n}")
    n = int(n)
    h = 1.0 / (n - 1)
    nodes = np.linspace(0.0, 1.0, n)
    lo = np.clip(nodes - 0.5 * h, 0.0, 1.0)
    hi = np.clip(nodes + 0.5 * h, 0.0, 1.0)
    weights = 0.5 * (hi * hi - lo * lo)
    faces = 0.5 * (nodes[:-1] + nodes[1:])
    return RadialGrid(n=n, nodes=nodes, cell_weights=weights, h=h, face_x=faces)


def _as_profile(g: RadialGrid, v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (g.n,):
        raise ValueError(f"{name}: expected shape ({g.n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: profile contains non-finite entries")
    return arr


def weighted_inner_product(g: RadialGrid, f, h, w) -> float:
    """Quadrature of the weighted integral of f * h * w against x dx."""
    fa = _as_profile(g, f, "f")
    ha = _as_profile(g, h, "h")
    wa = _as_profile(g, w, "w")
    return float(np.dot(g.cell_weights, fa * ha * wa))


def norm_l2x(g: RadialGrid, f) -> float:
    """L2 norm of f with respect to the x dx measure."""
    fa = _as_profile(g, f, "f")
    return float(np.sqrt(max(np.dot(g.cell_weights, fa * fa), 0.0)))


def face_coefficients(g: RadialGrid, chi) -> np.ndarray:
    """Per-face value of x * chi, with chi averaged onto faces.

    This is the single stencil shared by the operator, the Dirichlet
    energy, and the implicit solvers, so their discrete identities hold
    exactly rather than only to truncation order.
    """
    ca = _as_profile(g, chi, "chi")
    if np.any(ca < 0.0):
        raise ValueError("chi must be nonnegative")
    return g.face_x * 0.5 * (ca[:-1] + ca[1:])


def apply_cylindrical_operator(g: RadialGrid, chi, v) -> np.ndarray:
    """Apply L v = (1/x) d/dx ( x chi dv/dx ) in conservative form.

    Returns the flux-difference quotients over the cell volumes; the
    Dirichlet row at x = 1 is zero (that unknown is eliminated by the
    solvers). The axis row is the zero-inner-flux cell balance, which is
    the symmetry limit 2 chi v'' at x = 0.
    """
    va = _as_profile(g, v, "v")
    coef = face_coefficients(g, chi)
    flux = coef * np.diff(va) / g.h
    out = np.zeros(g.n)
    out[0] = flux[0] / g.cell_weights[0]
    out[1:-1] = np.diff(flux) / g.cell_weights[1:-1]
    return out


def sobolev_seminorm_sq(g: RadialGrid, chi, v) -> float:
    """Weighted Dirichlet energy: integral of (dv/dx)^2 chi x dx >= 0.

    Uses face-centered gradients so that <-L v, v> in the weighted inner
    product reproduces this value exactly for v with v(1) = 0.
    """
    va = _as_profile(g, v, "v")
    coef = face_coefficients(g, chi)
    grad = np.diff(va) / g.h
    return float(np.dot(coef, grad * grad) * g.h)


def stiffness_tridiagonal(g: RadialGrid, chi):
    """Tridiagonal of the SPD stiffness A = -W L on the non-Dirichlet block.

    Rows 0 .. n-2; row n-2 keeps the face coupling into the eliminated
    boundary node on its diagonal. Returns (lower, diag, upper), each of
    length n-1, in the layout of ``_thomas.thomas``.
    """
    coef = face_coefficients(g, chi)
    m = g.n - 1
    diag = np.empty(m)
    diag[0] = coef[0] / g.h
    diag[1:] = (coef[:-1] + coef[1:]) / g.h
    off = -coef[: m - 1] / g.h
    lower = np.concatenate(([0.0], off))
    upper = np.concatenate((off, [0.0]))
    return lower, diag, upper


def first_dirichlet_eigenvalue(g: RadialGrid, chi, tol: float = 1e-13, max_iter: int = 500) -> float:
    """Smallest eigenvalue of the weighted Rayleigh quotient.

    Minimizes seminorm(v)^2 / ||v||^2 over grid functions with v(1) = 0,
    where both the seminorm and the norm carry the weight x * chi. Solved
    by inverse power iteration on the generalized problem A v = lam M v
    with A the stiffness block and M the diagonal x chi mass.

    chi must be strictly positive (apply a floor upstream).
    """
    ca = _as_profile(g, chi, "chi")
    if np.any(ca[:-1] <= 0.0):
        raise ValueError("chi must be strictly positive for the eigenvalue problem")
    lower, diag, upper = stiffness_tridiagonal(g, ca)
    mass = g.cell_weights[:-1] * ca[:-1]

    v = np.ones(g.n - 1)
    v /= np.sqrt(np.dot(mass, v * v))
    lam = np.dot(v, _apply_tridiag(lower, diag, upper, v))
    for _ in range(max_iter):
        y = thomas(lower, diag, upper, mass * v)
        y /= np.sqrt(np.dot(mass, y * y))
        lam_new = float(np.dot(y, _apply_tridiag(lower, diag, upper, y)))
        done = abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300)
        v, lam = y, lam_new
        if done:
            if lam <= 0.0:
                raise NumericalError(f"eigenvalue iteration converged to a nonpositive value {lam}")
            return lam
    raise NumericalError(f"eigenvalue iteration did not converge within {max_iter} iterations")


def _apply_tridiag(lower, diag, upper, v):
    out = diag * v
    out[1:] += lower[1:] * v[:-1]
    out[:-1] += upper[:-1] * v[1:]
    return out
