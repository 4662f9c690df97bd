"""Feedback synthesis for electron-temperature profile tracking in a
cylindrical heat-transport model.

The package couples a conservative finite-volume discretization of the
1D cylindrical diffusion equation with a receding-horizon adjoint
controller: at every step a quasi-steady elliptic problem yields the
costate, the feedback law u = -p / alpha yields the heating profile, and
an empirical adaptation law steers the penalty weight. An open-loop
forward-backward sweep and a quadratic penalty calibration complete the
toolchain, together with energy-bound, eigenvalue, and decay diagnostics.
"""

from .control import (
    CalibrationResult,
    ControllerConfig,
    FbsConfig,
    FbsResult,
    SimulationResult,
    adapt_alpha,
    calibrate_alpha,
    deviation_sign,
    fbs_evaluator,
    feedback_control,
    forward_backward_sweep,
    rhc_step,
    run_rhc,
)
from .diagnostics import (
    BoundReport,
    control_energy_norm,
    dirichlet_energy,
    energy_bound,
    objective,
    reference_gap,
    tracking_cost,
)
from .errors import CalibrationError, NumericalError, SimulationError
from .grid import (
    BoundaryConditions,
    RadialGrid,
    apply_cylindrical_operator,
    first_dirichlet_eigenvalue,
    make_grid,
    norm_l2x,
    sobolev_seminorm_sq,
    weighted_inner_product,
)
from .reference import (
    ReferenceTrajectory,
    make_reference,
    parabolic_pedestal_profiles,
    profile_from_csv,
    reference_at,
    reference_rate,
)
from .solvers import (
    TimeStepConfig,
    TridiagonalSystem,
    solve_quasi_steady_adjoint,
    step_adjoint_backward,
    step_state,
    tridiagonal_solve,
)
from .transport import (
    DerivedCoefficients,
    TransportParams,
    derive_coefficients,
    diffusivity,
    node_gradient,
    suppression_function,
    tore_supra_like,
)

__version__ = "0.1.0"
