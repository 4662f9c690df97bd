"""Time-stepper and elliptic-solver tests.

Covers:
 1. Thomas solve: identity, dense oracle, singular pivot, dominance check
 2. state step: fixed point at zero, exact Dirichlet value, energy decay,
    manufactured-solution tracking
 3. backward adjoint step: zero fixed point, exact discrete eigenfunction
    contraction, near-identity at floor diffusivity
 4. quasi-steady adjoint: vanishing-operator limit, zero right-hand side,
    randomized residual oracle, small-penalty asymptotics, linearity
"""

import numpy as np
import pytest
import scipy.linalg

from tokatrack import (
    NumericalError,
    TimeStepConfig,
    TridiagonalSystem,
    apply_cylindrical_operator,
    make_grid,
    norm_l2x,
    sobolev_seminorm_sq,
    solve_quasi_steady_adjoint,
    step_adjoint_backward,
    step_state,
    tridiagonal_solve,
)
from tokatrack.grid import stiffness_tridiagonal


class TestTridiagonalSolve:
    def test_identity(self):
        rhs = np.array([1.0, -2.0, 3.0])
        sys = TridiagonalSystem(np.zeros(3), np.ones(3), np.zeros(3), rhs)
        np.testing.assert_array_equal(tridiagonal_solve(sys), rhs)

    def test_dense_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            m = int(rng.integers(3, 12))
            lower = rng.standard_normal(m)
            upper = rng.standard_normal(m)
            diag = np.abs(lower) + np.abs(upper) + 1.0 + rng.random(m)
            lower[0] = upper[-1] = 0.0
            rhs = rng.standard_normal(m)
            x = tridiagonal_solve(TridiagonalSystem(lower, diag, upper, rhs))
            A = np.diag(diag) + np.diag(lower[1:], -1) + np.diag(upper[:-1], 1)
            np.testing.assert_allclose(x, np.linalg.solve(A, rhs), rtol=1e-12, atol=1e-12)

    def test_singular_system(self):
        # weakly dominant but singular: second pivot is eliminated to zero
        sys = TridiagonalSystem(
            np.array([0.0, 1.0]), np.array([1.0, 1.0]), np.array([1.0, 0.0]), np.ones(2)
        )
        with pytest.raises(NumericalError):
            tridiagonal_solve(sys)

    def test_dominance_asserted(self):
        with pytest.raises(ValueError):
            TridiagonalSystem(
                np.array([0.0, 5.0, 0.0]),
                np.array([1.0, 1.0, 1.0]),
                np.array([0.0, 5.0, 0.0]),
                np.ones(3),
            )


class TestTimeStepConfig:
    def test_theta_window(self):
        with pytest.raises(ValueError):
            TimeStepConfig(dt=0.1, theta=0.25)
        with pytest.raises(ValueError):
            TimeStepConfig(dt=-0.1)


class TestStepState:
    def test_zero_fixed_point(self):
        g = make_grid(41)
        ts = TimeStepConfig(dt=0.05)
        out = step_state(g, np.zeros(g.n), np.ones(g.n), np.zeros(g.n), ts)
        np.testing.assert_array_equal(out, np.zeros(g.n))

    def test_dirichlet_pinned(self):
        g = make_grid(41)
        ts = TimeStepConfig(dt=0.01)
        T = 1.0 - g.nodes**2
        out = step_state(g, T, np.full(g.n, 0.3), np.ones(g.n), ts)
        assert out[-1] == 0.0

    @pytest.mark.parametrize("theta", [1.0, 0.5])
    def test_free_diffusion_energy_decay(self, theta):
        g = make_grid(101)
        chi = 0.4 + 0.2 * g.nodes**2
        ts = TimeStepConfig(dt=0.02, theta=theta)
        T = 1.0 - g.nodes**2
        zero = np.zeros(g.n)
        energy = sobolev_seminorm_sq(g, chi, T)
        for _ in range(100):
            T = step_state(g, T, chi, zero, ts)
            e_next = sobolev_seminorm_sq(g, chi, T)
            assert e_next <= energy
            energy = e_next

    def test_manufactured_tracking(self):
        # T(x,t) = exp(-t)(1 - x^2) solves the equation with chi = 1 and
        # u = exp(-t)(3 + x^2); backward Euler tracks it to O(dt) + O(h^2)
        g = make_grid(101)
        chi = np.ones(g.n)
        dt = 1e-3
        ts = TimeStepConfig(dt=dt)
        T = 1.0 - g.nodes**2
        t_end = 0.5
        for k in range(int(round(t_end / dt))):
            t_next = (k + 1) * dt
            u = np.exp(-t_next) * (3.0 + g.nodes**2)
            T = step_state(g, T, chi, u, ts)
        exact = np.exp(-t_end) * (1.0 - g.nodes**2)
        rel = norm_l2x(g, T - exact) / norm_l2x(g, exact)
        assert rel < 5e-3

    def test_boundary_violation_rejected(self):
        g = make_grid(21)
        ts = TimeStepConfig(dt=0.1)
        with pytest.raises(ValueError):
            step_state(g, np.ones(g.n), np.ones(g.n), np.zeros(g.n), ts)

    def test_nonpositive_chi_rejected(self):
        g = make_grid(21)
        ts = TimeStepConfig(dt=0.1)
        T = 1.0 - g.nodes**2
        with pytest.raises(ValueError):
            step_state(g, T, np.zeros(g.n), np.zeros(g.n), ts)


class TestStepAdjointBackward:
    def test_zero_fixed_point(self):
        g = make_grid(31)
        ts = TimeStepConfig(dt=0.05)
        out = step_adjoint_backward(g, np.zeros(g.n), np.ones(g.n), ts)
        np.testing.assert_array_equal(out, np.zeros(g.n))

    def test_eigenfunction_contraction(self):
        # backward-in-time stepping of the adjoint is ordinary diffusion in
        # reversed time: the discrete eigenmode contracts by 1/(1 + sig dt)
        g = make_grid(41)
        chi = np.full(g.n, 0.7)
        lower, diag, upper = stiffness_tridiagonal(g, chi)
        A = np.diag(diag) + np.diag(lower[1:], -1) + np.diag(upper[:-1], 1)
        M = np.diag(g.cell_weights[:-1])
        sig, vec = scipy.linalg.eigh(A, M)
        phi = np.zeros(g.n)
        phi[:-1] = vec[:, 0]
        dt = 0.01
        out = step_adjoint_backward(g, phi, chi, TimeStepConfig(dt=dt))
        np.testing.assert_allclose(out, phi / (1.0 + sig[0] * dt), atol=1e-12)
        # and the factor matches exp(-sig dt) to O(dt^2)
        assert 1.0 / (1.0 + sig[0] * dt) == pytest.approx(np.exp(-sig[0] * dt), abs=2.0 * (sig[0] * dt) ** 2)

    def test_floor_chi_near_identity(self):
        g = make_grid(41)
        ts = TimeStepConfig(dt=0.01)
        p = 1.0 - g.nodes**2
        out = step_adjoint_backward(g, p, np.full(g.n, 1e-8), ts)
        assert np.max(np.abs(out - p)) < 1e-8


class TestQuasiSteadyAdjoint:
    def test_vanishing_operator_limit(self):
        # chi at floor and constant-ish T: p ~ -alpha * dTref/dt
        g = make_grid(41)
        chi = np.full(g.n, 1e-10)
        T = np.zeros(g.n)
        rate = np.sin(1.0 + g.nodes)
        alpha = 2.5
        p = solve_quasi_steady_adjoint(g, chi, alpha, T, rate)
        np.testing.assert_allclose(p[:-1], -alpha * rate[:-1], rtol=1e-6)

    def test_zero_rhs_gives_zero(self):
        g = make_grid(41)
        p = solve_quasi_steady_adjoint(g, np.ones(g.n), 1.0, np.zeros(g.n), np.zeros(g.n))
        np.testing.assert_array_equal(p, np.zeros(g.n))

    def test_randomized_residual(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            n = int(rng.integers(11, 101))
            g = make_grid(n)
            chi = np.exp(0.5 * rng.standard_normal(n)) * 10.0 ** rng.uniform(-3, 0)
            alpha = 10.0 ** rng.uniform(-2, 2)
            T = rng.standard_normal(n)
            rate = rng.standard_normal(n)
            p = solve_quasi_steady_adjoint(g, chi, alpha, T, rate)
            assert p[-1] == 0.0
            rhs = apply_cylindrical_operator(g, chi, T) - rate
            lhs = p / alpha - apply_cylindrical_operator(g, chi, p)
            resid = np.max(np.abs(lhs[:-1] - rhs[:-1]))
            assert resid <= 1e-10 * max(np.max(np.abs(rhs[:-1])), 1e-300)

    def test_small_penalty_asymptotics(self):
        # as alpha -> 0 the identity term dominates: ||p|| / alpha -> ||L T - rate||
        g = make_grid(51)
        chi = 0.1 + 0.05 * g.nodes
        T = 1.0 - g.nodes**2
        rate = 0.5 * (1.0 - g.nodes)
        alpha = 1e-6
        p = solve_quasi_steady_adjoint(g, chi, alpha, T, rate)
        rhs = apply_cylindrical_operator(g, chi, T) - rate
        rhs[-1] = 0.0
        assert norm_l2x(g, p) / alpha == pytest.approx(norm_l2x(g, rhs), rel=0.01)

    def test_linearity_in_rhs(self):
        g = make_grid(31)
        chi = 0.2 + g.nodes**2
        T1 = 1.0 - g.nodes**2
        T2 = (1.0 - g.nodes**2) ** 2
        r1 = np.cos(g.nodes)
        r2 = g.nodes.copy()
        a, b = 1.7, -0.6
        p_combo = solve_quasi_steady_adjoint(g, chi, 3.0, a * T1 + b * T2, a * r1 + b * r2)
        p1 = solve_quasi_steady_adjoint(g, chi, 3.0, T1, r1)
        p2 = solve_quasi_steady_adjoint(g, chi, 3.0, T2, r2)
        np.testing.assert_allclose(p_combo, a * p1 + b * p2, atol=1e-12)

    def test_bad_alpha(self):
        g = make_grid(11)
        with pytest.raises(ValueError):
            solve_quasi_steady_adjoint(g, np.ones(g.n), 0.0, np.zeros(g.n), np.zeros(g.n))
