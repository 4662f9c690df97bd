"""Diffusivity model tests.

Covers:
 1. suppression factor: algebraic values, clamp behavior, range (0, 1]
 2. derived coefficients: geometry factor and plug-in values of B, C
 3. diffusivity: floor behavior, pointwise evaluation, sqrt clamping,
    monotonicity under gradient amplification
 4. parameter validation
"""

import numpy as np
import pytest

from tokatrack import (
    DerivedCoefficients,
    TransportParams,
    derive_coefficients,
    diffusivity,
    make_grid,
    suppression_function,
    tore_supra_like,
)


def params_with(g, **kw):
    defaults = dict(
        a=1.0,
        R=1.0,
        B_phi0=1.0,
        q=np.ones(g.n),
        k=0.0,
        omega_ExB=0.0,
        gamma_ITG=1.0,
        s=np.full(g.n, 0.5),
        s_thres=0.5,
        L_Te=1.0,
        chi_floor=1e-8,
    )
    defaults.update(kw)
    return TransportParams(**defaults)


class TestSuppressionFunction:
    def test_all_factors_collapse(self):
        g = make_grid(21)
        p = params_with(g, k=0.0, s=np.full(g.n, 0.8), s_thres=0.5)
        np.testing.assert_array_equal(suppression_function(p, g), np.ones(g.n))

    def test_pointwise_value(self):
        # k (omega/gamma)^2 = 1 and (s - s_thres)^2 = 4 gives 1/2 * 1/4
        g = make_grid(21)
        s = np.full(g.n, 0.5)
        s[3] = 2.5
        p = params_with(g, k=1.0, omega_ExB=1.0, gamma_ITG=1.0, s=s)
        fs = suppression_function(p, g)
        assert fs[3] == pytest.approx(0.125, rel=1e-14)
        assert fs[0] == pytest.approx(0.5, rel=1e-14)

    def test_shear_clamp(self):
        g = make_grid(21)
        p = params_with(g, s=np.full(g.n, 1.0), s_thres=0.5)  # (s-s_thres)^2 = 0.25 < 1
        np.testing.assert_array_equal(suppression_function(p, g), np.ones(g.n))

    def test_range(self):
        g = make_grid(51)
        rng = np.random.default_rng(2)
        p = params_with(g, k=3.0, omega_ExB=1.7, s=rng.normal(size=g.n) * 4.0)
        fs = suppression_function(p, g)
        assert np.all(fs > 0.0) and np.all(fs <= 1.0)


class TestDeriveCoefficients:
    def test_geometry_factor(self):
        g = make_grid(11)
        assert derive_coefficients(params_with(g), g).A == pytest.approx(2.0 / 3.0, rel=1e-15)
        assert derive_coefficients(params_with(g, a=0.5), g).A == pytest.approx(8.0 / 3.0, rel=1e-15)

    def test_plugin_values(self):
        g = make_grid(11)
        coeffs = derive_coefficients(params_with(g), g)  # unit constants, f_s = 1
        np.testing.assert_allclose(coeffs.B, 8e-5, rtol=1e-14)
        np.testing.assert_allclose(coeffs.C, 5e-6, rtol=1e-14)

    def test_field_scaling(self):
        g = make_grid(11)
        coeffs = derive_coefficients(params_with(g, B_phi0=2.0), g)
        np.testing.assert_allclose(coeffs.B, 4e-5, rtol=1e-14)
        np.testing.assert_allclose(coeffs.C, 1.25e-6, rtol=1e-14)


class TestDiffusivity:
    def test_floor_on_flat_profile(self):
        g = make_grid(31)
        coeffs = derive_coefficients(params_with(g), g)
        chi = diffusivity(coeffs, g, np.full(g.n, 4.0), 1e-3)
        np.testing.assert_array_equal(chi, 1e-3)

    def test_pointwise_parabola(self):
        # A (B + C sqrt(T)) |dT/dx| with A = B = 1, C = 0: chi(x) = 2x
        g = make_grid(101)
        coeffs = DerivedCoefficients(A=1.0, B=np.ones(g.n), C=np.zeros(g.n))
        chi = diffusivity(coeffs, g, 1.0 - g.nodes**2, 1e-30)
        mid = np.argmin(np.abs(g.nodes - 0.5))
        assert chi[mid] == pytest.approx(1.0, rel=1e-12)
        assert chi[0] == 1e-30  # axis gradient vanishes by symmetry

    def test_negative_undershoot_clamped(self):
        g = make_grid(21)
        coeffs = DerivedCoefficients(A=1.0, B=np.zeros(g.n), C=np.ones(g.n))
        T = 1.0 - g.nodes**2
        T[10] = -1e-9
        chi = diffusivity(coeffs, g, T, 1e-12)
        assert np.all(np.isfinite(chi))

    def test_gradient_amplification_monotone(self):
        g = make_grid(41)
        coeffs = derive_coefficients(params_with(g, k=1.0, omega_ExB=0.5), g)
        rng = np.random.default_rng(9)
        T = np.abs(rng.random(g.n)) + 0.1
        chi1 = diffusivity(coeffs, g, T, 1e-300)
        chi2 = diffusivity(coeffs, g, 2.5 * T, 1e-300)
        assert np.all(chi2 >= chi1)

    def test_floor_always_respected(self):
        g = make_grid(41)
        coeffs = derive_coefficients(params_with(g), g)
        rng = np.random.default_rng(10)
        for _ in range(10):
            chi = diffusivity(coeffs, g, np.abs(rng.random(g.n)), 2e-3)
            assert np.all(chi >= 2e-3)


class TestParams:
    def test_preset_profiles_aligned(self):
        g = make_grid(33)
        p = tore_supra_like(g)
        assert p.q.shape == (g.n,)
        assert p.s.shape == (g.n,)
        assert p.q[0] == pytest.approx(1.0)
        assert p.chi_floor > 0.0

    def test_preset_override(self):
        g = make_grid(11)
        p = tore_supra_like(g, B_phi0=9.9, k=1.5)
        assert p.B_phi0 == 9.9 and p.k == 1.5

    @pytest.mark.parametrize("bad", [dict(a=0.0), dict(gamma_ITG=0.0), dict(k=-1.0), dict(chi_floor=0.0)])
    def test_invalid_params(self, bad):
        g = make_grid(11)
        with pytest.raises(ValueError):
            params_with(g, **bad)

    def test_gamma_positive_required_by_suppression(self):
        g = make_grid(11)
        p = params_with(g)
        object.__setattr__(p, "gamma_ITG", -1.0)  # bypass constructor check
        with pytest.raises(ValueError):
            suppression_function(p, g)
