"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)
"""

"""
Test suite for the Fourier semigroup, the resolvent field and the norms built
on it.

Reference values use the d = 1, alpha = 1 instance with psi(xi) = 2 pi |xi|,
for which the accumulated symbol has a closed form.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from conftest import make_path, make_source
from kinetic_hypo.core.coefficients import CoefficientPath, flow_matrix
from kinetic_hypo.core.exceptions import ValidationError
from kinetic_hypo.core.kinetic_semigroup import (
    accumulated_symbol,
    accumulated_symbol_grad,
    apply_generator,
    apply_multiplier,
    apply_semigroup_hat,
    build_resolvent_field,
    build_source_field,
    char_function,
    forward_kolmogorov_residual,
    frac_norm_l2,
    generator_hat,
    inverse_transform_grid,
    kolmogorov_convergence,
    kolmogorov_residual,
    lp_norm,
    physical_grid,
    resolvent_hat,
    resolvent_time_mesh,
    symbol_lower_bound_fit,
    weak_solution_residual,
)
from kinetic_hypo.core.params import QuadratureSpec
from kinetic_hypo.core.sources import GaussianWave
from kinetic_hypo.core.stable_levy import StableMeasure, sphere_abs_moment, stable_constant

# probes with xi < 0 < eta keep eta - Pi xi away from the origin
SMOOTH_PROBES = np.array([[-1.0, 0.5], [-0.5, 1.0], [-0.8, 0.8], [-0.3, 0.6]])


class TestAccumulatedSymbol:
    """Closed-form values and structural identities of A(s, t, xi, eta)."""

    def test_pure_eta(self, iso_path):
        assert accumulated_symbol(iso_path, 0.0, 2.0, [0.0], [1.5]) == pytest.approx(
            2.0 * math.pi * 1.5 * 2.0, rel=1e-12
        )

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_pure_xi(self, alpha):
        path = make_path(alpha)
        xi, gap = 1.3, 0.7
        c = 2.0 * stable_constant(alpha)
        expected = c * xi**alpha * gap ** (1.0 + alpha) / (1.0 + alpha)
        assert accumulated_symbol(path, 0.4, 0.4 + gap, [xi], [0.0]) == pytest.approx(
            expected, rel=1e-10
        )

    def test_empty_interval(self, iso_path):
        assert accumulated_symbol(iso_path, 1.0, 1.0, [2.0], [3.0]) == 0.0

    def test_reversed_interval(self, iso_path):
        with pytest.raises(ValidationError):
            accumulated_symbol(iso_path, 1.0, 0.5, [1.0], [1.0])

    def test_char_function(self, iso_path):
        assert char_function(iso_path, 0.0, 1.0, [0.0], [1.0]) == pytest.approx(
            math.exp(-2.0 * math.pi), rel=1e-12
        )

    def test_splits_at_intermediate_time(self, two_piece_path):
        s, u, t = 0.3, 0.9, 1.8
        xi, eta = np.array([[0.7], [-1.2]]), np.array([[0.4], [2.0]])
        whole = accumulated_symbol(two_piece_path, s, t, xi, eta)
        late = accumulated_symbol(two_piece_path, u, t, xi, eta)
        early = accumulated_symbol(
            two_piece_path, s, u, xi, eta + xi @ flow_matrix(two_piece_path, u, t)
        )
        np.testing.assert_allclose(whole, late + early, rtol=1e-12)

    def test_splits_with_atoms_in_d2(self):
        m = StableMeasure.axis_pairs(1.3, 2, [1.0, 0.5])
        path = CoefficientPath(
            breakpoints=(0.0, 0.5),
            sigma=(np.eye(2), [[1.0, 0.2], [0.0, 1.0]]),
            U=([[1.0, 0.0], [0.3, 1.0]], 2.0 * np.eye(2)),
            nu=(m, m),
        )
        rng = np.random.default_rng(4)
        xi, eta = rng.normal(size=(6, 2)), rng.normal(size=(6, 2))
        s, u, t = 0.1, 0.7, 1.4
        whole = accumulated_symbol(path, s, t, xi, eta)
        split = accumulated_symbol(path, u, t, xi, eta) + accumulated_symbol(
            path, s, u, xi, eta + xi @ flow_matrix(path, u, t)
        )
        np.testing.assert_allclose(whole, split, rtol=1e-12)

    def test_isotropic_d2_against_adaptive_quadrature(self):
        path = make_path(1.5, dim=2)
        xi, eta = np.array([0.8, -0.3]), np.array([-0.5, 0.9])
        value = accumulated_symbol(path, 0.0, 1.0, xi, eta, n_nodes=32)
        reference, _ = integrate.quad(
            lambda r: float(np.linalg.norm(xi * (1.0 - r) + eta)) ** 1.5,
            0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200,
        )
        scale = stable_constant(1.5) * sphere_abs_moment(2, 1.5)
        assert value == pytest.approx(scale * reference, rel=1e-8)

    def test_gradient_matches_differences(self):
        path = make_path(1.5)
        xi, eta, h = np.array([[0.9]]), np.array([[0.4]]), 1e-6
        _, grad = accumulated_symbol_grad(path, 0.2, 1.1, xi, eta)
        numeric = (
            accumulated_symbol(path, 0.2, 1.1, xi, eta + h)
            - accumulated_symbol(path, 0.2, 1.1, xi, eta - h)
        ) / (2 * h)
        assert grad[0, 0] == pytest.approx(numeric[0], rel=1e-6)

    def test_lower_bound_constant_positive(self, iso_path, two_piece_path):
        probes = np.random.default_rng(5).normal(size=(40, 2))
        lattice = [(0.0, 0.01), (0.0, 1.0), (0.5, 3.0), (1.0, 20.0)]
        for path in (iso_path, two_piece_path):
            fit = symbol_lower_bound_fit(path, lattice, probes)
            assert 0.0 < fit["c"] <= fit["max_ratio"]


class TestSemigroup:
    def test_zero_gap_is_identity(self, iso_path, packet):
        k = np.array([0.3, -0.7])
        assert apply_semigroup_hat(iso_path, packet, 0.5, 0.5, k[:1], k[1:]) == pytest.approx(
            complex(packet.hat(k))
        )

    def test_matches_damped_sheared_spectrum(self, iso_path, packet):
        xi, eta = 0.6, 0.2
        eta_s = eta - xi * 1.5
        expected = math.exp(-accumulated_symbol(iso_path, 0.0, 1.5, [xi], [eta_s])) * complex(
            packet.hat(np.array([xi, eta_s]))
        )
        assert apply_semigroup_hat(iso_path, packet, 0.0, 1.5, [xi], [eta]) == pytest.approx(expected)

    def test_contraction(self, two_piece_path, packet):
        rng = np.random.default_rng(6)
        xi, eta = rng.normal(size=(30, 1)), rng.normal(size=(30, 1))
        moved = apply_semigroup_hat(two_piece_path, packet, 0.2, 1.7, xi, eta)
        eta_s = eta - xi * flow_matrix(two_piece_path, 0.2, 1.7)[0, 0]
        original = packet.hat(np.concatenate([xi, eta_s], axis=1))
        assert np.all(np.abs(moved) <= np.abs(original) + 1e-15)


class TestKolmogorov:
    """Backward and forward equations through difference stencils."""

    def test_backward_residual_small(self, iso_path, packet):
        residual = kolmogorov_residual(iso_path, packet, 0.2, 1.0, SMOOTH_PROBES, h_s=5e-3)
        assert residual < 1e-5

    def test_forward_residual_small(self, iso_path, packet):
        residual = forward_kolmogorov_residual(iso_path, packet, 0.0, 0.8, SMOOTH_PROBES, h_t=5e-3)
        assert residual < 1e-5

    def test_fourth_order_convergence(self):
        path = make_path(1.5)
        fit = kolmogorov_convergence(path, make_source(), 0.2, 1.0, SMOOTH_PROBES)
        assert fit["residuals"][-1] < fit["residuals"][0]
        assert fit["order"] > 3.0

    def test_stencil_must_fit(self, iso_path, packet):
        with pytest.raises(ValidationError):
            kolmogorov_residual(iso_path, packet, 0.99, 1.0, SMOOTH_PROBES, h_s=1e-2)

    def test_gaussian_test_function(self, two_piece_path):
        phi = GaussianWave(dim=1, widths=[1.0, 0.8], wavevector=[0.3, 0.0])
        residual = kolmogorov_residual(two_piece_path, phi, 1.2, 2.0, SMOOTH_PROBES, h_s=2.5e-3)
        assert residual < 1e-5


class TestResolvent:
    def test_vanishes_after_window(self, iso_path, packet):
        assert resolvent_hat(iso_path, packet, 1.0, 1.0, [0.2], [0.1]) == 0.0
        assert resolvent_hat(iso_path, packet, 1.0, 5.0, [0.2], [0.1]) == 0.0

    def test_large_lambda_limit(self, iso_path, packet):
        lam = 1e4
        xi, eta = np.array([[0.3], [-0.5]]), np.array([[0.2], [0.4]])
        u = resolvent_hat(iso_path, packet, lam, 0.5, xi, eta)
        f = packet.transform(0.5, np.concatenate([xi, eta], axis=1))
        np.testing.assert_allclose(lam * u, f, rtol=1e-3)

    def test_decays_before_window(self, iso_path, packet):
        near = abs(resolvent_hat(iso_path, packet, 2.0, -0.1, [0.2], [0.1]))
        far = abs(resolvent_hat(iso_path, packet, 2.0, -2.0, [0.2], [0.1]))
        assert far < near * math.exp(-2.0 * 1.9) * 1.0001

    def test_rejects_non_positive_lambda(self, iso_path, packet):
        with pytest.raises(ValidationError):
            resolvent_hat(iso_path, packet, 0.0, 0.5, [0.2], [0.1])

    def test_time_mesh_tail_scale(self, iso_path, packet, small_quad):
        tail = small_quad.n_tail
        nodes, weights = resolvent_time_mesh(iso_path, packet, 0.1, small_quad)
        assert np.all(nodes[:tail] < 0.0)
        # the tail weights integrate exp(2 lambda tau) over the half line
        assert np.sum(weights[:tail] * np.exp(0.2 * nodes[:tail])) == pytest.approx(5.0, rel=1e-8)

    @pytest.mark.parametrize("lam", [0.01, 0.049])
    def test_time_mesh_rejects_unresolvable_lambda(self, iso_path, packet, small_quad, lam):
        with pytest.raises(ValidationError):
            resolvent_time_mesh(iso_path, packet, lam, small_quad)

    def test_time_mesh_accepts_smallest_lambda(self, iso_path, packet, small_quad):
        nodes, _ = resolvent_time_mesh(iso_path, packet, 0.05, small_quad)
        assert np.all(np.diff(nodes) > 0)

    @pytest.mark.slow
    def test_field_independent_of_workers(self, iso_path, packet, small_quad):
        serial = build_resolvent_field(iso_path, packet, 1.0, small_quad, workers=1)
        parallel = build_resolvent_field(iso_path, packet, 1.0, small_quad, workers=2)
        np.testing.assert_array_equal(serial.values, parallel.values)
        assert serial.meta["lambda"] == 1.0

    @pytest.mark.slow
    def test_weak_formulation(self, iso_path, packet, small_quad):
        field = build_resolvent_field(iso_path, packet, 1.0, small_quad)
        phi = GaussianWave(dim=1, widths=[1.0, 1.0], wavevector=[0.5, 0.0])
        terms = weak_solution_residual(
            iso_path, field, packet, 1.0, phi, 0.2, 0.8, small_quad, return_terms=True
        )
        assert terms["residual"] <= 1e-4 * abs(terms["lhs"]) + 1e-8


class TestFieldNorms:
    """Plancherel norms, multipliers and physical reconstruction."""

    def test_source_field_plancherel(self):
        box = make_source(window="box", center_freq=[0.5, 0.0])
        field = build_source_field(box, QuadratureSpec())
        assert frac_norm_l2(field, 0.0, 0.0) == pytest.approx(box.l2_norm(), rel=1e-8)

    def test_multiplier_matches_weighted_norm(self, packet, small_quad):
        field = build_source_field(packet, small_quad)
        weighted = frac_norm_l2(field, 1.0 / 4.0, 1.0 / 2.0)
        multiplied = frac_norm_l2(apply_multiplier(field, 1.0 / 4.0, 1.0 / 2.0), 0.0, 0.0)
        assert weighted == pytest.approx(multiplied, rel=1e-12)

    def test_norm_is_homogeneous(self, packet, small_quad):
        field = build_source_field(packet, small_quad)
        doubled = build_source_field(packet.with_updates(amplitude=2.0), small_quad)
        assert frac_norm_l2(doubled, 0.25, 0.5) == pytest.approx(2.0 * frac_norm_l2(field, 0.25, 0.5))

    def test_negative_order_rejected(self, packet, small_quad):
        with pytest.raises(ValidationError):
            frac_norm_l2(build_source_field(packet, small_quad), -0.1, 0.0)

    def test_reconstruction(self):
        box = make_source(window="box")
        field = build_source_field(box, QuadratureSpec())
        axes = [np.linspace(-3.0, 3.0, 13)] * 2
        values = inverse_transform_grid(field, axes)
        X, V = np.meshgrid(*axes, indexing="ij")
        z = np.stack([X, V], axis=-1)
        expected = box.evaluate(field.times[0], z)
        np.testing.assert_allclose(values[0], expected, atol=1e-9)

    def test_physical_grid_volume(self, packet, small_quad):
        field = build_source_field(packet, small_quad)
        axes, volume = physical_grid(field, small_quad)
        assert len(axes) == 2
        assert volume == pytest.approx(np.prod([a[1] - a[0] for a in axes]))
        assert axes[0][0] == pytest.approx(-small_quad.phys_extent)

    def test_lp_norm(self):
        u = np.ones((2, 3))
        assert lp_norm(u, 2.0, 0.5, np.array([1.0, 1.0])) == pytest.approx(math.sqrt(3.0))
        assert lp_norm(u, 1.0, 0.5) == pytest.approx(3.0)

    def test_lp_norm_rejects_small_p(self):
        with pytest.raises(ValidationError):
            lp_norm(np.ones(3), 0.5, 1.0)


class TestGenerator:
    @pytest.mark.parametrize("alpha", [1.0, 1.5])
    def test_plane_wave_eigenfunction(self, alpha):
        path = make_path(alpha)
        phi = GaussianWave(dim=1, wavevector=[0.0, 0.7])
        value = apply_generator(path, phi, 0.0, 0.3, 0.2)
        psi = 2.0 * stable_constant(alpha) * 0.7**alpha
        assert value == pytest.approx(-psi * math.cos(0.7 * 0.2), rel=1e-6)

    def test_gaussian_in_v_against_fourier(self, iso_path):
        phi = GaussianWave(dim=1, widths=[math.inf, 1.0])
        v = 0.4
        value = apply_generator(iso_path, phi, 0.0, 0.0, v)
        # inverse transform of -2 pi |eta| sqrt(2 pi) exp(-eta^2 / 2)
        integral, _ = integrate.quad(
            lambda e: e * math.exp(-0.5 * e * e) * math.cos(e * v), 0.0, np.inf, epsabs=1e-13
        )
        expected = -2.0 * math.sqrt(2.0 * math.pi) * integral
        assert value == pytest.approx(expected, rel=1e-5)

    def test_transport_term(self, iso_path):
        # phi depends on x only, so the jump part vanishes
        phi = GaussianWave(dim=1, widths=[1.0, math.inf])
        x, v = 0.3, 1.7
        expected = v * float(phi.gradient_x(np.array([x, v]))[0])
        assert apply_generator(iso_path, phi, 0.0, x, v) == pytest.approx(expected, abs=1e-12)

    def test_generator_symbol(self, iso_path):
        # -2 pi |eta| g^ - U xi d_eta g^ with U = 1
        k = np.array([[0.5, -2.0], [0.0, 1.0]])
        ghat = np.array([1.0, 2.0])
        grad = np.array([[0.3], [5.0]])
        value = generator_hat(iso_path, 0.0, k, ghat, grad)
        np.testing.assert_allclose(value, [-4.0 * math.pi - 0.15, -4.0 * math.pi], rtol=1e-8)
