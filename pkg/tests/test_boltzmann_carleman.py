"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)
"""

"""
Test suite for the collision operator in its spherical and Carleman forms.

The co-area identity has a closed form for the Gaussian integrand used here;
the two collision representations and the split are checked against each
other at a few velocities.
"""

import math

import numpy as np
import pytest

from kinetic_hypo.config.settings import ACCEPTANCE_THRESHOLDS, NUMERICAL_TOLERANCES
from kinetic_hypo.core.boltzmann_carleman import (
    CollisionKernelSpec,
    GaussianPolynomial,
    coarea_identity_check,
    collision_probe_rows,
    collision_Q_carleman,
    collision_Q_spherical,
    collision_split,
    gaussian_polynomial,
    kernel_K,
    kernel_symmetry_probe,
    mass_conservation_probe,
    probe_function_suite,
)
from kinetic_hypo.core.exceptions import DomainError, ValidationError
from kinetic_hypo.core.params import QuadratureSpec


def _gaussian_weighted(x, om):
    return np.exp(-np.sum(x**2, axis=-1)) * (1.0 + om[..., 0] ** 2)


@pytest.fixture
def kernel():
    return CollisionKernelSpec(gamma=0.0, alpha=0.5, dim=2)


class TestCollisionKernelSpec:
    def test_carleman_power(self, kernel):
        assert kernel.carleman_power == pytest.approx(1.5)
        assert CollisionKernelSpec(gamma=-0.5, alpha=1.2).carleman_power == pytest.approx(1.7)

    def test_alpha_range(self):
        with pytest.raises(DomainError):
            CollisionKernelSpec(gamma=0.0, alpha=2.5)

    def test_gamma_plus_alpha_range(self):
        with pytest.raises(DomainError):
            CollisionKernelSpec(gamma=0.7, alpha=0.5)

    def test_dimension(self):
        with pytest.raises(ValidationError):
            CollisionKernelSpec(gamma=0.0, alpha=0.5, dim=4)

    def test_angular_form(self):
        with pytest.raises(ValidationError):
            CollisionKernelSpec(gamma=0.0, alpha=0.5, b_form="cutoff")

    def test_export(self, kernel):
        assert kernel.to_export_dict() == {"gamma": 0.0, "alpha": 0.5, "dim": 2, "weight": 1.0}


class TestGaussianPolynomial:
    """Test-function family."""

    def test_value_at_center(self):
        f = gaussian_polynomial(2, center=[0.3, -0.1], constant=2.5, linear=[1.0, 1.0])
        assert f(np.array([0.3, -0.1])) == pytest.approx(2.5)

    def test_envelope(self):
        f = GaussianPolynomial(dim=2, width=0.5)
        assert f(np.array([0.5, 0.0])) == pytest.approx(math.exp(-0.5))
        assert f.reach(np.zeros(2)) == pytest.approx(4.5)

    def test_polynomial_not_localized(self):
        f = GaussianPolynomial(dim=2, width=math.inf, quadratic=1.0)
        assert not f.localized
        assert f.reach(np.zeros(2)) == math.inf
        assert f(np.array([3.0, 4.0])) == pytest.approx(26.0)

    def test_scaled(self):
        f = GaussianPolynomial(dim=2, linear=[0.2, 0.1], quadratic=0.3)
        v = np.array([0.4, -0.7])
        assert f.scaled(-3.0)(v) == pytest.approx(-3.0 * f(v))

    def test_bad_shapes(self):
        with pytest.raises(ValidationError):
            GaussianPolynomial(dim=2, center=[0.0, 0.0, 0.0])
        with pytest.raises(ValidationError):
            GaussianPolynomial(dim=2, width=0.0)

    def test_suite_is_deterministic(self):
        first = probe_function_suite(3, 4, seed=7)
        second = probe_function_suite(3, 4, seed=7)
        assert len(first) == 4
        np.testing.assert_array_equal(first[0].center, np.zeros(3))
        assert first[0].width == 1.0
        assert first[0].quadratic > 0.0
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.center, b.center)
            assert a.quadratic == b.quadratic


class TestCoarea:
    def test_planar_identity(self):
        lhs, rhs, rel = coarea_identity_check(_gaussian_weighted, QuadratureSpec(), dim=2)
        assert lhs == pytest.approx(3.0 * math.pi**2, rel=1e-8)
        assert rel <= ACCEPTANCE_THRESHOLDS["coarea"]
        assert rhs == pytest.approx(lhs, rel=ACCEPTANCE_THRESHOLDS["coarea"])

    def test_symmetric_variant(self):
        _, _, rel = coarea_identity_check(
            _gaussian_weighted, QuadratureSpec(), dim=2, symmetric=True
        )
        assert rel <= ACCEPTANCE_THRESHOLDS["coarea"]

    @pytest.mark.slow
    def test_spatial_identity(self):
        lhs, _, rel = coarea_identity_check(_gaussian_weighted, QuadratureSpec(), dim=3)
        assert lhs == pytest.approx(16.0 * math.pi**2.5 / 3.0, rel=1e-6)
        assert rel <= ACCEPTANCE_THRESHOLDS["coarea"]


class TestKernelK:
    """The split kernel K_f(v, w)."""

    def test_zero_w_rejected(self, kernel):
        with pytest.raises(ValidationError):
            kernel_K(GaussianPolynomial(dim=2), kernel, np.zeros(2), np.zeros(2))

    def test_needs_localized_f(self, kernel):
        plane = GaussianPolynomial(dim=2, width=math.inf)
        with pytest.raises(ValidationError):
            kernel_K(plane, kernel, np.zeros(2), np.array([1.0, 0.0]))

    def test_positive_for_positive_f(self, kernel):
        value = kernel_K(GaussianPolynomial(dim=2), kernel, np.zeros(2), np.array([0.3, 0.4]))
        assert value > 0.0

    def test_even_in_w(self, kernel):
        f = probe_function_suite(2, 3, seed=1)[2]
        probes = np.array([[0.5, 0.1], [-0.2, 0.7], [0.9, -0.9]])
        asym = kernel_symmetry_probe(f, kernel, np.array([0.2, -0.3]), probes)
        assert asym <= NUMERICAL_TOLERANCES["kernel_symmetry"]

    def test_linear_in_weight(self, kernel):
        heavy = CollisionKernelSpec(gamma=0.0, alpha=0.5, dim=2, weight=3.0)
        f, v, w = GaussianPolynomial(dim=2), np.zeros(2), np.array([0.5, 0.0])
        assert kernel_K(f, heavy, v, w) == pytest.approx(3.0 * kernel_K(f, kernel, v, w), rel=1e-12)


class TestCollision:
    """Carleman against spherical form, and the split Q = Q1 + Q2."""

    @pytest.mark.parametrize("v", [[0.0, 0.0], [0.4, -0.3]])
    def test_carleman_matches_spherical(self, kernel, v):
        f = GaussianPolynomial(dim=2, quadratic=0.25)
        carl = collision_Q_carleman(f, f, kernel, v)
        sph = collision_Q_spherical(f, f, kernel, v)
        assert abs(carl - sph) <= ACCEPTANCE_THRESHOLDS["carleman_vs_spherical"] * abs(carl)

    def test_equilibrium_is_annihilated(self, kernel):
        maxwellian = GaussianPolynomial(dim=2)
        perturbed = GaussianPolynomial(dim=2, quadratic=0.25)
        v = np.array([0.2, 0.1])
        # the spherical bracket vanishes pointwise for a Gaussian
        assert abs(collision_Q_spherical(maxwellian, maxwellian, kernel, v, refine=False)) < 1e-10
        reference = abs(collision_Q_carleman(perturbed, perturbed, kernel, v))
        assert abs(collision_Q_carleman(maxwellian, maxwellian, kernel, v, refine=False)) < 1e-2 * reference

    def test_split_sums_to_carleman(self, kernel):
        f = probe_function_suite(2, 2, seed=3)[1]
        v = np.array([0.3, 0.2])
        q1, q2, hf, kf = collision_split(f, f, kernel, v)
        carl = collision_Q_carleman(f, f, kernel, v)
        assert q1 + q2 == pytest.approx(carl, rel=NUMERICAL_TOLERANCES["split_sum"])
        assert q1 == pytest.approx(f(v) * hf, rel=1e-12)
        w = np.array([0.5, 0.5])
        assert kf(w) == pytest.approx(kernel_K(f, kernel, v, w), rel=1e-12)

    def test_bilinear_in_g(self, kernel):
        f = GaussianPolynomial(dim=2)
        g = GaussianPolynomial(dim=2, center=[0.2, 0.0], linear=[0.3, -0.1])
        v = np.array([0.1, 0.1])
        base = collision_Q_carleman(f, g, kernel, v)
        assert collision_Q_carleman(f, g.scaled(2.0), kernel, v) == pytest.approx(2.0 * base, rel=1e-10)
        assert collision_Q_carleman(f.scaled(-0.5), g, kernel, v) == pytest.approx(-0.5 * base, rel=1e-10)

    def test_zero_function(self, kernel):
        zero = GaussianPolynomial(dim=2, constant=0.0)
        assert collision_Q_carleman(zero, GaussianPolynomial(dim=2), kernel, [0.1, 0.0]) == 0.0

    def test_probe_rows(self, kernel):
        functions = probe_function_suite(2, 2, seed=0)
        rows = collision_probe_rows(kernel, functions, np.array([[0.1, -0.2]]))
        assert [(r["function"], r["probe"]) for r in rows] == [(0, 0), (1, 0)]
        for row in rows:
            assert row["rel_error_spherical"] <= ACCEPTANCE_THRESHOLDS["carleman_vs_spherical"]
            assert row["rel_error_split"] <= NUMERICAL_TOLERANCES["split_sum"]

    @pytest.mark.slow
    def test_mass_is_conserved(self, kernel):
        mass = mass_conservation_probe(GaussianPolynomial(dim=2, quadratic=0.25), kernel, n_v=6)
        assert mass["l1"] > 0.0
        assert abs(mass["integral"]) < 5e-2 * mass["l1"]
