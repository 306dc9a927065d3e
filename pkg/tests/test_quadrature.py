"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)
"""

"""
Test suite for the shared quadrature rules.

Sphere rules are checked against closed-form monomial moments up to the
degree they integrate exactly.
"""

import math

import numpy as np
import pytest
from scipy import special

from kinetic_hypo.core.quadrature import (
    circle_rule,
    gauss_jacobi_unit,
    gauss_laguerre_half_line,
    orthonormal_complement,
    sphere_area,
    sphere_rule,
)


def _sphere_monomial(a: int, b: int, c: int) -> float:
    """int_{S^2} x^a y^b z^c for even exponents."""
    g = special.gamma
    return 2.0 * g((a + 1) / 2) * g((b + 1) / 2) * g((c + 1) / 2) / g((a + b + c + 3) / 2)


class TestSphereRule:
    def test_default_d3_size(self):
        nodes, weights = sphere_rule(3)
        assert nodes.shape == (300, 3)
        np.testing.assert_allclose(np.linalg.norm(nodes, axis=1), 1.0, rtol=1e-14)
        assert np.all(weights > 0)

    @pytest.mark.parametrize(
        "exponents", [(0, 0, 0), (2, 0, 0), (0, 0, 18), (10, 8, 0), (4, 6, 8), (2, 2, 14)]
    )
    def test_d3_exact_up_to_degree_19(self, exponents):
        nodes, weights = sphere_rule(3)
        a, b, c = exponents
        value = np.sum(weights * nodes[:, 0] ** a * nodes[:, 1] ** b * nodes[:, 2] ** c)
        assert value == pytest.approx(_sphere_monomial(a, b, c), rel=1e-12)

    def test_d3_odd_moments_vanish(self):
        nodes, weights = sphere_rule(3)
        x, y, z = nodes.T
        for f in (x, y * z**2, x**3 * y**2, z**5):
            assert abs(np.sum(weights * f)) < 1e-12

    def test_d2_is_circle_rule(self):
        nodes, weights = sphere_rule(2, n_2d=64)
        ref_nodes, _ = circle_rule(64)
        np.testing.assert_array_equal(nodes, ref_nodes)
        assert np.sum(weights * nodes[:, 0] ** 2) == pytest.approx(math.pi, rel=1e-13)

    def test_d1_counting_measure(self):
        nodes, weights = sphere_rule(1)
        np.testing.assert_array_equal(nodes[:, 0], [1.0, -1.0])
        assert weights.sum() == pytest.approx(sphere_area(1))

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_total_weight_is_area(self, dim):
        _, weights = sphere_rule(dim)
        assert weights.sum() == pytest.approx(sphere_area(dim), rel=1e-13)

    def test_unsupported_dimension(self):
        with pytest.raises(ValueError):
            sphere_rule(4)


class TestLineRules:
    def test_laguerre_exponential(self):
        tau, w = gauss_laguerre_half_line(12, 2.0)
        assert np.all(tau > 0)
        assert np.sum(w * np.exp(-tau / 2.0)) == pytest.approx(2.0, rel=1e-12)

    def test_jacobi_absorbs_power(self):
        r, w = gauss_jacobi_unit(8, 1.5)
        assert np.all((r > 0) & (r < 1))
        assert np.sum(w * r**2) == pytest.approx(1.0 / 4.5, rel=1e-12)


@pytest.mark.parametrize(
    "direction", [np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.6, 0.8]), np.array([0.6, -0.8])]
)
def test_orthonormal_complement(direction):
    basis = orthonormal_complement(direction)
    d = direction.shape[0]
    assert basis.shape == (d - 1, d)
    np.testing.assert_allclose(basis @ direction, 0.0, atol=1e-14)
    np.testing.assert_allclose(basis @ basis.T, np.eye(d - 1), atol=1e-14)
