"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)
"""

"""
Test suite for stable variates, path ensembles and the statistical checks of
their law.

Empirical characteristic functions are compared against closed forms with
tolerances of a few standard errors; all draws are seeded.
"""

import math

import numpy as np
import pytest

from kinetic_hypo.core.coefficients import CoefficientPath
from kinetic_hypo.core.exceptions import ValidationError
from kinetic_hypo.core.kinetic_semigroup import char_function
from kinetic_hypo.core.monte_carlo import (
    SampleEnsemble,
    block_rng,
    char_probes,
    mc_char,
    moment_scaling_fit,
    moments_of_flow,
    sample_K,
    sample_positive_stable,
    sample_stable_increment,
    sample_symmetric_stable,
    scaling_law_check,
    step_mesh,
    two_sample_char_check,
)
from kinetic_hypo.core.stable_levy import StableMeasure, sphere_abs_moment, stable_constant

N = 200_000
TOL = 5.0 / math.sqrt(N)


class TestVariates:
    """Calibration of the elementary stable draws."""

    @pytest.mark.parametrize("alpha", [0.7, 1.0, 1.5])
    def test_symmetric_stable(self, alpha):
        draws = sample_symmetric_stable(alpha, N, block_rng(1, 0))
        for u in (0.5, 1.0, 2.0):
            assert np.mean(np.cos(u * draws)) == pytest.approx(math.exp(-(u**alpha)), abs=TOL)

    def test_positive_stable_laplace(self):
        a = 0.75
        draws = sample_positive_stable(a, N, block_rng(2, 0))
        assert np.all(draws > 0)
        for lam in (0.5, 1.0, 2.0):
            assert np.mean(np.exp(-lam * draws)) == pytest.approx(math.exp(-(lam**a)), abs=TOL)

    def test_positive_stable_index_checked(self):
        with pytest.raises(ValidationError):
            sample_positive_stable(1.0, 10, block_rng(0, 0))

    def test_isotropic_increment_d1(self):
        dt = 0.1
        jumps = sample_stable_increment(StableMeasure.isotropic(1.0, 1), dt, block_rng(3, 0), N)
        assert jumps.shape == (N, 1)
        assert np.mean(np.cos(jumps[:, 0])) == pytest.approx(math.exp(-dt * 2.0 * math.pi), abs=TOL)

    def test_isotropic_increment_d2(self):
        alpha, dt = 1.5, 0.2
        m = StableMeasure.isotropic(alpha, 2)
        jumps = sample_stable_increment(m, dt, block_rng(4, 0), N)
        xi = np.array([0.6, -0.8])
        psi = stable_constant(alpha) * sphere_abs_moment(2, alpha)
        assert np.mean(np.cos(jumps @ xi)) == pytest.approx(math.exp(-dt * psi), abs=TOL)

    def test_atom_increment_d2(self):
        m = StableMeasure.axis_pairs(1.2, 2, [1.0, 0.25])
        dt = 0.3
        jumps = sample_stable_increment(m, dt, block_rng(5, 0), N)
        xi = np.array([0.5, 1.0])
        c = stable_constant(1.2)
        psi = c * (2.0 * 1.0 * 0.5**1.2 + 2.0 * 0.25 * 1.0**1.2)
        assert np.mean(np.cos(jumps @ xi)) == pytest.approx(math.exp(-dt * psi), abs=TOL)

    def test_streams_are_keyed(self):
        a = block_rng(7, 0).standard_normal(5)
        assert np.array_equal(a, block_rng(7, 0).standard_normal(5))
        assert not np.array_equal(a, block_rng(7, 1).standard_normal(5))
        assert not np.array_equal(a, block_rng(8, 0).standard_normal(5))


class TestEnsembles:
    def test_step_mesh_contains_breakpoints(self, two_piece_path):
        mesh = step_mesh(two_piece_path, 0.0, 2.0, 4)
        assert 1.0 in mesh
        with pytest.raises(ValidationError):
            step_mesh(two_piece_path, 0.3, 1.6, 4)

    def test_same_interval_gives_zeros(self, iso_path):
        ens = sample_K(iso_path, 0.5, 0.5, 10, 4, seed=1)
        assert not np.any(ens.X) and not np.any(ens.V)

    def test_independent_of_workers(self, iso_path):
        serial = sample_K(iso_path, 0.0, 1.0, 3000, 4, seed=11, block_size=1000, workers=1)
        parallel = sample_K(iso_path, 0.0, 1.0, 3000, 4, seed=11, block_size=1000, workers=3)
        np.testing.assert_array_equal(serial.X, parallel.X)
        np.testing.assert_array_equal(serial.V, parallel.V)

    def test_array_round_trip(self, iso_path):
        ens = sample_K(iso_path, 0.0, 1.0, 50, 2, seed=3)
        again = SampleEnsemble.from_array(ens.to_array(), ens.header())
        np.testing.assert_array_equal(again.X, ens.X)
        assert again.header() == ens.header()

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            SampleEnsemble(np.zeros((3, 1)), np.zeros((4, 1)), 0.0, 1.0, 1, 0)

    def test_stderr(self, iso_path):
        ens = sample_K(iso_path, 0.0, 1.0, 800, 2, seed=3)
        assert ens.stderr == pytest.approx(1.0 / 40.0)

    def test_mc_char_is_even(self, iso_path):
        ens = sample_K(iso_path, 0.0, 1.0, 500, 2, seed=4)
        probes = char_probes(1, 5, seed=0)
        a = mc_char(ens, probes[:, :1], probes[:, 1:])
        b = mc_char(ens, -probes[:, :1], -probes[:, 1:])
        np.testing.assert_allclose(a, b, rtol=1e-12)
        assert np.all(np.abs(a) <= 1.0)

    @pytest.mark.parametrize("fixture", ["iso_path", "two_piece_path"])
    def test_matches_characteristic_function(self, fixture, request):
        path = request.getfixturevalue(fixture)
        n = 40_000
        ens = sample_K(path, 0.5, 1.5, n, 16, seed=21)
        probes = char_probes(1, 12, seed=2, radius=1.0)
        xi, eta = probes[:, :1], probes[:, 1:]
        exact = char_function(path, 0.5, 1.5, xi, eta)
        assert np.max(np.abs(mc_char(ens, xi, eta) - exact)) < 5.0 * ens.stderr + 2e-2


class TestLawChecks:
    def test_probe_box(self):
        probes = char_probes(2, 30, seed=9, radius=1.5)
        assert probes.shape == (30, 4)
        assert np.all(np.abs(probes) <= 1.5)
        np.testing.assert_array_equal(probes, char_probes(2, 30, seed=9, radius=1.5))

    def test_moment_exponents(self, iso_path):
        q = 0.4
        fits = moments_of_flow(iso_path, q, [0.01, 0.1, 1.0], 20_000, seed=5, n_steps=4)
        assert fits["v"][0] == pytest.approx(q / 1.0, abs=0.05)
        assert fits["x"][0] == pytest.approx(q * 2.0, abs=0.05)
        assert moment_scaling_fit(iso_path, q, [0.01, 0.1, 1.0], 20_000, seed=5, n_steps=4)[0] == (
            fits["v"][0]
        )

    def test_moment_order_checked(self, iso_path):
        with pytest.raises(ValidationError):
            moments_of_flow(iso_path, 1.0, [0.01, 1.0], 100, seed=0)

    def test_horizon_span_checked(self, iso_path):
        with pytest.raises(ValidationError):
            moments_of_flow(iso_path, 0.5, [0.1, 1.0], 100, seed=0)

    def test_scaling_law_and_negative_control(self, iso_path):
        n = 20_000
        probes = np.array([[0.1, 0.0], [0.05, 0.05], [0.0, 0.2], [-0.08, 0.1]])
        good = scaling_law_check(iso_path, 2.0, 0.0, probes, n, seed=31, n_steps=8)
        bad = scaling_law_check(iso_path, 2.0, 0.0, probes, n, seed=31, n_steps=8, x_exponent=1.0)
        assert good < 6.0 / math.sqrt(n)
        assert bad > 10.0 / math.sqrt(n)

    def test_two_sample_check(self, iso_path):
        probes = char_probes(1, 10, seed=1, radius=1.0)
        first = sample_K(iso_path, 0.0, 1.0, 20_000, 4, seed=41)
        second = sample_K(iso_path, 0.0, 1.0, 20_000, 4, seed=42)
        heavier = sample_K(
            CoefficientPath.constant(StableMeasure.isotropic(1.0, 1, 4.0)),
            0.0, 1.0, 20_000, 4, seed=43,
        )
        assert two_sample_char_check(first, second, probes)["passed"] == 1.0
        assert two_sample_char_check(first, heavier, probes)["passed"] == 0.0
