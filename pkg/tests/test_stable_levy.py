"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)
"""

"""
Test suite for stable Levy measures and their symbols.

Checks the stability constants against their closed forms, the symbol values
of the reference measures, homogeneity, non-degeneracy and measure ordering.
"""

import math

import numpy as np
import pytest

from kinetic_hypo.core.exceptions import DomainError, ValidationError
from kinetic_hypo.core.stable_levy import (
    LevySymbol,
    StableMeasure,
    check_nondegenerate,
    difference_operator,
    eval_symbol,
    frac_constant,
    measure_leq,
    sphere_abs_moment,
    sphere_abs_moment_closed_form,
    stable_constant,
    stable_constant_closed_form,
    symbol_bounds,
    symbol_table,
)


class TestStabilityConstants:
    """Quadrature constants against their closed forms."""

    def test_c_alpha_at_one_is_pi(self):
        assert stable_constant(1.0) == pytest.approx(math.pi, rel=1e-8)

    @pytest.mark.parametrize("alpha", [0.5, 0.75, 1.0, 1.5])
    def test_c_alpha_matches_closed_form(self, alpha):
        assert stable_constant(alpha) == pytest.approx(stable_constant_closed_form(alpha), rel=1e-8)

    @pytest.mark.parametrize("dim", [2, 3])
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_sphere_moment_matches_closed_form(self, dim, alpha):
        assert sphere_abs_moment(dim, alpha) == pytest.approx(
            sphere_abs_moment_closed_form(dim, alpha), rel=1e-8
        )

    def test_frac_constant_d1_alpha1(self):
        assert frac_constant(1, 1.0) == pytest.approx(2.0 * math.pi, rel=1e-8)

    def test_frac_constant_positive_over_alpha_grid(self):
        values = [frac_constant(1, a) for a in np.linspace(0.1, 1.9, 19)]
        assert all(v > 0 and np.isfinite(v) for v in values)

    @pytest.mark.parametrize("alpha", [0.0, 2.0, -0.5, 2.5])
    def test_alpha_outside_domain_rejected(self, alpha):
        with pytest.raises(DomainError):
            stable_constant(alpha)

    def test_unsupported_dimension_rejected(self):
        with pytest.raises(DomainError):
            frac_constant(4, 1.0)


class TestStableMeasure:
    """Construction invariants of the spectral measure."""

    def test_missing_antipode_rejected(self):
        with pytest.raises(ValidationError):
            StableMeasure(alpha=1.0, dim=2, atoms=(((1.0, 0.0), 1.0),))

    def test_unequal_antipode_weights_rejected(self):
        with pytest.raises(ValidationError):
            StableMeasure(alpha=1.0, dim=1, atoms=(((1.0,), 1.0), ((-1.0,), 0.5)))

    def test_zero_mass_rejected(self):
        with pytest.raises(ValidationError):
            StableMeasure(alpha=1.0, dim=2)

    def test_non_unit_direction_rejected(self):
        with pytest.raises(ValidationError):
            StableMeasure(alpha=1.0, dim=1, atoms=(((2.0,), 1.0), ((-2.0,), 1.0)))

    def test_round_trip_through_dict(self):
        m = StableMeasure.axis_pairs(1.5, 2, [0.5, 1.0])
        again = StableMeasure.from_dict(m.to_dict())
        assert again.alpha == m.alpha
        assert again.atoms == m.atoms

    def test_total_mass(self):
        m = StableMeasure(alpha=1.0, dim=2, atoms=(((1.0, 0.0), 0.5), ((-1.0, 0.0), 0.5)), iso_weight=1.0)
        assert m.total_mass == pytest.approx(1.0 + 2.0 * math.pi)


class TestEvalSymbol:
    """Symbol values, symmetry and homogeneity."""

    def test_atom_pair_d1(self):
        m = StableMeasure(alpha=1.0, dim=1, atoms=(((1.0,), 0.5), ((-1.0,), 0.5)))
        assert eval_symbol(LevySymbol(m), [2.0]) == pytest.approx(2.0 * math.pi, rel=1e-8)

    def test_isotropic_d1_is_two_pi_abs_xi(self):
        sym = LevySymbol(StableMeasure.isotropic(1.0, 1))
        xi = np.linspace(-3.0, 3.0, 13)[:, None]
        np.testing.assert_allclose(eval_symbol(sym, xi), 2.0 * math.pi * np.abs(xi[:, 0]), rtol=1e-8)

    def test_zero_frequency(self):
        sym = LevySymbol(StableMeasure.isotropic(1.3, 3))
        assert eval_symbol(sym, np.zeros(3)) == 0.0

    def test_even_and_nonnegative(self):
        m = StableMeasure(
            alpha=0.7, dim=2, atoms=(((0.6, 0.8), 1.0), ((-0.6, -0.8), 1.0)), iso_weight=0.3
        )
        sym = LevySymbol(m, np.array([[1.0, 0.5], [0.0, 2.0]]))
        xi = np.random.default_rng(0).normal(size=(50, 2))
        values = eval_symbol(sym, xi)
        np.testing.assert_allclose(values, eval_symbol(sym, -xi), rtol=1e-14)
        assert np.all(values >= 0)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_alpha_homogeneity(self, alpha):
        sym = LevySymbol(StableMeasure.axis_pairs(alpha, 2, [1.0, 0.25]))
        rng = np.random.default_rng(1)
        xi = rng.normal(size=(1000, 2))
        t = rng.uniform(0.1, 10.0, size=1000)
        np.testing.assert_allclose(
            eval_symbol(sym, t[:, None] * xi), t**alpha * eval_symbol(sym, xi), rtol=1e-10
        )

    def test_sigma_enters_through_transpose(self):
        sigma = np.array([[2.0, 0.0], [0.0, 1.0]])
        sym = LevySymbol(StableMeasure.axis_pairs(1.0, 2, [1.0, 1.0]), sigma)
        plain = LevySymbol(StableMeasure.axis_pairs(1.0, 2, [1.0, 1.0]))
        xi = np.array([1.0, 1.0])
        assert eval_symbol(sym, xi) == pytest.approx(eval_symbol(plain, xi @ sigma))

    def test_non_finite_frequency_rejected(self):
        sym = LevySymbol(StableMeasure.isotropic(1.0, 1))
        with pytest.raises(ValidationError):
            eval_symbol(sym, [np.nan])

    def test_matrix_shape_checked(self):
        with pytest.raises(ValidationError):
            LevySymbol(StableMeasure.isotropic(1.0, 2), np.eye(3))

    def test_symbol_bounds_bracket_values(self):
        sym = LevySymbol(StableMeasure.axis_pairs(1.2, 2, [1.0, 0.5]))
        bounds = symbol_bounds(sym)
        xi = np.random.default_rng(2).normal(size=(200, 2))
        values = eval_symbol(sym, xi)
        norms = np.linalg.norm(xi, axis=1) ** 1.2
        assert np.all(values >= bounds["lower"] * norms)
        assert np.all(values <= bounds["upper"] * norms)
        assert 0 < bounds["kappa1"] <= 1.0 / bounds["upper"]


class TestNondegeneracy:
    """Directional mass minimum."""

    def test_axis_atoms_d2_degenerate(self):
        ok, kappa = check_nondegenerate(StableMeasure.axis_pairs(1.0, 2, [1.0, 0.0]))
        assert not ok
        assert kappa == pytest.approx(0.0, abs=1e-14)

    def test_isotropic_d2_rotation_invariant(self):
        m = StableMeasure.isotropic(1.0, 2)
        ok, kappa = check_nondegenerate(m)
        assert ok
        angles = np.linspace(0.0, np.pi, 7)
        mass = m.directional_mass(np.stack([np.cos(angles), np.sin(angles)], axis=1))
        np.testing.assert_allclose(mass, kappa, rtol=1e-12)

    def test_both_axes_d2_minimum_is_one(self):
        ok, kappa = check_nondegenerate(StableMeasure.axis_pairs(1.0, 2, [0.5, 0.5]))
        assert ok
        assert kappa == pytest.approx(1.0, rel=1e-12)

    def test_two_atom_lines_d3_degenerate(self):
        # mass vanishes on (0, 1, -1)/sqrt(2), normal to both atom lines
        s = 1.0 / math.sqrt(3.0)
        m = StableMeasure(
            alpha=1.0,
            dim=3,
            atoms=(
                ((s, s, s), 1.0),
                ((-s, -s, -s), 1.0),
                ((1.0, 0.0, 0.0), 1.0),
                ((-1.0, 0.0, 0.0), 1.0),
            ),
        )
        ok, kappa = check_nondegenerate(m)
        assert not ok
        assert kappa == pytest.approx(0.0, abs=1e-12)

    def test_single_atom_line_d3_degenerate(self):
        s = 1.0 / math.sqrt(2.0)
        m = StableMeasure(alpha=1.5, dim=3, atoms=(((0.0, s, s), 2.0), ((0.0, -s, -s), 2.0)))
        ok, _ = check_nondegenerate(m)
        assert not ok

    def test_isotropic_d3(self):
        ok, kappa = check_nondegenerate(StableMeasure.isotropic(1.0, 3, 0.5))
        assert ok
        assert kappa == pytest.approx(0.5 * sphere_abs_moment(3, 1.0), rel=1e-12)

    def test_isotropic_part_lifts_atoms_d3(self):
        m = StableMeasure(
            alpha=1.0, dim=3, atoms=(((1.0, 0.0, 0.0), 1.0), ((-1.0, 0.0, 0.0), 1.0)), iso_weight=0.1
        )
        ok, kappa = check_nondegenerate(m)
        assert ok
        assert kappa == pytest.approx(0.1 * sphere_abs_moment(3, 1.0), rel=1e-9)

    def test_small_grid_rejected(self):
        with pytest.raises(ValidationError):
            check_nondegenerate(StableMeasure.isotropic(1.0, 2), grid_size=16)


class TestMeasureOrdering:
    def test_reflexive(self):
        m = StableMeasure.axis_pairs(1.0, 2, [1.0, 2.0])
        assert measure_leq(m, m)

    def test_monotone_in_iso_weight(self):
        assert measure_leq(StableMeasure.isotropic(1.0, 2, 0.5), StableMeasure.isotropic(1.0, 2, 1.0))
        assert not measure_leq(StableMeasure.isotropic(1.0, 2, 1.0), StableMeasure.isotropic(1.0, 2, 0.5))

    def test_unmatched_atom(self):
        m1 = StableMeasure.axis_pairs(1.0, 2, [1.0, 0.0])
        m2 = StableMeasure.axis_pairs(1.0, 2, [0.0, 1.0])
        assert not measure_leq(m1, m2)

    def test_mismatched_alpha_rejected(self):
        with pytest.raises(ValidationError):
            measure_leq(StableMeasure.isotropic(1.0, 1), StableMeasure.isotropic(1.5, 1))


class TestDifferences:
    def test_second_difference_of_quadratic(self):
        f = lambda z: z**2
        np.testing.assert_allclose(difference_operator(f, np.array(1.0), np.array(0.5)), 0.5)

    def test_first_difference(self):
        f = lambda z: 3.0 * z
        np.testing.assert_allclose(difference_operator(f, np.array(1.0), np.array(0.5), 1), 1.5)

    def test_bad_order(self):
        with pytest.raises(ValidationError):
            difference_operator(np.sin, np.array(0.0), np.array(1.0), 3)


def test_symbol_table_rows():
    rows = symbol_table([0.5, 1.0], [1, 2])
    assert len(rows) == 4
    for row in rows:
        assert row["c_alpha"] == pytest.approx(row["c_alpha_closed"], rel=1e-8)
        assert row["kappa_low"] > 0
