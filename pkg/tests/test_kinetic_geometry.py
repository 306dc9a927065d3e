"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)
"""

"""
Test suite for the kinetic quasi-metric, kinetic balls and the ball-based
maximal, sharp and BMO statistics on lattice data.
"""

import math

import numpy as np
import pytest

from conftest import make_path
from kinetic_hypo.config.settings import ACCEPTANCE_THRESHOLDS
from kinetic_hypo.core.exceptions import ValidationError
from kinetic_hypo.core.kinetic_geometry import (
    KineticBall,
    KineticLattice,
    KineticPoint,
    ball_average,
    ball_contains,
    ball_quadrature,
    ball_volume_fit,
    bmo_seminorm,
    default_radii,
    engulf_check,
    engulfing_constant,
    fit_quasi_triangle_constant,
    geometry_summary,
    lattice_from_field,
    lattice_points,
    maximal_function,
    metric_ball_constant,
    metric_ball_sandwich,
    quasi_metric,
    sharp_function,
)


def _point(t, x, v):
    return KineticPoint(t, np.atleast_1d(x), np.atleast_1d(v))


def _lattice(path, values=None, n=17):
    times = np.linspace(-1.0, 1.0, n)
    axis = np.linspace(-2.0, 2.0, n)
    shape = (n, n, n)
    values = np.ones(shape) if values is None else values
    return KineticLattice(
        path=path,
        times=times,
        time_weights=np.full(n, times[1] - times[0]),
        x_axes=(axis,),
        v_axes=(axis,),
        values=values,
    )


class TestPointsAndBalls:
    def test_point_shapes(self):
        with pytest.raises(ValidationError):
            KineticPoint(0.0, np.zeros(2), np.zeros(1))
        with pytest.raises(ValidationError):
            KineticPoint(math.nan, np.zeros(1), np.zeros(1))

    def test_half_widths(self, iso_path):
        ball = KineticBall(_point(0.0, 0.0, 0.0), 2.0, iso_path)
        assert ball.half_widths == pytest.approx((2.0, 4.0, 2.0))
        assert ball.dilated(0.5).radius == 1.0

    def test_ball_validation(self, iso_path):
        with pytest.raises(ValidationError):
            KineticBall(_point(0.0, 0.0, 0.0), 0.0, iso_path)
        with pytest.raises(ValidationError):
            KineticBall(KineticPoint(0.0, np.zeros(2), np.zeros(2)), 1.0, iso_path)

    def test_sheared_membership(self, iso_path):
        ball = KineticBall(_point(0.0, 0.0, 1.0), 1.0, iso_path)
        assert ball_contains(ball, _point(0.5, 0.5, 1.2))
        # the unsheared x-center would put this point well inside
        assert not ball_contains(ball, _point(0.9, -0.5, 1.0))

    def test_ball_is_open(self, iso_path):
        ball = KineticBall(_point(0.0, 0.0, 0.0), 1.0, iso_path)
        assert not ball_contains(ball, _point(0.0, 0.0, 1.0))
        assert not ball_contains(ball, _point(1.0, 0.0, 0.0))


class TestQuasiMetric:
    """The kinetic distance rho."""

    def test_worked_example(self, iso_path):
        assert quasi_metric(iso_path, _point(0.0, 0.0, 0.0), _point(1.0, 0.0, 1.0)) == pytest.approx(3.0)

    def test_symmetric(self, two_piece_path):
        z0, z1 = _point(0.2, 0.4, -0.3), _point(1.6, -0.5, 0.8)
        assert quasi_metric(two_piece_path, z0, z1) == pytest.approx(
            quasi_metric(two_piece_path, z1, z0), rel=1e-14
        )

    def test_zero_on_diagonal(self, two_piece_path):
        z = _point(0.7, 1.0, -2.0)
        assert quasi_metric(two_piece_path, z, z) == 0.0

    def test_free_transport_invariance(self, iso_path):
        # moving along a free-transport line only changes the time term
        z0 = _point(0.0, 0.3, 0.5)
        z1 = _point(0.4, 0.3 + 0.4 * 0.5, 0.5)
        assert quasi_metric(iso_path, z0, z1) == pytest.approx(0.4)

    def test_quasi_triangle_constant(self, iso_path):
        c0 = fit_quasi_triangle_constant(iso_path, 4000, seed=1)
        assert 0.0 < c0 < math.inf
        assert c0 == fit_quasi_triangle_constant(iso_path, 4000, seed=1)


class TestRandomizedInclusions:
    def test_constants(self, iso_path, two_piece_path):
        assert engulfing_constant(iso_path) == pytest.approx(3.0)
        assert engulfing_constant(two_piece_path) == pytest.approx(math.sqrt(11.0))
        assert metric_ball_constant(iso_path) == pytest.approx(5.0)
        assert metric_ball_constant(make_path(alpha=1.5)) == pytest.approx(5.0**1.5)

    @pytest.mark.parametrize("fixture", ["iso_path", "two_piece_path"])
    def test_engulfing(self, fixture, request):
        path = request.getfixturevalue(fixture)
        assert engulf_check(path, 2000, (0.1, 2.0), seed=3) == 0

    def test_engulfing_control_fails(self, iso_path):
        assert engulf_check(iso_path, 2000, (0.1, 2.0), seed=3, c1=1.01) > 0

    def test_engulf_arguments(self, iso_path):
        with pytest.raises(ValidationError):
            engulf_check(iso_path, 0, (0.1, 2.0), seed=0)
        with pytest.raises(ValidationError):
            engulf_check(iso_path, 10, (2.0, 0.1), seed=0)

    def test_metric_ball_sandwich(self, two_piece_path):
        result = metric_ball_sandwich(two_piece_path, 1000, seed=5)
        assert result["inner_violations"] == 0
        assert result["outer_violations"] == 0
        assert result["inner_samples"] > 0

    @pytest.mark.slow
    def test_summary(self, iso_path):
        summary = geometry_summary(iso_path, 2000, 2000, seed=2)
        assert summary["engulf_violations"] == 0
        assert summary["engulf_control_violations"] > 0
        assert summary["quasi_triangle_c0"] > 0.0


class TestBallQuadrature:
    def test_volume(self, iso_path):
        ball = KineticBall(_point(0.0, 0.0, 0.5), 0.8, iso_path)
        _, volume = ball_quadrature(ball, lambda t, x, v: np.ones_like(t))
        assert volume == pytest.approx(8.0 * 0.8**4, rel=1e-12)

    def test_averages_of_coordinates(self, two_piece_path):
        ball = KineticBall(_point(0.9, 0.2, -0.4), 0.5, two_piece_path)
        assert ball_average(ball, lambda t, x, v: t) == pytest.approx(0.9, abs=1e-12)
        assert ball_average(ball, lambda t, x, v: v[:, 0]) == pytest.approx(-0.4, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_volume_exponent(self, alpha):
        path = make_path(alpha=alpha, dim=2)
        fit = ball_volume_fit(path, n_samples=2**12, seed=1)
        assert fit["expected"] == pytest.approx(alpha + 2.0 * (2.0 + alpha))
        assert fit["exponent"] == pytest.approx(fit["expected"], abs=ACCEPTANCE_THRESHOLDS["volume_exponent"])


class TestLatticeStatistics:
    """Maximal, sharp and BMO statistics over lattice balls."""

    def test_value_shape_checked(self, iso_path):
        with pytest.raises(ValidationError):
            _lattice(iso_path, values=np.ones((3, 3, 3)))

    def test_ball_mask_contains_center(self, iso_path):
        lattice = _lattice(iso_path)
        mask = lattice.ball_mask(_point(0.0, 0.0, 0.0), 0.3)
        assert mask.sum() >= 1
        assert not lattice.clipped(_point(0.0, 0.0, 0.0), 0.3)
        assert lattice.clipped(_point(0.0, 0.0, 0.0), 1.5)

    def test_default_radii(self, iso_path):
        radii = default_radii(_lattice(iso_path), n_radii=5)
        assert radii[0] == pytest.approx(0.25)
        assert radii[-1] == pytest.approx(2.0)

    def test_constant_data(self, iso_path):
        lattice = _lattice(iso_path).with_values(-3.0 * np.ones((17, 17, 17)))
        z = _point(0.0, 0.0, 0.0)
        assert maximal_function(lattice, z).value == pytest.approx(3.0)
        assert sharp_function(lattice, z).value == pytest.approx(0.0, abs=1e-12)

    def test_sharp_bounded_by_twice_maximal(self, two_piece_path):
        rng = np.random.default_rng(4)
        lattice = _lattice(two_piece_path, values=rng.standard_normal((17, 17, 17)))
        for z in lattice_points(lattice, 5, seed=1):
            assert sharp_function(lattice, z).value <= 2.0 * maximal_function(lattice, z).value + 1e-12

    def test_bmo_of_constant_is_zero(self, iso_path):
        lattice = _lattice(iso_path)
        points = lattice_points(lattice, 4, seed=2)
        result = bmo_seminorm(lattice, points, radii=[0.3, 0.5])
        assert result.value == pytest.approx(0.0, abs=1e-12)
        assert not result.clipped

    def test_bmo_independent_of_workers(self, iso_path):
        rng = np.random.default_rng(6)
        lattice = _lattice(iso_path, values=rng.standard_normal((17, 17, 17)))
        points = lattice_points(lattice, 6, seed=3)
        serial = bmo_seminorm(lattice, points, radii=[0.3, 0.5], workers=1)
        parallel = bmo_seminorm(lattice, points, radii=[0.3, 0.5], workers=3)
        assert serial.value == parallel.value

    def test_lattice_points_inside(self, iso_path):
        lattice = _lattice(iso_path)
        for z in lattice_points(lattice, 10, seed=0):
            assert -0.5 <= z.t <= 0.5
            assert -1.0 <= z.v[0] <= 1.0

    def test_lattice_from_field(self, iso_path):
        axis = np.linspace(-1.0, 1.0, 5)
        lattice = lattice_from_field(
            np.zeros((2, 5, 5)), np.array([0.25, 0.75]), np.array([0.5, 0.5]), [axis, axis], iso_path
        )
        assert lattice.dim == 1
        with pytest.raises(ValidationError):
            lattice_from_field(np.zeros((2, 5)), np.array([0.25, 0.75]), np.ones(2), [axis], iso_path)
