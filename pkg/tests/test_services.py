"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)
"""

"""
Test suite for the verification services: regularity ratios, interpolation
slack, sweeps and the statistical, symbol and geometry checks.
"""

import os
import shutil
import tempfile

import numpy as np
import pytest

from conftest import make_path, make_source
from kinetic_hypo.config.settings import ACCEPTANCE_THRESHOLDS
from kinetic_hypo.core.coefficients import CoefficientPath, time_rescale
from kinetic_hypo.core.exceptions import DegeneracyError, ValidationError
from kinetic_hypo.core.kinetic_geometry import KineticBall, KineticPoint
from kinetic_hypo.core.monte_carlo import sample_K
from kinetic_hypo.core.params import GeometrySpec
from kinetic_hypo.core.stable_levy import StableMeasure
from kinetic_hypo.services import RegularityService, SweepRunner, ValidationService
from kinetic_hypo.services.data_manager import DataManager
from kinetic_hypo.services.regularity_service import smoothing_orders


@pytest.fixture
def temp_output_dir():
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir, ignore_errors=True)


def _heavy_path():
    return CoefficientPath.constant(
        StableMeasure.isotropic(1.0, 1, 3.0),
        envelopes=(StableMeasure.isotropic(1.0, 1, 0.5), StableMeasure.isotropic(1.0, 1, 2.0)),
    )


class TestRegularityService:
    """Ratios of the resolvent solution to the source."""

    def test_smoothing_orders(self):
        assert smoothing_orders(1.0) == (0.25, 0.5)
        assert smoothing_orders(1.5) == pytest.approx((0.3, 0.75))

    def test_preconditions(self, iso_path):
        stages = RegularityService().check_preconditions(iso_path)
        assert [s.stage for s in stages] == ["sandwich", "nondegeneracy"]
        assert all(s.success for s in stages)

    def test_measure_outside_envelopes(self):
        with pytest.raises(DegeneracyError):
            RegularityService().check_preconditions(_heavy_path())

    def test_ratios_ignore_source_amplitude(self, iso_path, small_quad):
        service = RegularityService()
        base, _ = service.regularity_rows(iso_path, make_source(), 1.0, [2.0], small_quad, refine=False)
        louder, _ = service.regularity_rows(
            iso_path, make_source(amplitude=3.0), 1.0, [2.0], small_quad, refine=False
        )
        assert louder[0].norm_f == pytest.approx(3.0 * base[0].norm_f, rel=1e-12)
        assert louder[0].ratio_x == pytest.approx(base[0].ratio_x, rel=1e-10)
        assert louder[0].ratio_v == pytest.approx(base[0].ratio_v, rel=1e-10)

    def test_ratios_shrink_with_lambda(self, iso_path, small_quad):
        service = RegularityService()
        small, _ = service.regularity_rows(iso_path, make_source(), 0.1, [2.0], small_quad, refine=False)
        large, _ = service.regularity_rows(iso_path, make_source(), 100.0, [2.0], small_quad, refine=False)
        assert 0.0 < large[0].ratio_v < small[0].ratio_v

    def test_run_regularity_rows_and_progress(self, small_config):
        service = RegularityService()
        seen = []
        service.on_progress = lambda i, n, label: seen.append((i, n))
        report = service.run_regularity(small_config, refine=False, with_bouchut=False)
        assert [r.lam for r in report.rows] == list(small_config.lambdas)
        assert seen == [(1, 4), (2, 4), (3, 4), (4, 4)]
        names = [a.name for a in report.assertions]
        assert "lambda_spread[alpha=1,p=2,R_x]" in names
        assert "lambda_spread[alpha=1,p=2,R_v]" in names
        assert report.plancherel_error is None

    @pytest.mark.slow
    def test_interpolation_slack(self, small_config):
        service = RegularityService()
        instances = service.bouchut_check(small_config.with_updates(lambdas=(1.0, 10.0)), refine=False)
        assert len(instances) == 2
        for b in instances:
            assert b.slack >= ACCEPTANCE_THRESHOLDS["bouchut_floor"]
        assert service.bouchut_assertions(instances, refine=False)[0].passed

    @pytest.mark.slow
    def test_lp_rows(self, small_config):
        config = small_config.with_updates(lambdas=(1.0,), p_values=(2.0, 3.0))
        report = RegularityService().run_regularity(config, refine=False, with_bouchut=False)
        assert sorted(r.p for r in report.rows) == [2.0, 3.0]
        assert report.plancherel_error is not None
        assert report.plancherel_error <= ACCEPTANCE_THRESHOLDS["plancherel"]


class TestScalingIdentity:
    """Ball averages of the smoothed solution under the kinetic scaling map."""

    @pytest.mark.parametrize("which", ["x", "v"])
    def test_unit_radius_is_exact(self, small_config, which):
        rel = RegularityService().scaling_identity_check(small_config, 1.0, 0.0, 0.0, which)
        assert rel <= 1e-12

    @pytest.mark.slow
    @pytest.mark.parametrize("which", ["x", "v"])
    @pytest.mark.parametrize("level", [0.0, None])
    def test_radius_two(self, small_config, which, level):
        rel = RegularityService().scaling_identity_check(small_config, 2.0, 0.0, level, which)
        assert rel <= ACCEPTANCE_THRESHOLDS["scaling_identity"]

    @pytest.mark.slow
    def test_unscaled_lambda_breaks_identity(self, small_config):
        service = RegularityService()
        path, source, quad = small_config.path, small_config.source, small_config.quadrature
        origin = np.zeros(1)
        ball = KineticBall(KineticPoint(0.0, origin, origin), 2.0, path)
        lhs, _ = service.ball_deviation(path, source, 1.0, quad, ball, "v", 0.0, 8)
        scaled = time_rescale(path, 2.0, 0.0)
        unit = KineticBall(KineticPoint(0.0, origin, origin), 1.0, scaled)
        # lambda left at 1 instead of 1 * 2^alpha
        rhs, _ = service.ball_deviation(
            scaled, source.rescaled(2.0, 0.0, path.alpha), 1.0, quad, unit, "v", 0.0, 8
        )
        assert abs(lhs - rhs) / lhs > 1e-2

    @pytest.mark.slow
    def test_assertions(self, small_config):
        outcomes = RegularityService().scaling_assertions(small_config)
        assert [o.name for o in outcomes] == [
            "scaling_identity[r=1,P_x]",
            "scaling_identity[r=1,P_v]",
            "scaling_identity[r=2,P_x]",
            "scaling_identity[r=2,P_v]",
        ]
        assert all(o.passed for o in outcomes)


class TestSweepRunner:
    def test_failed_instance_is_recorded(self, small_config):
        runner = SweepRunner(refine=False)
        config = small_config.with_updates(path=_heavy_path())
        sweep = runner.run_sweep(config)
        assert sweep.total == 1
        assert not sweep.successful_results
        assert sweep.failed_results[0].error_message.startswith("DegeneracyError")

    @pytest.mark.slow
    def test_sweep_exports_one_table_per_alpha(self, small_config, temp_output_dir):
        runner = SweepRunner(refine=False)
        completed = []
        runner.on_instance_complete = completed.append
        sweep = runner.run_sweep(small_config.with_updates(lambdas=(1.0, 10.0)), alphas=(0.5, 1.5))
        assert [r.label for r in completed] == ["alpha=0.5", "alpha=1.5"]
        assert len(sweep.successful_results) == 2
        results = runner.export_results(sweep, temp_output_dir)
        assert all(r.success for r in results)
        assert sorted(os.listdir(temp_output_dir)) == ["sweep_alpha_0p5.csv", "sweep_alpha_1p5.csv"]


class TestValidationService:
    def test_symbol_table(self):
        report = ValidationService().run_symbol_table(alphas=(0.5, 1.0), dims=(1, 2))
        assert len(report.rows) == 4
        assert report.passed
        assert report.to_table()["headers"][0] == "alpha"

    def test_sample_ensemble_is_seeded(self, small_config):
        service = ValidationService()
        first = service.sample_ensemble(small_config)
        second = service.sample_ensemble(small_config)
        assert first.n_paths == small_config.monte_carlo.n_paths
        assert (first.s, first.t) == (0.0, 1.0)
        np.testing.assert_array_equal(first.X, second.X)

    def test_stored_ensemble_dimension_checked(self, small_config):
        ensemble = sample_K(make_path(dim=2), 0.0, 1.0, 100, 2, seed=1)
        with pytest.raises(ValidationError):
            ValidationService().check_ensemble(small_config, ensemble)

    @pytest.mark.slow
    def test_geometry_report(self, small_config):
        config = small_config.with_updates(
            geometry=GeometrySpec(n_trials=1000, n_triples=5000, n_radii=6, volume_samples=2**12)
        )
        report = ValidationService().run_geometry_check(config)
        checks = [row[0] for row in report.rows]
        assert "engulf" in checks and "engulf_control" in checks
        assert report.passed

    @pytest.mark.slow
    def test_collision_report(self, small_config):
        report = ValidationService().run_boltzmann_check(small_config)
        assert report.coarea["rel_error"] <= ACCEPTANCE_THRESHOLDS["coarea"]
        assert report.passed

    @pytest.mark.slow
    def test_mc_report(self, small_config, temp_output_dir):
        report = ValidationService().run_mc_validation(small_config)
        names = [a.name for a in report.assertions]
        assert names[0] == "char_function_excursions"
        assert "moment_v[q=0.4]" in names
        assert names[-1] == "kolmogorov_order"
        assert len(report.char_rows) == small_config.monte_carlo.n_probes
        result = DataManager().export_to_csv(report.to_table(), os.path.join(temp_output_dir, "mc.csv"))
        assert result.success
