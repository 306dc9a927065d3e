"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Validation pipelines behind the ``mc-validate``, ``boltzmann-check``,
``geometry-check`` and ``symbol`` subcommands.

Each pipeline returns a report whose assertions are re-derivable from the
emitted rows.
"""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from kinetic_hypo.config.logging import get_logger, log_performance
from kinetic_hypo.config.settings import ACCEPTANCE_THRESHOLDS, NUMERICAL_TOLERANCES
from kinetic_hypo.core.boltzmann_carleman import (
    CollisionKernelSpec,
    coarea_identity_check,
    collision_probe_rows,
    kernel_symmetry_probe,
    mass_conservation_probe,
    probe_function_suite,
)
from kinetic_hypo.core.coefficients import CoefficientPath
from kinetic_hypo.core.exceptions import ValidationError
from kinetic_hypo.core.kinetic_geometry import (
    ball_volume_fit,
    bmo_seminorm,
    default_radii,
    engulf_check,
    engulfing_constant,
    fit_quasi_triangle_constant,
    lattice_from_field,
    lattice_points,
    maximal_function,
    metric_ball_constant,
    metric_ball_sandwich,
    sharp_function,
)
from kinetic_hypo.core.kinetic_semigroup import (
    build_source_field,
    char_function,
    inverse_transform_grid,
    kolmogorov_convergence,
    physical_grid,
)
from kinetic_hypo.core.models import (
    AssertionOutcome,
    CollisionProbeRow,
    CollisionReport,
    GeometryReport,
    McValidationReport,
    SymbolReport,
    check_at_least,
    check_at_most,
)
from kinetic_hypo.core.monte_carlo import (
    SampleEnsemble,
    block_rng,
    char_probes,
    mc_char,
    moments_of_flow,
    sample_K,
    scaling_law_check,
    two_sample_char_check,
)
from kinetic_hypo.core.params import ExperimentConfig
from kinetic_hypo.core.stable_levy import symbol_table

logger = get_logger(__name__)


def _sampling_window(path: CoefficientPath) -> Tuple[float, float]:
    """[t_0, t_0 + 1]; interior breakpoints must fall on the Monte Carlo step mesh."""
    s = path.breakpoints[0]
    return s, s + 1.0


def _stencil_window(path: CoefficientPath) -> Tuple[float, float]:
    """(s, t) with s in the middle of the first coefficient piece and t = s + 1."""
    bp = path.breakpoints
    s = 0.5 * (bp[0] + bp[1]) if len(bp) > 1 else bp[0] + 0.5
    return s, s + 1.0


class ValidationService:
    """Statistical, collision, geometry and symbol checks."""

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers
        logger.info("ValidationService initialized")

    # =========================================================================
    # Monte Carlo
    # =========================================================================

    def run_mc_validation(self, config: ExperimentConfig) -> McValidationReport:
        """
        Empirical against analytic characteristic function, moment exponents,
        the scaling law with its wrong-exponent control, the step-doubling law
        check and the Kolmogorov convergence order.
        """
        path, mc = config.path, config.monte_carlo
        alpha, d = path.alpha, path.dim
        s, t = _sampling_window(path)
        probes = char_probes(d, mc.n_probes, config.seed)
        assertions: List[AssertionOutcome] = []

        with log_performance(logger, "characteristic function probes"):
            ensemble = sample_K(
                path, s, t, mc.n_paths, mc.n_steps, config.seed, mc.block_size, self.workers
            )
            analytic = char_function(path, s, t, probes[:, :d], probes[:, d:])
            empirical = mc_char(ensemble, probes[:, :d], probes[:, d:])
        stderr = ensemble.stderr
        z = np.abs(analytic - empirical) / stderr
        char_rows = [
            [
                j, probes[j, 0], probes[j, d],
                analytic[j].real, analytic[j].imag, empirical[j].real, empirical[j].imag,
                stderr, z[j],
            ]
            for j in range(len(probes))
        ]
        excursions = int(np.count_nonzero(z > ACCEPTANCE_THRESHOLDS["mc_sigmas"]))
        assertions.append(
            check_at_most(
                "char_function_excursions",
                excursions,
                ACCEPTANCE_THRESHOLDS["mc_excursions"],
                f"max_z={float(np.max(z)):.3f}",
            )
        )

        doubled = sample_K(
            path, s, t, mc.n_paths, 2 * mc.n_steps, config.seed + 1, mc.block_size, self.workers
        )
        law = two_sample_char_check(ensemble, doubled, probes)
        assertions.append(check_at_most("step_doubling_law", law["max_z"], law["critical"]))

        moment_rows = []
        # exact self-similarity only holds for a single coefficient piece
        q_values = mc.q_values if path.n_pieces == 1 else ()
        for q in q_values:
            if q >= alpha:
                logger.warning(f"Skipping moment order q={q}: needs q < alpha={alpha}")
                continue
            fit = moments_of_flow(
                path, q, mc.horizons, mc.n_paths, config.seed, mc.n_steps, s, self.workers
            )
            v_expected, x_expected = q / alpha, q * (1.0 + 1.0 / alpha)
            moment_rows.append([alpha, q, fit["v"][0], v_expected, fit["x"][0], x_expected])
            assertions.append(
                check_at_most(
                    f"moment_v[q={q:g}]",
                    abs(fit["v"][0] - v_expected),
                    ACCEPTANCE_THRESHOLDS["moment_v"],
                )
            )
            assertions.append(
                check_at_most(
                    f"moment_x[q={q:g}]",
                    abs(fit["x"][0] - x_expected),
                    ACCEPTANCE_THRESHOLDS["moment_x"],
                )
            )

        scaling = {}
        noise = 1.0 / math.sqrt(mc.n_paths)
        for r in mc.scaling_r:
            gap = scaling_law_check(
                path, r, config.scaling_t0, probes, mc.n_paths, config.seed, mc.n_steps,
                workers=self.workers,
            )
            scaling[f"r={r:g}"] = gap
            assertions.append(
                check_at_most(
                    f"scaling_law[r={r:g}]", gap, ACCEPTANCE_THRESHOLDS["scaling_law_sigmas"] * noise
                )
            )
        control_r = max(mc.scaling_r)
        if control_r > 1.0:
            gap = scaling_law_check(
                path, control_r, config.scaling_t0, probes, mc.n_paths, config.seed,
                mc.n_steps, x_exponent=1.0, workers=self.workers,
            )
            scaling["control"] = gap
            assertions.append(
                check_at_least(f"scaling_law_control[r={control_r:g}]", gap, 10.0 * noise)
            )

        assertions.append(self.kolmogorov_check(config))
        return McValidationReport(
            char_rows=char_rows, moment_rows=moment_rows, scaling=scaling, assertions=assertions
        )

    def kolmogorov_check(self, config: ExperimentConfig) -> AssertionOutcome:
        """Observed order of the backward-equation residual under step halving."""
        path = config.path
        s, t = _stencil_window(path)
        probes = char_probes(path.dim, 8, config.seed + 2, radius=1.0)
        result = kolmogorov_convergence(path, config.source, s, t, probes)
        logger.info(f"Kolmogorov residuals {result['residuals']} -> order {result['order']:.3f}")
        return check_at_least(
            "kolmogorov_order", result["order"], ACCEPTANCE_THRESHOLDS["kolmogorov_order"]
        )

    def sample_ensemble(self, config: ExperimentConfig) -> SampleEnsemble:
        """Draws of K on the sampling window, for export."""
        mc = config.monte_carlo
        s, t = _sampling_window(config.path)
        return sample_K(
            config.path, s, t, mc.n_paths, mc.n_steps, config.seed, mc.block_size, self.workers
        )

    def check_ensemble(self, config: ExperimentConfig, ensemble: SampleEnsemble) -> AssertionOutcome:
        """
        Compare a stored ensemble with the analytic characteristic function of
        the configured path over the ensemble's own window.

        Raises:
            ValidationError: If the ensemble dimension differs from the path's.
        """
        path = config.path
        if ensemble.dim != path.dim:
            raise ValidationError(
                f"ensemble has dimension {ensemble.dim}, path has {path.dim}",
                operation="validation_service.check_ensemble",
            )
        d = path.dim
        probes = char_probes(d, config.monte_carlo.n_probes, config.seed)
        analytic = char_function(path, ensemble.s, ensemble.t, probes[:, :d], probes[:, d:])
        z = np.abs(analytic - mc_char(ensemble, probes[:, :d], probes[:, d:])) / ensemble.stderr
        excursions = int(np.count_nonzero(z > ACCEPTANCE_THRESHOLDS["mc_sigmas"]))
        return check_at_most(
            "stored_ensemble_excursions",
            excursions,
            ACCEPTANCE_THRESHOLDS["mc_excursions"],
            f"n_paths={ensemble.n_paths}",
        )

    # =========================================================================
    # Collision operator
    # =========================================================================

    def run_boltzmann_check(self, config: ExperimentConfig) -> CollisionReport:
        """Co-area identity, Carleman against spherical form, split sum and K_f symmetry."""
        spec = config.boltzmann
        quad = config.quadrature
        kernel = CollisionKernelSpec(gamma=spec.gamma, alpha=spec.alpha, dim=spec.dim)
        functions = probe_function_suite(spec.dim, spec.n_functions, config.seed)
        probes = block_rng(config.seed, 3).uniform(-1.0, 1.0, (spec.n_probes, spec.dim))
        assertions: List[AssertionOutcome] = []

        with log_performance(logger, "co-area identity"):
            lhs, rhs, rel = coarea_identity_check(
                lambda x, om: np.exp(-np.sum(x**2, axis=-1)) * (1.0 + om[..., 0] ** 2),
                quad,
                dim=spec.dim,
            )
        assertions.append(check_at_most("coarea", rel, ACCEPTANCE_THRESHOLDS["coarea"]))

        with log_performance(logger, f"collision suite ({len(functions)}x{len(probes)})"):
            raw = collision_probe_rows(kernel, functions, probes, quad)
        rows = [
            CollisionProbeRow(
                probe=i,
                v=probes[item["probe"]],
                carleman=item["carleman"],
                spherical=item["spherical"],
                q1=item["q1"],
                q2=item["q2"],
            )
            for i, item in enumerate(raw)
        ]
        assertions.append(
            check_at_most(
                "carleman_vs_spherical",
                max(r.rel_error for r in rows),
                ACCEPTANCE_THRESHOLDS["carleman_vs_spherical"],
            )
        )
        assertions.append(
            check_at_most(
                "split_sum", max(r.split_error for r in rows), NUMERICAL_TOLERANCES["split_sum"]
            )
        )

        w_probes = block_rng(config.seed, 4).uniform(-1.0, 1.0, (4, spec.dim))
        asymmetry = kernel_symmetry_probe(functions[0], kernel, probes[0], w_probes, quad)
        assertions.append(
            check_at_most("kernel_symmetry", asymmetry, NUMERICAL_TOLERANCES["kernel_symmetry"])
        )
        mass = mass_conservation_probe(functions[0], kernel, quad, n_v=6)
        logger.info(f"Mass probe: int Q = {mass['integral']:.3e} (int |Q| = {mass['l1']:.3e})")
        return CollisionReport(
            rows=rows,
            coarea={"lhs": lhs, "rhs": rhs, "rel_error": rel, **{f"mass_{k}": v for k, v in mass.items()}},
            assertions=assertions,
        )

    # =========================================================================
    # Geometry
    # =========================================================================

    def run_geometry_check(self, config: ExperimentConfig) -> GeometryReport:
        """
        Engulfing and metric-ball inclusions, ball-volume exponent, quasi-triangle
        constant, and sharp against maximal function on the source lattice.

        The shrunken-c1 engulfing run is a negative control: it is reported with
        its outcome but not asserted.
        """
        path, geo = config.path, config.geometry
        alpha = path.alpha
        rows = []
        assertions: List[AssertionOutcome] = []

        def record(name, value, expected, passed):
            rows.append([name, alpha, float(value), float(expected), int(bool(passed))])

        c1 = engulfing_constant(path)
        engulf = engulf_check(path, geo.n_trials, geo.r_range, config.seed, c1)
        record("engulf", engulf, 0, engulf == 0)
        assertions.append(check_at_most("engulf_violations", engulf, 0))

        control = engulf_check(path, max(1, geo.n_trials // 10), geo.r_range, config.seed, c1=1.01)
        record("engulf_control", control, 0, control > 0)

        sandwich = metric_ball_sandwich(
            path, geo.n_trials, config.seed, geo.r_range, metric_ball_constant(path)
        )
        for key in ("inner_violations", "outer_violations"):
            record(f"sandwich_{key}", sandwich[key], 0, sandwich[key] == 0)
            assertions.append(check_at_most(f"sandwich_{key}", sandwich[key], 0))

        volume = ball_volume_fit(path, geo.volume_radii, geo.volume_samples, config.seed)
        rel = abs(volume["exponent"] - volume["expected"]) / volume["expected"]
        record("volume_exponent", volume["exponent"], volume["expected"],
               rel <= ACCEPTANCE_THRESHOLDS["volume_exponent"])
        assertions.append(
            check_at_most("volume_exponent", rel, ACCEPTANCE_THRESHOLDS["volume_exponent"])
        )

        c0 = fit_quasi_triangle_constant(path, geo.n_triples, config.seed)
        c0_alt = fit_quasi_triangle_constant(path, geo.n_triples, config.seed + 1)
        stability = max(c0, c0_alt) / min(c0, c0_alt) if min(c0, c0_alt) > 0 else math.inf
        record("quasi_triangle_c0", c0, c0_alt, math.isfinite(c0) and stability < 2.0)
        assertions.append(check_at_most("quasi_triangle_seed_ratio", stability, 2.0))

        ratio, bmo = self._sharp_maximal_ratio(config, geo.n_radii)
        record("sharp_over_maximal", ratio, 2.0, ratio <= 2.0)
        record("bmo_seminorm", bmo, float("nan"), math.isfinite(bmo))
        assertions.append(check_at_most("sharp_over_maximal", ratio, 2.0))
        return GeometryReport(rows=rows, assertions=assertions)

    def _sharp_maximal_ratio(self, config: ExperimentConfig, n_radii: int, n_points: int = 6):
        """Largest sharp/maximal ratio over lattice points and the BMO seminorm."""
        d = config.dim
        quad = config.quadrature.with_updates(n_phys=min(config.quadrature.n_phys, 48 if d == 1 else 12))
        field = build_source_field(config.source, quad)
        axes, _ = physical_grid(field, quad)
        values = inverse_transform_grid(field, axes)
        lattice = lattice_from_field(values, field.times, field.time_weights, axes, config.path)
        radii = default_radii(lattice, n_radii)
        points = lattice_points(lattice, n_points, config.seed)
        ratio = 0.0
        for z in points:
            sharp = sharp_function(lattice, z, radii)
            maximal = maximal_function(lattice, z, radii)
            if maximal.value > 0:
                ratio = max(ratio, sharp.value / maximal.value)
        bmo = bmo_seminorm(lattice, points, radii, self.workers)
        return ratio, bmo.value

    # =========================================================================
    # Symbol constants
    # =========================================================================

    def run_symbol_table(
        self, alphas: Sequence[float] = (0.5, 1.0, 1.5), dims: Sequence[int] = (1, 2, 3)
    ) -> SymbolReport:
        """Quadrature against closed-form stability constants and isotropic kappa_low."""
        rows = symbol_table(list(alphas), list(dims))
        assertions = []
        for row in rows:
            if row["dim"] != dims[0]:
                continue
            rel = abs(row["c_alpha"] - row["c_alpha_closed"]) / abs(row["c_alpha_closed"])
            assertions.append(check_at_most(f"c_alpha[alpha={row['alpha']:g}]", rel, 1e-8))
        for row in rows:
            assertions.append(
                check_at_least(
                    f"kappa_low[alpha={row['alpha']:g},d={row['dim']}]",
                    row["kappa_low"],
                    NUMERICAL_TOLERANCES["nondegeneracy"],
                )
            )
        return SymbolReport(rows=rows, assertions=assertions)
