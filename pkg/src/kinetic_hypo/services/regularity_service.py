"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Verification pipeline for the regularity estimate of the resolvent solution,
the interpolation (Bouchut) inequality and the ball-average scaling identity.

For each lambda the resolvent field u^lambda is assembled once; the ratios

    R1 = |Delta_x^{alpha/(2(1+alpha))} u|_p / |f|_p,   R2 = |Delta_v^{alpha/2} u|_p / |f|_p

come from Plancherel when p = 2 and from a physical-grid reconstruction
otherwise. Uniformity in lambda is asserted as a max/min spread.
"""

import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from kinetic_hypo.config.logging import get_logger, log_performance
from kinetic_hypo.config.settings import ACCEPTANCE_THRESHOLDS
from kinetic_hypo.core.coefficients import (
    CoefficientPath,
    check_sandwich,
    flow_matrix,
    time_rescale,
    with_alpha,
)
from kinetic_hypo.core.exceptions import DegeneracyError, ValidationError
from kinetic_hypo.core.kinetic_geometry import KineticBall, KineticPoint, ball_average
from kinetic_hypo.core.kinetic_semigroup import (
    SpectralField,
    apply_multiplier,
    build_resolvent_field,
    build_source_field,
    frac_norm_l2,
    frequency_axes,
    frequency_scales,
    inverse_transform_grid,
    local_symbol,
    lp_norm,
    physical_grid,
    resolvent_hat,
    source_values,
)
from kinetic_hypo.core.models import (
    AssertionOutcome,
    BouchutInstance,
    RegularityReport,
    RegularityRow,
    StageResult,
    check_at_least,
    check_at_most,
)
from kinetic_hypo.core.params import ExperimentConfig, QuadratureSpec
from kinetic_hypo.core.sources import SourceSpec
from kinetic_hypo.core.stable_levy import check_nondegenerate

logger = get_logger(__name__)


def smoothing_orders(alpha: float) -> Tuple[float, float]:
    """(beta_x, beta_v) = (alpha / (2 (1 + alpha)), alpha / 2)."""
    return alpha / (2.0 * (1.0 + alpha)), alpha / 2.0


def _relative_change(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), 1e-300)


class PointwiseOperator:
    """
    Physical values of Delta_x^beta_x Delta_v^beta_v u^lambda at arbitrary points,
    from the resolvent transform on the Gauss-Hermite frequency grid.

    Transforms are cached per time node.
    """

    def __init__(
        self,
        path: CoefficientPath,
        source: SourceSpec,
        lam: float,
        quad: QuadratureSpec,
        beta_x: float,
        beta_v: float,
    ):
        self.path = path
        self.source = source
        self.lam = lam
        self.quad = quad
        axes = frequency_axes(source, quad)
        grid = SpectralField(
            dim=source.dim, times=[0.0], time_weights=[1.0], axes=axes,
            values=np.zeros((1, int(np.prod([len(a[0]) for a in axes])))),
        )
        self.k = grid.freq_nodes
        d = source.dim
        self.multiplier = (
            grid.freq_weights
            * np.linalg.norm(self.k[:, :d], axis=1) ** (2.0 * beta_x)
            * np.linalg.norm(self.k[:, d:], axis=1) ** (2.0 * beta_v)
            * (2.0 * math.pi) ** (-2 * d)
        )
        self.half_widths = quad.phys_extent / frequency_scales(source, quad)
        self._cache: Dict[float, np.ndarray] = {}

    def _weighted_hat(self, s: float) -> np.ndarray:
        if s not in self._cache:
            d = self.source.dim
            uhat = resolvent_hat(
                self.path, self.source, self.lam, s, self.k[:, :d], self.k[:, d:],
                self.quad.resolvent_tol, self.quad.n_symbol,
            )
            self._cache[s] = self.multiplier * uhat
        return self._cache[s]

    def __call__(self, t: np.ndarray, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        z = np.concatenate([x, v], axis=1)
        out = np.empty(len(t))
        times, inverse = np.unique(t, return_inverse=True)
        for j, s in enumerate(times):
            rows = inverse == j
            phase = np.exp(-1j * (z[rows] @ self.k.T))
            out[rows] = (phase @ self._weighted_hat(float(s))).real
        return out


class RegularityService:
    """
    Runs the regularity, interpolation and scaling-identity checks on an
    experiment configuration.
    """

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers
        self.on_progress: Optional[Callable[[int, int, str], None]] = None
        logger.info("RegularityService initialized")

    # =========================================================================
    # Preconditions
    # =========================================================================

    def check_preconditions(self, path: CoefficientPath) -> List[StageResult]:
        """
        Sandwich and non-degeneracy stages.

        Raises:
            DegeneracyError: If a measure is degenerate or leaves the envelopes.
        """
        stages = []
        sandwich = check_sandwich(path)
        if not all(sandwich):
            raise DegeneracyError(
                "coefficient measures leave the envelopes",
                details={"per_piece": sandwich},
                operation="regularity_service.check_preconditions",
            )
        stages.append(StageResult("sandwich", True, sandwich))
        kappas = []
        for j, m in enumerate(path.nu):
            ok, kappa_low = check_nondegenerate(m)
            if not ok:
                raise DegeneracyError(
                    f"measure {j} is degenerate (kappa_low={kappa_low:.3e})",
                    operation="regularity_service.check_preconditions",
                )
            kappas.append(kappa_low)
        stages.append(StageResult("nondegeneracy", True, kappas))
        return stages

    def _paths(self, config: ExperimentConfig) -> List[CoefficientPath]:
        if not config.alphas:
            return [config.path]
        return [with_alpha(config.path, a) for a in config.alphas]

    # =========================================================================
    # Norms
    # =========================================================================

    def _l2_norms(
        self, path: CoefficientPath, source: SourceSpec, lam: float, quad: QuadratureSpec
    ) -> Tuple[float, float, float, SpectralField]:
        field = build_resolvent_field(path, source, lam, quad, self.workers)
        bx, bv = smoothing_orders(path.alpha)
        return source.l2_norm(), frac_norm_l2(field, bx, 0.0), frac_norm_l2(field, 0.0, bv), field

    def _grid_norms(
        self,
        path: CoefficientPath,
        source: SourceSpec,
        field: SpectralField,
        p: float,
        quad: QuadratureSpec,
    ) -> Tuple[float, float, float, float]:
        """(|f|_p, |D_x u|_p, |D_v u|_p, Plancherel error of |D_v u|_2) on the physical grid."""
        bx, bv = smoothing_orders(path.alpha)
        axes, volume = physical_grid(field, quad)
        u_x = inverse_transform_grid(apply_multiplier(field, bx, 0.0), axes)
        u_v = inverse_transform_grid(apply_multiplier(field, 0.0, bv), axes)

        f_field = build_source_field(source, quad)
        f_axes, f_volume = physical_grid(f_field, quad)
        f_phys = inverse_transform_grid(f_field, f_axes)

        norm_f = lp_norm(f_phys, p, f_volume, f_field.time_weights)
        norm_x = lp_norm(u_x, p, volume, field.time_weights)
        norm_v = lp_norm(u_v, p, volume, field.time_weights)
        grid_l2 = lp_norm(u_v, 2.0, volume, field.time_weights)
        plancherel = _relative_change(frac_norm_l2(field, 0.0, bv), grid_l2)
        return norm_f, norm_x, norm_v, plancherel

    def regularity_rows(
        self,
        path: CoefficientPath,
        source: SourceSpec,
        lam: float,
        p_values,
        quad: QuadratureSpec,
        refine: bool = True,
    ) -> Tuple[List[RegularityRow], float]:
        """Rows for every p at one (alpha, lambda) and the worst Plancherel error."""
        alpha = path.alpha
        norm_f, norm_x, norm_v, field = self._l2_norms(path, source, lam, quad)
        refined_field = None
        if refine:
            _, ref_x, ref_v, refined_field = self._l2_norms(path, source, lam, quad.refined())

        rows, plancherel = [], 0.0
        for p in p_values:
            if p == 2.0:
                f_p, x_p, v_p = norm_f, norm_x, norm_v
                dx = _relative_change(norm_x, ref_x) if refine else 0.0
                dv = _relative_change(norm_v, ref_v) if refine else 0.0
            else:
                f_p, x_p, v_p, err = self._grid_norms(path, source, field, p, quad)
                plancherel = max(plancherel, err)
                dx = dv = 0.0
                if refine:
                    rf, rx, rv, _ = self._grid_norms(
                        path, source, refined_field, p, quad.refined()
                    )
                    dx = _relative_change(x_p / f_p, rx / rf)
                    dv = _relative_change(v_p / f_p, rv / rf)
            if f_p == 0:
                raise ValidationError(
                    "source has zero norm", operation="regularity_service.run_regularity"
                )
            rows.append(
                RegularityRow(
                    alpha=alpha, lam=lam, p=p, norm_f=f_p, norm_dx_u=x_p, norm_dv_u=v_p,
                    ratio_x=x_p / f_p, ratio_v=v_p / f_p, refine_delta_x=dx, refine_delta_v=dv,
                )
            )
        return rows, plancherel

    # =========================================================================
    # Pipelines
    # =========================================================================

    def run_regularity(
        self, config: ExperimentConfig, refine: bool = True, with_bouchut: bool = True
    ) -> RegularityReport:
        """
        Regularity ratios over the alpha x lambda x p grid of the configuration.

        Raises:
            DegeneracyError: If the preconditions fail.
            AccuracyError: Propagated from the resolvent quadrature.
        """
        rows: List[RegularityRow] = []
        bouchut: List[BouchutInstance] = []
        plancherel = None
        paths = self._paths(config)
        total = len(paths) * len(config.lambdas)
        step = 0
        for path in paths:
            with log_performance(logger, f"preconditions (alpha={path.alpha:g})"):
                self.check_preconditions(path)
            for lam in config.lambdas:
                step += 1
                if self.on_progress:
                    self.on_progress(step, total, f"alpha={path.alpha:g} lambda={lam:g}")
                new_rows, err = self.regularity_rows(
                    path, config.source, lam, config.p_values, config.quadrature, refine
                )
                rows.extend(new_rows)
                if any(p != 2.0 for p in config.p_values):
                    plancherel = max(plancherel or 0.0, err)
                if with_bouchut:
                    bouchut.append(
                        self.bouchut_instance(path, config.source, lam, config.quadrature, refine)
                    )

        assertions = self.regularity_assertions(rows, config, refine)
        if plancherel is not None:
            assertions.append(
                check_at_most("plancherel", plancherel, ACCEPTANCE_THRESHOLDS["plancherel"])
            )
        assertions.extend(self.bouchut_assertions(bouchut, refine))
        return RegularityReport(
            rows=rows, bouchut=bouchut, assertions=assertions, plancherel_error=plancherel
        )

    @staticmethod
    def regularity_assertions(
        rows: List[RegularityRow], config: ExperimentConfig, refine: bool
    ) -> List[AssertionOutcome]:
        assertions = []
        alphas = sorted({r.alpha for r in rows})
        for alpha in alphas:
            for p in config.p_values:
                group = [r for r in rows if r.alpha == alpha and r.p == p]
                tag = f"alpha={alpha:g},p={p:g}"
                if len(group) > 1:
                    for which in ("x", "v"):
                        values = np.array([getattr(r, f"ratio_{which}") for r in group])
                        spread = float(values.max() / values.min()) if values.min() > 0 else math.inf
                        assertions.append(
                            check_at_most(
                                f"lambda_spread[{tag},R_{which}]",
                                spread,
                                ACCEPTANCE_THRESHOLDS["lambda_spread"],
                            )
                        )
                if refine:
                    key = "l2_refinement" if p == 2.0 else "lp_refinement"
                    worst = max(max(r.refine_delta_x, r.refine_delta_v) for r in group)
                    assertions.append(
                        check_at_most(f"refinement[{tag}]", worst, ACCEPTANCE_THRESHOLDS[key])
                    )
        return assertions

    # =========================================================================
    # Interpolation inequality
    # =========================================================================

    @staticmethod
    def bouchut_terms(path: CoefficientPath, source: SourceSpec, lam: float, field: SpectralField):
        """
        (lhs, rhs, control_lhs) of the interpolation inequality with
        f_eff^ = f^ - psi_s(eta) u^ - lambda u^.
        """
        alpha = path.alpha
        d = field.dim
        bx, bv = smoothing_orders(alpha)
        eta = field.freq_nodes[:, d:]
        psi = np.array([local_symbol(path, s, eta) for s in field.times])
        f_eff = source_values(field, source) - (psi + lam) * field.values
        lhs = frac_norm_l2(field, bx, 0.0)
        rhs = frac_norm_l2(field, 0.0, bv) ** (1.0 / (1.0 + alpha)) * frac_norm_l2(
            field.with_values(f_eff), 0.0, 0.0
        ) ** (alpha / (1.0 + alpha))
        control_lhs = frac_norm_l2(field, alpha / 2.0, 0.0)
        return lhs, rhs, control_lhs

    def bouchut_instance(
        self,
        path: CoefficientPath,
        source: SourceSpec,
        lam: float,
        quad: QuadratureSpec,
        refine: bool = True,
    ) -> BouchutInstance:
        field = build_resolvent_field(path, source, lam, quad, self.workers)
        if field.is_zero():
            logger.info(f"Bouchut check skipped at lambda={lam:g}: zero field")
            return BouchutInstance(path.alpha, lam, 0.0, 0.0, 0.0, 0.0, 0.0, zero_field=True)
        lhs, rhs, control_lhs = self.bouchut_terms(path, source, lam, field)
        slack = rhs / lhs
        slack_refined = slack
        if refine:
            fine = build_resolvent_field(path, source, lam, quad.refined(), self.workers)
            f_lhs, f_rhs, _ = self.bouchut_terms(path, source, lam, fine)
            slack_refined = f_rhs / f_lhs
        return BouchutInstance(
            alpha=path.alpha,
            lam=lam,
            lhs=lhs,
            rhs=rhs,
            slack=slack,
            slack_refined=slack_refined,
            control_slack=rhs / control_lhs,
        )

    def bouchut_check(self, config: ExperimentConfig, refine: bool = True) -> List[BouchutInstance]:
        """Interpolation slack for every (alpha, lambda) of the configuration."""
        instances = []
        for path in self._paths(config):
            for lam in config.lambdas:
                instances.append(
                    self.bouchut_instance(path, config.source, lam, config.quadrature, refine)
                )
        return instances

    @staticmethod
    def bouchut_assertions(
        instances: List[BouchutInstance], refine: bool = True
    ) -> List[AssertionOutcome]:
        live = [b for b in instances if not b.zero_field]
        if not live:
            return []
        assertions = [
            check_at_least(
                "bouchut_floor",
                min(b.slack for b in live),
                ACCEPTANCE_THRESHOLDS["bouchut_floor"],
            )
        ]
        if refine:
            assertions.append(
                check_at_most(
                    "bouchut_refinement",
                    max(_relative_change(b.slack, b.slack_refined) for b in live),
                    ACCEPTANCE_THRESHOLDS["bouchut_refinement"],
                )
            )
        return assertions

    # =========================================================================
    # Scaling identity
    # =========================================================================

    def ball_deviation(
        self,
        path: CoefficientPath,
        source: SourceSpec,
        lam: float,
        quad: QuadratureSpec,
        ball: KineticBall,
        which: str,
        a: Optional[float],
        n_nodes: int,
    ) -> Tuple[float, float]:
        """
        (average of |P f - a|^2 over the ball, a) with P the x- or v-operator;
        ``a=None`` uses the ball mean of P f.
        """
        bx, bv = smoothing_orders(path.alpha)
        orders = (bx, 0.0) if which == "x" else (0.0, bv)
        op = PointwiseOperator(path, source, lam, quad, *orders)

        c = ball.center
        ht, hx, hv = ball.half_widths
        drift = max(
            float(np.max(np.abs(flow_matrix(path, c.t, c.t + sgn * ht) @ c.v))) for sgn in (-1, 1)
        )
        reach_x = float(np.max(np.abs(c.x))) + drift + hx
        reach_v = float(np.max(np.abs(c.v))) + hv
        d = path.dim
        if reach_x > op.half_widths[:d].min() or reach_v > op.half_widths[d:].min():
            raise ValidationError(
                "ball leaves the region resolved by the frequency grid",
                details={"reach_x": reach_x, "reach_v": reach_v},
                operation="regularity_service.scaling_identity_check",
            )
        if a is None:
            a = ball_average(ball, op, n_nodes)
        level = a
        return ball_average(ball, lambda t, x, v: (op(t, x, v) - level) ** 2, n_nodes), a

    def scaling_identity_check(
        self,
        config: ExperimentConfig,
        r: float,
        t0: float,
        a: Optional[float] = 0.0,
        which: str = "v",
        lam: Optional[float] = None,
        n_nodes: int = 8,
    ) -> float:
        """
        Relative difference between the Q_r(t0, 0, 0)-average of |P f - a|^2 for
        (path, f, lambda) and the Q_1(0)-average for the rescaled data
        (time_rescale(path, r, t0), f(r^alpha t + t0, r^(1+alpha) x, r v), lambda r^alpha).

        ``a=None`` uses the mean of P f over Q_r on both sides.

        Raises:
            ValidationError: If a ball leaves the resolved physical region.
        """
        path, source = config.path, config.source
        lam = config.lambdas[0] if lam is None else lam
        quad = config.quadrature
        d = path.dim
        origin = np.zeros(d)

        ball = KineticBall(KineticPoint(t0, origin, origin), r, path)
        lhs, level = self.ball_deviation(path, source, lam, quad, ball, which, a, n_nodes)

        scaled_path = time_rescale(path, r, t0)
        scaled_source = source.rescaled(r, t0, path.alpha)
        unit = KineticBall(KineticPoint(0.0, origin, origin), 1.0, scaled_path)
        rhs, _ = self.ball_deviation(
            scaled_path, scaled_source, lam * r**path.alpha, quad, unit, which, level, n_nodes
        )
        rel = abs(lhs - rhs) / max(abs(lhs), 1e-300)
        logger.info(f"Scaling identity r={r:g}, t0={t0:g}, P_{which}: rel_error={rel:.3e}")
        return rel

    def scaling_assertions(self, config: ExperimentConfig) -> List[AssertionOutcome]:
        outcomes = []
        for r in config.scaling_r:
            for which in ("x", "v"):
                rel = self.scaling_identity_check(config, r, config.scaling_t0, 0.0, which)
                outcomes.append(
                    check_at_most(
                        f"scaling_identity[r={r:g},P_{which}]",
                        rel,
                        ACCEPTANCE_THRESHOLDS["scaling_identity"],
                    )
                )
        return outcomes
