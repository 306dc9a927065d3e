"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

This module defines default quadrature sizes, numerical tolerances, acceptance
thresholds, report column schemas and CLI exit codes. All constants are grouped
for clarity. No functions are defined in this module.
"""


SCHEMA_VERSION = 1
"""int: Version of the CSV/JSON report schemas, written into every report header."""


DEFAULT_QUADRATURE = {
    "n_freq": 48,
    "n_symbol": 16,
    "resolvent_tol": 1e-9,
    "n_window": 12,
    "n_tail": 24,
    "n_phys": 64,
    "phys_extent": 7.0,
    "n_jump_inner": 24,
    "n_jump_panels": 24,
    "n_panel_nodes": 8,
    "sphere_nodes_2d": 256,
    "sphere_nodes_3d": (15, 20),
    "n_collision_radial": 20,
    "n_collision_angular": 32,
    "n_collision_hyper": 40,
    "n_time_weak": 16,
}
"""
dict: Default quadrature sizes. Every integer entry is multiplied by the global
``--quad-scale`` factor.

Keys:
    n_freq (int): Gauss-Hermite nodes per frequency axis of a SpectralField.
    n_symbol (int): Gauss-Legendre nodes per coefficient interval for graded
        accumulated-symbol integration.
    resolvent_tol (float): Relative tolerance of the adaptive Gauss-Kronrod
        resolvent time integral.
    n_window (int): Gauss-Legendre s-nodes on the source time window.
    n_tail (int): Gauss-Laguerre s-nodes before the window.
    n_phys (int): Physical grid points per (x, v) axis.
    phys_extent (float): Physical half-width in units of the inverse bandwidth.
    n_jump_inner (int): Gauss-Jacobi nodes of the inner jump integral (r < 1).
    n_jump_panels (int): Gauss-Legendre panels of the outer jump integral.
    n_panel_nodes (int): Nodes per outer panel.
    sphere_nodes_2d (int): Trapezoid nodes on the unit circle.
    sphere_nodes_3d (tuple): (polar Gauss-Legendre, azimuthal trapezoid) sizes on the 2-sphere.
    n_collision_radial (int): Radial nodes of the collision integrals.
    n_collision_angular (int): Angular nodes of the collision integrals.
    n_collision_hyper (int): Hyperplane nodes per axis of the Carleman form.
    n_time_weak (int): Gauss-Legendre nodes of the weak-form time integral.
"""


NUMERICAL_TOLERANCES = {
    "direction": 1e-12,
    "nondegeneracy": 1e-10,
    "constant_quad": 1e-10,
    "condition_number": 1e8,
    "flow_singular": 1e-12,
    "hermitian_residue": 1e-8,
    "generator_refinement": 1e-6,
    "collision_refinement": 1e-3,
    "coarea_refinement": 1e-2,
    "split_sum": 4e-3,
    "kernel_symmetry": 1e-10,
    "tail_cutoff": 1e-12,
}
"""
dict: Tolerances used inside the numerical modules.

Keys:
    direction (float): Matching tolerance for unit directions (symmetry, ordering).
    nondegeneracy (float): Minimum directional mass for a non-degenerate measure.
    constant_quad (float): Tolerance of the cached stability-constant quadratures.
    condition_number (float): Maximum condition number of sigma and U matrices.
    flow_singular (float): Relative determinant floor below which a flow matrix is singular.
    hermitian_residue (float): Allowed ratio of imaginary to real reconstruction residue.
    generator_refinement (float): Inner/outer refinement agreement of the jump integral.
    collision_refinement (float): Refinement agreement of the collision quadratures.
    coarea_refinement (float): Refinement agreement of the co-area identity check.
    split_sum (float): Allowed relative mismatch of the collision split sum.
    kernel_symmetry (float): Allowed asymmetry of the split kernel under w -> -w.
    tail_cutoff (float): Gaussian tail level used to truncate infinite integrals.
"""


ACCEPTANCE_THRESHOLDS = {
    "lambda_spread": 2.0,
    "l2_refinement": 0.05,
    "lp_refinement": 0.10,
    "bouchut_refinement": 0.10,
    "bouchut_floor": 0.05,
    "plancherel": 1e-4,
    "mc_sigmas": 3.5,
    "mc_excursions": 1,
    "scaling_law_sigmas": 5.0,
    "scaling_identity": 1e-3,
    "moment_v": 0.05,
    "moment_x": 0.08,
    "kolmogorov_order": 3.5,
    "coarea": 1e-4,
    "carleman_vs_spherical": 2e-3,
    "volume_exponent": 0.01,
}
"""
dict: Thresholds asserted by the verification pipelines.

Keys:
    lambda_spread (float): Max/min ratio of a regularity ratio across the lambda sweep.
    l2_refinement (float): Relative change allowed under quadrature doubling (p = 2).
    lp_refinement (float): Relative change allowed under grid refinement (p != 2).
    bouchut_refinement (float): Relative change of the interpolation slack under refinement.
    bouchut_floor (float): Positive floor for the interpolation slack.
    plancherel (float): Grid L2 norm vs spectral L2 norm agreement.
    mc_sigmas (float): Standard errors allowed between empirical and analytic characteristic functions.
    mc_excursions (int): Statistical excursions tolerated per probe suite.
    scaling_law_sigmas (float): Multiple of 1/sqrt(N) allowed in the scaling-law comparison.
    scaling_identity (float): Relative error allowed in the ball-average scaling identity.
    moment_v (float): Absolute tolerance of the fitted V moment exponent.
    moment_x (float): Absolute tolerance of the fitted X moment exponent.
    kolmogorov_order (float): Minimum observed order of the backward equation residual.
    coarea (float): Relative error allowed in the co-area identity.
    carleman_vs_spherical (float): Relative agreement of the two collision representations.
    volume_exponent (float): Relative error of the fitted ball-volume exponent.
"""


REPORT_COLUMNS = {
    "regularity": [
        "alpha",
        "lambda",
        "p",
        "norm_f",
        "norm_dx_u",
        "norm_dv_u",
        "ratio_x",
        "ratio_v",
        "refine_delta_x",
        "refine_delta_v",
    ],
    "bouchut": ["alpha", "lambda", "lhs", "rhs", "slack", "slack_refined", "control_slack"],
    "mc": [
        "probe", "xi", "eta", "analytic_re", "analytic_im", "empirical_re", "empirical_im",
        "stderr", "z_score",
    ],
    "moments": ["alpha", "q", "v_exponent", "v_expected", "x_exponent", "x_expected"],
    "collision": [
        "probe",
        "v1",
        "v2",
        "carleman",
        "spherical",
        "q1",
        "q2",
        "rel_error",
        "split_error",
    ],
    "geometry": ["check", "alpha", "value", "expected", "passed"],
    "symbol": ["alpha", "dim", "c_alpha", "c_alpha_closed", "c_d_alpha", "kappa_low"],
    "spectral_field": ["s", "xi", "eta", "re", "im", "weight"],
}
"""
dict: Column headers of the CSV reports, per subcommand. Vector-valued frequency
columns expand to ``xi_1..xi_d`` and ``eta_1..eta_d`` in the spectral field export.
"""


EXIT_CODES = {
    "pass": 0,
    "assertion_failure": 1,
    "config_error": 2,
    "accuracy_error": 3,
}
"""dict: Process exit codes of the ``kinetic-hypo`` command."""
