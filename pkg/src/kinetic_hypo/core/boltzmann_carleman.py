"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Quadrature for the Boltzmann collision operator with the power kernel
B(|u|, omega) = |u|^gamma |cos theta|^(-1-alpha), in its spherical and Carleman
forms, the Q1 + Q2 splitting and the co-area identity behind the change of
variables.

Velocities after collision are v' = v - (u.omega) omega and
v'_* = v_* + (u.omega) omega with u = v - v_*. Both forms remove the grazing
singularity by pairing nodes that cancel the first-order part of the bracket,
and a Gauss-Jacobi weight absorbs the remaining algebraic factor.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from kinetic_hypo.config.logging import get_logger
from kinetic_hypo.config.settings import NUMERICAL_TOLERANCES
from kinetic_hypo.core.exceptions import (
    AccuracyError,
    ConsistencyError,
    DomainError,
    ValidationError,
    validate_open_interval,
)
from kinetic_hypo.core.params import QuadratureSpec
from kinetic_hypo.core.quadrature import (
    circle_rule,
    composite_legendre,
    gauss_hermite_line,
    gauss_jacobi_unit,
    gauss_legendre,
    orthonormal_complement,
    sphere_rule,
)

logger = get_logger(__name__)


@dataclass(frozen=True)
class CollisionKernelSpec:
    """
    Power collision kernel B(|u|, omega) = weight * |u|^gamma * b(|cos theta|), b(s) = s^(-1-alpha).

    Raises:
        DomainError: If alpha is outside (0, 2) or gamma + alpha outside (-1, 1).
        ValidationError: If dim is not 2 or 3, or b_form is not "power".
    """

    gamma: float
    alpha: float
    dim: int = 2
    b_form: str = "power"
    weight: float = 1.0

    def __post_init__(self):
        op = "boltzmann_carleman.CollisionKernelSpec"
        validate_open_interval(self.alpha, 0.0, 2.0, "alpha", op)
        validate_open_interval(self.gamma + self.alpha, -1.0, 1.0, "gamma + alpha", op)
        if self.dim not in (2, 3):
            raise ValidationError(f"dim must be 2 or 3, got {self.dim}", operation=op)
        if self.b_form != "power":
            raise ValidationError(f"unsupported angular kernel {self.b_form!r}", operation=op)
        if not np.isfinite(self.weight) or self.weight < 0:
            raise ValidationError("kernel weight must be finite and >= 0", operation=op)

    @property
    def carleman_power(self) -> float:
        """Exponent of |h - w| in the Carleman form."""
        return self.gamma + 1.0 + self.alpha

    def to_export_dict(self) -> Dict[str, float]:
        return {"gamma": self.gamma, "alpha": self.alpha, "dim": self.dim, "weight": self.weight}


@dataclass(frozen=True, eq=False)
class GaussianPolynomial:
    """
    f(v) = (c0 + a.(v - c) + q |v - c|^2) exp(-|v - c|^2 / (2 width^2)).

    ``width = inf`` drops the envelope (polynomial, e.g. a constant).
    """

    dim: int
    center: np.ndarray = None
    width: float = 1.0
    constant: float = 1.0
    linear: np.ndarray = None
    quadratic: float = 0.0

    def __post_init__(self):
        d = self.dim
        center = np.zeros(d) if self.center is None else np.asarray(self.center, dtype=float)
        linear = np.zeros(d) if self.linear is None else np.asarray(self.linear, dtype=float)
        if center.shape != (d,) or linear.shape != (d,):
            raise ValidationError(
                f"center and linear must have length {d}",
                operation="boltzmann_carleman.GaussianPolynomial",
            )
        if not self.width > 0:
            raise ValidationError(
                "width must be positive", operation="boltzmann_carleman.GaussianPolynomial"
            )
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "linear", linear)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        y = np.asarray(v, dtype=float) - self.center
        r2 = np.sum(y * y, axis=-1)
        poly = self.constant + y @ self.linear + self.quadratic * r2
        if not np.isfinite(self.width):
            return poly
        return poly * np.exp(-0.5 * r2 / self.width**2)

    @property
    def localized(self) -> bool:
        return bool(np.isfinite(self.width))

    def reach(self, v: np.ndarray) -> float:
        """Distance from v beyond which the function is negligible (inf if not localized)."""
        if not self.localized:
            return math.inf
        return float(np.linalg.norm(np.asarray(v) - self.center)) + 9.0 * self.width

    def scaled(self, factor: float) -> "GaussianPolynomial":
        return GaussianPolynomial(
            dim=self.dim,
            center=self.center,
            width=self.width,
            constant=factor * self.constant,
            linear=factor * self.linear,
            quadratic=factor * self.quadratic,
        )


def gaussian_polynomial(dim: int, **kwargs) -> GaussianPolynomial:
    return GaussianPolynomial(dim=dim, **kwargs)


def probe_function_suite(dim: int, n_functions: int, seed: int) -> List[GaussianPolynomial]:
    """
    Deterministic family of Gaussian-polynomial test functions.

    The first entry is the centered Gaussian with a quadratic correction; a pure
    Gaussian is an equilibrium (Q(f, f) = 0) and cannot anchor a relative error.
    """
    rng = np.random.default_rng(seed)
    suite = [GaussianPolynomial(dim=dim, quadratic=0.25)]
    while len(suite) < n_functions:
        suite.append(
            GaussianPolynomial(
                dim=dim,
                center=rng.uniform(-0.5, 0.5, dim),
                width=float(rng.uniform(0.7, 1.3)),
                constant=1.0,
                linear=rng.uniform(-0.3, 0.3, dim),
                quadratic=float(rng.uniform(0.0, 0.3)),
            )
        )
    return suite[:n_functions]


# =============================================================================
# Shared rules
# =============================================================================


def _direction_rule(dim: int, n_angular: int):
    if dim == 2:
        return circle_rule(n_angular)
    return sphere_rule(3, sizes_3d=(max(2, n_angular // 2), n_angular))


def _radial_rule(power: float, radius: float, quad: QuadratureSpec):
    """
    Nodes and two weight sets for int_0^R rho^power h(rho) drho: inner weights
    already include rho^power on (0, 1); outer weights are plain on [1, R].
    """
    r_in, w_in = gauss_jacobi_unit(quad.n_jump_inner, power)
    if radius <= 1.0:
        return r_in, w_in, np.empty(0), np.empty(0)
    r_out, w_out = composite_legendre(1.0, radius, quad.n_jump_panels, quad.n_panel_nodes)
    return r_in, w_in, r_out, w_out


def _reach(functions, v) -> float:
    reaches = [fn.reach(v) for fn in functions if fn.localized]
    if not reaches:
        raise ValidationError(
            "at least one localized function is needed to truncate the integrals",
            operation="boltzmann_carleman",
        )
    return max(reaches)


def _hyperplane_rule(direction: np.ndarray, radius: float, quad: QuadratureSpec):
    """
    Nodes h (n, d) on the plane perpendicular to ``direction`` within ``radius``,
    graded quadratically toward h = 0.
    """
    d = direction.shape[0]
    basis = orthonormal_complement(direction)
    u, w = gauss_legendre(0.0, 1.0, quad.n_collision_hyper)
    s = radius * u**2
    ds = 2.0 * radius * u * w
    if d == 2:
        nodes = np.concatenate([s, -s])[:, None] * basis[0][None, :]
        return nodes, np.concatenate([ds, ds])
    n_phi = quad.n_collision_angular
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    ring = np.cos(phi)[:, None] * basis[0] + np.sin(phi)[:, None] * basis[1]
    nodes = (s[:, None, None] * ring[None, :, :]).reshape(-1, d)
    weights = ((ds * s)[:, None] * np.full(n_phi, 2.0 * math.pi / n_phi)[None, :]).ravel()
    return nodes, weights


# =============================================================================
# Co-area identity
# =============================================================================


def _coarea_rhs(F, dim, quad, x_scale, symmetric):
    directions, dir_weights = sphere_rule(dim, quad.sphere_nodes_2d, quad.sphere_nodes_3d)
    extent = 9.0 * math.sqrt(2.0) * x_scale
    rho, w_rho = composite_legendre(0.0, extent, quad.n_jump_panels, quad.n_panel_nodes)
    h1, wh1 = gauss_hermite_line(quad.n_freq, x_scale)
    total = 0.0
    for omega, w_omega in zip(directions, dir_weights):
        basis = orthonormal_complement(omega)
        grids = np.meshgrid(*([h1] * (dim - 1)), indexing="ij")
        coords = np.stack([g.ravel() for g in grids], axis=1)
        wh = np.prod(np.stack(np.meshgrid(*([wh1] * (dim - 1)), indexing="ij"), axis=-1)
                     .reshape(-1, dim - 1), axis=1)
        h = coords @ basis
        plus = h[None, :, :] + rho[:, None, None] * omega
        om = np.broadcast_to(omega, plus.shape)
        if symmetric:
            values = 2.0 * F(plus, om)
        else:
            minus = h[None, :, :] - rho[:, None, None] * omega
            values = F(plus, om) + F(minus, om)
        total += w_omega * float(np.sum(w_rho[:, None] * wh[None, :] * values))
    return total


def coarea_identity_check(
    F: Callable[[np.ndarray, np.ndarray], np.ndarray],
    quad: QuadratureSpec = None,
    dim: int = 2,
    symmetric: bool = False,
    x_scale: float = 1.0 / math.sqrt(2.0),
) -> Tuple[float, float, float]:
    """
    Both sides of

        int_{R^d} int_S F(x, omega) d omega dx
            = int int_{h.w=0} [F(h + w, w/|w|) + F(h - w, w/|w|)] |w|^(1-d) dh dw.

    The right side is evaluated in polar form w = rho omega, where |w|^(1-d)
    cancels the polar Jacobian; ``symmetric=True`` uses 2 F(h + w, w/|w|) for
    F even in omega.

    Args:
        F: Vectorized F(x, omega) on arrays of shape (..., d).
        x_scale: Gaussian width the x-rules are adapted to.

    Returns:
        (lhs, rhs, rel_error)

    Raises:
        AccuracyError: If the right side changes by more than 1e-2 on refinement.
    """
    quad = quad or QuadratureSpec()
    directions, dir_weights = sphere_rule(dim, quad.sphere_nodes_2d, quad.sphere_nodes_3d)
    x1, wx1 = gauss_hermite_line(quad.n_freq, x_scale)
    grids = np.meshgrid(*([x1] * dim), indexing="ij")
    x = np.stack([g.ravel() for g in grids], axis=1)
    wx = np.prod(np.stack(np.meshgrid(*([wx1] * dim), indexing="ij"), axis=-1).reshape(-1, dim), axis=1)
    lhs = 0.0
    for omega, w_omega in zip(directions, dir_weights):
        lhs += w_omega * float(np.sum(wx * F(x, np.broadcast_to(omega, x.shape))))

    rhs = _coarea_rhs(F, dim, quad, x_scale, symmetric)
    rhs_fine = _coarea_rhs(F, dim, quad.refined(), x_scale, symmetric)
    scale = max(abs(rhs_fine), 1e-300)
    if abs(rhs_fine - rhs) > NUMERICAL_TOLERANCES["coarea_refinement"] * scale:
        raise AccuracyError(
            "co-area right-hand side is not converged under refinement",
            details={"coarse": rhs, "fine": rhs_fine},
            operation="boltzmann_carleman.coarea_identity_check",
        )
    if lhs == 0.0 and rhs_fine == 0.0:
        return 0.0, 0.0, 0.0
    rel = abs(lhs - rhs_fine) / max(abs(lhs), abs(rhs_fine))
    return lhs, rhs_fine, rel


# =============================================================================
# Carleman form and its splitting
# =============================================================================


def _carleman_terms(f, g, kernel: CollisionKernelSpec, v, quad: QuadratureSpec):
    """(Q, Q1, Q2, H_f) from one pass over shared nodes."""
    v = np.asarray(v, dtype=float)
    d = kernel.dim
    alpha, p = kernel.alpha, kernel.carleman_power
    radius_w = _reach((f, g), v)
    radius_h = radius_w + _reach((f,), v) if f.localized else radius_w
    r_in, w_in, r_out, w_out = _radial_rule(1.0 - alpha, radius_w, quad)
    rho = np.concatenate([r_in, r_out])
    # inner nodes: bracket / rho^2 against rho^(1-alpha); outer: rho^(-1-alpha)
    rho_weights = np.concatenate([w_in / r_in**2, w_out * r_out ** (-1.0 - alpha)])

    directions, dir_weights = _direction_rule(d, quad.n_collision_angular)
    g_v = float(g(v))
    total = q2 = hf = 0.0
    for w_hat, w_dir in zip(directions, dir_weights):
        h, wh = _hyperplane_rule(w_hat, radius_h, quad)
        w = rho[:, None] * w_hat[None, :]
        factor = (np.sum(h * h, axis=1)[None, :] + rho[:, None] ** 2) ** (0.5 * p)

        f_h = f(v - h)
        f_pm = 0.5 * (f(v[None, None, :] - h[None, :, :] + w[:, None, :])
                      + f(v[None, None, :] - h[None, :, :] - w[:, None, :]))
        g_pm = 0.5 * (g(v + w) + g(v - w))

        kf = (factor * f_h[None, :]) @ wh
        h_part = ((f_h[None, :] - f_pm) * factor) @ wh
        carl = ((f_h[None, :] * g_pm[:, None] - g_v * f_pm) * factor) @ wh

        total += w_dir * float(np.sum(rho_weights * carl))
        hf += w_dir * float(np.sum(rho_weights * h_part))
        q2 += w_dir * float(np.sum(rho_weights * (g_pm - g_v) * kf))

    scale = 2.0 * kernel.weight
    return scale * total, scale * g_v * hf, scale * q2, scale * hf


def _checked(compute, op: str) -> Tuple:
    coarse = compute(False)
    fine = compute(True)
    tol = NUMERICAL_TOLERANCES["collision_refinement"]
    ref = max(abs(fine[0]), 1e-14)
    if abs(fine[0] - coarse[0]) > tol * ref:
        raise AccuracyError(
            f"collision integral refinement disagreement {abs(fine[0] - coarse[0]):.3e}",
            details={"coarse": coarse[0], "fine": fine[0]},
            operation=op,
        )
    return fine


def collision_Q_carleman(
    f: GaussianPolynomial,
    g: GaussianPolynomial,
    kernel: CollisionKernelSpec,
    v,
    quad: QuadratureSpec = None,
    refine: bool = True,
) -> float:
    """
    Carleman form

        Q(f, g)(v) = 2 int dw int_{h.w=0} [f(v-h) g(v+w) - f(v-h+w) g(v)] |h-w|^(gamma+1+alpha) |w|^(-alpha-d) dh.

    The nodes w and -w share the hyperplane, so their average cancels the odd
    part of the bracket; radial Gauss-Jacobi with weight rho^(1-alpha) handles
    the remaining rho^(-1-alpha) singularity.

    Raises:
        AccuracyError: If doubling the node counts changes the value by more than 1e-3.
    """
    quad = quad or QuadratureSpec()
    if not refine:
        return _carleman_terms(f, g, kernel, v, quad)[0]
    return _checked(
        lambda fine: _carleman_terms(f, g, kernel, v, quad.refined() if fine else quad),
        "boltzmann_carleman.collision_Q_carleman",
    )[0]


def collision_split(
    f: GaussianPolynomial,
    g: GaussianPolynomial,
    kernel: CollisionKernelSpec,
    v,
    quad: QuadratureSpec = None,
) -> Tuple[float, float, float, Callable[[np.ndarray], float]]:
    """
    Splitting Q = Q1 + Q2 with Q1 = g(v) H_f(v) and
    Q2 = int (g(v+w) - g(v)) K_f(v, w) |w|^(-alpha-d) dw.

    Returns:
        (Q1, Q2, H_f, K_f probe) where the probe evaluates w -> K_f(v, w).

    Raises:
        ConsistencyError: If Q1 + Q2 departs from the Carleman value on the
            same nodes by more than twice the collision tolerance.
    """
    quad = quad or QuadratureSpec()
    total, q1, q2, hf = _carleman_terms(f, g, kernel, v, quad)
    tol = 2.0 * NUMERICAL_TOLERANCES["collision_refinement"]
    if abs(q1 + q2 - total) > tol * max(abs(total), 1e-14):
        raise ConsistencyError(
            f"split sum {q1 + q2:.6e} does not match the Carleman value {total:.6e}",
            operation="boltzmann_carleman.collision_split",
        )
    v_arr = np.asarray(v, dtype=float)
    radius_h = _reach((f,), v_arr) if f.localized else 0.0

    def kf_probe(w: np.ndarray) -> float:
        return kernel_K(f, kernel, v_arr, w, quad, radius_h)

    return q1, q2, hf, kf_probe


def kernel_K(
    f: GaussianPolynomial,
    kernel: CollisionKernelSpec,
    v: np.ndarray,
    w: np.ndarray,
    quad: QuadratureSpec = None,
    radius: Optional[float] = None,
) -> float:
    """K_f(v, w) = 2 int_{h.w=0} f(v - h) |h - w|^(gamma+1+alpha) dh."""
    quad = quad or QuadratureSpec()
    w = np.asarray(w, dtype=float)
    norm = float(np.linalg.norm(w))
    if norm == 0:
        raise ValidationError("K_f needs a nonzero w", operation="boltzmann_carleman.kernel_K")
    if not f.localized:
        raise ValidationError("K_f needs a localized f", operation="boltzmann_carleman.kernel_K")
    radius = _reach((f,), v) if not radius else radius
    h, wh = _hyperplane_rule(w / norm, radius, quad)
    factor = np.linalg.norm(h - w, axis=1) ** kernel.carleman_power
    return 2.0 * kernel.weight * float(np.sum(wh * f(v - h) * factor))


def kernel_symmetry_probe(
    f: GaussianPolynomial,
    kernel: CollisionKernelSpec,
    v: np.ndarray,
    probes: np.ndarray,
    quad: QuadratureSpec = None,
) -> float:
    """max |K_f(v, w) - K_f(v, -w)| / |K_f(v, w)| over probe rows w."""
    worst = 0.0
    for w in np.atleast_2d(probes):
        a = kernel_K(f, kernel, v, w, quad)
        b = kernel_K(f, kernel, v, -w, quad)
        worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
    return worst


# =============================================================================
# Spherical form
# =============================================================================


def _spherical_value(f, g, kernel: CollisionKernelSpec, v, quad: QuadratureSpec):
    v = np.asarray(v, dtype=float)
    d = kernel.dim
    alpha, gamma = kernel.alpha, kernel.gamma
    radius = math.sqrt(2.0) * _reach((f, g), v)

    # |u| rule: inner nodes carry rho^(d+gamma) against bracket / rho
    r_in, w_in, r_out, w_out = _radial_rule(d + gamma, radius, quad)
    rho = np.concatenate([r_in, r_out])
    rho_weights = np.concatenate([w_in / r_in, w_out * r_out ** (d - 1.0 + gamma)])

    # grazing angle tau = pi r / 2 with cos(theta) = sin(tau)
    r_t, w_t = gauss_jacobi_unit(quad.n_collision_angular, 1.0 - alpha)
    tau = 0.5 * math.pi * r_t
    tau_weights = (
        0.5 * math.pi * w_t * r_t ** (alpha - 1.0) * np.sin(tau) ** (-1.0 - alpha)
        * np.cos(tau) ** (d - 2)
    )

    directions, dir_weights = _direction_rule(d, quad.n_collision_angular)
    g_v = float(g(v))
    total = 0.0
    for u_hat, w_dir in zip(directions, dir_weights):
        basis = orthonormal_complement(u_hat)
        if d == 2:
            ring, ring_w = basis[:1], np.ones(1)
        else:
            n_half = quad.n_collision_angular // 2
            phi = math.pi * np.arange(n_half) / n_half
            ring = np.cos(phi)[:, None] * basis[0] + np.sin(phi)[:, None] * basis[1]
            ring_w = np.full(n_half, math.pi / n_half)

        u = rho[:, None] * u_hat[None, :]
        v_star = v - u
        loss = f(v_star) * g_v
        c = rho[:, None] * np.sin(tau)[None, :]
        angular = np.zeros(len(rho))
        for sign in (1.0, -1.0):
            omega = (
                np.sin(tau)[:, None, None] * u_hat[None, None, :]
                + sign * np.cos(tau)[:, None, None] * ring[None, :, :]
            )
            shift = c[:, :, None, None] * omega[None, :, :, :]
            v_prime = v - shift
            v_star_prime = v_star[:, None, None, :] + shift
            bracket = f(v_star_prime) * g(v_prime) - loss[:, None, None]
            angular += np.einsum("rte,t,e->r", bracket, tau_weights, ring_w)
        total += w_dir * float(np.sum(rho_weights * angular))

    # the hemisphere cos(theta) < 0 gives the same post-collision velocities
    return (2.0 * kernel.weight * total,)


def collision_Q_spherical(
    f: GaussianPolynomial,
    g: GaussianPolynomial,
    kernel: CollisionKernelSpec,
    v,
    quad: QuadratureSpec = None,
    refine: bool = True,
) -> float:
    """
    Spherical form Q(f, g)(v) = int dv_* int_S (f(v'_*) g(v') - f(v_*) g(v)) B(|v - v_*|, omega) d omega.

    The sphere is parametrized by the grazing angle tau and a transverse
    direction e; the nodes e and -e are paired so the bracket is O(tau^2).

    Raises:
        AccuracyError: If doubling the node counts changes the value by more than 1e-3.
    """
    quad = quad or QuadratureSpec()
    if not refine:
        return _spherical_value(f, g, kernel, v, quad)[0]
    return _checked(
        lambda fine: _spherical_value(f, g, kernel, v, quad.refined() if fine else quad),
        "boltzmann_carleman.collision_Q_spherical",
    )[0]


def mass_conservation_probe(
    f: GaussianPolynomial,
    kernel: CollisionKernelSpec,
    quad: QuadratureSpec = None,
    n_v: int = 10,
) -> Dict[str, float]:
    """
    int Q(f, f)(v) dv on a Gauss-Hermite v-grid adapted to f.

    Returns:
        dict with ``integral`` and ``l1`` (the same rule applied to |Q|).
    """
    quad = quad or QuadratureSpec()
    d = kernel.dim
    rules = [gauss_hermite_line(n_v, f.width, c) for c in f.center]
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    points = np.stack([gr.ravel() for gr in grids], axis=1)
    weights = np.prod(
        np.stack(np.meshgrid(*[r[1] for r in rules], indexing="ij"), axis=-1).reshape(-1, d),
        axis=1,
    )
    values = np.array(
        [collision_Q_carleman(f, f, kernel, p, quad, refine=False) for p in points]
    )
    return {
        "integral": float(np.sum(weights * values)),
        "l1": float(np.sum(weights * np.abs(values))),
    }


def collision_probe_rows(
    kernel: CollisionKernelSpec,
    functions: List[GaussianPolynomial],
    probes: np.ndarray,
    quad: QuadratureSpec = None,
) -> List[Dict[str, float]]:
    """
    Cross-representation table: for each (f, probe v) with g = f, the Carleman,
    spherical and split values with relative errors.
    """
    quad = quad or QuadratureSpec()
    rows = []
    for i, f in enumerate(functions):
        for j, v in enumerate(np.atleast_2d(probes)):
            carl = collision_Q_carleman(f, f, kernel, v, quad)
            sph = collision_Q_spherical(f, f, kernel, v, quad)
            q1, q2, _, _ = collision_split(f, f, kernel, v, quad)
            denom = max(abs(carl), 1e-14)
            rows.append(
                {
                    "function": i,
                    "probe": j,
                    "carleman": carl,
                    "spherical": sph,
                    "q1": q1,
                    "q2": q2,
                    "rel_error_spherical": abs(carl - sph) / denom,
                    "rel_error_split": abs(carl - q1 - q2) / denom,
                }
            )
            logger.debug(f"Collision probe f{i} v{j}: carleman={carl:.6e} spherical={sph:.6e}")
    return rows
