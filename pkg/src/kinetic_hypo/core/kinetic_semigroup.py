"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Fourier representation of the kinetic semigroup and the resolvent solution.

In Fourier variables k = (xi, eta) the semigroup acts as

    T_{s,t} f ^(xi, eta) = exp(-A(s, t, xi, eta')) * f^(xi, eta'),
    eta' = eta - Pi_{s,t}^T xi,

with the accumulated symbol A(s,t,xi,eta) = int_s^t psi_r(sigma_r^T (Pi_{r,t}^T xi + eta)) dr.
The shear is evaluated exactly at off-node frequencies because every source
has a closed-form transform. Row vectors are used throughout, so
``xi @ Pi`` is Pi^T xi.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from kinetic_hypo.config.logging import get_logger, log_performance
from kinetic_hypo.config.settings import NUMERICAL_TOLERANCES
from kinetic_hypo.core.coefficients import CoefficientPath, flow_matrix
from kinetic_hypo.core.exceptions import (
    AccuracyError,
    ConsistencyError,
    ValidationError,
    validate_finite,
    validate_positive,
    validate_range,
)
from kinetic_hypo.core.parallel import ordered_map
from kinetic_hypo.core.params import QuadratureSpec
from kinetic_hypo.core.quadrature import (
    gauss_hermite_line,
    gauss_jacobi_unit,
    gauss_laguerre_half_line,
    gauss_legendre,
    composite_legendre,
    sphere_rule,
)
from kinetic_hypo.core.sources import GaussianWave, SourceSpec
from kinetic_hypo.core.stable_levy import (
    LevySymbol,
    eval_symbol,
    sphere_abs_moment,
    stable_constant,
)

logger = get_logger(__name__)

# Decay scales of the resolvent tail before the source window
_MIN_TAIL_SCALE = 0.05
_MAX_TAIL_SCALE = 10.0


# =============================================================================
# Accumulated symbol
# =============================================================================


def _rows(a) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(a, dtype=float)
    return (arr[None, :], True) if arr.ndim == 1 else (arr, False)


def _abs_power_integral(a, b, length, alpha):
    """int_0^L |a + b tau|^alpha dtau, elementwise."""
    flat = (np.abs(b) * length <= 1e-6 * np.abs(a)) | (b == 0)
    safe_b = np.where(flat, 1.0, b)
    end = a + b * length

    def F(y):
        return np.sign(y) * np.abs(y) ** (alpha + 1.0) / (alpha + 1.0)

    exact = (F(end) - F(a)) / safe_b
    midpoint = length * np.abs(a + 0.5 * b * length) ** alpha
    return np.where(flat, midpoint, exact)


def _abs_power_grad_integral(a, b, length, alpha):
    """int_0^L alpha sign(y) |y|^(alpha-1) dtau with y = a + b tau (d/da of the above)."""
    flat = (np.abs(b) * length <= 1e-6 * np.abs(a)) | (b == 0)
    safe_b = np.where(flat, 1.0, b)
    exact = (np.abs(a + b * length) ** alpha - np.abs(a) ** alpha) / safe_b
    mid = a + 0.5 * b * length
    with np.errstate(divide="ignore", invalid="ignore"):
        midpoint = np.where(
            mid == 0, 0.0, length * alpha * np.sign(mid) * np.abs(mid) ** (alpha - 1.0)
        )
    return np.where(flat, midpoint, exact)


def _graded_segment_rule(z0, dz, length, n_nodes):
    """
    Nodes tau (N, 2n) and weights on [0, L] split at the closest approach of
    z0 + tau dz to the origin, graded quadratically toward that point.
    """
    dz2 = np.sum(dz * dz, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        tau_star = np.where(dz2 > 0, -np.sum(z0 * dz, axis=-1) / dz2, 0.0)
    tau_star = np.clip(tau_star, 0.0, length)
    u, w = gauss_legendre(0.0, 1.0, n_nodes)
    right = length - tau_star
    nodes = np.concatenate(
        [
            tau_star[:, None] - tau_star[:, None] * u[None, :] ** 2,
            tau_star[:, None] + right[:, None] * u[None, :] ** 2,
        ],
        axis=1,
    )
    weights = np.concatenate(
        [
            2.0 * tau_star[:, None] * (u * w)[None, :],
            2.0 * right[:, None] * (u * w)[None, :],
        ],
        axis=1,
    )
    return nodes, weights


def _symbol_integral(
    path: CoefficientPath,
    s: float,
    t: float,
    xi: np.ndarray,
    eta: np.ndarray,
    n_nodes: int,
    with_grad: bool,
):
    n_rows, d = xi.shape
    total = np.zeros(n_rows)
    grad = np.zeros((n_rows, d)) if with_grad else None
    alpha = path.alpha
    c = stable_constant(alpha)

    for a, b, j in path.pieces(s, t):
        sig, U, m = path.sigma[j], path.U[j], path.nu[j]
        length = b - a
        z0 = (xi @ flow_matrix(path, b, t) + eta) @ sig
        dz = (xi @ U) @ sig
        grad_zeta = np.zeros((n_rows, d)) if with_grad else None

        if m.atoms:
            dirs, wts = m.directions, m.weights
            pa, pb = z0 @ dirs.T, dz @ dirs.T
            total += c * (_abs_power_integral(pa, pb, length, alpha) @ wts)
            if with_grad:
                g = _abs_power_grad_integral(pa, pb, length, alpha) * wts
                grad_zeta += c * (g @ dirs)

        if m.iso_weight > 0:
            scale = c * m.iso_weight * sphere_abs_moment(d, alpha)
            if d == 1:
                total += scale * _abs_power_integral(z0[:, 0], dz[:, 0], length, alpha)
                if with_grad:
                    grad_zeta[:, 0] += scale * _abs_power_grad_integral(
                        z0[:, 0], dz[:, 0], length, alpha
                    )
            else:
                tau, w = _graded_segment_rule(z0, dz, length, n_nodes)
                zeta = z0[:, None, :] + tau[..., None] * dz[:, None, :]
                norm = np.linalg.norm(zeta, axis=-1)
                total += scale * np.sum(w * norm**alpha, axis=1)
                if with_grad:
                    with np.errstate(divide="ignore", invalid="ignore"):
                        factor = np.where(norm > 0, alpha * norm ** (alpha - 2.0), 0.0)
                    grad_zeta += scale * np.sum((w * factor)[..., None] * zeta, axis=1)

        if with_grad:
            grad += grad_zeta @ sig.T

    return total, grad


def accumulated_symbol(
    path: CoefficientPath, s: float, t: float, xi, eta, n_nodes: int = 16
):
    """
    Accumulated symbol A(s, t, xi, eta) = int_s^t psi_r(sigma_r^T (Pi_{r,t}^T xi + eta)) dr.

    On every coefficient interval the argument is affine in r. Atom terms and
    the one-dimensional isotropic term are integrated exactly; the isotropic
    term in d >= 2 uses ``n_nodes`` Gauss-Legendre nodes on each side of the
    closest approach to the origin.

    Args:
        path (CoefficientPath): Coefficient path.
        s (float): Start time.
        t (float): End time, t >= s.
        xi: Frequency of shape (d,) or rows (N, d).
        eta: Frequency of shape (d,) or rows (N, d).
        n_nodes (int): Gauss-Legendre nodes per side for the isotropic d >= 2 term.

    Returns:
        Nonnegative float, or array (N,) for row input.

    Raises:
        ValidationError: If s > t.
    """
    validate_range(s, t, "time interval", "kinetic_semigroup.accumulated_symbol")
    xi_r, single = _rows(xi)
    eta_r, _ = _rows(eta)
    value, _ = _symbol_integral(path, s, t, xi_r, eta_r, n_nodes, with_grad=False)
    value = np.maximum(value, 0.0)
    return float(value[0]) if single else value


def accumulated_symbol_grad(
    path: CoefficientPath, s: float, t: float, xi, eta, n_nodes: int = 16
) -> Tuple[np.ndarray, np.ndarray]:
    """A(s, t, xi, eta) and its gradient with respect to eta, for rows (N, d)."""
    validate_range(s, t, "time interval", "kinetic_semigroup.accumulated_symbol_grad")
    xi_r, _ = _rows(xi)
    eta_r, _ = _rows(eta)
    return _symbol_integral(path, s, t, xi_r, eta_r, n_nodes, with_grad=True)


def char_function(path: CoefficientPath, s: float, t: float, xi, eta):
    """
    Characteristic function E exp(i <(xi, eta), K_{s,t}>) = exp(-A(s, t, xi, eta)).

    The law of K_{s,t} is symmetric, so the value is real and lies in (0, 1].
    """
    return np.exp(-accumulated_symbol(path, s, t, xi, eta))


def _spectrum(fhat) -> Callable[[np.ndarray], np.ndarray]:
    return fhat.hat if hasattr(fhat, "hat") else fhat


def sheared_eta(path: CoefficientPath, s: float, t: float, xi, eta) -> np.ndarray:
    """eta - Pi_{s,t}^T xi."""
    return np.asarray(eta, dtype=float) - np.asarray(xi, dtype=float) @ flow_matrix(path, s, t)


def apply_semigroup_hat(path: CoefficientPath, fhat, s: float, t: float, xi, eta):
    """
    Semigroup in Fourier variables: exp(-A(s, t, xi, eta')) f^(xi, eta'),
    eta' = eta - Pi_{s,t}^T xi.

    Args:
        path (CoefficientPath): Coefficient path.
        fhat: Callable k -> transform, or an object with a ``hat`` method
            (SourceSpec, GaussianWave); k rows are (xi, eta).
        s (float): Start time.
        t (float): End time, t >= s.
        xi, eta: Frequencies (d,) or rows (N, d).

    Returns:
        Complex value or array (N,).
    """
    validate_range(s, t, "time interval", "kinetic_semigroup.apply_semigroup_hat")
    xi_r, single = _rows(xi)
    eta_r, _ = _rows(eta)
    eta_s = sheared_eta(path, s, t, xi_r, eta_r)
    damping = np.exp(-accumulated_symbol(path, s, t, xi_r, eta_s))
    value = damping * _spectrum(fhat)(np.concatenate([xi_r, eta_s], axis=1))
    return complex(value[0]) if single else value


def _semigroup_with_grad(path, fhat, s, t, xi, eta):
    """Semigroup value and its eta-gradient for objects exposing ``hat_grad_v``."""
    eta_s = sheared_eta(path, s, t, xi, eta)
    A, grad_A = accumulated_symbol_grad(path, s, t, xi, eta_s)
    k = np.concatenate([xi, eta_s], axis=1)
    damping = np.exp(-A)
    f = fhat.hat(k)
    value = damping * f
    grad = damping[:, None] * (fhat.hat_grad_v(k) - grad_A * f[:, None])
    return value, grad


def local_symbol(path: CoefficientPath, r: float, eta: np.ndarray) -> np.ndarray:
    """psi_r(sigma_r^T eta) for rows (N, d)."""
    return eval_symbol(LevySymbol(path.nu_at(r), path.sigma_at(r)), eta)


def generator_hat(
    path: CoefficientPath, s: float, k: np.ndarray, ghat: np.ndarray, ghat_grad_v: np.ndarray
) -> np.ndarray:
    """
    Fourier symbol of the kinetic operator K_s applied to g:
    -psi_s(eta) g^ - (U_s^T xi) . grad_eta g^.
    """
    k = np.atleast_2d(np.asarray(k, dtype=float))
    d = k.shape[1] // 2
    xi, eta = k[:, :d], k[:, d:]
    drift = xi @ path.U_at(s)
    return -local_symbol(path, s, eta) * ghat - np.sum(drift * ghat_grad_v, axis=1)


def _stencil(values: Sequence[np.ndarray], h: float) -> np.ndarray:
    """Fourth-order central derivative from values at -2h, -h, +h, +2h."""
    m2, m1, p1, p2 = values
    return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h)


def _check_stencil(path, center, h, limit_ok, op):
    if not limit_ok:
        raise ValidationError(
            f"difference stencil of width {4 * h} does not fit in the interval", operation=op
        )
    if any(abs(b - center) < 2.0 * h for b in path.breakpoints if b != center):
        logger.warning(f"{op}: stencil straddles a coefficient breakpoint; residual is flagged")


def kolmogorov_residual(
    path: CoefficientPath,
    fhat,
    s: float,
    t: float,
    probes: np.ndarray,
    h_s: float = 1e-2,
) -> float:
    """
    Backward equation residual max |d/ds T^ f + K^_s T^ f| over frequency probes.

    d/ds uses the fourth-order central stencil with step ``h_s``; the
    eta-gradient inside the generator symbol is exact.

    Args:
        path (CoefficientPath): Coefficient path.
        fhat: Object with ``hat`` and ``hat_grad_v`` (SourceSpec or GaussianWave).
        s (float): Evaluation time, s + 2 h_s <= t.
        t (float): Terminal time.
        probes: Frequency rows (P, 2d).
        h_s (float): Stencil step.

    Returns:
        float: Maximum absolute residual.
    """
    op = "kinetic_semigroup.kolmogorov_residual"
    validate_positive(h_s, "h_s", op)
    _check_stencil(path, s, h_s, s + 2.0 * h_s <= t, op)
    if t - s < 8.0 * h_s:
        logger.warning(f"{op}: t - s = {t - s} is close to the stencil width; residual flagged")
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    validate_finite(probes, "probes", op)
    d = probes.shape[1] // 2
    xi, eta = probes[:, :d], probes[:, d:]

    shifted = [
        apply_semigroup_hat(path, fhat, s + j * h_s, t, xi, eta) for j in (-2, -1, 1, 2)
    ]
    ds = _stencil(shifted, h_s)
    value, grad = _semigroup_with_grad(path, fhat, s, t, xi, eta)
    residual = ds + generator_hat(path, s, probes, value, grad)
    return float(np.max(np.abs(residual)))


def forward_kolmogorov_residual(
    path: CoefficientPath,
    fhat,
    s: float,
    t: float,
    probes: np.ndarray,
    h_t: float = 1e-2,
) -> float:
    """
    Forward equation residual max |d/dt T^_{s,t} f - T^_{s,t}(K_t f)^| over probes.
    """
    op = "kinetic_semigroup.forward_kolmogorov_residual"
    validate_positive(h_t, "h_t", op)
    _check_stencil(path, t, h_t, t - 2.0 * h_t >= s, op)
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    d = probes.shape[1] // 2
    xi, eta = probes[:, :d], probes[:, d:]

    shifted = [
        apply_semigroup_hat(path, fhat, s, t + j * h_t, xi, eta) for j in (-2, -1, 1, 2)
    ]
    dt = _stencil(shifted, h_t)

    eta_s = sheared_eta(path, s, t, xi, eta)
    k_s = np.concatenate([xi, eta_s], axis=1)
    kf = generator_hat(path, t, k_s, fhat.hat(k_s), fhat.hat_grad_v(k_s))
    rhs = np.exp(-accumulated_symbol(path, s, t, xi, eta_s)) * kf
    return float(np.max(np.abs(dt - rhs)))


def kolmogorov_convergence(
    path: CoefficientPath,
    fhat,
    s: float,
    t: float,
    probes: np.ndarray,
    steps: Sequence[float] = (1e-2, 5e-3, 2.5e-3),
) -> Dict[str, Any]:
    """Residuals over a step sweep and the observed order from a log-log fit."""
    residuals = [kolmogorov_residual(path, fhat, s, t, probes, h) for h in steps]
    fit = stats.linregress(np.log(steps), np.log(np.maximum(residuals, 1e-300)))
    return {"steps": list(steps), "residuals": residuals, "order": float(fit.slope)}


def symbol_lower_bound_fit(
    path: CoefficientPath,
    lattice: Sequence[Tuple[float, float]],
    probes: np.ndarray,
) -> Dict[str, float]:
    """
    Fitted constant c of A(s,t,xi,eta) >= c (t-s) min(|q|^2, |q|^alpha), q = ((t-s) xi, eta).

    Returns:
        dict with ``c`` (minimum ratio) and ``max_ratio``.
    """
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    d = probes.shape[1] // 2
    xi, eta = probes[:, :d], probes[:, d:]
    alpha = path.alpha
    ratios = []
    for s, t in lattice:
        gap = t - s
        if gap <= 0:
            continue
        q = np.linalg.norm(np.concatenate([gap * xi, eta], axis=1), axis=1)
        keep = q > 0
        bound = gap * np.minimum(q[keep] ** 2, q[keep] ** alpha)
        A = accumulated_symbol(path, s, t, xi[keep], eta[keep])
        ratios.append(A / bound)
    ratios = np.concatenate(ratios) if ratios else np.array([np.nan])
    return {"c": float(np.min(ratios)), "max_ratio": float(np.max(ratios))}


# =============================================================================
# Spectral fields and the resolvent
# =============================================================================


@dataclass(frozen=True, eq=False)
class SpectralField:
    """
    Values u^(s, k) on a tensor Gauss-Hermite frequency grid and an s-mesh.

    Args:
        dim: Spatial dimension d.
        times: s-nodes (n_s,).
        time_weights: s-weights (n_s,); a single-time field uses weight 1.
        axes: Per-axis (nodes, weights) of the 2d frequency axes, x-axes first.
        values: Complex array (n_s, N) with N the tensor size, C-ordered over axes.
        meta: Free-form metadata (lambda, alpha, source and path descriptions).
    """

    dim: int
    times: np.ndarray
    time_weights: np.ndarray
    axes: Tuple[Tuple[np.ndarray, np.ndarray], ...]
    values: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        op = "kinetic_semigroup.SpectralField"
        if len(self.axes) != 2 * self.dim:
            raise ValidationError(f"expected {2 * self.dim} frequency axes", operation=op)
        values = np.atleast_2d(np.asarray(self.values, dtype=complex))
        n_nodes = int(np.prod([len(a[0]) for a in self.axes]))
        if values.shape != (len(self.times), n_nodes):
            raise ValidationError(
                f"values must have shape {(len(self.times), n_nodes)}, got {values.shape}",
                operation=op,
            )
        validate_finite(values, "values", op)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "time_weights", np.asarray(self.time_weights, dtype=float))

    @property
    def freq_nodes(self) -> np.ndarray:
        grids = np.meshgrid(*[a[0] for a in self.axes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    @property
    def freq_weights(self) -> np.ndarray:
        grids = np.meshgrid(*[a[1] for a in self.axes], indexing="ij")
        return np.prod(np.stack([g.ravel() for g in grids], axis=1), axis=1)

    @property
    def shape(self) -> Tuple[int, ...]:
        return (len(self.times),) + tuple(len(a[0]) for a in self.axes)

    def with_values(self, values: np.ndarray, **meta) -> "SpectralField":
        return SpectralField(
            dim=self.dim,
            times=self.times,
            time_weights=self.time_weights,
            axes=self.axes,
            values=values,
            meta={**self.meta, **meta},
        )

    def is_zero(self) -> bool:
        return not np.any(self.values)


def frequency_scales(source: SourceSpec, quad: QuadratureSpec) -> np.ndarray:
    """Per-axis Hermite scales adapted to the source envelope (overridable per block)."""
    d = source.dim
    scales = np.maximum(source.scales, 0.5 * np.abs(source.center_freq))
    if quad.freq_scale_x is not None:
        scales[:d] = quad.freq_scale_x
    if quad.freq_scale_v is not None:
        scales[d:] = quad.freq_scale_v
    return scales


def frequency_axes(source: SourceSpec, quad: QuadratureSpec):
    return tuple(
        gauss_hermite_line(quad.n_freq, float(sc)) for sc in frequency_scales(source, quad)
    )


def resolvent_time_mesh(
    path: CoefficientPath, source: SourceSpec, lam: float, quad: QuadratureSpec
) -> Tuple[np.ndarray, np.ndarray]:
    """
    s-nodes for the resolvent field: Gauss-Legendre on the source window (split
    at breakpoints) and a Gauss-Laguerre tail before the window with decay
    scale 1/(2 lambda), floored at 0.05.

    Raises:
        ValidationError: If lambda < 0.05, where the tail scale would exceed 10.
    """
    validate_positive(lam, "lambda", "kinetic_semigroup.resolvent_time_mesh")
    if 0.5 / lam > _MAX_TAIL_SCALE:
        raise ValidationError(
            f"lambda={lam:g} is below the resolvable range (lambda >= {0.5 / _MAX_TAIL_SCALE:g})",
            details={"lambda": lam, "tail_scale": 0.5 / lam, "max_tail_scale": _MAX_TAIL_SCALE},
            operation="kinetic_semigroup.resolvent_time_mesh",
        )
    t_a, t_b = source.time_window
    tail_scale = max(0.5 / lam, _MIN_TAIL_SCALE)
    tau, w_tail = gauss_laguerre_half_line(quad.n_tail, tail_scale)
    nodes, weights = [t_a - tau[::-1]], [w_tail[::-1]]
    cuts = [t_a] + [b for b in path.breakpoints if t_a < b < t_b] + [t_b]
    for a, b in zip(cuts[:-1], cuts[1:]):
        n, w = gauss_legendre(a, b, quad.n_window)
        nodes.append(n)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def resolvent_hat(
    path: CoefficientPath,
    source: SourceSpec,
    lam: float,
    s: float,
    xi,
    eta,
    tol: float = 1e-9,
    n_nodes: int = 16,
):
    """
    Resolvent u^lambda(s, xi, eta) = int_s^T_b exp(lambda (s - t)) T^_{s,t} f(t)(xi, eta) dt.

    The time integral is computed by adaptive Gauss-Kronrod (21 points) over all
    frequency rows at once, with breakpoints and the window start as interior
    points. Values vanish for s >= T_b.

    Raises:
        ValidationError: If lambda <= 0.
    """
    validate_positive(lam, "lambda", "kinetic_semigroup.resolvent_hat")
    xi_r, single = _rows(xi)
    eta_r, _ = _rows(eta)
    n_rows = xi_r.shape[0]
    t_a, t_b = source.time_window
    if s >= t_b or source.amplitude == 0:
        out = np.zeros(n_rows, dtype=complex)
        return complex(out[0]) if single else out

    lower = max(s, t_a)

    def integrand(t):
        eta_s = sheared_eta(path, s, t, xi_r, eta_r)
        A, _ = _symbol_integral(path, s, t, xi_r, eta_s, n_nodes, with_grad=False)
        value = np.exp(lam * (s - t) - A) * source.transform(
            t, np.concatenate([xi_r, eta_s], axis=1)
        )
        return np.concatenate([value.real, value.imag])

    points = [b for b in path.breakpoints if lower < b < t_b]
    result, _ = integrate.quad_vec(
        integrand,
        lower,
        t_b,
        epsabs=0.0,
        epsrel=tol,
        points=points or None,
        quadrature="gk21",
        limit=2000,
    )
    out = result[:n_rows] + 1j * result[n_rows:]
    return complex(out[0]) if single else out


def build_resolvent_field(
    path: CoefficientPath,
    source: SourceSpec,
    lam: float,
    quad: QuadratureSpec = None,
    workers: Optional[int] = None,
) -> SpectralField:
    """
    Assemble u^lambda on the resolvent s-mesh and the tensor frequency grid.

    The work is split over s-nodes; each node is computed independently and
    placed by index, so the field does not depend on the worker count.
    """
    quad = quad or QuadratureSpec()
    axes = frequency_axes(source, quad)
    times, time_weights = resolvent_time_mesh(path, source, lam, quad)
    grid = SpectralField(
        dim=source.dim, times=[0.0], time_weights=[1.0], axes=axes,
        values=np.zeros((1, int(np.prod([len(a[0]) for a in axes])))),
    )
    k = grid.freq_nodes
    d = source.dim

    with log_performance(logger, f"resolvent field (lambda={lam:g}, {k.shape[0]} nodes)"):
        rows = ordered_map(
            lambda s: resolvent_hat(
                path, source, lam, s, k[:, :d], k[:, d:], quad.resolvent_tol, quad.n_symbol
            ),
            list(times),
            workers,
        )
    return SpectralField(
        dim=d,
        times=times,
        time_weights=time_weights,
        axes=axes,
        values=np.array(rows),
        meta={"kind": "resolvent", "lambda": lam, "alpha": path.alpha,
              "source": source.to_dict(),
              "axis_scales": frequency_scales(source, quad).tolist()},
    )


def source_values(field: SpectralField, source: SourceSpec) -> np.ndarray:
    """Source transform f^(s, k) on the nodes of ``field``."""
    k = field.freq_nodes
    return np.array([source.transform(s, k) for s in field.times])


def build_source_field(source: SourceSpec, quad: QuadratureSpec = None) -> SpectralField:
    """Field of the source itself on Gauss-Legendre window nodes."""
    quad = quad or QuadratureSpec()
    axes = frequency_axes(source, quad)
    times, weights = gauss_legendre(*source.time_window, quad.n_window)
    empty = SpectralField(
        dim=source.dim, times=times, time_weights=weights, axes=axes,
        values=np.zeros((len(times), int(np.prod([len(a[0]) for a in axes])))),
    )
    return empty.with_values(
        source_values(empty, source),
        kind="source",
        source=source.to_dict(),
        axis_scales=frequency_scales(source, quad).tolist(),
    )


def apply_multiplier(field: SpectralField, beta_x: float, beta_v: float) -> SpectralField:
    """Field of Delta_x^beta_x Delta_v^beta_v u, i.e. values times |xi|^(2 beta_x) |eta|^(2 beta_v)."""
    k = field.freq_nodes
    d = field.dim
    mult = np.linalg.norm(k[:, :d], axis=1) ** (2.0 * beta_x) * np.linalg.norm(
        k[:, d:], axis=1
    ) ** (2.0 * beta_v)
    return field.with_values(field.values * mult[None, :], beta_x=beta_x, beta_v=beta_v)


def frac_norm_l2(field: SpectralField, beta_x: float, beta_v: float) -> float:
    """
    |Delta_x^beta_x Delta_v^beta_v u|_2 from Plancherel:

        (2 pi)^(-2d) sum_s W_s sum_k w_k |xi|^(4 beta_x) |eta|^(4 beta_v) |u^(s, k)|^2.

    Summation runs in node order with numpy's pairwise reduction.

    Raises:
        ValidationError: If the field is empty or an order is negative.
    """
    op = "kinetic_semigroup.frac_norm_l2"
    if field.values.size == 0:
        raise ValidationError("field is empty", operation=op)
    if beta_x < 0 or beta_v < 0:
        raise ValidationError("fractional orders must be >= 0", operation=op)
    k = field.freq_nodes
    d = field.dim
    mult = (
        np.linalg.norm(k[:, :d], axis=1) ** (4.0 * beta_x)
        * np.linalg.norm(k[:, d:], axis=1) ** (4.0 * beta_v)
        * field.freq_weights
    )
    per_time = np.sum(np.abs(field.values) ** 2 * mult[None, :], axis=1)
    total = float(np.sum(field.time_weights * per_time))
    return math.sqrt(max(total, 0.0) * (2.0 * math.pi) ** (-2 * d))


def physical_grid(
    field: SpectralField, quad: QuadratureSpec = None, center: np.ndarray = None
) -> Tuple[List[np.ndarray], float]:
    """
    Uniform physical axes with half-width ``phys_extent / scale`` per axis.

    Returns:
        (axes, cell_volume)
    """
    quad = quad or QuadratureSpec()
    n = 2 * field.dim
    if center is None:
        center = np.asarray(field.meta.get("source", {}).get("shift", np.zeros(n)), dtype=float)
    scales = field.meta.get("axis_scales")
    if scales is None:
        raise ValidationError(
            "field carries no axis scales", operation="kinetic_semigroup.physical_grid"
        )
    axes = []
    volume = 1.0
    for a, scale in enumerate(scales):
        half = quad.phys_extent / float(scale)
        grid = np.linspace(center[a] - half, center[a] + half, quad.n_phys)
        axes.append(grid)
        volume *= grid[1] - grid[0] if quad.n_phys > 1 else 1.0
    return axes, volume


def inverse_transform_grid(field: SpectralField, phys_grid: Sequence[np.ndarray]) -> np.ndarray:
    """
    Physical values u(s, z) = (2 pi)^(-2d) sum_k w_k exp(-i k.z) u^(s, k) on a tensor grid.

    The sum is separable and applied one axis at a time.

    Args:
        field (SpectralField): Spectral values.
        phys_grid: 2d one-dimensional axes (x-axes first).

    Returns:
        np.ndarray: Real array of shape (n_s, m_1, ..., m_2d).

    Raises:
        ConsistencyError: If the imaginary residue exceeds 1e-8 of the real part.
    """
    n = 2 * field.dim
    if len(phys_grid) != n:
        raise ValidationError(
            f"expected {n} physical axes", operation="kinetic_semigroup.inverse_transform_grid"
        )
    arr = field.values.reshape(field.shape)
    for a, ((nodes, weights), z) in enumerate(zip(field.axes, phys_grid)):
        kernel = np.exp(-1j * np.outer(np.asarray(z, dtype=float), nodes)) * weights[None, :]
        arr = np.moveaxis(np.tensordot(kernel, arr, axes=([1], [1 + a])), 0, 1 + a)
    arr = arr * (2.0 * math.pi) ** (-n)

    re_max = float(np.max(np.abs(arr.real))) if arr.size else 0.0
    im_max = float(np.max(np.abs(arr.imag))) if arr.size else 0.0
    limit = NUMERICAL_TOLERANCES["hermitian_residue"]
    if im_max > limit * max(re_max, 1e-300) and im_max > 0:
        raise ConsistencyError(
            f"imaginary residue {im_max:.3e} exceeds {limit:g} of the real part {re_max:.3e}",
            details={"imag_max": im_max, "real_max": re_max},
            operation="kinetic_semigroup.inverse_transform_grid",
        )
    return arr.real


def lp_norm(
    u: np.ndarray, p: float, cell_volume: float, time_weights: Optional[np.ndarray] = None
) -> float:
    """
    Discrete L^p norm (sum |u|^p * cell_volume * W_s)^(1/p).

    With ``time_weights`` the first axis of ``u`` is time; otherwise every
    cell carries ``cell_volume`` only.
    """
    if not np.isfinite(p) or p < 1:
        raise ValidationError(f"p must be finite and >= 1, got {p}", operation="kinetic_semigroup.lp_norm")
    u = np.asarray(u, dtype=float)
    powered = np.abs(u) ** p
    if time_weights is None:
        total = float(np.sum(powered)) * cell_volume
    else:
        per_time = np.sum(powered.reshape(len(time_weights), -1), axis=1)
        total = float(np.sum(np.asarray(time_weights) * per_time)) * cell_volume
    return total ** (1.0 / p)


# =============================================================================
# Generator in physical variables
# =============================================================================


def _jump_directions(measure, sigma, quad: QuadratureSpec):
    """Directions sigma theta with the spherical weights of the measure."""
    d = measure.dim
    dirs, weights = [], []
    if measure.iso_weight > 0:
        nodes, w = sphere_rule(d, quad.sphere_nodes_2d, quad.sphere_nodes_3d)
        dirs.append(nodes)
        weights.append(measure.iso_weight * w)
    if measure.atoms:
        dirs.append(measure.directions)
        weights.append(measure.weights)
    theta = np.vstack(dirs)
    return theta @ np.asarray(sigma).T, np.concatenate(weights)


def _jump_integral(phi: GaussianWave, z: np.ndarray, measure, sigma, quad: QuadratureSpec) -> float:
    d = phi.dim
    alpha = measure.alpha
    directions, weights = _jump_directions(measure, sigma, quad)
    phi0 = float(phi(z))
    r_in, w_in = gauss_jacobi_unit(quad.n_jump_inner, 1.0 - alpha)

    if np.all(np.isinf(phi.widths[d:])):
        # plane wave in v: delta2 = 2 phi(z) (cos(omega r) - 1)
        omega = np.abs(directions @ phi.wavevector[d:])
        inner = np.array(
            [np.sum(w_in * 2.0 * (np.cos(om * r_in) - 1.0) / r_in**2) for om in omega]
        )
        outer = np.empty_like(omega)
        for i, om in enumerate(omega):
            if om == 0:
                outer[i] = 0.0
                continue
            tail, _ = integrate.quad(
                lambda r: r ** (-1.0 - alpha), 1.0, np.inf, weight="cos", wvar=om
            )
            outer[i] = 2.0 * (tail - 1.0 / alpha)
        return phi0 * float(np.sum(weights * (inner + outer)))

    if np.any(np.isinf(phi.widths[d:])):
        raise ValidationError(
            "test function must be localized in all or none of the v-axes",
            operation="kinetic_semigroup.apply_generator",
        )

    shift = np.zeros((len(directions), 2 * d))
    shift[:, d:] = directions

    def delta2(r):
        plus = phi(z + r[None, :, None] * shift[:, None, :])
        minus = phi(z - r[None, :, None] * shift[:, None, :])
        return plus + minus - 2.0 * phi0

    inner = np.sum(w_in[None, :] * delta2(r_in) / r_in[None, :] ** 2, axis=1)

    dir_norm = np.linalg.norm(directions, axis=1)
    reach = np.linalg.norm(z[d:] - phi.centers[d:]) + phi.envelope_radius()
    radius = 1.0 + reach / max(float(np.min(dir_norm)), 1e-12)
    r_out, w_out = composite_legendre(1.0, radius, quad.n_jump_panels, quad.n_panel_nodes)
    pairs = delta2(r_out) + 2.0 * phi0
    outer = np.sum(w_out[None, :] * pairs * r_out[None, :] ** (-1.0 - alpha), axis=1)
    outer -= 2.0 * phi0 / alpha
    return float(np.sum(weights * (inner + outer)))


def apply_generator(
    path: CoefficientPath,
    phi: GaussianWave,
    s: float,
    x,
    v,
    quad: QuadratureSpec = None,
) -> float:
    """
    Kinetic operator K_s phi(x, v) = L_v phi + (U_s v) . grad_x phi.

    The jump part L_v phi = int_S Sigma(d theta) int_0^inf delta2(r sigma theta) r^(-1-alpha) dr
    is split at r = 1: Gauss-Jacobi with weight r^(1-alpha) on delta2 / r^2 inside,
    composite Gauss-Legendre outside up to the radius where the test function
    is below 1e-12 (plane waves in v use the Fourier-weighted tail integral).

    Raises:
        AccuracyError: If the jump integral changes by more than 1e-6 (relative)
            when every node count is doubled.
    """
    quad = quad or QuadratureSpec()
    z = np.concatenate([np.atleast_1d(np.asarray(x, dtype=float)),
                        np.atleast_1d(np.asarray(v, dtype=float))])
    measure, sigma, U = path.nu_at(s), path.sigma_at(s), path.U_at(s)

    coarse = _jump_integral(phi, z, measure, sigma, quad)
    fine = _jump_integral(phi, z, measure, sigma, quad.refined())
    tol = NUMERICAL_TOLERANCES["generator_refinement"]
    scale = max(abs(fine), abs(float(phi(z))), 1e-12)
    if abs(fine - coarse) > tol * scale:
        raise AccuracyError(
            f"jump integral refinement disagreement {abs(fine - coarse):.3e}",
            details={"coarse": coarse, "fine": fine},
            operation="kinetic_semigroup.apply_generator",
        )
    d = phi.dim
    transport = float(np.dot(U @ z[d:], phi.gradient_x(z)))
    return fine + transport


# =============================================================================
# Weak formulation
# =============================================================================


def _pairing(uhat: np.ndarray, ghat: np.ndarray, weights: np.ndarray, d: int) -> float:
    """<u, g> = (2 pi)^(-2d) sum w Re(u^ conj(g^)) for real u, g."""
    return float(np.sum(weights * (uhat * np.conj(ghat)).real)) * (2.0 * math.pi) ** (-2 * d)


def weak_solution_residual(
    path: CoefficientPath,
    field: SpectralField,
    source: SourceSpec,
    lam: float,
    phi: GaussianWave,
    s: float,
    T: float,
    quad: QuadratureSpec = None,
    return_terms: bool = False,
    workers: Optional[int] = None,
):
    """
    Residual of the weak formulation

        <u(s), phi> = <u(T), phi> + int_s^T <u(t), (K*_t - lambda) phi> dt + int_s^T <f(t), phi> dt,

    with K*_t = L_t - U_t v . grad_x. All pairings are evaluated in Fourier
    variables on the frequency nodes of ``field``; u is recomputed at
    Gauss-Legendre time nodes split at breakpoints and the window edges.

    Raises:
        ValidationError: If phi is not localized, its spectrum escapes the node
            span, or T < s.
    """
    op = "kinetic_semigroup.weak_solution_residual"
    quad = quad or QuadratureSpec()
    validate_range(s, T, "weak-form interval", op)
    if not phi.localized:
        raise ValidationError("test function must be localized on every axis", operation=op)
    span = np.array([np.max(np.abs(nodes)) for nodes, _ in field.axes])
    if np.any(phi.spectral_radius(1e-8) > span):
        raise ValidationError(
            "test function spectrum escapes the frequency node span",
            details={"radius": phi.spectral_radius(1e-8).tolist(), "span": span.tolist()},
            operation=op,
        )

    d = field.dim
    k = field.freq_nodes
    weights = field.freq_weights
    xi, eta = k[:, :d], k[:, d:]
    phi_hat = phi.hat(k)
    phi_grad = phi.hat_grad_v(k)

    def u_hat(t):
        return resolvent_hat(path, source, lam, t, xi, eta, quad.resolvent_tol, quad.n_symbol)

    lhs = _pairing(u_hat(s), phi_hat, weights, d)
    rhs = _pairing(u_hat(T), phi_hat, weights, d)

    if T > s:
        t_a, t_b = source.time_window
        cuts = sorted({s, T, *[c for c in (t_a, t_b, *path.breakpoints) if s < c < T]})
        nodes, wts = [], []
        for a, b in zip(cuts[:-1], cuts[1:]):
            n, w = gauss_legendre(a, b, quad.n_time_weak)
            nodes.append(n)
            wts.append(w)
        nodes, wts = np.concatenate(nodes), np.concatenate(wts)

        u_vals = ordered_map(u_hat, list(nodes), workers)
        integral = 0.0
        for t, w, uh in zip(nodes, wts, u_vals):
            adjoint = (
                -local_symbol(path, t, eta) * phi_hat
                + np.sum((xi @ path.U_at(t)) * phi_grad, axis=1)
                - lam * phi_hat
            )
            integral += w * (
                _pairing(uh, adjoint, weights, d)
                + _pairing(source.transform(t, k), phi_hat, weights, d)
            )
        rhs += integral

    residual = abs(lhs - rhs)
    logger.debug(f"Weak residual on [{s}, {T}]: |{lhs:.6e} - {rhs:.6e}| = {residual:.3e}")
    if return_terms:
        return {"lhs": lhs, "rhs": rhs, "residual": residual}
    return residual
