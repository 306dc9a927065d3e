"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Quasi-metric geometry of the kinetic equation: the distance rho, the sheared
kinetic balls Q_r, the maximal and sharp functions over those balls, BMO
seminorms and the randomized engulfing, sandwich, volume and quasi-triangle
checks.

A kinetic ball Q_r(t0, x0, v0) is the open set

    |t - t0| < r^alpha,  |x - x0 - Pi_{t0,t} v0| < r^(1+alpha),  |v - v0| < r.

Lattice data are cell-centered: a cell belongs to a ball when its center does.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.stats import qmc

from kinetic_hypo.config.logging import get_logger, log_performance
from kinetic_hypo.core.coefficients import CoefficientPath, flow_matrices
from kinetic_hypo.core.exceptions import ValidationError, validate_positive, validate_range
from kinetic_hypo.core.monte_carlo import block_rng
from kinetic_hypo.core.parallel import ordered_map
from kinetic_hypo.core.quadrature import circle_rule, gauss_legendre, sphere_rule

logger = get_logger(__name__)


# =============================================================================
# Points and balls
# =============================================================================


@dataclass(frozen=True, eq=False)
class KineticPoint:
    """A point (t, x, v) of time-phase space."""

    t: float
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        v = np.atleast_1d(np.asarray(self.v, dtype=float))
        if x.shape != v.shape or x.ndim != 1:
            raise ValidationError(
                "x and v must be vectors of equal length", operation="kinetic_geometry.KineticPoint"
            )
        if not (np.isfinite(self.t) and np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise ValidationError(
                "coordinates must be finite", operation="kinetic_geometry.KineticPoint"
            )
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)

    @property
    def dim(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True, eq=False)
class KineticBall:
    """Open kinetic ball Q_r(center) for the coefficient path ``path``."""

    center: KineticPoint
    radius: float
    path: CoefficientPath

    def __post_init__(self):
        validate_positive(self.radius, "radius", "kinetic_geometry.KineticBall")
        if self.center.dim != self.path.dim:
            raise ValidationError(
                "ball center and path dimensions differ", operation="kinetic_geometry.KineticBall"
            )

    @property
    def alpha(self) -> float:
        return self.path.alpha

    @property
    def half_widths(self) -> Tuple[float, float, float]:
        """(time, position, velocity) radii."""
        r, a = self.radius, self.alpha
        return r**a, r ** (1.0 + a), r

    def dilated(self, factor: float) -> "KineticBall":
        return KineticBall(self.center, factor * self.radius, self.path)


def _antiderivative(path: CoefficientPath, times: np.ndarray) -> np.ndarray:
    """F(t) with Pi_{s,t} = F(t) - F(s), for any array of times."""
    times = np.asarray(times, dtype=float)
    F = flow_matrices(path, path.breakpoints[0], times.ravel())
    return F.reshape(times.shape + F.shape[1:])


def _apply(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", M, v)


def _in_balls(path, alpha, t0, x0, v0, r, t, x, v) -> np.ndarray:
    """
    Vectorized open-ball membership; centers and radii broadcast against the
    points (leading axes), coordinates have a trailing axis of length d.
    """
    t0, r, t = np.asarray(t0, float), np.asarray(r, float), np.asarray(t, float)
    pi = _antiderivative(path, t) - _antiderivative(path, np.broadcast_to(t0, t.shape))
    centre_x = x0 + _apply(pi, np.broadcast_to(v0, x.shape))
    return (
        (np.abs(t - t0) < r**alpha)
        & (np.linalg.norm(v - v0, axis=-1) < r)
        & (np.linalg.norm(x - centre_x, axis=-1) < r ** (1.0 + alpha))
    )


def ball_contains(ball: KineticBall, z: KineticPoint) -> bool:
    """
    Open-ball membership, with the sheared x-center taken at the point's own time.

    Examples:
        d = 1, alpha = 1, U = 1, center (0, 0, 1), r = 1: the point (0.5, 0.5, 1.2)
        is inside because x0 + Pi_{0,0.5} v0 = 0.5.
    """
    c = ball.center
    return bool(
        _in_balls(
            ball.path, ball.alpha, c.t, c.x, c.v, ball.radius,
            np.asarray(z.t), z.x, z.v,
        )
    )


def _quasi_metric_arrays(path, alpha, t0, x0, v0, t1, x1, v1) -> np.ndarray:
    F0 = _antiderivative(path, t0)
    F1 = _antiderivative(path, t1)
    pi01 = F1 - F0
    a = 1.0 / (1.0 + alpha)
    return (
        np.abs(t0 - t1) ** (1.0 / alpha)
        + np.linalg.norm(v0 - v1, axis=-1)
        + np.linalg.norm(x0 - x1 + _apply(pi01, v1), axis=-1) ** a
        + np.linalg.norm(x1 - x0 - _apply(pi01, v0), axis=-1) ** a
    )


def quasi_metric(
    path: CoefficientPath, z0: KineticPoint, z1: KineticPoint, alpha: Optional[float] = None
) -> float:
    """
    rho(z0, z1) = |t0 - t1|^(1/alpha) + |v0 - v1|
                  + |x0 - x1 + Pi_{t0,t1} v1|^(1/(1+alpha)) + |x1 - x0 + Pi_{t1,t0} v0|^(1/(1+alpha)).

    Examples:
        d = 1, alpha = 1, U = 1, z0 = (0, 0, 0), z1 = (1, 0, 1) gives 3.
    """
    alpha = path.alpha if alpha is None else alpha
    value = _quasi_metric_arrays(
        path, alpha,
        np.asarray(z0.t), z0.x, z0.v,
        np.asarray(z1.t), z1.x, z1.v,
    )
    return float(value)


# =============================================================================
# Sampling inside balls
# =============================================================================


def _uniform_unit_ball(rng: np.random.Generator, shape: Tuple[int, ...], dim: int) -> np.ndarray:
    g = rng.standard_normal(shape + (dim,))
    g /= np.linalg.norm(g, axis=-1, keepdims=True)
    return g * rng.uniform(0.0, 1.0, shape + (1,)) ** (1.0 / dim)


def _sample_in_balls(path, alpha, t0, x0, v0, r, n_points, rng):
    """n_points uniform draws in each ball; centers have leading shape (m,)."""
    m, d = x0.shape
    shape = (m, n_points)
    t = t0[:, None] + r[:, None] ** alpha * rng.uniform(-1.0, 1.0, shape)
    v = v0[:, None, :] + r[:, None, None] * _uniform_unit_ball(rng, shape, d)
    pi = _antiderivative(path, t) - _antiderivative(path, np.broadcast_to(t0[:, None], shape))
    x = (
        x0[:, None, :]
        + _apply(pi, np.broadcast_to(v0[:, None, :], v.shape))
        + r[:, None, None] ** (1.0 + alpha) * _uniform_unit_ball(rng, shape, d)
    )
    return t, x, v


def _random_centers(path, n, rng, spread: float = 1.0):
    d = path.dim
    t0 = rng.uniform(-spread, spread, n)
    x0 = spread * rng.standard_normal((n, d))
    v0 = spread * rng.standard_normal((n, d))
    return t0, x0, v0


def engulfing_constant(path: CoefficientPath) -> float:
    """c1 = max(3^(1/alpha), 3, (3 + 4 |U|_inf)^(1/(1+alpha)))."""
    a = path.alpha
    u_sup = path.sup_norms()["U"]
    return max(3.0 ** (1.0 / a), 3.0, (3.0 + 4.0 * u_sup) ** (1.0 / (1.0 + a)))


def engulf_check(
    path: CoefficientPath,
    n_trials: int,
    r_range: Tuple[float, float],
    seed: int,
    c1: Optional[float] = None,
    n_points: int = 64,
    block_size: int = 2048,
) -> int:
    """
    Randomized check that intersecting balls Q_r(z0), Q_r(z0') satisfy
    Q_r(z0) inside Q_{c1 r}(z0').

    Each trial draws a center z0, a common point w in Q_r(z0), a second center
    z0' with w in Q_r(z0'), and tests ``n_points`` draws of Q_r(z0).

    Returns:
        int: Number of sampled points outside the dilated ball.
    """
    if n_trials < 1:
        raise ValidationError("n_trials must be >= 1", operation="kinetic_geometry.engulf_check")
    validate_range(r_range[0], r_range[1], "r_range", "kinetic_geometry.engulf_check")
    validate_positive(r_range[0], "r_range[0]", "kinetic_geometry.engulf_check")
    alpha = path.alpha
    c1 = engulfing_constant(path) if c1 is None else float(c1)
    log_lo, log_hi = math.log(r_range[0]), math.log(r_range[1])

    violations = 0
    for block, start in enumerate(range(0, n_trials, block_size)):
        m = min(block_size, n_trials - start)
        rng = block_rng(seed, block)
        r = np.exp(rng.uniform(log_lo, log_hi, m))
        t0, x0, v0 = _random_centers(path, m, rng)

        tw, xw, vw = (a[:, 0] for a in _sample_in_balls(path, alpha, t0, x0, v0, r, 1, rng))
        # second center: w - offset, with the offset drawn in the mirrored ball
        t1 = tw - r**alpha * rng.uniform(-1.0, 1.0, m)
        v1 = vw - r[:, None] * _uniform_unit_ball(rng, (m,), path.dim)
        pi = _antiderivative(path, tw) - _antiderivative(path, t1)
        x1 = xw - _apply(pi, v1) - r[:, None] ** (1.0 + alpha) * _uniform_unit_ball(
            rng, (m,), path.dim
        )

        t, x, v = _sample_in_balls(path, alpha, t0, x0, v0, r, n_points, rng)
        inside = _in_balls(
            path, alpha, t1[:, None], x1[:, None, :], v1[:, None, :], c1 * r[:, None], t, x, v
        )
        violations += int(np.count_nonzero(~inside))

    logger.info(f"Engulfing check: c1={c1:.4f}, {n_trials} trials, {violations} violations")
    return violations


def metric_ball_constant(path: CoefficientPath) -> float:
    """(4 + |U|_inf)^max(alpha, 1)."""
    return (4.0 + path.sup_norms()["U"]) ** max(path.alpha, 1.0)


def metric_ball_sandwich(
    path: CoefficientPath,
    n_trials: int,
    seed: int,
    r_range: Tuple[float, float] = (0.1, 2.0),
    c1: Optional[float] = None,
    n_points: int = 64,
) -> Dict[str, float]:
    """
    Randomized check of the inclusions {rho < r} inside Q_r inside {rho < c1 r}.

    Returns:
        dict with ``inner_violations``, ``outer_violations`` and ``inner_samples``
        (points of the enlarged ball that fell in the metric ball).
    """
    alpha = path.alpha
    c1 = metric_ball_constant(path) if c1 is None else float(c1)
    rng = block_rng(seed, 0)
    r = np.exp(rng.uniform(math.log(r_range[0]), math.log(r_range[1]), n_trials))
    t0, x0, v0 = _random_centers(path, n_trials, rng)
    T0 = np.broadcast_to(t0[:, None], (n_trials, n_points))
    X0 = np.broadcast_to(x0[:, None, :], (n_trials, n_points, path.dim))
    V0 = np.broadcast_to(v0[:, None, :], (n_trials, n_points, path.dim))

    t, x, v = _sample_in_balls(path, alpha, t0, x0, v0, r, n_points, rng)
    rho = _quasi_metric_arrays(path, alpha, T0, X0, V0, t, x, v)
    outer = int(np.count_nonzero(rho >= c1 * r[:, None]))

    t, x, v = _sample_in_balls(path, alpha, t0, x0, v0, 2.0 * r, n_points, rng)
    rho = _quasi_metric_arrays(path, alpha, T0, X0, V0, t, x, v)
    in_metric = rho < r[:, None]
    inside = _in_balls(path, alpha, t0[:, None], x0[:, None, :], v0[:, None, :], r[:, None], t, x, v)
    inner = int(np.count_nonzero(in_metric & ~inside))
    return {
        "inner_violations": inner,
        "outer_violations": outer,
        "inner_samples": int(np.count_nonzero(in_metric)),
        "c1": c1,
    }


def fit_quasi_triangle_constant(
    path: CoefficientPath,
    n_triples: int,
    seed: int,
    scale_range: Tuple[float, float] = (0.1, 10.0),
) -> float:
    """
    Empirical c0 = max rho(z0, z2) / (rho(z0, z1) + rho(z1, z2)) over random
    triples with log-uniform separations.
    """
    alpha, d = path.alpha, path.dim
    rng = block_rng(seed, 0)
    lo, hi = math.log(scale_range[0]), math.log(scale_range[1])

    def hop(t, x, v):
        s = np.exp(rng.uniform(lo, hi, n_triples))
        return (
            t + s**alpha * rng.uniform(-1.0, 1.0, n_triples),
            x + (s ** (1.0 + alpha))[:, None] * rng.standard_normal((n_triples, d)),
            v + s[:, None] * rng.standard_normal((n_triples, d)),
        )

    z0 = _random_centers(path, n_triples, rng)
    z1 = hop(*z0)
    z2 = hop(*z1)
    d01 = _quasi_metric_arrays(path, alpha, *z0, *z1)
    d12 = _quasi_metric_arrays(path, alpha, *z1, *z2)
    d02 = _quasi_metric_arrays(path, alpha, *z0, *z2)
    denom = d01 + d12
    mask = denom > 0
    return float(np.max(d02[mask] / denom[mask]))


# =============================================================================
# Ball quadrature and volume
# =============================================================================


def _ball_rule(dim: int, radius: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Offsets and weights of a product rule on the Euclidean ball B_radius in R^dim."""
    if dim == 1:
        nodes, weights = gauss_legendre(-radius, radius, n)
        return nodes[:, None], weights
    rho, w_rho = gauss_legendre(0.0, radius, n)
    if dim == 2:
        dirs, w_dirs = circle_rule(2 * n)
    else:
        dirs, w_dirs = sphere_rule(dim, sizes_3d=(n, 2 * n))
    offsets = (rho[:, None, None] * dirs[None, :, :]).reshape(-1, dim)
    weights = ((w_rho * rho ** (dim - 1))[:, None] * w_dirs[None, :]).ravel()
    return offsets, weights


def ball_quadrature(
    ball: KineticBall,
    func: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    n_nodes: int = 12,
) -> Tuple[float, float]:
    """
    Integral of func(t, x, v) over the ball by a tensor Gauss rule, with the
    time interval split at coefficient breakpoints.

    Args:
        func: Vectorized callable on t (n,), x (n, d), v (n, d).

    Returns:
        (integral, volume)
    """
    c = ball.center
    ht, hx, hv = ball.half_widths
    a, b = c.t - ht, c.t + ht
    edges = [a] + [bp for bp in ball.path.breakpoints if a < bp < b] + [b]
    xo, xw = _ball_rule(c.dim, hx, n_nodes)
    vo, vw = _ball_rule(c.dim, hv, n_nodes)

    total = volume = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        ts, wt = gauss_legendre(lo, hi, n_nodes)
        pi = _antiderivative(ball.path, ts) - _antiderivative(ball.path, np.full_like(ts, c.t))
        centres = c.x + _apply(pi, np.broadcast_to(c.v, (len(ts), c.dim)))
        T = np.repeat(ts, len(xw) * len(vw))
        X = (centres[:, None, None, :] + xo[None, :, None, :] + 0.0 * vo[None, None, :, :])
        V = np.broadcast_to(c.v + vo[None, None, :, :], X.shape)
        W = wt[:, None, None] * xw[None, :, None] * vw[None, None, :]
        values = np.asarray(func(T, X.reshape(-1, c.dim), V.reshape(-1, c.dim)), dtype=float)
        total += float(np.sum(W.ravel() * values))
        volume += float(np.sum(W))
    return total, volume


def ball_average(
    ball: KineticBall,
    func: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    n_nodes: int = 12,
) -> float:
    integral, volume = ball_quadrature(ball, func, n_nodes)
    return integral / volume


def ball_volume_fit(
    path: CoefficientPath,
    radii: Sequence[float] = (0.5, 1.0, 2.0, 4.0),
    n_samples: int = 2**16,
    seed: int = 0,
    center: Optional[KineticPoint] = None,
) -> Dict[str, float]:
    """
    Scrambled-Sobol volume of Q_r in a box adapted to the sheared ball, and the
    log-log slope of |Q_r| against r.

    Returns:
        dict with ``exponent``, ``expected`` = alpha + (2 + alpha) d, ``constant``
        and ``volumes``.
    """
    alpha, d = path.alpha, path.dim
    center = center or KineticPoint(0.0, np.zeros(d), np.ones(d))
    m = max(1, int(math.ceil(math.log2(n_samples))))
    sampler = qmc.Sobol(d=1 + 2 * d, scramble=True, seed=seed)
    unit = 2.0 * sampler.random_base2(m) - 1.0

    volumes = []
    for r in radii:
        ht, hx, hv = r**alpha, r ** (1.0 + alpha), r
        t = center.t + ht * unit[:, 0]
        pi = _antiderivative(path, t) - _antiderivative(path, np.full_like(t, center.t))
        v = center.v + hv * unit[:, 1 : 1 + d]
        x = center.x + _apply(pi, np.broadcast_to(center.v, v.shape)) + hx * unit[:, 1 + d :]
        inside = _in_balls(path, alpha, center.t, center.x, center.v, r, t, x, v)
        box = 2.0 * ht * (2.0 * hx) ** d * (2.0 * hv) ** d
        volumes.append(box * float(np.mean(inside)))

    fit = stats.linregress(np.log(radii), np.log(volumes))
    return {
        "exponent": float(fit.slope),
        "expected": alpha + (2.0 + alpha) * d,
        "constant": float(math.exp(fit.intercept)),
        "volumes": volumes,
    }


# =============================================================================
# Lattice operators
# =============================================================================


@dataclass(frozen=True, eq=False)
class KineticLattice:
    """
    Cell-centered data on a (t, x, v) lattice.

    Args:
        path: Coefficient path defining the balls.
        times: Time cell centers (n_t,).
        time_weights: Time cell lengths (n_t,).
        x_axes: d uniform position axes.
        v_axes: d uniform velocity axes.
        values: Array of shape (n_t, *x sizes, *v sizes).
    """

    path: CoefficientPath
    times: np.ndarray
    time_weights: np.ndarray
    x_axes: Tuple[np.ndarray, ...]
    v_axes: Tuple[np.ndarray, ...]
    values: np.ndarray
    _cells: Dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        op = "kinetic_geometry.KineticLattice"
        d = self.path.dim
        if len(self.x_axes) != d or len(self.v_axes) != d:
            raise ValidationError(f"expected {d} position and velocity axes", operation=op)
        times = np.asarray(self.times, dtype=float)
        shape = (len(times),) + tuple(len(a) for a in self.x_axes) + tuple(len(a) for a in self.v_axes)
        values = np.asarray(self.values, dtype=float)
        if values.shape != shape:
            raise ValidationError(f"values must have shape {shape}, got {values.shape}", operation=op)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "time_weights", np.asarray(self.time_weights, dtype=float))
        object.__setattr__(self, "values", values)

        grids = np.meshgrid(times, *self.x_axes, *self.v_axes, indexing="ij")
        spatial = 1.0
        for ax in (*self.x_axes, *self.v_axes):
            spatial *= ax[1] - ax[0] if len(ax) > 1 else 1.0
        t_flat = grids[0].ravel()
        self._cells.update(
            t=t_flat,
            x=np.stack([g.ravel() for g in grids[1 : 1 + d]], axis=1),
            v=np.stack([g.ravel() for g in grids[1 + d :]], axis=1),
            weight=np.broadcast_to(
                self.time_weights.reshape((-1,) + (1,) * (2 * d)), shape
            ).ravel() * spatial,
            F=_antiderivative(self.path, t_flat),
        )

    @property
    def dim(self) -> int:
        return self.path.dim

    def with_values(self, values: np.ndarray) -> "KineticLattice":
        return KineticLattice(
            self.path, self.times, self.time_weights, self.x_axes, self.v_axes, values
        )

    def ball_mask(self, z: KineticPoint, r: float) -> np.ndarray:
        c = self._cells
        alpha = self.path.alpha
        pi = c["F"] - _antiderivative(self.path, np.asarray(z.t))
        centre_x = z.x + _apply(pi, np.broadcast_to(z.v, c["x"].shape))
        return (
            (np.abs(c["t"] - z.t) < r**alpha)
            & (np.linalg.norm(c["v"] - z.v, axis=1) < r)
            & (np.linalg.norm(c["x"] - centre_x, axis=1) < r ** (1.0 + alpha))
        )

    def clipped(self, z: KineticPoint, r: float) -> bool:
        """True when Q_r(z) reaches past the lattice extent."""
        alpha = self.path.alpha
        ht, hx, hv = r**alpha, r ** (1.0 + alpha), r
        if z.t - ht < self.times[0] or z.t + ht > self.times[-1]:
            return True
        for a, ax in enumerate(self.v_axes):
            if z.v[a] - hv < ax[0] or z.v[a] + hv > ax[-1]:
                return True
        ends = np.array([z.t - ht, z.t + ht] + [b for b in self.path.breakpoints if abs(b - z.t) < ht])
        pi = _antiderivative(self.path, ends) - _antiderivative(self.path, np.full_like(ends, z.t))
        centres = z.x + _apply(pi, np.broadcast_to(z.v, (len(ends), self.dim)))
        for a, ax in enumerate(self.x_axes):
            if centres[:, a].min() - hx < ax[0] or centres[:, a].max() + hx > ax[-1]:
                return True
        return False


@dataclass(frozen=True)
class BallStatistic:
    """Supremum over a radius list with the maximizing radius and clip flag."""

    value: float
    radius: float
    clipped: bool
    n_cells: int


def default_radii(lattice: KineticLattice, n_radii: int = 24) -> np.ndarray:
    """Log-spaced radii from one velocity cell to half the velocity extent."""
    ax = lattice.v_axes[0]
    cell = ax[1] - ax[0]
    extent = 0.5 * (ax[-1] - ax[0])
    return np.logspace(math.log10(cell), math.log10(extent), n_radii)


def _ball_sup(lattice: KineticLattice, z: KineticPoint, radii, statistic) -> BallStatistic:
    flat = lattice.values.ravel()
    w = lattice._cells["weight"]
    best = BallStatistic(0.0, float("nan"), False, 0)
    clipped = False
    for r in radii:
        mask = lattice.ball_mask(z, r)
        n = int(np.count_nonzero(mask))
        clipped = clipped or lattice.clipped(z, r)
        if n == 0:
            continue
        value = statistic(flat[mask], w[mask])
        if value > best.value or best.n_cells == 0:
            best = BallStatistic(float(value), float(r), False, n)
    return BallStatistic(best.value, best.radius, clipped, best.n_cells)


def _mean_abs(values, weights):
    return float(np.sum(weights * np.abs(values)) / np.sum(weights))


def _mean_deviation(values, weights):
    mean = np.sum(weights * values) / np.sum(weights)
    return float(np.sum(weights * np.abs(values - mean)) / np.sum(weights))


def maximal_function(lattice: KineticLattice, z: KineticPoint, radii=None) -> BallStatistic:
    """
    Kinetic Hardy-Littlewood maximal function: the largest ball average of |f|
    over the radius list. Balls with no cell centers are skipped.
    """
    radii = default_radii(lattice) if radii is None else radii
    return _ball_sup(lattice, z, radii, _mean_abs)


def sharp_function(lattice: KineticLattice, z: KineticPoint, radii=None) -> BallStatistic:
    """Sharp function: the largest ball average of |f - f_Q| over the radius list."""
    radii = default_radii(lattice) if radii is None else radii
    return _ball_sup(lattice, z, radii, _mean_deviation)


def bmo_seminorm(
    lattice: KineticLattice,
    sample_points: Sequence[KineticPoint],
    radii=None,
    workers: int = None,
) -> BallStatistic:
    """
    Maximum of the sharp function over sample points. Points whose balls are
    clipped by the lattice are excluded unless every point is clipped.
    """
    results = ordered_map(lambda z: sharp_function(lattice, z, radii), list(sample_points), workers)
    usable = [res for res in results if not res.clipped] or results
    best = max(usable, key=lambda res: res.value)
    return BallStatistic(best.value, best.radius, any(res.clipped for res in usable), best.n_cells)


def lattice_from_field(
    field_values: np.ndarray,
    times: np.ndarray,
    time_weights: np.ndarray,
    phys_axes: Sequence[np.ndarray],
    path: CoefficientPath,
) -> KineticLattice:
    """
    Wrap a physical reconstruction (``inverse_transform_grid`` output with the
    ``physical_grid`` axes) as lattice data.
    """
    d = path.dim
    if len(phys_axes) != 2 * d:
        raise ValidationError(
            f"expected {2 * d} physical axes", operation="kinetic_geometry.lattice_from_field"
        )
    return KineticLattice(
        path=path,
        times=times,
        time_weights=time_weights,
        x_axes=tuple(phys_axes[:d]),
        v_axes=tuple(phys_axes[d:]),
        values=np.asarray(field_values, dtype=float),
    )


def lattice_points(lattice: KineticLattice, n_points: int, seed: int, margin: float = 0.25) -> List[KineticPoint]:
    """Random sample points in the inner part of the lattice."""
    rng = block_rng(seed, 0)

    def draw(ax):
        lo, hi = ax[0], ax[-1]
        pad = margin * (hi - lo)
        return rng.uniform(lo + pad, hi - pad)

    points = []
    for _ in range(n_points):
        t = draw(lattice.times)
        x = np.array([draw(ax) for ax in lattice.x_axes])
        v = np.array([draw(ax) for ax in lattice.v_axes])
        points.append(KineticPoint(t, x, v))
    return points


def geometry_summary(path: CoefficientPath, n_trials: int, n_triples: int, seed: int) -> Dict[str, float]:
    """Run the randomized geometry checks with their default constants."""
    with log_performance(logger, "geometry checks"):
        sandwich = metric_ball_sandwich(path, n_trials, seed)
        return {
            "engulf_violations": engulf_check(path, n_trials, (0.1, 2.0), seed),
            "engulf_control_violations": engulf_check(
                path, max(1, n_trials // 10), (0.1, 2.0), seed, c1=1.01
            ),
            "sandwich_inner_violations": sandwich["inner_violations"],
            "sandwich_outer_violations": sandwich["outer_violations"],
            "quasi_triangle_c0": fit_quasi_triangle_constant(path, n_triples, seed),
            "quasi_triangle_c0_alt": fit_quasi_triangle_constant(path, n_triples, seed + 1),
        }
