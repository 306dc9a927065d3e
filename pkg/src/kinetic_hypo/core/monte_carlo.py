"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Path sampling of the kinetic stable SDE and statistical checks of its law.

K_{s,t} = (X_{s,t}, V_{s,t}) with V = int sigma_r dL_r and X = int Pi_{r,t} sigma_r dL_r.
Increments of L are drawn exactly (Chambers-Mallows-Stuck per atom,
sub-Gaussian subordination for the isotropic part), calibrated so that
E exp(i xi . dL) = exp(-dt psi(xi)). Paths are generated in blocks, each
with its own Philox stream keyed by (seed, block index), so ensembles do not
depend on the worker count.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from kinetic_hypo.config.logging import get_logger, log_performance
from kinetic_hypo.core.coefficients import CoefficientPath, flow_matrix, time_rescale
from kinetic_hypo.core.exceptions import (
    ValidationError,
    validate_positive,
    validate_range,
)
from kinetic_hypo.core.parallel import ordered_map
from kinetic_hypo.core.stable_levy import StableMeasure, sphere_abs_moment, stable_constant

logger = get_logger(__name__)


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based generator for one block of paths."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


# =============================================================================
# Stable variates
# =============================================================================


def sample_symmetric_stable(alpha: float, size, rng: np.random.Generator) -> np.ndarray:
    """
    Chambers-Mallows-Stuck draws with E exp(i u S) = exp(-|u|^alpha).
    """
    u = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, size)
    w = rng.standard_exponential(size)
    if alpha == 1.0:
        return np.tan(u)
    return (
        np.sin(alpha * u)
        / np.cos(u) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha)
    )


def sample_positive_stable(a: float, size, rng: np.random.Generator) -> np.ndarray:
    """
    Kanter draws of a positive a-stable variable, 0 < a < 1, with E exp(-l A) = exp(-l^a).
    """
    if not 0.0 < a < 1.0:
        raise ValidationError(
            f"positive stable index must lie in (0, 1), got {a}",
            operation="monte_carlo.sample_positive_stable",
        )
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    return (
        np.sin(a * u)
        / np.sin(u) ** (1.0 / a)
        * (np.sin((1.0 - a) * u) / e) ** ((1.0 - a) / a)
    )


def sample_stable_increment(
    measure: StableMeasure, dt: float, rng: np.random.Generator, size: int = 1
) -> np.ndarray:
    """
    Increments of the stable process over a step of length dt, shape (size, d).

    Every atom (theta_j, w_j) contributes theta_j S_j with S_j symmetric stable of
    scale (c_alpha w_j dt)^(1/alpha). The isotropic part is sqrt(2 A) K^(1/alpha) G
    with A positive (alpha/2)-stable and G standard Gaussian, where
    K = c_alpha iso_weight M_{d,alpha} dt; in d = 1 a single CMS draw is used.

    Raises:
        ValidationError: If dt <= 0.
    """
    validate_positive(dt, "dt", "monte_carlo.sample_stable_increment")
    alpha, d = measure.alpha, measure.dim
    c = stable_constant(alpha)
    out = np.zeros((size, d))

    if measure.atoms:
        scales = (c * measure.weights * dt) ** (1.0 / alpha)
        draws = sample_symmetric_stable(alpha, (size, len(scales)), rng) * scales
        out += draws @ measure.directions

    if measure.iso_weight > 0:
        K = c * measure.iso_weight * sphere_abs_moment(d, alpha) * dt
        if d == 1:
            out[:, 0] += K ** (1.0 / alpha) * sample_symmetric_stable(alpha, size, rng)
        elif alpha == 2.0:
            out += math.sqrt(2.0 * K) * rng.standard_normal((size, d))
        else:
            A = sample_positive_stable(0.5 * alpha, size, rng)
            G = rng.standard_normal((size, d))
            out += (K ** (1.0 / alpha) * np.sqrt(2.0 * A))[:, None] * G
    return out


# =============================================================================
# Ensembles
# =============================================================================


@dataclass(frozen=True, eq=False)
class SampleEnsemble:
    """
    Draws of K_{s,t}.

    Args:
        X: Position components (N, d).
        V: Velocity components (N, d).
        s, t: Time interval.
        n_steps: Steps of the time mesh.
        seed: Root seed.
        path: Serialized coefficient path.
    """

    X: np.ndarray
    V: np.ndarray
    s: float
    t: float
    n_steps: int
    seed: int
    path: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        op = "monte_carlo.SampleEnsemble"
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        V = np.atleast_2d(np.asarray(self.V, dtype=float))
        if X.shape != V.shape or X.shape[0] < 1:
            raise ValidationError(
                f"X and V must share a non-empty shape, got {X.shape} and {V.shape}", operation=op
            )
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(V))):
            raise ValidationError("ensemble contains non-finite samples", operation=op)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "V", V)

    @property
    def n_paths(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def stderr(self) -> float:
        """Standard error bound of the symmetrized characteristic function."""
        return 1.0 / math.sqrt(2.0 * self.n_paths)

    def header(self) -> Dict[str, Any]:
        return {"s": self.s, "t": self.t, "seed": self.seed, "n_steps": self.n_steps}

    def to_array(self) -> np.ndarray:
        """Columns (X..., V...)."""
        return np.hstack([self.X, self.V])

    @classmethod
    def from_array(cls, data: np.ndarray, header: Dict[str, Any]) -> "SampleEnsemble":
        data = np.atleast_2d(np.asarray(data, dtype=float))
        d = data.shape[1] // 2
        return cls(
            X=data[:, :d],
            V=data[:, d:],
            s=float(header["s"]),
            t=float(header["t"]),
            n_steps=int(header["n_steps"]),
            seed=int(header["seed"]),
        )


def step_mesh(path: CoefficientPath, s: float, t: float, n_steps: int) -> np.ndarray:
    """
    Uniform mesh of [s, t]; interior breakpoints must be mesh points.

    Raises:
        ValidationError: If the mesh does not refine the breakpoints.
    """
    op = "monte_carlo.step_mesh"
    if n_steps < 1:
        raise ValidationError(f"n_steps must be >= 1, got {n_steps}", operation=op)
    mesh = np.linspace(s, t, n_steps + 1)
    slack = 1e-12 * max(1.0, abs(s), abs(t))
    for b in path.breakpoints:
        if s < b < t and np.min(np.abs(mesh - b)) > slack:
            raise ValidationError(
                f"time mesh with {n_steps} steps does not contain breakpoint {b}",
                details={"s": s, "t": t, "breakpoint": b},
                operation=op,
            )
    return mesh


def _sample_block(path, mesh, t, n, seed, block):
    rng = block_rng(seed, block)
    d = path.dim
    X = np.zeros((n, d))
    V = np.zeros((n, d))
    for left, right in zip(mesh[:-1], mesh[1:]):
        mid = 0.5 * (left + right)
        j = int(path.piece_index(mid))
        jump = sample_stable_increment(path.nu[j], right - left, rng, n) @ path.sigma[j].T
        V += jump
        X += jump @ flow_matrix(path, mid, t).T
    return X, V


def sample_K(
    path: CoefficientPath,
    s: float,
    t: float,
    n_paths: int,
    n_steps: int,
    seed: int,
    block_size: int = 4096,
    workers: Optional[int] = None,
) -> SampleEnsemble:
    """
    Sample K_{s,t} by Riemann-Stieltjes sums over a breakpoint-aligned mesh.

    Each step uses the coefficient value in force on the step and the flow
    matrix Pi_{m,t} at the step midpoint m. V is exact in law; the error in the
    law of X is second order in the step.

    Raises:
        ValidationError: If s > t, n_paths < 1, or the mesh misses a breakpoint.
    """
    op = "monte_carlo.sample_K"
    validate_range(s, t, "sampling interval", op)
    if n_paths < 1:
        raise ValidationError(f"n_paths must be >= 1, got {n_paths}", operation=op)
    d = path.dim
    if t == s:
        zeros = np.zeros((n_paths, d))
        return SampleEnsemble(zeros, zeros.copy(), s, t, n_steps, seed, path.to_dict())

    mesh = step_mesh(path, s, t, n_steps)
    sizes = [min(block_size, n_paths - start) for start in range(0, n_paths, block_size)]
    with log_performance(logger, f"sample_K ({n_paths} paths, {n_steps} steps)"):
        blocks = ordered_map(
            lambda b: _sample_block(path, mesh, t, sizes[b], seed, b),
            list(range(len(sizes))),
            workers,
        )
    X = np.vstack([b[0] for b in blocks])
    V = np.vstack([b[1] for b in blocks])
    return SampleEnsemble(X, V, s, t, n_steps, seed, path.to_dict())


def mc_char(ensemble: SampleEnsemble, xi, eta):
    """
    Symmetrized empirical characteristic function E cos(xi . X + eta . V).

    Averaging over the ensemble and its negation makes the estimate real and
    invariant under (xi, eta) -> (-xi, -eta). The standard error is
    ``ensemble.stderr``.

    Returns:
        float for a single frequency, array for rows (P, d).
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    single = xi.ndim == 1
    xi, eta = np.atleast_2d(xi), np.atleast_2d(eta)
    phase = ensemble.X @ xi.T + ensemble.V @ eta.T
    value = np.mean(np.cos(phase), axis=0)
    return float(value[0]) if single else value


# =============================================================================
# Law checks
# =============================================================================


def moments_of_flow(
    path: CoefficientPath,
    q: float,
    horizons: Sequence[float],
    n_paths: int,
    seed: int,
    n_steps: int = 8,
    s: float = 0.0,
    workers: Optional[int] = None,
) -> Dict[str, Tuple[float, float, float]]:
    """
    Log-log fits of E|V_{s,s+h}|^q and E|X_{s,s+h}|^q against h.

    Returns:
        dict with ``v`` and ``x`` entries, each (exponent, intercept, stderr).

    Raises:
        ValidationError: If q is not in (0, alpha) or the horizons span less
            than two decades.
    """
    op = "monte_carlo.moments_of_flow"
    alpha = path.alpha
    if not 0.0 < q < alpha:
        raise ValidationError(
            f"moment order q must lie in (0, alpha={alpha}), got {q}", operation=op
        )
    horizons = np.asarray(sorted(horizons), dtype=float)
    if horizons[0] <= 0 or horizons[-1] / horizons[0] < 100.0:
        raise ValidationError("horizons must be positive and span at least two decades", operation=op)

    moments_v, moments_x = [], []
    for i, h in enumerate(horizons):
        ens = sample_K(path, s, s + h, n_paths, n_steps, seed + i, workers=workers)
        moments_v.append(np.mean(np.linalg.norm(ens.V, axis=1) ** q))
        moments_x.append(np.mean(np.linalg.norm(ens.X, axis=1) ** q))

    result = {}
    for key, values in (("v", moments_v), ("x", moments_x)):
        fit = stats.linregress(np.log(horizons), np.log(values))
        result[key] = (float(fit.slope), float(fit.intercept), float(fit.stderr))
    logger.info(
        f"Moment exponents q={q}: v={result['v'][0]:.4f} (expected {q / alpha:.4f}), "
        f"x={result['x'][0]:.4f} (expected {q * (1 + 1 / alpha):.4f})"
    )
    return result


def moment_scaling_fit(
    path: CoefficientPath,
    q: float,
    horizons: Sequence[float],
    n_paths: int,
    seed: int = 0,
    n_steps: int = 8,
    workers: Optional[int] = None,
) -> Tuple[float, float, float]:
    """(exponent, intercept, stderr) of log E|V_{s,s+h}|^q against log h."""
    return moments_of_flow(path, q, horizons, n_paths, seed, n_steps, workers=workers)["v"]


def scaling_law_check(
    path: CoefficientPath,
    r: float,
    t0: float,
    probes: np.ndarray,
    n_paths: int,
    seed: int,
    n_steps: int = 8,
    x_exponent: Optional[float] = None,
    workers: Optional[int] = None,
) -> float:
    """
    Compare the law of K_{t0, t0 + r^alpha} with (r^(1+alpha) X~, r V~), where
    K~ = K_{0,1} under ``time_rescale(path, r, t0)``.

    Args:
        probes: Frequency rows (P, 2d).
        x_exponent: Power of r applied to X~; defaults to 1 + alpha. Passing 1
            gives the negative control.

    Returns:
        float: Maximum |difference| of the two empirical characteristic functions.
    """
    validate_positive(r, "r", "monte_carlo.scaling_law_check")
    alpha = path.alpha
    x_power = 1.0 + alpha if x_exponent is None else x_exponent
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    d = probes.shape[1] // 2
    xi, eta = probes[:, :d], probes[:, d:]

    rescaled = time_rescale(path, r, t0)
    original = sample_K(path, t0, t0 + r**alpha, n_paths, n_steps, seed, workers=workers)
    scaled = sample_K(rescaled, 0.0, 1.0, n_paths, n_steps, seed + 1, workers=workers)

    lhs = mc_char(original, xi, eta)
    rhs = mc_char(scaled, r**x_power * xi, r * eta)
    return float(np.max(np.abs(lhs - rhs)))


def two_sample_char_check(
    first: SampleEnsemble, second: SampleEnsemble, probes: np.ndarray, significance: float = 1e-3
) -> Dict[str, float]:
    """
    Two-sample comparison of empirical characteristic functions at probes.

    The critical value is Bonferroni-corrected over the probes.

    Returns:
        dict with ``max_z``, ``critical`` and ``passed`` (1.0 or 0.0).
    """
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    d = probes.shape[1] // 2
    a = mc_char(first, probes[:, :d], probes[:, d:])
    b = mc_char(second, probes[:, :d], probes[:, d:])
    scale = math.hypot(first.stderr, second.stderr)
    max_z = float(np.max(np.abs(a - b)) / scale)
    critical = float(stats.norm.isf(significance / (2.0 * len(probes))))
    return {"max_z": max_z, "critical": critical, "passed": float(max_z <= critical)}


def char_probes(dim: int, n_probes: int, seed: int, radius: float = 2.0) -> np.ndarray:
    """Random frequency probes (n_probes, 2d) uniform in the box [-radius, radius]^(2d)."""
    rng = block_rng(seed, 10**6)
    return rng.uniform(-radius, radius, (n_probes, 2 * dim))
