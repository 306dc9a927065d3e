"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Symmetric alpha-stable Levy measures and their symbols.

A measure is given by its stability index alpha and a spherical measure made of
antipodal atom pairs plus an isotropic part. The symbol of the Levy operator
with matrix sigma is

    psi(xi) = c_alpha * [ iso_weight * M(d, alpha) * |sigma^T xi|^alpha
                          + sum_j w_j |<sigma^T xi, theta_j>|^alpha ],

where c_alpha = 2 int_0^inf (1 - cos s) s^(-1-alpha) ds and M(d, alpha) is the
spherical moment int |theta_1|^alpha d(theta). Both constants are computed once
by adaptive quadrature and cached.
"""

import math
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Tuple

import numpy as np
from scipy import integrate, special

from kinetic_hypo.config.logging import get_logger, log_cache_operation
from kinetic_hypo.config.settings import NUMERICAL_TOLERANCES
from kinetic_hypo.core.exceptions import (
    DomainError,
    ValidationError,
    validate_finite,
    validate_open_interval,
)
from kinetic_hypo.core.quadrature import sphere_area

logger = get_logger(__name__)

_DIR_TOL = NUMERICAL_TOLERANCES["direction"]
_CONST_TOL = NUMERICAL_TOLERANCES["constant_quad"]

_constant_cache: Dict[Tuple, float] = {}
_cache_lock = threading.Lock()


# =============================================================================
# Stability constants
# =============================================================================


def _cached(key: Tuple, compute: Callable[[], float]) -> float:
    with _cache_lock:
        if key in _constant_cache:
            log_cache_operation(logger, "get", str(key), hit=True)
            return _constant_cache[key]
    value = compute()
    with _cache_lock:
        _constant_cache[key] = value
    log_cache_operation(logger, "set", str(key), size=len(_constant_cache))
    return value


def stable_constant(alpha: float) -> float:
    """
    One-dimensional constant c_alpha = 2 int_0^inf (1 - cos s) / s^(1+alpha) ds.

    The integral is split at s = 1: the inner part uses an algebraic weight
    s^(1-alpha) against the smooth factor (1 - cos s)/s^2, the outer part a
    Fourier-weighted quadrature for the cosine tail.

    Args:
        alpha (float): Stability index in (0, 2).

    Returns:
        float: c_alpha (equals pi at alpha = 1).

    Raises:
        DomainError: If alpha is outside (0, 2).
    """
    validate_open_interval(alpha, 0.0, 2.0, "alpha", "stable_levy.stable_constant")

    def compute() -> float:
        def smooth(s):
            return 0.5 if s < 1e-4 else (1.0 - math.cos(s)) / (s * s)

        inner, _ = integrate.quad(
            smooth, 0.0, 1.0, weight="alg", wvar=(1.0 - alpha, 0.0),
            epsabs=_CONST_TOL, epsrel=_CONST_TOL,
        )
        tail_cos, _ = integrate.quad(
            lambda s: s ** (-1.0 - alpha), 1.0, np.inf, weight="cos", wvar=1.0,
            epsabs=_CONST_TOL,
        )
        return 2.0 * (inner + 1.0 / alpha - tail_cos)

    return _cached(("c_alpha", round(alpha, 15)), compute)


def stable_constant_closed_form(alpha: float) -> float:
    """Closed form 2 Gamma(1-alpha) cos(pi alpha/2) / alpha, with the limit pi at alpha = 1."""
    validate_open_interval(
        alpha, 0.0, 2.0, "alpha", "stable_levy.stable_constant_closed_form"
    )
    if abs(alpha - 1.0) < 1e-12:
        return math.pi
    return 2.0 * special.gamma(1.0 - alpha) * math.cos(0.5 * math.pi * alpha) / alpha


def sphere_abs_moment(dim: int, alpha: float) -> float:
    """
    Spherical moment M(d, alpha) = int_{S^(d-1)} |theta_1|^alpha d(theta).

    For d = 1 the sphere is {+1, -1} with counting measure and M = 2. For d >= 2
    the integral reduces to |S^(d-2)| * int_0^pi |cos phi|^alpha sin^(d-2) phi dphi.
    """
    validate_open_interval(alpha, 0.0, 2.0, "alpha", "stable_levy.sphere_abs_moment")
    if dim == 1:
        return 2.0

    def compute() -> float:
        # |cos|^alpha has an algebraic zero at pi/2
        half, _ = integrate.quad(
            lambda p: math.sin(p) ** (dim - 2) * (math.cos(p) / (0.5 * math.pi - p)) ** alpha
            if p < 0.5 * math.pi - 1e-12 else 1.0,
            0.0, 0.5 * math.pi, weight="alg", wvar=(0.0, alpha),
            epsabs=_CONST_TOL, epsrel=_CONST_TOL,
        )
        return sphere_area(dim - 1) * 2.0 * half

    return _cached(("sphere_moment", dim, round(alpha, 15)), compute)


def sphere_abs_moment_closed_form(dim: int, alpha: float) -> float:
    """Closed form 2 pi^((d-1)/2) Gamma((alpha+1)/2) / Gamma((d+alpha)/2)."""
    return float(
        2.0 * math.pi ** ((dim - 1) / 2.0)
        * special.gamma((alpha + 1.0) / 2.0)
        / special.gamma((dim + alpha) / 2.0)
    )


def frac_constant(d: int, alpha: float) -> float:
    """
    Constant c_{d,alpha} of the fractional Laplacian symbol c_{d,alpha}|xi|^alpha
    for the measure |x|^(-d-alpha) dx.

    Args:
        d (int): Dimension in {1, 2, 3}.
        alpha (float): Stability index in (0, 2).

    Returns:
        float: c_{d,alpha} = c_alpha * M(d, alpha).

    Raises:
        DomainError: If alpha is outside (0, 2) or d is unsupported.
    """
    validate_open_interval(alpha, 0.0, 2.0, "alpha", "stable_levy.frac_constant")
    if d not in (1, 2, 3):
        raise DomainError(
            f"dimension must be 1, 2 or 3, got {d}", operation="stable_levy.frac_constant"
        )
    return stable_constant(alpha) * sphere_abs_moment(d, alpha)


# =============================================================================
# Measures and symbols
# =============================================================================


@dataclass(frozen=True)
class StableMeasure:
    """
    Symmetric alpha-stable Levy measure with spectral measure
    ``iso_weight * (surface measure) + sum_j w_j delta_{theta_j}``.

    Args:
        alpha: Stability index in (0, 2).
        dim: Spatial dimension d >= 1.
        atoms: Sequence of (direction, weight); every direction must have its
            antipode with the same weight.
        iso_weight: Coefficient of the uniform surface measure.
    """

    alpha: float
    dim: int
    atoms: Tuple[Tuple[Tuple[float, ...], float], ...] = ()
    iso_weight: float = 0.0

    def __post_init__(self):
        op = "stable_levy.StableMeasure"
        validate_open_interval(self.alpha, 0.0, 2.0, "alpha", op)
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValidationError(f"dim must be a positive integer, got {self.dim}", operation=op)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "dim", int(self.dim))

        normalized = []
        for entry in self.atoms:
            direction, weight = entry
            vec = np.asarray(direction, dtype=float).reshape(-1)
            if vec.shape[0] != self.dim:
                raise ValidationError(
                    f"atom direction {tuple(vec)} does not have dimension {self.dim}",
                    operation=op,
                )
            norm = np.linalg.norm(vec)
            if not np.isfinite(norm) or abs(norm - 1.0) > 1e-9:
                raise ValidationError(
                    f"atom direction {tuple(vec)} is not a unit vector", operation=op
                )
            if not np.isfinite(weight) or weight < 0:
                raise ValidationError(f"atom weight must be >= 0, got {weight}", operation=op)
            normalized.append((tuple(float(c) for c in vec / norm), float(weight)))
        object.__setattr__(self, "atoms", tuple(normalized))

        if not np.isfinite(self.iso_weight) or self.iso_weight < 0:
            raise ValidationError(
                f"iso_weight must be >= 0, got {self.iso_weight}", operation=op
            )
        object.__setattr__(self, "iso_weight", float(self.iso_weight))

        if self.total_mass <= 0:
            raise ValidationError("spherical measure has zero total mass", operation=op)

        # every atom must have its antipode
        dirs, weights = self.directions, self.weights
        for i in range(len(weights)):
            gap = np.max(np.abs(dirs + dirs[i]), axis=1)
            partners = np.where(gap <= _DIR_TOL)[0]
            if not np.any(np.abs(weights[partners] - weights[i]) <= 1e-12 * max(1.0, weights[i])):
                raise ValidationError(
                    f"atom {dirs[i].tolist()} has no antipodal partner of equal weight",
                    operation=op,
                )

    @property
    def directions(self) -> np.ndarray:
        if not self.atoms:
            return np.zeros((0, self.dim))
        return np.array([a[0] for a in self.atoms], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.array([a[1] for a in self.atoms], dtype=float)

    @property
    def total_mass(self) -> float:
        """Total spherical mass iso_weight*|S^(d-1)| + sum of atom weights."""
        return self.iso_weight * sphere_area(self.dim) + float(np.sum(self.weights))

    def scaled(self, factor: float) -> "StableMeasure":
        """Measure multiplied by a nonnegative factor."""
        return StableMeasure(
            alpha=self.alpha,
            dim=self.dim,
            atoms=tuple((d, w * factor) for d, w in self.atoms),
            iso_weight=self.iso_weight * factor,
        )

    def directional_mass(self, theta0: np.ndarray) -> np.ndarray:
        """
        int |<theta0, theta>|^alpha Sigma(d theta) for unit directions theta0 of shape (..., d).
        """
        theta0 = np.asarray(theta0, dtype=float)
        value = self.iso_weight * sphere_abs_moment(self.dim, self.alpha) * np.ones(theta0.shape[:-1])
        if self.atoms:
            proj = np.abs(theta0 @ self.directions.T) ** self.alpha
            value = value + proj @ self.weights
        return value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "dim": self.dim,
            "atoms": [[list(d), w] for d, w in self.atoms],
            "iso_weight": self.iso_weight,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StableMeasure":
        return cls(
            alpha=data["alpha"],
            dim=data["dim"],
            atoms=tuple((tuple(d), w) for d, w in data.get("atoms", [])),
            iso_weight=data.get("iso_weight", 0.0),
        )

    @classmethod
    def isotropic(cls, alpha: float, dim: int, iso_weight: float = 1.0) -> "StableMeasure":
        return cls(alpha=alpha, dim=dim, iso_weight=iso_weight)

    @classmethod
    def axis_pairs(cls, alpha: float, dim: int, weights: Iterable[float]) -> "StableMeasure":
        """Atoms on +-e_k with the given per-axis weights."""
        atoms = []
        for k, w in enumerate(weights):
            e = np.zeros(dim)
            e[k] = 1.0
            atoms.append((tuple(e), w))
            atoms.append((tuple(-e), w))
        return cls(alpha=alpha, dim=dim, atoms=tuple(atoms))


def measure_symbol(measure: StableMeasure, zeta: np.ndarray) -> np.ndarray:
    """
    Symbol with identity matrix, psi^nu_I(zeta), for frequency rows of shape (..., d).
    """
    zeta = np.asarray(zeta, dtype=float)
    alpha = measure.alpha
    c = stable_constant(alpha)
    value = np.zeros(zeta.shape[:-1])
    if measure.iso_weight > 0:
        value = value + measure.iso_weight * sphere_abs_moment(measure.dim, alpha) * (
            np.linalg.norm(zeta, axis=-1) ** alpha
        )
    if measure.atoms:
        value = value + (np.abs(zeta @ measure.directions.T) ** alpha) @ measure.weights
    return c * value


@dataclass(frozen=True)
class LevySymbol:
    """
    Symbol psi^nu_sigma of the Levy operator with measure ``measure`` and matrix ``matrix``.

    ``one_d_constant`` caches c_alpha; it is filled in automatically.
    """

    measure: StableMeasure
    matrix: np.ndarray = None
    one_d_constant: float = field(default=None)

    def __post_init__(self):
        d = self.measure.dim
        matrix = np.eye(d) if self.matrix is None else np.asarray(self.matrix, dtype=float)
        if matrix.shape != (d, d):
            raise ValidationError(
                f"symbol matrix must be {d}x{d}, got {matrix.shape}",
                operation="stable_levy.LevySymbol",
            )
        object.__setattr__(self, "matrix", matrix)
        if self.one_d_constant is None:
            object.__setattr__(self, "one_d_constant", stable_constant(self.measure.alpha))

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        return eval_symbol(self, xi)


def eval_symbol(sym: LevySymbol, xi) -> np.ndarray:
    """
    Evaluate psi^nu_sigma(xi) = psi^nu_I(sigma^T xi).

    Args:
        sym (LevySymbol): Symbol descriptor.
        xi: Frequency of shape (d,) or rows of shape (..., d).

    Returns:
        Nonnegative float (or array for row input).

    Raises:
        ValidationError: If xi contains non-finite entries.
    """
    xi = np.asarray(xi, dtype=float)
    validate_finite(xi, "xi", "stable_levy.eval_symbol")
    value = measure_symbol(sym.measure, xi @ sym.matrix)
    return float(value) if np.ndim(value) == 0 else value


def second_difference(f: Callable, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second-order difference f(x + y) + f(x - y) - 2 f(x)."""
    return f(x + y) + f(x - y) - 2.0 * f(x)


def first_difference(f: Callable, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """First-order difference f(x + y) - f(x)."""
    return f(x + y) - f(x)


def difference_operator(f: Callable, x: np.ndarray, y: np.ndarray, order: int = 2) -> np.ndarray:
    """
    Difference operators of the jump integrals.

    order 1: f(x + y) - f(x); order 2: f(x + y) + f(x - y) - 2 f(x).
    The second-order difference is O(|y|^2) for smooth f, which makes
    int delta^(2) |y|^(-d-alpha) dy absolutely convergent near y = 0.
    """
    if order == 1:
        return first_difference(f, x, y)
    if order == 2:
        return second_difference(f, x, y)
    raise ValidationError(
        f"difference order must be 1 or 2, got {order}",
        operation="stable_levy.difference_operator",
    )


# =============================================================================
# Non-degeneracy and ordering
# =============================================================================


def _scan_directions(dim: int, grid_size: int, measure: StableMeasure) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0]])
    if dim == 2:
        phi = np.pi * np.arange(grid_size) / grid_size
        scans = [np.stack([np.cos(phi), np.sin(phi)], axis=1)]
        # directions perpendicular to atoms are where the minimum can sit
        if measure.atoms:
            dirs = measure.directions
            scans.append(np.stack([-dirs[:, 1], dirs[:, 0]], axis=1))
        return np.vstack(scans)
    # Fibonacci points on the sphere plus the coordinate axes
    k = np.arange(grid_size) + 0.5
    z = 1.0 - 2.0 * k / grid_size
    phi = np.pi * (1.0 + 5.0**0.5) * k
    r = np.sqrt(1.0 - z**2)
    pts = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    scans = [pts, np.eye(dim)]
    if measure.atoms:
        # a purely atomic mass vanishes only on normals of planes spanned by atoms;
        # pairing with the axes covers measures supported on one line
        dirs = np.vstack([measure.directions, np.eye(dim)])
        i, j = np.triu_indices(len(dirs), k=1)
        normals = np.cross(dirs[i], dirs[j])
        norms = np.linalg.norm(normals, axis=1)
        keep = norms > NUMERICAL_TOLERANCES["direction"]
        scans.append(normals[keep] / norms[keep, None])
    return np.vstack(scans)


def check_nondegenerate(m: StableMeasure, grid_size: int = 256) -> Tuple[bool, float]:
    """
    Minimum directional mass min_theta0 int |theta0 . theta|^alpha Sigma(d theta).

    Args:
        m (StableMeasure): Measure to test.
        grid_size (int): Number of probe directions (>= 64).

    Returns:
        (is_nondegenerate, kappa_low)
    """
    if grid_size < 64:
        raise ValidationError(
            f"grid_size must be >= 64, got {grid_size}",
            operation="stable_levy.check_nondegenerate",
        )
    mass = m.directional_mass(_scan_directions(m.dim, grid_size, m))
    kappa_low = float(np.min(mass))
    return kappa_low > NUMERICAL_TOLERANCES["nondegeneracy"], kappa_low


def symbol_bounds(sym: LevySymbol, grid_size: int = 1024) -> Dict[str, float]:
    """
    Two-sided constants of psi^nu_sigma(xi) against |xi|^alpha.

    The sampled directional minimum and maximum are widened by a factor 2 to
    cover directions between scans.

    Returns:
        dict with keys ``lower``, ``upper`` and ``kappa1`` (the symmetric constant
        with kappa1 |xi|^alpha <= psi <= |xi|^alpha / kappa1).
    """
    m = sym.measure
    mass = m.directional_mass(_scan_directions(m.dim, grid_size, m))
    alpha = m.alpha
    c = sym.one_d_constant
    norm_sigma = np.linalg.norm(sym.matrix, 2)
    norm_inv = np.linalg.norm(np.linalg.inv(sym.matrix), 2)
    lower = 0.5 * c * float(np.min(mass)) * norm_inv ** (-alpha)
    upper = 2.0 * c * float(np.max(mass)) * norm_sigma**alpha
    return {"lower": lower, "upper": upper, "kappa1": min(lower, 1.0 / upper)}


def measure_leq(m1: StableMeasure, m2: StableMeasure) -> bool:
    """
    Sufficient parametric test of nu1(A) <= nu2(A) for all Borel A.

    Raises:
        ValidationError: If the measures have different alpha or dimension.
    """
    if m1.dim != m2.dim or abs(m1.alpha - m2.alpha) > 1e-15:
        raise ValidationError(
            "measures must share alpha and dimension",
            details={"alpha": (m1.alpha, m2.alpha), "dim": (m1.dim, m2.dim)},
            operation="stable_levy.measure_leq",
        )
    if m1.iso_weight > m2.iso_weight:
        return False
    dirs2, weights2 = m2.directions, m2.weights
    for direction, weight in m1.atoms:
        if weight == 0:
            continue
        if len(weights2) == 0:
            return False
        gap = np.max(np.abs(dirs2 - np.asarray(direction)), axis=1)
        match = np.where(gap <= _DIR_TOL)[0]
        if match.size == 0 or weight > float(np.sum(weights2[match])) * (1 + 1e-12):
            return False
    return True


def symbol_table(alphas: List[float], dims: List[int]) -> List[Dict[str, float]]:
    """Constants c_alpha (quadrature and closed form) and c_{d,alpha} for a grid."""
    rows = []
    for d in dims:
        for a in alphas:
            rows.append(
                {
                    "alpha": a,
                    "dim": d,
                    "c_alpha": stable_constant(a),
                    "c_alpha_closed": stable_constant_closed_form(a),
                    "c_d_alpha": frac_constant(d, a),
                    "kappa_low": check_nondegenerate(StableMeasure.isotropic(a, d))[1],
                }
            )
    return rows
