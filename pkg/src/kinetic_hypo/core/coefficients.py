"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Piecewise-constant coefficient paths (sigma_t, U_t, nu_t) and the flow matrix.

Value j of a path applies on [t_j, t_{j+1}); value 0 also applies before t_0
and the last value after t_K. The flow matrix Pi_{s,t} = int_s^t U_r dr is
evaluated exactly from an antiderivative tabulated at the breakpoints.
"""

from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from kinetic_hypo.config.logging import get_logger
from kinetic_hypo.config.settings import NUMERICAL_TOLERANCES
from kinetic_hypo.core.exceptions import (
    DegeneracyError,
    ValidationError,
    validate_positive,
    validate_range,
)
from kinetic_hypo.core.stable_levy import StableMeasure, measure_leq

logger = get_logger(__name__)


def _as_matrix(value, dim: int, name: str) -> np.ndarray:
    """Accept nested lists, flat row-major lists or scalars (d = 1)."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = arr * np.eye(dim) if dim == 1 else None
    elif arr.ndim == 1 and arr.size == dim * dim:
        arr = arr.reshape(dim, dim)
    if arr is None or arr.shape != (dim, dim):
        raise ValidationError(
            f"{name} must be a {dim}x{dim} matrix",
            details={"value": np.asarray(value).tolist()},
            operation="coefficients.CoefficientPath",
        )
    return arr


@dataclass(frozen=True, eq=False)
class CoefficientPath:
    """
    Piecewise-constant coefficients on the breakpoint mesh t_0 < ... < t_K.

    Args:
        breakpoints: Increasing breakpoint times.
        sigma: K+1 invertible d x d matrices, one per interval.
        U: K+1 invertible d x d matrices, one per interval.
        nu: K+1 stable measures sharing alpha and dimension.
        envelopes: Optional (nu1, nu2) bounding every nu from below and above.
    """

    breakpoints: Tuple[float, ...]
    sigma: Tuple[np.ndarray, ...]
    U: Tuple[np.ndarray, ...]
    nu: Tuple[StableMeasure, ...]
    envelopes: Optional[Tuple[StableMeasure, StableMeasure]] = None

    def __post_init__(self):
        op = "coefficients.CoefficientPath"
        bp = tuple(float(t) for t in self.breakpoints)
        if len(bp) == 0:
            raise ValidationError("at least one breakpoint is required", operation=op)
        if any(b <= a for a, b in zip(bp, bp[1:])):
            raise ValidationError(
                "breakpoints must be strictly increasing", details={"breakpoints": bp}, operation=op
            )
        object.__setattr__(self, "breakpoints", bp)

        n_values = len(bp)
        for name in ("sigma", "U", "nu"):
            if len(getattr(self, name)) != n_values:
                raise ValidationError(
                    f"{name} needs {n_values} values for {n_values} breakpoints, "
                    f"got {len(getattr(self, name))}",
                    operation=op,
                )

        nu = tuple(self.nu)
        dim, alpha = nu[0].dim, nu[0].alpha
        if any(m.dim != dim or m.alpha != alpha for m in nu):
            raise ValidationError("all measures must share alpha and dimension", operation=op)
        object.__setattr__(self, "nu", nu)

        max_cond = NUMERICAL_TOLERANCES["condition_number"]
        for name in ("sigma", "U"):
            mats = tuple(_as_matrix(m, dim, name) for m in getattr(self, name))
            for j, m in enumerate(mats):
                cond = np.linalg.cond(m)
                if not np.isfinite(cond) or cond > max_cond:
                    raise DegeneracyError(
                        f"{name}[{j}] is singular or ill-conditioned (cond={cond:.3g})",
                        operation=op,
                    )
            object.__setattr__(self, name, mats)

        if self.envelopes is not None:
            nu1, nu2 = self.envelopes
            if nu1.dim != dim or nu2.dim != dim or nu1.alpha != alpha or nu2.alpha != alpha:
                raise ValidationError(
                    "envelope measures must share alpha and dimension with the path",
                    operation=op,
                )
            object.__setattr__(self, "envelopes", (nu1, nu2))

        # antiderivative of U at the breakpoints, F(t_0) = 0
        F = [np.zeros((dim, dim))]
        for j in range(1, n_values):
            F.append(F[-1] + (bp[j] - bp[j - 1]) * self.U[j - 1])
        object.__setattr__(self, "_flow_table", tuple(F))

    # -------------------------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.nu[0].dim

    @property
    def alpha(self) -> float:
        return self.nu[0].alpha

    @property
    def n_pieces(self) -> int:
        return len(self.breakpoints)

    def piece_index(self, r) -> np.ndarray:
        """Index of the value in force at time r (scalar or array)."""
        idx = np.searchsorted(np.asarray(self.breakpoints), r, side="right") - 1
        return np.clip(idx, 0, self.n_pieces - 1)

    def sigma_at(self, r: float) -> np.ndarray:
        return self.sigma[int(self.piece_index(r))]

    def U_at(self, r: float) -> np.ndarray:
        return self.U[int(self.piece_index(r))]

    def nu_at(self, r: float) -> StableMeasure:
        return self.nu[int(self.piece_index(r))]

    def antiderivative(self, t: float) -> np.ndarray:
        """F(t) = int_{t_0}^t U_r dr (negative orientation for t < t_0)."""
        j = int(self.piece_index(t))
        return self._flow_table[j] + (t - self.breakpoints[j]) * self.U[j]

    def pieces(self, s: float, t: float) -> List[Tuple[float, float, int]]:
        """Split [s, t] at interior breakpoints into (a, b, value index) triples."""
        if t <= s:
            return []
        cuts = [b for b in self.breakpoints if s < b < t]
        edges = [s] + cuts + [t]
        return [
            (a, b, int(self.piece_index(0.5 * (a + b))))
            for a, b in zip(edges[:-1], edges[1:])
        ]

    def sup_norms(self) -> Dict[str, float]:
        """Operator 2-norm suprema of sigma, sigma^-1 and U over all pieces."""
        return {
            "sigma": max(np.linalg.norm(m, 2) for m in self.sigma),
            "sigma_inv": max(np.linalg.norm(np.linalg.inv(m), 2) for m in self.sigma),
            "U": max(np.linalg.norm(m, 2) for m in self.U),
        }

    # -------------------------------------------------------------------------

    @classmethod
    def constant(
        cls,
        measure: StableMeasure,
        sigma=None,
        U=None,
        envelopes: Optional[Tuple[StableMeasure, StableMeasure]] = None,
    ) -> "CoefficientPath":
        """Path with a single value for all times."""
        d = measure.dim
        return cls(
            breakpoints=(0.0,),
            sigma=(np.eye(d) if sigma is None else sigma,),
            U=(np.eye(d) if U is None else U,),
            nu=(measure,),
            envelopes=envelopes,
        )

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "breakpoints": list(self.breakpoints),
            "sigma": [m.tolist() for m in self.sigma],
            "U": [m.tolist() for m in self.U],
            "nu": [m.to_dict() for m in self.nu],
        }
        if self.envelopes is not None:
            data["envelopes"] = {
                "nu1": self.envelopes[0].to_dict(),
                "nu2": self.envelopes[1].to_dict(),
            }
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CoefficientPath":
        """
        Build a path from the config document.

        A single ``nu`` object (instead of a list) is broadcast to all pieces.
        """
        try:
            breakpoints = data["breakpoints"]
            nu_data = data["nu"]
        except KeyError as e:
            raise ValidationError(
                f"coefficient path is missing field {e}", operation="coefficients.from_dict"
            )
        n = len(breakpoints)
        if isinstance(nu_data, dict):
            nu_data = [nu_data] * n
        nu = tuple(StableMeasure.from_dict(m) for m in nu_data)
        d = nu[0].dim
        sigma = data.get("sigma", [np.eye(d).tolist()] * n)
        U = data.get("U", [np.eye(d).tolist()] * n)
        envelopes = None
        if "envelopes" in data:
            envelopes = (
                StableMeasure.from_dict(data["envelopes"]["nu1"]),
                StableMeasure.from_dict(data["envelopes"]["nu2"]),
            )
        return cls(
            breakpoints=tuple(breakpoints),
            sigma=tuple(sigma),
            U=tuple(U),
            nu=nu,
            envelopes=envelopes,
        )


# =============================================================================
# Operations
# =============================================================================


def flow_matrix(path: CoefficientPath, s: float, t: float) -> np.ndarray:
    """
    Flow matrix Pi_{s,t} = int_s^t U_r dr.

    For s > t the result is -Pi_{t,s}.

    Examples:
        >>> path = CoefficientPath.constant(StableMeasure.isotropic(1.0, 1))
        >>> flow_matrix(path, 0.0, 2.0)
        array([[2.]])
    """
    return path.antiderivative(t) - path.antiderivative(s)


def flow_matrices(path: CoefficientPath, s: float, times: np.ndarray) -> np.ndarray:
    """Stack of Pi_{s,t} for every t in ``times``, shape (n, d, d)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    idx = path.piece_index(times)
    table = np.stack(path._flow_table)
    U = np.stack(path.U)
    starts = np.asarray(path.breakpoints)
    F = table[idx] + (times - starts[idx])[:, None, None] * U[idx]
    return F - path.antiderivative(s)[None, :, :]


def default_lattice(
    path: CoefficientPath, n_gaps: int = 25, min_gap: float = 1e-3, max_gap: float = 1e3
) -> List[Tuple[float, float]]:
    """
    (s, t) pairs with log-spaced gaps t - s, anchored at the first breakpoint and
    straddling every breakpoint.
    """
    gaps = np.logspace(np.log10(min_gap), np.log10(max_gap), n_gaps)
    pairs = []
    for anchor in path.breakpoints:
        for g in gaps:
            pairs.append((anchor, anchor + g))
            pairs.append((anchor - 0.5 * g, anchor + 0.5 * g))
    return pairs


def kappa0(path: CoefficientPath, lattice: Sequence[Tuple[float, float]] = None) -> float:
    """
    Empirical non-degeneracy constant
    kappa0 = |sigma|_inf + |sigma^-1|_inf + |U|_inf + sup (t - s) |Pi_{s,t}^-1|.

    All norms are induced infinity norms (maximum absolute row sum).

    Args:
        path (CoefficientPath): Coefficient path.
        lattice: (s, t) pairs with s < t; defaults to ``default_lattice(path)``.

    Returns:
        float: kappa0.

    Raises:
        ValidationError: If the lattice is empty.
        DegeneracyError: If Pi_{s,t} is singular on a lattice pair.
    """
    lattice = default_lattice(path) if lattice is None else list(lattice)
    if not lattice:
        raise ValidationError("lattice must not be empty", operation="coefficients.kappa0")

    inf = lambda m: float(np.linalg.norm(m, np.inf))
    sup_sigma = max(inf(m) for m in path.sigma)
    sup_sigma_inv = max(inf(np.linalg.inv(m)) for m in path.sigma)
    sup_u = max(inf(m) for m in path.U)
    floor = NUMERICAL_TOLERANCES["flow_singular"]
    worst = 0.0
    for s, t in lattice:
        validate_range(s, t, "lattice pair", "coefficients.kappa0")
        if t == s:
            continue
        pi = flow_matrix(path, s, t)
        singular_values = np.linalg.svd(pi, compute_uv=False)
        if singular_values[-1] <= floor * max(sup_u * (t - s), 1e-300):
            raise DegeneracyError(
                f"flow matrix is singular on (s, t) = ({s}, {t})",
                details={"s": s, "t": t, "smallest_singular_value": float(singular_values[-1])},
                operation="coefficients.kappa0",
            )
        worst = max(worst, (t - s) * inf(np.linalg.inv(pi)))
    return sup_sigma + sup_sigma_inv + sup_u + worst


def flow_norm_bound_check(
    path: CoefficientPath, lattice: Sequence[Tuple[float, float]] = None
) -> float:
    """
    Largest ratio |Pi_{s,t}| / (|U|_inf (t - s)) over the lattice; the bound holds
    when the result is <= 1.
    """
    lattice = default_lattice(path) if lattice is None else list(lattice)
    u_sup = path.sup_norms()["U"]
    ratios = [
        np.linalg.norm(flow_matrix(path, s, t), 2) / (u_sup * (t - s))
        for s, t in lattice
        if t > s
    ]
    return float(max(ratios)) if ratios else 0.0


def time_rescale(path: CoefficientPath, r: float, t0: float) -> CoefficientPath:
    """
    Path r -> value at r^alpha * s + t0, i.e. breakpoints mapped by t -> (t - t0) / r^alpha.

    The inverse map is ``time_rescale(path, 1 / r, -t0 / r**alpha)``.
    """
    validate_positive(r, "r", "coefficients.time_rescale")
    scale = r**path.alpha
    return CoefficientPath(
        breakpoints=tuple((t - t0) / scale for t in path.breakpoints),
        sigma=path.sigma,
        U=path.U,
        nu=path.nu,
        envelopes=path.envelopes,
    )


def check_sandwich(
    path: CoefficientPath,
    nu1: Optional[StableMeasure] = None,
    nu2: Optional[StableMeasure] = None,
) -> List[bool]:
    """
    Per-piece result of nu1 <= nu_s <= nu2.

    The envelopes default to ``path.envelopes``.

    Raises:
        ValidationError: If no envelopes are available.
    """
    if nu1 is None or nu2 is None:
        if path.envelopes is None:
            raise ValidationError(
                "no envelope measures supplied for the sandwich check",
                operation="coefficients.check_sandwich",
            )
        nu1, nu2 = path.envelopes
    results = [measure_leq(nu1, m) and measure_leq(m, nu2) for m in path.nu]
    logger.debug(f"Sandwich check per piece: {results}")
    return results


def with_alpha(path: CoefficientPath, alpha: float) -> CoefficientPath:
    """Same path with every measure (envelopes included) moved to stability index alpha."""

    def move(m: StableMeasure) -> StableMeasure:
        return replace(m, alpha=alpha)

    envelopes = None if path.envelopes is None else tuple(move(m) for m in path.envelopes)
    return CoefficientPath(
        breakpoints=path.breakpoints,
        sigma=path.sigma,
        U=path.U,
        nu=tuple(move(m) for m in path.nu),
        envelopes=envelopes,
    )
