"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Experiment parameter data model.

This module defines immutable data classes for quadrature sizes, Monte Carlo
runs, collision and geometry checks, output options and the complete
experiment configuration read from a JSON document.
"""

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from kinetic_hypo.config.settings import DEFAULT_QUADRATURE
from kinetic_hypo.core.coefficients import CoefficientPath
from kinetic_hypo.core.exceptions import (
    ConfigurationError,
    KineticHypoError,
    validate_file_exists,
)
from kinetic_hypo.core.sources import SourceSpec


def _round_value(x):
    """Round numeric values to avoid floating point issues."""
    return round(x, 9) if isinstance(x, float) else x


def _freeze_value(v):
    """Convert mutable structures to immutable tuples."""
    if isinstance(v, dict):
        return tuple(sorted((k, _freeze_value(vv)) for k, vv in v.items()))
    if isinstance(v, (list, tuple)):
        return tuple(_freeze_value(x) for x in v)
    return _round_value(v)


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Immutable quadrature sizes for one pipeline run.

    Field meanings are documented with ``DEFAULT_QUADRATURE``. ``freq_scale_x``
    and ``freq_scale_v`` override the automatic Gauss-Hermite scales.

    Example:
        >>> quad = QuadratureSpec().scaled(2.0)
        >>> quad.n_freq
        96
    """

    n_freq: int = DEFAULT_QUADRATURE["n_freq"]
    n_symbol: int = DEFAULT_QUADRATURE["n_symbol"]
    resolvent_tol: float = DEFAULT_QUADRATURE["resolvent_tol"]
    n_window: int = DEFAULT_QUADRATURE["n_window"]
    n_tail: int = DEFAULT_QUADRATURE["n_tail"]
    n_phys: int = DEFAULT_QUADRATURE["n_phys"]
    phys_extent: float = DEFAULT_QUADRATURE["phys_extent"]
    n_jump_inner: int = DEFAULT_QUADRATURE["n_jump_inner"]
    n_jump_panels: int = DEFAULT_QUADRATURE["n_jump_panels"]
    n_panel_nodes: int = DEFAULT_QUADRATURE["n_panel_nodes"]
    sphere_nodes_2d: int = DEFAULT_QUADRATURE["sphere_nodes_2d"]
    sphere_nodes_3d: Tuple[int, int] = DEFAULT_QUADRATURE["sphere_nodes_3d"]
    n_collision_radial: int = DEFAULT_QUADRATURE["n_collision_radial"]
    n_collision_angular: int = DEFAULT_QUADRATURE["n_collision_angular"]
    n_collision_hyper: int = DEFAULT_QUADRATURE["n_collision_hyper"]
    n_time_weak: int = DEFAULT_QUADRATURE["n_time_weak"]
    freq_scale_x: Optional[float] = None
    freq_scale_v: Optional[float] = None

    def __post_init__(self):
        """
        Validate sizes on creation.

        Raises:
            ValueError: If a node count is below 1 or a tolerance is not positive.
        """
        object.__setattr__(self, "sphere_nodes_3d", tuple(int(n) for n in self.sphere_nodes_3d))
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name.startswith("n_") or f.name == "sphere_nodes_2d":
                if int(value) != value or value < 1:
                    raise ValueError(f"{f.name} must be a positive integer, got {value}")
        if self.resolvent_tol <= 0 or self.phys_extent <= 0:
            raise ValueError("resolvent_tol and phys_extent must be positive")
        for name in ("freq_scale_x", "freq_scale_v"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive when given")

    def scaled(self, factor: float) -> "QuadratureSpec":
        """Copy with every node count multiplied by ``factor`` (at least one node)."""
        if factor <= 0:
            raise ValueError(f"quadrature scale must be positive, got {factor}")
        updates = {}
        for f in fields(self):
            if f.name.startswith("n_") or f.name == "sphere_nodes_2d":
                updates[f.name] = max(1, int(round(getattr(self, f.name) * factor)))
        updates["sphere_nodes_3d"] = tuple(
            max(2, int(round(n * factor))) for n in self.sphere_nodes_3d
        )
        return replace(self, **updates)

    def refined(self) -> "QuadratureSpec":
        """Doubled node counts, used by the refinement statistics."""
        return self.scaled(2.0)

    def cache_key(self) -> Tuple:
        return tuple(_freeze_value(getattr(self, f.name)) for f in fields(self))

    def with_updates(self, **kwargs) -> "QuadratureSpec":
        return replace(self, **kwargs)

    def to_export_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def describe(self) -> str:
        return (
            f"freq nodes/axis: {self.n_freq} | s-nodes: {self.n_window}+{self.n_tail} | "
            f"phys grid: {self.n_phys} | jump: {self.n_jump_inner}/{self.n_jump_panels}"
        )


@dataclass(frozen=True)
class MonteCarloSpec:
    """
    Monte Carlo run parameters.

    Args:
        n_paths: Sample count per ensemble.
        n_steps: Time steps per coefficient piece.
        block_size: Paths per RNG block; blocks are the unit of parallel work.
        n_probes: Frequency probes of the characteristic-function comparison.
        horizons: Horizons t - s of the moment fit.
        q_values: Moment orders of the moment fit.
        scaling_r: Radii of the scaling-law check.
    """

    n_paths: int = 20000
    n_steps: int = 8
    block_size: int = 4096
    n_probes: int = 30
    horizons: Tuple[float, ...] = (0.01, 0.1, 1.0, 10.0)
    q_values: Tuple[float, ...] = (0.4,)
    scaling_r: Tuple[float, ...] = (1.0, 2.0)

    def __post_init__(self):
        object.__setattr__(self, "horizons", tuple(float(h) for h in self.horizons))
        object.__setattr__(self, "q_values", tuple(float(q) for q in self.q_values))
        object.__setattr__(self, "scaling_r", tuple(float(r) for r in self.scaling_r))
        if self.n_paths < 1 or self.n_steps < 1 or self.block_size < 1:
            raise ValueError("n_paths, n_steps and block_size must be positive")
        if any(h <= 0 for h in self.horizons):
            raise ValueError("horizons must be positive")

    def with_updates(self, **kwargs) -> "MonteCarloSpec":
        return replace(self, **kwargs)

    def to_export_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class BoltzmannSpec:
    """Collision check parameters: kernel exponents, dimension and probe count."""

    gamma: float = 0.0
    alpha: float = 0.5
    dim: int = 2
    n_probes: int = 5
    n_functions: int = 5

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"collision checks need dim 2 or 3, got {self.dim}")
        if self.n_probes < 1 or self.n_functions < 1:
            raise ValueError("n_probes and n_functions must be positive")

    def to_export_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class GeometrySpec:
    """Geometry check parameters."""

    n_trials: int = 10000
    r_range: Tuple[float, float] = (0.1, 2.0)
    n_radii: int = 24
    n_triples: int = 100000
    volume_radii: Tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)
    volume_samples: int = 2**16

    def __post_init__(self):
        object.__setattr__(self, "r_range", tuple(float(r) for r in self.r_range))
        object.__setattr__(self, "volume_radii", tuple(float(r) for r in self.volume_radii))
        lo, hi = self.r_range
        if not 0 < lo <= hi:
            raise ValueError(f"r_range must satisfy 0 < low <= high, got {self.r_range}")
        if self.n_trials < 1 or self.n_radii < 1 or self.n_triples < 1:
            raise ValueError("trial counts must be positive")

    def to_export_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class OutputSpec:
    """Output directory, report format and plot switch."""

    out_dir: str = "results"
    format: str = "csv"
    plots: bool = True

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be 'csv' or 'json', got {self.format!r}")

    def to_export_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """
    Complete experiment description.

    Args:
        path: Coefficient path (with sandwich envelopes).
        source: Source term.
        lambdas: Resolvent parameters (all > 0).
        p_values: Exponents of the L^p norms, each in (1, inf).
        alphas: Stability indices of the sweep; empty means the path's alpha only.
        quadrature: Quadrature sizes.
        monte_carlo: Monte Carlo parameters.
        boltzmann: Collision check parameters.
        geometry: Geometry check parameters.
        output: Output options.
        seed: Master seed.
        scaling_r: Radii of the scaling-identity check.
        scaling_t0: Ball time center of the scaling-identity check.
    """

    path: CoefficientPath
    source: SourceSpec
    lambdas: Tuple[float, ...] = (1.0,)
    p_values: Tuple[float, ...] = (2.0,)
    alphas: Tuple[float, ...] = ()
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    monte_carlo: MonteCarloSpec = field(default_factory=MonteCarloSpec)
    boltzmann: BoltzmannSpec = field(default_factory=BoltzmannSpec)
    geometry: GeometrySpec = field(default_factory=GeometrySpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    seed: int = 20240601
    scaling_r: Tuple[float, ...] = (1.0, 2.0)
    scaling_t0: float = 0.0

    def __post_init__(self):
        """
        Validate the configuration on creation.

        Raises:
            ValueError: If lambdas, p-values or envelopes are invalid.
        """
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))
        object.__setattr__(self, "p_values", tuple(float(x) for x in self.p_values))
        object.__setattr__(self, "alphas", tuple(float(x) for x in self.alphas))
        object.__setattr__(self, "scaling_r", tuple(float(x) for x in self.scaling_r))
        if not self.lambdas:
            raise ValueError("at least one lambda is required")
        if any(lam <= 0 for lam in self.lambdas):
            raise ValueError(f"lambdas must be positive, got {self.lambdas}")
        if any(not (1.0 < p < float("inf")) for p in self.p_values):
            raise ValueError(f"p-values must lie in (1, inf), got {self.p_values}")
        if any(not (0.0 < a < 2.0) for a in self.alphas):
            raise ValueError(f"alphas must lie in (0, 2), got {self.alphas}")
        if self.path.envelopes is None:
            raise ValueError("the coefficient path needs envelopes {nu1, nu2}")
        if self.source.dim != self.path.dim:
            raise ValueError("source and path dimensions differ")

    @property
    def dim(self) -> int:
        return self.path.dim

    def with_updates(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **kwargs)

    def cache_key(self) -> Tuple:
        return (
            _freeze_value(self.path.to_dict()),
            _freeze_value(self.source.to_dict()),
            _freeze_value(self.lambdas),
            _freeze_value(self.p_values),
            self.quadrature.cache_key(),
            self.seed,
        )

    def to_export_dict(self) -> Dict[str, Any]:
        return {
            "path": self.path.to_dict(),
            "source": self.source.to_dict(),
            "lambdas": list(self.lambdas),
            "p_values": list(self.p_values),
            "alphas": list(self.alphas),
            "quadrature": self.quadrature.to_export_dict(),
            "monte_carlo": self.monte_carlo.to_export_dict(),
            "boltzmann": self.boltzmann.to_export_dict(),
            "geometry": self.geometry.to_export_dict(),
            "output": self.output.to_export_dict(),
            "seed": self.seed,
            "scaling": {"r": list(self.scaling_r), "t0": self.scaling_t0},
        }

    def describe(self) -> str:
        return " | ".join(
            [
                f"d={self.dim}, alpha={self.path.alpha:g}",
                f"lambdas={list(self.lambdas)}",
                f"p={list(self.p_values)}",
                f"pieces={self.path.n_pieces}",
                self.quadrature.describe(),
            ]
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """
        Build a configuration from a parsed JSON document.

        Raises:
            ConfigurationError: If a section is missing or invalid.
        """
        try:
            path = CoefficientPath.from_dict(data["path"])
            source = SourceSpec.from_dict(data["source"], path.dim)
            quad = QuadratureSpec(**data.get("quadrature", {}))
            scaling = data.get("scaling", {})
            return cls(
                path=path,
                source=source,
                lambdas=tuple(data.get("lambdas", (1.0,))),
                p_values=tuple(data.get("p_values", (2.0,))),
                alphas=tuple(data.get("alphas", ())),
                quadrature=quad,
                monte_carlo=MonteCarloSpec(**data.get("monte_carlo", {})),
                boltzmann=BoltzmannSpec(**data.get("boltzmann", {})),
                geometry=GeometrySpec(**data.get("geometry", {})),
                output=OutputSpec(**data.get("output", {})),
                seed=int(data.get("seed", 20240601)),
                scaling_r=tuple(scaling.get("r", (1.0, 2.0))),
                scaling_t0=float(scaling.get("t0", 0.0)),
            )
        except KeyError as e:
            raise ConfigurationError(
                f"configuration is missing section {e}", operation="params.from_dict"
            )
        except (TypeError, ValueError, KineticHypoError) as e:
            raise ConfigurationError(
                f"invalid configuration: {e}", cause=e, operation="params.from_dict"
            )

    @classmethod
    def load(cls, file_path: str) -> "ExperimentConfig":
        """
        Read a JSON configuration file.

        Raises:
            FileError: If the file does not exist.
            ConfigurationError: If the document is not valid JSON or invalid.
        """
        validate_file_exists(file_path)
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(
                f"{file_path} is not valid JSON: {e}", cause=e, operation="params.load"
            )
        config = cls.from_dict(data)
        if "output" not in data:
            config = config.with_updates(
                output=OutputSpec(out_dir=str(Path(file_path).parent / "results"))
            )
        return config
