"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Shared fixtures: the d = 1, alpha = 1 reference instance and reduced quadrature
sizes that keep the default test run short.
"""

from pathlib import Path

import pytest

from kinetic_hypo.core.coefficients import CoefficientPath
from kinetic_hypo.core.params import ExperimentConfig, MonteCarloSpec, QuadratureSpec
from kinetic_hypo.core.sources import SourceSpec
from kinetic_hypo.core.stable_levy import StableMeasure

CONFIG_DIR = Path(__file__).parent.parent / "configs"


def make_path(alpha: float = 1.0, dim: int = 1, **kwargs) -> CoefficientPath:
    """Constant isotropic path with sandwich envelopes 0.5 and 2 times the measure."""
    return CoefficientPath.constant(
        StableMeasure.isotropic(alpha, dim),
        envelopes=(StableMeasure.isotropic(alpha, dim, 0.5), StableMeasure.isotropic(alpha, dim, 2.0)),
        **kwargs,
    )


def make_source(dim: int = 1, **kwargs) -> SourceSpec:
    values = dict(dim=dim, center_freq=[0.0] * (2 * dim), bandwidth=1.0, time_window=(0.0, 1.0))
    values.update(kwargs)
    return SourceSpec(**values)


@pytest.fixture
def iso_path():
    """d = 1, alpha = 1, sigma = U = 1, isotropic measure with psi(xi) = 2 pi |xi|."""
    return make_path()


@pytest.fixture
def two_piece_path():
    """U = 1 on [0, 1) and U = 2 on [1, inf)."""
    m = StableMeasure.isotropic(1.0, 1)
    return CoefficientPath(
        breakpoints=(0.0, 1.0),
        sigma=([[1.0]], [[1.0]]),
        U=([[1.0]], [[2.0]]),
        nu=(m, m),
        envelopes=(StableMeasure.isotropic(1.0, 1, 0.5), StableMeasure.isotropic(1.0, 1, 2.0)),
    )


@pytest.fixture
def packet():
    """Centered Gaussian packet with unit bandwidth on the window [0, 1]."""
    return make_source()


@pytest.fixture
def small_quad():
    return QuadratureSpec(n_freq=24, n_window=8, n_tail=12, n_phys=32, n_symbol=8)


@pytest.fixture
def small_config(iso_path, packet, small_quad):
    return ExperimentConfig(
        path=iso_path,
        source=packet,
        lambdas=(0.1, 1.0, 10.0, 100.0),
        quadrature=small_quad,
        monte_carlo=MonteCarloSpec(n_paths=4000, n_steps=4, n_probes=10, block_size=1000),
    )


@pytest.fixture
def min_config_file():
    path = CONFIG_DIR / "min.json"
    if not path.exists():
        raise AssertionError(f"Bundled configuration not found: {path}")
    return str(path)
