"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)
"""

"""
Numerical core: stable symbols, coefficient paths, the kinetic semigroup,
path sampling, collision operators and kinetic geometry.
"""

from .coefficients import CoefficientPath
from .params import ExperimentConfig, QuadratureSpec
from .sources import SourceSpec
from .stable_levy import StableMeasure

__all__ = ["CoefficientPath", "ExperimentConfig", "QuadratureSpec", "SourceSpec", "StableMeasure"]
