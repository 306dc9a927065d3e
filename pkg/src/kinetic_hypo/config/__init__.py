"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)
"""

from .settings import (
    DEFAULT_QUADRATURE,
    NUMERICAL_TOLERANCES,
    ACCEPTANCE_THRESHOLDS,
    REPORT_COLUMNS,
    EXIT_CODES,
    SCHEMA_VERSION,
)

__all__ = [
    "DEFAULT_QUADRATURE",
    "NUMERICAL_TOLERANCES",
    "ACCEPTANCE_THRESHOLDS",
    "REPORT_COLUMNS",
    "EXIT_CODES",
    "SCHEMA_VERSION",
]
