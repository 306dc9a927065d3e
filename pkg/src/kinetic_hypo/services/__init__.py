"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)
"""

from .data_manager import DataManager
from .regularity_service import RegularityService
from .validation_service import ValidationService
from .sweep_runner import SweepRunner
from .plot_service import PlotService

__all__ = [
    "DataManager",
    "RegularityService",
    "ValidationService",
    "SweepRunner",
    "PlotService",
]
