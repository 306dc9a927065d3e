"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)
"""

__version__ = "0.1.0"

from . import core
