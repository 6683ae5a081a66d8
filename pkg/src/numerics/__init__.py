"""
Numerics Module

Small dense complex linear algebra shared by every other subpackage
"""

from .tolerances import TOL, Tolerances

__all__ = ["TOL", "Tolerances"]
