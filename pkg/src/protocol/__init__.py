"""
Protocol Module

Filtering POVM and the localization protocols for wires and webs
"""

from .filter import FilterPOVM, build_filter
from .localization import (
    LocalizationResult,
    apply_frame_correction,
    decode_output,
    localize_general,
    localize_simple,
    required_trials,
    required_wire_length,
    trial_bound,
    unprepared_result,
)
from .web import joint_output_fidelity, localize_web

__all__ = [
    "FilterPOVM",
    "LocalizationResult",
    "apply_frame_correction",
    "build_filter",
    "decode_output",
    "joint_output_fidelity",
    "localize_general",
    "localize_simple",
    "localize_web",
    "required_trials",
    "required_wire_length",
    "trial_bound",
    "unprepared_result",
]
