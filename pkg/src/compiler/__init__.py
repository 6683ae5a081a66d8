"""
Compiler Module

Measurement patterns for single-qubit rotations, state preparation and the
localization basis changes, the runtime executor, and web preparation
"""

from .executor import branch_operator, run_pattern
from .families import PhaseFamily, phase_family
from .pattern import (
    MeasurementPattern,
    PatternContext,
    PatternStep,
    check_pattern,
    identity_pattern,
    pattern_from_text,
    pattern_to_text,
)
from .rotations import (
    MAX_PATTERN_SITES,
    attempts_for,
    compile_prep,
    compile_rotation,
    compile_V,
    max_rotation_length,
)
from .web import CouplingGate, LocalGate, WebCircuit, WebPreparation, compile_web_prep, run_web_preparation

__all__ = [
    "MAX_PATTERN_SITES",
    "CouplingGate",
    "LocalGate",
    "MeasurementPattern",
    "PatternContext",
    "PatternStep",
    "PhaseFamily",
    "WebCircuit",
    "WebPreparation",
    "attempts_for",
    "branch_operator",
    "check_pattern",
    "compile_V",
    "compile_prep",
    "compile_rotation",
    "compile_web_prep",
    "identity_pattern",
    "max_rotation_length",
    "pattern_from_text",
    "pattern_to_text",
    "phase_family",
    "run_pattern",
    "run_web_preparation",
]
