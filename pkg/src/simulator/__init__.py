"""
Simulator Module

Exact measurement engine over retained physical sites and correlation
spaces, with a dense state-vector oracle for cross-validation
"""

from .measurement import MeasurementOp, PauliFrame, Site, pauli_measurement
from .network import Network
from .oracle import oracle_check, oracle_site_density
from .rng import shot_seed
from .state import (
    SimState,
    apply_measurement,
    init_state,
    outcome_distribution,
    physical_view,
    readout_distribution,
    release_site,
    retain_site,
    schmidt_coefficients,
    site_density,
)
from .transcript import export_transcript

__all__ = [
    "MeasurementOp",
    "Network",
    "PauliFrame",
    "SimState",
    "Site",
    "apply_measurement",
    "export_transcript",
    "init_state",
    "oracle_check",
    "oracle_site_density",
    "outcome_distribution",
    "pauli_measurement",
    "physical_view",
    "readout_distribution",
    "release_site",
    "retain_site",
    "schmidt_coefficients",
    "shot_seed",
    "site_density",
]
