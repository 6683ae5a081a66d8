"""
Analysis Module

Transfer spectra and correlation lengths, correlators and entropies, and
success statistics of localization batches
"""

from .correlators import (
    bond_entropy_profile,
    correlation_decay,
    entropy_table,
    expectation,
    local_density,
    local_entropy,
    two_point_correlator,
)
from .spectrum import (
    TransferSpectrum,
    closed_form_xi,
    correlation_length,
    transfer_matrix,
    transfer_spectrum,
    xi_table,
)
from .statistics import PhaseStats, SuccessReport, success_stats, truncated_geometric

__all__ = [
    "PhaseStats",
    "SuccessReport",
    "TransferSpectrum",
    "bond_entropy_profile",
    "closed_form_xi",
    "correlation_decay",
    "correlation_length",
    "entropy_table",
    "expectation",
    "local_density",
    "local_entropy",
    "success_stats",
    "transfer_matrix",
    "transfer_spectrum",
    "truncated_geometric",
    "two_point_correlator",
    "xi_table",
]
