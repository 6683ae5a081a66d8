"""
Filtering POVM

Two-outcome measurement that, on a retained site, equalizes the non-orthogonal
pair |m'0> = r0|m0> + r1|m1>, |m'1> = |m1>:

    F    = (|m0><m0| + r0|m1><m1| - r1|m1><m0|) / sqrt(1 + r1)
    Fbar = sqrt(2 r1 / (1 + r1)) |chi><chi|

with |chi> = sqrt((1 - r1)/2)|m0> + sqrt((1 + r1)/2)|m1>. F maps both |m'_s>
to sqrt(1 - r1)|m_s>; Fbar is rank one, so a failed filter leaves the site
in a product state.
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.errors import DegenerateWireError, ProtocolError
from src.numerics.linalg import dagger
from src.simulator.measurement import MeasurementOp

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FilterPOVM:
    """Filter elements in m-basis coordinates"""

    r1: float
    F: np.ndarray
    Fbar: np.ndarray
    chi: np.ndarray

    @property
    def r0(self) -> float:
        return float(np.sqrt(1.0 - self.r1**2))

    @property
    def success_probability(self) -> float:
        """Probability of passing on either |m'_s>, normalized"""
        return 1.0 - self.r1

    def completeness_error(self) -> float:
        total = dagger(self.F) @ self.F + dagger(self.Fbar) @ self.Fbar
        return float(np.max(np.abs(total - np.eye(2))))

    def physical(self, m_basis: np.ndarray):
        """(F, Fbar) as operators on the physical site"""
        return m_basis @ self.F @ dagger(m_basis), m_basis @ self.Fbar @ dagger(m_basis)

    def measurement(self, m_basis: np.ndarray) -> MeasurementOp:
        f, fbar = self.physical(m_basis)
        return MeasurementOp(operators=(f, fbar), labels=("pass", "fail"), name="filter")


def build_filter(r1: float) -> FilterPOVM:
    """
    Filter for a wire with overlap parameter r1.

    Raises:
        DegenerateWireError: If r1 >= 1
        ProtocolError: If r1 is negative or not finite
    """
    r1 = float(r1)
    if not np.isfinite(r1) or r1 < 0.0:
        raise ProtocolError(f"r1 must be a finite non-negative number, got {r1}")
    if r1 >= 1.0:
        raise DegenerateWireError("r1 = 1: |m'0> and |m'1> coincide and cannot be filtered")
    r0 = np.sqrt(1.0 - r1**2)
    f = np.array([[1.0, 0.0], [-r1, r0]], dtype=complex) / np.sqrt(1.0 + r1)
    chi = np.array([np.sqrt((1.0 - r1) / 2.0), np.sqrt((1.0 + r1) / 2.0)], dtype=complex)
    fbar = np.sqrt(2.0 * r1 / (1.0 + r1)) * np.outer(chi, np.conj(chi))
    logger.debug(f"Built filter for r1={r1:.6f}: pass probability {1.0 - r1:.6f}")
    return FilterPOVM(r1=r1, F=f, Fbar=fbar, chi=chi)
