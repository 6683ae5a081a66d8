"""
Phase families

Site tensors of the form A[s] = H D_s with D_s diagonal (cluster wire,
theta-family, canonical wires with W in H * diag). Measuring such a site in
a basis vector |b> applies

    B = sum_s <b|s> A[s] = H diag(d0, d1),    d_j = sum_s conj(b_s) (D_s)_jj

which is proportional to H Rz(eta) with eta = arg(d1 / d0) whenever
|d0| = |d1|.
"""

import logging
from functools import cached_property, lru_cache
from typing import Optional, Tuple

import numpy as np

from src.errors import UnsupportedFamilyError
from src.numerics.linalg import H, wrap_angle
from src.numerics.tolerances import TOL
from src.resource.wire import SiteTensor

logger = logging.getLogger(__name__)

SCAN_POINTS = 181


class PhaseFamily:
    """Unitary-outcome measurement bases of one site tensor"""

    def __init__(self, tensor: SiteTensor):
        if tensor.d != 2 or tensor.D != 2:
            raise UnsupportedFamilyError("phase families need d = D = 2")
        rotated = np.array([H @ a for a in tensor.array])
        scale = np.max(np.abs(rotated))
        off_diagonal = max(np.max(np.abs(rotated[:, 0, 1])), np.max(np.abs(rotated[:, 1, 0])))
        if off_diagonal > TOL.atol * scale:
            raise UnsupportedFamilyError("site matrices are not of the form H * diagonal")
        # gains[s, j] = (D_s)_jj
        self.gains = np.array([np.diag(m) for m in rotated]) / scale

        zero_basis = self.basis(0.0)
        eta1 = self.outcome_angle(zero_basis[:, 1])
        if eta1 is None or abs(abs(wrap_angle(eta1)) - np.pi) > TOL.angle_tol:
            raise UnsupportedFamilyError("no deterministic Hadamard measurement on this family")

    def _diagonal(self, vector: np.ndarray) -> np.ndarray:
        return np.conj(vector) @ self.gains

    def outcome_angle(self, vector: np.ndarray) -> Optional[float]:
        """eta of the outcome operator for |b>, or None when it is not unitary"""
        d0, d1 = self._diagonal(vector)
        size = max(abs(d0), abs(d1))
        if size <= TOL.atol or abs(abs(d0) - abs(d1)) > TOL.atol * max(1.0, size):
            return None
        return float(np.angle(d1 / d0))

    def weight(self, vector: np.ndarray) -> float:
        """|d0|^2 + |d1|^2, proportional to the ideal outcome probability"""
        return float(np.sum(np.abs(self._diagonal(vector)) ** 2))

    def basis(self, eta: float) -> np.ndarray:
        """
        Orthonormal basis (columns) whose outcome 0 applies exactly H Rz(eta).

        Raises:
            UnsupportedFamilyError: If eta is unreachable or outcome 1 is not unitary
        """
        g = self.gains
        phase = np.exp(1j * eta)
        conj_b0 = np.array([g[1, 1] - phase * g[1, 0], -(g[0, 1] - phase * g[0, 0])])
        if np.linalg.norm(conj_b0) <= TOL.atol:
            raise UnsupportedFamilyError(f"angle {eta:.6f} is not reachable in one site")
        b0 = np.conj(conj_b0) / np.linalg.norm(conj_b0)
        pivot = b0[0] if abs(b0[0]) > TOL.atol else b0[1]
        b0 = b0 * np.exp(-1j * np.angle(pivot))
        b1 = np.array([-np.conj(b0[1]), np.conj(b0[0])])
        basis = np.column_stack([b0, b1])

        eta0 = self.outcome_angle(b0)
        if eta0 is None or abs(wrap_angle(eta0 - eta)) > TOL.angle_tol:
            raise UnsupportedFamilyError(f"angle {eta:.6f} is not reachable in one site")
        if self.outcome_angle(b1) is None:
            raise UnsupportedFamilyError(f"outcome 1 of angle {eta:.6f} is not unitary")
        return basis

    def angles(self, eta: float) -> Tuple[float, float, float]:
        """(eta0, eta1, ideal probability of outcome 1) for the basis of eta"""
        basis = self.basis(eta)
        eta0 = self.outcome_angle(basis[:, 0])
        eta1 = self.outcome_angle(basis[:, 1])
        w0, w1 = self.weight(basis[:, 0]), self.weight(basis[:, 1])
        return eta0, eta1, w1 / (w0 + w1)  # type: ignore[return-value]

    def failure_probability(self, eta: float) -> float:
        """Ideal probability that measuring for eta yields a non-Pauli error angle"""
        eta0, eta1, q = self.angles(eta)
        if abs(abs(wrap_angle(eta1 - eta0)) - np.pi) <= TOL.angle_tol:
            return 0.0
        return q

    @cached_property
    def max_failure(self) -> float:
        """Worst failure probability over reduced angles in [-pi/2, pi/2]"""
        grid = np.linspace(-np.pi / 2, np.pi / 2, SCAN_POINTS)
        worst = max(self.failure_probability(float(eta)) for eta in grid)
        logger.debug(f"Phase family worst-case failure probability {worst:.6f}")
        return float(worst)

    @property
    def is_deterministic(self) -> bool:
        return self.max_failure <= TOL.atol


@lru_cache(maxsize=64)
def phase_family(tensor: SiteTensor) -> PhaseFamily:
    return PhaseFamily(tensor)
