"""
Transfer-matrix spectra and correlation lengths
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np
import pandas as pd

from src.errors import ResourceError
from src.numerics.linalg import eig_general
from src.resource.canonical import CanonicalWire, make_theta_wire
from src.resource.wire import SiteTensor, WireResource

logger = logging.getLogger(__name__)

ZERO_RATIO = 1e-12

Wire = Union[CanonicalWire, WireResource]


@dataclass(frozen=True, eq=False)
class TransferSpectrum:
    """Spectrum of E = sum_s A[s] (x) conj(A[s]), sorted by modulus"""

    E: np.ndarray
    eigenvalues: np.ndarray
    xi: float
    block: int = 1

    @property
    def ratio(self) -> float:
        """|lambda_2| / |lambda_1|"""
        if len(self.eigenvalues) < 2:
            return 0.0
        return float(abs(self.eigenvalues[1]) / abs(self.eigenvalues[0]))


def transfer_matrix(tensor: SiteTensor, op: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Generalized transfer matrix sum_{s,s'} O[s', s] A[s] (x) conj(A[s']).

    With ``op`` = None this is the ordinary transfer matrix.
    """
    if op is None:
        return tensor.transfer_matrix()
    a = tensor.array
    return np.einsum("ts,sab,tcd->acbd", op, a, np.conj(a)).reshape(tensor.D**2, tensor.D**2)


def _base(wire: Wire) -> WireResource:
    return wire.base if isinstance(wire, CanonicalWire) else wire


def transfer_spectrum(wire: Wire, block: int = 1) -> TransferSpectrum:
    """
    Spectrum of the transfer matrix of ``block`` consecutive sites.

    Raises:
        ResourceError: If the wire is not uniform or the spectrum vanishes
    """
    base = _base(wire)
    if not base.is_uniform:
        raise ResourceError("the transfer spectrum needs a uniform wire")
    single = base.site(1).transfer_matrix()
    e = np.linalg.matrix_power(single, block)
    values = eig_general(e).values
    if abs(values[0]) <= ZERO_RATIO:
        raise ResourceError("transfer matrix is nilpotent")

    ratio = abs(values[1]) / abs(values[0]) if len(values) > 1 else 0.0
    if ratio <= ZERO_RATIO:
        xi = 0.0
    elif ratio >= 1.0 - ZERO_RATIO:
        logger.warning("Leading transfer eigenvalues are degenerate: correlation length is infinite")
        xi = math.inf
    else:
        xi = -block / math.log(ratio)
    return TransferSpectrum(E=e, eigenvalues=values, xi=xi, block=block)


def correlation_length(wire: Wire) -> TransferSpectrum:
    return transfer_spectrum(wire, block=1)


def closed_form_xi(theta: float) -> float:
    """xi with exp(-1/xi) = sqrt(cos 2 theta)"""
    r1 = math.cos(2.0 * theta)
    if r1 <= ZERO_RATIO:
        return 0.0
    return -1.0 / math.log(math.sqrt(r1))


def xi_table(thetas: Iterable[float], n: int = 4) -> pd.DataFrame:
    """Spectral and closed-form correlation lengths over a theta grid"""
    rows = []
    for theta in thetas:
        wire = make_theta_wire(float(theta), n)
        spectrum = correlation_length(wire)
        rows.append(
            {
                "theta": float(theta),
                "r1": wire.r1,
                "decay_spectral": spectrum.ratio,
                "decay_closed_form": math.sqrt(max(wire.r1, 0.0)),
                "xi_spectral": spectrum.xi,
                "xi_closed_form": closed_form_xi(float(theta)),
            }
        )
    logger.info(f"Computed correlation lengths for {len(rows)} angles")
    return pd.DataFrame(rows)
