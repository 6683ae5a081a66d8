"""
Two-point correlators and local entropies of finite wires

Expectation values are ratios of boundary-aware chain contractions: the left
density vec(Lambda) is pushed through the (generalized) transfer matrices and
closed with R R^dagger. Each step is rescaled by the plain chain's trace so
long wires neither underflow nor overflow.
"""

import logging
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.errors import DimensionMismatchError
from src.numerics.linalg import as_matrix, schmidt_decompose, von_neumann_entropy
from src.resource.canonical import CanonicalWire, make_theta_wire
from src.resource.expansion import expand_state
from src.resource.wire import WireResource

from .spectrum import transfer_matrix

logger = logging.getLogger(__name__)

BOUNDARY_SITES = 2

Wire = Union[CanonicalWire, WireResource]


def _base(wire: Wire) -> WireResource:
    return wire.base if isinstance(wire, CanonicalWire) else wire


def expectation(wire: Wire, ops: Dict[int, np.ndarray]) -> complex:
    """<O_i1 O_i2 ...> for single-site operators keyed by 1-based column"""
    base = _base(wire)
    for column in ops:
        if not 1 <= column <= base.N:
            raise DimensionMismatchError(f"column {column} outside 1..{base.N}")
    plain = np.outer(base.left, np.conj(base.left)).ravel()
    dressed = plain.copy()
    for column in range(1, base.N + 1):
        tensor = base.site(column)
        plain = tensor.transfer_matrix() @ plain
        op = ops.get(column)
        step = tensor.transfer_matrix() if op is None else transfer_matrix(tensor, as_matrix(op))
        dressed = step @ dressed
        scale = np.trace(plain.reshape(base.D, base.D)).real
        plain, dressed = plain / scale, dressed / scale
    closing = np.outer(base.right, np.conj(base.right))
    norm = np.vdot(closing.ravel(), plain)
    return complex(np.vdot(closing.ravel(), dressed) / norm)


def two_point_correlator(wire: Wire, op: np.ndarray, i: int, j: int) -> float:
    """
    Connected correlator <O_i O_j> - <O_i><O_j>.

    Raises:
        DimensionMismatchError: If i == j or a column is out of range
    """
    if i == j:
        raise DimensionMismatchError("a two-point correlator needs distinct sites")
    joint = expectation(wire, {i: op, j: op})
    connected = joint - expectation(wire, {i: op}) * expectation(wire, {j: op})
    return float(connected.real)


def correlation_decay(
    wire: Wire,
    op: np.ndarray,
    distances: Sequence[int] = tuple(range(2, 13)),
    start: Optional[int] = None,
) -> Tuple[pd.DataFrame, float]:
    """
    Correlator against distance, with the fitted exponential decay rate.

    Sites within two columns of either boundary are excluded. The rate is
    minus the slope of a least-squares line through ln|C(d)| over the
    non-zero distances sharing the parity of the largest |C(d)|.
    """
    base = _base(wire)
    longest = max(distances)
    if start is None:
        start = max(BOUNDARY_SITES + 1, (base.N - longest) // 2)
    if start <= BOUNDARY_SITES or start + longest > base.N - BOUNDARY_SITES:
        raise DimensionMismatchError(
            f"distances up to {longest} from column {start} reach the boundary of a {base.N}-site wire"
        )
    rows = [
        {"distance": d, "correlator": two_point_correlator(base, op, start, start + d)}
        for d in distances
    ]
    frame = pd.DataFrame(rows)
    frame["abs_correlator"] = frame["correlator"].abs()
    usable = frame[frame["abs_correlator"] > 1e-13]
    if not usable.empty:
        # +-sqrt(r1) subleading pairs cancel every other distance up to boundary terms
        parity = int(usable.loc[usable["abs_correlator"].idxmax(), "distance"]) % 2
        usable = usable[usable["distance"] % 2 == parity]
    rate = float("nan")
    if len(usable) >= 2:
        slope, _ = np.polyfit(usable["distance"], np.log(usable["abs_correlator"]), 1)
        rate = float(-slope)
    logger.debug(f"Correlator decay from column {start}: rate {rate:.6f} over {len(usable)} points")
    return frame, rate


def local_density(wire: Wire, column: int) -> np.ndarray:
    """One-site reduced density matrix rho[s, s'] = tr(E_right A[s] Lambda A[s']^dagger)"""
    base = _base(wire)
    if not 1 <= column <= base.N:
        raise DimensionMismatchError(f"column {column} outside 1..{base.N}")
    left = np.outer(base.left, np.conj(base.left))
    for c in range(1, column):
        a = base.site(c).array
        left = np.einsum("sab,bc,sdc->ad", a, left, np.conj(a))
        left /= np.trace(left).real
    right = np.outer(base.right, np.conj(base.right))
    for c in range(base.N, column, -1):
        a = base.site(c).array
        right = np.einsum("sba,bc,scd->ad", np.conj(a), right, a)
        right /= np.trace(right).real
    a = base.site(column).array
    rho = np.einsum("ab,sbc,cd,tad->st", right, a, left, np.conj(a))
    return rho / np.trace(rho).real


def local_entropy(wire: Wire, column: Optional[int] = None) -> float:
    """Von Neumann entropy (bits) of one site, the middle one by default"""
    base = _base(wire)
    column = column if column is not None else (base.N + 1) // 2
    return von_neumann_entropy(local_density(base, column))


def entropy_table(thetas: Iterable[float], n: int = 21) -> pd.DataFrame:
    rows = [
        {"theta": float(t), "entropy_bits": local_entropy(make_theta_wire(float(t), n))}
        for t in thetas
    ]
    return pd.DataFrame(rows)


def bond_entropy_profile(wire: Wire) -> pd.DataFrame:
    """Entanglement entropy across every cut of the expanded state (small wires only)"""
    base = _base(wire)
    psi = expand_state(base)
    rows = []
    for cut in range(1, base.N):
        rows.append({"cut": cut, "entropy_bits": schmidt_decompose(psi, cut).entropy()})
    return pd.DataFrame(rows)
