"""
Computational Webs

Wires coupled vertically in the correlation layer: after both wires of a
coupling have passed its column, a two-qubit unitary (controlled-Z unless
configured) acts on their correlation spaces.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from src.errors import DimensionMismatchError, ResourceError
from src.numerics.linalg import CZ, as_matrix, is_unitary
from src.numerics.tolerances import TOL
from src.resource.canonical import CanonicalWire
from src.resource.wire import WireResource

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Coupling:
    """Unitary on the correlation spaces of wires (upper, upper + 1) after a column"""

    upper: int
    column: int
    unitary: np.ndarray = CZ

    @property
    def lower(self) -> int:
        return self.upper + 1

    @property
    def wires(self) -> Tuple[int, int]:
        return self.upper, self.lower

    @property
    def is_cz(self) -> bool:
        return bool(np.allclose(self.unitary, CZ, atol=TOL.unitary_tol, rtol=0.0))


CouplingSpec = Union[Coupling, Tuple[int, int], Tuple[int, int, np.ndarray]]


@dataclass(frozen=True, eq=False)
class WebResource:
    """M wires of equal length with couplings sorted by column"""

    canonical: Tuple[CanonicalWire, ...]
    couplings: Tuple[Coupling, ...]

    @property
    def wires(self) -> Tuple[WireResource, ...]:
        return tuple(c.base for c in self.canonical)

    @property
    def M(self) -> int:
        return len(self.canonical)

    @property
    def N(self) -> int:
        return self.canonical[0].N

    @property
    def t(self) -> int:
        """Virtual subsystems per bulk physical site"""
        return 3 if self.couplings else 2

    def couplings_of(self, wire: int) -> List[Coupling]:
        return [c for c in self.couplings if wire in c.wires]

    def couplings_at(self, column: int) -> List[Coupling]:
        return [c for c in self.couplings if c.column == column]


def _as_coupling(spec: CouplingSpec) -> Coupling:
    if isinstance(spec, Coupling):
        return spec
    if len(spec) == 2:
        upper, column = spec  # type: ignore[misc]
        return Coupling(upper=int(upper), column=int(column))
    upper, column, unitary = spec  # type: ignore[misc]
    return Coupling(upper=int(upper), column=int(column), unitary=as_matrix(unitary, "coupling"))


def make_web(
    wires: Sequence[CanonicalWire], couplings: Iterable[CouplingSpec] = ()
) -> WebResource:
    """
    Couple canonical wires into a web.

    Args:
        wires: At least two wires sharing N
        couplings: Coupling objects or (upper, column[, unitary]) tuples

    Returns:
        WebResource with couplings sorted by (column, upper)
    """
    wires = tuple(wires)
    if len(wires) < 2:
        raise ResourceError(f"a web needs at least 2 wires, got {len(wires)}")
    lengths = {w.N for w in wires}
    if len(lengths) != 1:
        raise ResourceError(f"wires have mismatched lengths {sorted(lengths)}")
    n = wires[0].N

    parsed = []
    for spec in couplings:
        coupling = _as_coupling(spec)
        if not 0 <= coupling.upper < len(wires) - 1:
            raise ResourceError(f"coupling wire {coupling.upper} has no lower neighbour")
        if not 1 <= coupling.column <= n:
            raise ResourceError(f"coupling column {coupling.column} outside 1..{n}")
        if coupling.unitary.shape != (4, 4):
            raise DimensionMismatchError("coupling unitary must be 4x4")
        if not is_unitary(coupling.unitary, TOL.atol):
            raise ResourceError("coupling is not unitary")
        parsed.append(coupling)
    parsed.sort(key=lambda c: (c.column, c.upper))
    logger.debug(f"Built web with {len(wires)} wires, N={n}, {len(parsed)} couplings")
    return WebResource(canonical=wires, couplings=tuple(parsed))
