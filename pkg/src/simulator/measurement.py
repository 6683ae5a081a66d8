"""
Measurement operations, site addresses and Pauli frames
"""

import dataclasses
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.errors import CompletenessError, DimensionMismatchError
from src.numerics.linalg import PLUS, MINUS, KET0, KET1, SQRT2, as_matrix, dagger, pauli
from src.numerics.tolerances import TOL


class Site(NamedTuple):
    """Physical site address: 0-based wire, 1-based column"""

    wire: int
    column: int


@dataclass(frozen=True, eq=False)
class MeasurementOp:
    """Kraus elements of a local measurement with outcome labels"""

    operators: Tuple[np.ndarray, ...]
    labels: Tuple[str, ...] = ()
    name: str = "povm"
    site: Optional[Site] = None

    def __post_init__(self) -> None:
        ops = tuple(as_matrix(k, "Kraus element") for k in self.operators)
        if not ops:
            raise DimensionMismatchError("a measurement needs at least one outcome")
        shapes = {k.shape for k in ops}
        if len(shapes) != 1 or ops[0].shape[0] != ops[0].shape[1]:
            raise DimensionMismatchError(f"Kraus elements must share a square shape, got {shapes}")
        for k in ops:
            k.setflags(write=False)
        labels = tuple(self.labels) or tuple(str(i) for i in range(len(ops)))
        if len(labels) != len(ops):
            raise DimensionMismatchError(f"{len(labels)} labels for {len(ops)} outcomes")
        deviation = np.max(np.abs(sum(dagger(k) @ k for k in ops) - np.eye(ops[0].shape[0])))
        if deviation > TOL.atol:
            raise CompletenessError(f"{self.name}: sum K^dagger K deviates from I by {deviation:.2e}")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def projective(
        cls,
        basis: np.ndarray,
        labels: Sequence[str] = (),
        name: str = "basis",
        site: Optional[Site] = None,
    ) -> "MeasurementOp":
        """Rank-one projectors onto the columns of an orthonormal basis"""
        basis = as_matrix(basis, "basis")
        return cls(
            operators=tuple(np.outer(basis[:, k], np.conj(basis[:, k])) for k in range(basis.shape[1])),
            labels=tuple(labels),
            name=name,
            site=site,
        )

    @classmethod
    def identity(cls, d: int = 2) -> "MeasurementOp":
        return cls(operators=(np.eye(d),), labels=("id",), name="identity")

    @property
    def n_outcomes(self) -> int:
        return len(self.operators)

    def at(self, site: Site) -> "MeasurementOp":
        return dataclasses.replace(self, site=Site(*site))

    def rank_one(self, outcome: int) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """(u, K^dagger u) when element ``outcome`` is rank one, else None"""
        k = self.operators[outcome]
        u, s, _ = np.linalg.svd(k)
        if s[0] <= TOL.zero_probability:
            return u[:, 0], np.zeros(k.shape[0], dtype=complex)
        if np.any(s[1:] > TOL.atol * s[0]):
            return None
        return u[:, 0], dagger(k) @ u[:, 0]


def pauli_measurement(axis: str) -> MeasurementOp:
    """Projective measurement of X, Y or Z"""
    bases = {
        "Z": np.column_stack([KET0, KET1]),
        "X": np.column_stack([PLUS, MINUS]),
        "Y": np.column_stack([np.array([1, 1j]) / SQRT2, np.array([1, -1j]) / SQRT2]),
    }
    if axis not in bases:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    return MeasurementOp.projective(bases[axis], labels=("+", "-"), name=f"pauli-{axis}")


@dataclass(frozen=True)
class PauliFrame:
    """
    Byproduct record X^x Z^z per logical qubit.

    The actual state equals the frame operator times the ideal state, up to a
    global phase. ``basis`` names the physical basis Z and X refer to.
    """

    x: Tuple[int, ...]
    z: Tuple[int, ...]
    basis: str = "correlation"

    def __post_init__(self) -> None:
        if len(self.x) != len(self.z):
            raise DimensionMismatchError("frame needs one x and one z power per qubit")
        if any(p not in (0, 1) for p in self.x + self.z):
            raise ValueError("frame powers must be 0 or 1")

    @classmethod
    def identity(cls, n: int, basis: str = "correlation") -> "PauliFrame":
        return cls(x=(0,) * n, z=(0,) * n, basis=basis)

    def get(self, qubit: int) -> Tuple[int, int]:
        return self.x[qubit], self.z[qubit]

    def set(self, qubit: int, x: int, z: int) -> "PauliFrame":
        xs, zs = list(self.x), list(self.z)
        xs[qubit], zs[qubit] = x & 1, z & 1
        return PauliFrame(tuple(xs), tuple(zs), self.basis)

    def toggle(self, qubit: int, x: int = 0, z: int = 0) -> "PauliFrame":
        """Multiply qubit's byproduct by X^x Z^z (signs are global phases)"""
        cx, cz = self.get(qubit)
        return self.set(qubit, cx ^ (x & 1), cz ^ (z & 1))

    def operator(self, qubit: int, basis: Optional[np.ndarray] = None) -> np.ndarray:
        """X^x Z^z, expressed in ``basis`` coordinates when given"""
        op = pauli(*self.get(qubit))
        if basis is None:
            return op
        return basis @ op @ dagger(basis)

    def correction(self, qubit: int, basis: Optional[np.ndarray] = None) -> np.ndarray:
        """Inverse byproduct Z^z X^x"""
        return dagger(self.operator(qubit, basis))
