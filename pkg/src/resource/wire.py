"""
Wire Resources

Site tensors and matrix-product wires: amplitude of |s_1 ... s_N> is
<R| A_N[s_N] ... A_1[s_1] |L>, site 1 acting first on the left boundary.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from src.errors import DimensionMismatchError, ResourceError
from src.numerics.linalg import H, KET0, PLUS, Z, as_matrix, as_vector, dagger
from src.numerics.tolerances import TOL

logger = logging.getLogger(__name__)

DEFAULT_LEFT = KET0
DEFAULT_RIGHT = PLUS


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SiteTensor:
    """The d matrices A[s] of one site, stored as an array of shape (d, D, D)"""

    array: np.ndarray

    def __post_init__(self) -> None:
        array = np.asarray(self.array, dtype=complex)
        if array.ndim != 3 or array.shape[1] != array.shape[2]:
            raise DimensionMismatchError(
                f"site tensor must have shape (d, D, D), got {array.shape}"
            )
        if not np.all(np.isfinite(array)):
            raise ResourceError("site tensor has non-finite entries")
        if np.sum(np.abs(array) ** 2) <= TOL.zero_probability:
            raise ResourceError("site tensor is identically zero")
        object.__setattr__(self, "array", _frozen(array))

    @classmethod
    def from_matrices(cls, *matrices: np.ndarray) -> "SiteTensor":
        shapes = {as_matrix(m).shape for m in matrices}
        if len(shapes) != 1:
            raise DimensionMismatchError(f"site matrices have differing shapes {shapes}")
        return cls(np.stack([as_matrix(m) for m in matrices]))

    @property
    def d(self) -> int:
        return self.array.shape[0]

    @property
    def D(self) -> int:
        return self.array.shape[1]

    def matrix(self, s: int) -> np.ndarray:
        return self.array[s]

    def outcome_operator(self, bra: np.ndarray) -> np.ndarray:
        """A[b] = sum_s <b|s> A[s] for a physical vector |b>"""
        b = as_vector(bra, "basis vector")
        if b.size != self.d:
            raise DimensionMismatchError(f"basis vector has size {b.size}, expected {self.d}")
        return np.tensordot(np.conj(b), self.array, axes=([0], [0]))

    def transfer_matrix(self) -> np.ndarray:
        """E = sum_s A[s] (x) conj(A[s])"""
        return sum(np.kron(a, np.conj(a)) for a in self.array)

    def completeness(self) -> np.ndarray:
        """sum_s A[s]^dagger A[s]"""
        return sum(dagger(a) @ a for a in self.array)

    def allclose(self, other: "SiteTensor", atol: float = TOL.atol) -> bool:
        return self.array.shape == other.array.shape and bool(
            np.allclose(self.array, other.array, atol=atol, rtol=0.0)
        )


@dataclass(frozen=True, eq=False)
class WireResource:
    """A 1D matrix-product wire with fixed boundary vectors"""

    tensors: Tuple[SiteTensor, ...]
    left: np.ndarray
    right: np.ndarray
    family: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        tensors = tuple(self.tensors)
        if len(tensors) < 2:
            raise ResourceError(f"a wire needs at least 2 sites, got {len(tensors)}")
        dims = {(t.d, t.D) for t in tensors}
        if len(dims) != 1:
            raise DimensionMismatchError(f"site tensors disagree on (d, D): {dims}")
        D = tensors[0].D
        left = as_vector(self.left, "left boundary")
        right = as_vector(self.right, "right boundary")
        if left.size != D or right.size != D:
            raise DimensionMismatchError(f"boundary vectors must have dimension {D}")
        if min(np.linalg.norm(left), np.linalg.norm(right)) < TOL.zero_probability:
            raise ResourceError("boundary vector has zero norm")
        left = left / np.linalg.norm(left)
        right = right / np.linalg.norm(right)
        object.__setattr__(self, "tensors", tensors)
        object.__setattr__(self, "left", _frozen(left))
        object.__setattr__(self, "right", _frozen(right))

    @classmethod
    def uniform(
        cls,
        tensor: SiteTensor,
        n: int,
        left: Optional[np.ndarray] = None,
        right: Optional[np.ndarray] = None,
        family: str = "custom",
        params: Optional[Dict[str, Any]] = None,
    ) -> "WireResource":
        return cls(
            tensors=(tensor,) * n,
            left=DEFAULT_LEFT if left is None else left,
            right=DEFAULT_RIGHT if right is None else right,
            family=family,
            params=dict(params or {}),
        )

    @property
    def N(self) -> int:
        return len(self.tensors)

    @property
    def d(self) -> int:
        return self.tensors[0].d

    @property
    def D(self) -> int:
        return self.tensors[0].D

    def site(self, column: int) -> SiteTensor:
        """Site tensor at a 1-based column"""
        if not 1 <= column <= self.N:
            raise IndexError(f"column {column} outside 1..{self.N}")
        return self.tensors[column - 1]

    @property
    def is_uniform(self) -> bool:
        first = self.tensors[0]
        return all(t is first or t.allclose(first) for t in self.tensors[1:])

    def with_length(self, n: int) -> "WireResource":
        if not self.is_uniform:
            raise ResourceError("only uniform wires can be resized")
        return WireResource.uniform(
            self.tensors[0], n, self.left, self.right, self.family, self.params
        )


def cluster_tensor() -> SiteTensor:
    """A[0] = |+><0|, A[1] = |-><1|, i.e. A[s] = H|s><s|"""
    return SiteTensor.from_matrices(H @ np.diag([1, 0]), H @ np.diag([0, 1]))


def theta_tensor(theta: float) -> SiteTensor:
    """A[0] = cos(theta) H, A[1] = sin(theta) H Z"""
    return SiteTensor.from_matrices(np.cos(theta) * H, np.sin(theta) * H @ Z)


def canonical_tensor(
    w: np.ndarray, alpha: float, weights: Sequence[float] = (1.0, 1.0)
) -> SiteTensor:
    """A[0] = c0 W, A[1] = c1 W diag(e^{-i alpha}, e^{i alpha})"""
    w = as_matrix(w, "W")
    phase = np.diag([np.exp(-1j * alpha), np.exp(1j * alpha)])
    return SiteTensor.from_matrices(weights[0] * w, weights[1] * w @ phase)


def product_tensor() -> SiteTensor:
    """A[0] = |0><0|, A[1] = 0"""
    return SiteTensor.from_matrices(np.diag([1, 0]), np.zeros((2, 2)))


def make_product_wire(
    n: int, left: Optional[np.ndarray] = None, right: Optional[np.ndarray] = None
) -> WireResource:
    return WireResource.uniform(product_tensor(), n, left, right, family="product")
