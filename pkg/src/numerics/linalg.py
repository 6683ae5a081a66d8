"""
Dense Linear Algebra

Gate constants, Schmidt and eigen decompositions, tensor-axis application
and fidelity measures for the small matrices the toolkit works with.
"""

import functools
import logging
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from scipy import linalg as sla
from scipy.stats import unitary_group

from src.errors import DimensionMismatchError
from src.numerics.tolerances import TOL

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / SQRT2
CZ = np.diag([1, 1, 1, -1]).astype(complex)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / SQRT2
MINUS = np.array([1, -1], dtype=complex) / SQRT2

MAX_EIG_DIM = 64


def rz(angle: float) -> np.ndarray:
    """Rz(angle) = diag(e^{-i angle/2}, e^{i angle/2})"""
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def rx(angle: float) -> np.ndarray:
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * X


def pauli(x: int, z: int) -> np.ndarray:
    """X^x Z^z"""
    return np.linalg.matrix_power(X, x & 1) @ np.linalg.matrix_power(Z, z & 1)


def wrap_angle(angle: float) -> float:
    """Map an angle into (-pi, pi]"""
    return float(np.pi - np.mod(np.pi - angle, 2 * np.pi))


def as_matrix(value: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate a finite complex 2-D array"""
    m = np.asarray(value, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def as_vector(value: np.ndarray, name: str = "vector", normalize: bool = False) -> np.ndarray:
    v = np.asarray(value, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return normalized(v, name) if normalize else v


def normalized(v: np.ndarray, name: str = "vector") -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm < TOL.zero_probability:
        raise ValueError(f"{name} has zero norm")
    return v / norm


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def kron(*ops: np.ndarray) -> np.ndarray:
    return functools.reduce(np.kron, ops)


def is_unitary(m: np.ndarray, tol: float = TOL.unitary_tol) -> bool:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(dagger(m) @ m - np.eye(m.shape[0]))) <= tol)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for normalized copies of a and b"""
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"cannot compare states of size {a.size} and {b.size}")
    overlap = np.vdot(a, b)
    return float(abs(overlap) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


def state_fidelity(rho: np.ndarray, psi: np.ndarray) -> float:
    """<psi|rho|psi> with rho trace-normalized and psi normalized"""
    psi = normalized(np.asarray(psi, dtype=complex).reshape(-1), "psi")
    rho = as_matrix(rho, "rho")
    value = np.vdot(psi, rho @ psi).real / np.trace(rho).real
    return float(min(1.0, max(0.0, value)))


def unitary_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Trace distance between the Choi states of two unitaries, global phase ignored"""
    u = as_matrix(u)
    v = as_matrix(v)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"shapes {u.shape} and {v.shape} differ")
    overlap = abs(np.trace(dagger(u) @ v)) / u.shape[0]
    return float(np.sqrt(max(0.0, 1.0 - overlap**2)))


def apply_on_axes(tensor: np.ndarray, operator: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Apply a k-local operator to the given tensor axes, keeping axis order"""
    axes = list(axes)
    k = len(axes)
    dims = [tensor.shape[a] for a in axes]
    op = np.asarray(operator, dtype=complex).reshape(dims + dims)
    result = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(result, list(range(k)), axes)


def apply_site_map(
    tensor: np.ndarray, site_array: np.ndarray, corr_axis: int, phys_position: int
) -> np.ndarray:
    """
    Contract a site tensor A[s] (shape d x D x D) into a correlation axis.

    A new physical axis of size d is inserted at ``phys_position`` (which must
    not lie after ``corr_axis``); the correlation axis keeps its place.
    """
    if phys_position > corr_axis:
        raise DimensionMismatchError("physical axis must precede the correlation axis")
    result = np.tensordot(site_array, tensor, axes=([2], [corr_axis]))
    return np.moveaxis(result, [0, 1], [phys_position, corr_axis + 1])


@dataclass(frozen=True)
class SchmidtDecomposition:
    """v = sum_i coefficients[i] * left[:, i] (x) right[:, i]"""

    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray

    @property
    def rank(self) -> int:
        return int(np.sum(self.coefficients > TOL.atol))

    def reconstruct(self) -> np.ndarray:
        return np.einsum("i,ai,bi->ab", self.coefficients, self.left, self.right).reshape(-1)

    def entropy(self) -> float:
        """Entanglement entropy in bits"""
        p = self.coefficients**2
        p = p[p > TOL.zero_probability]
        return float(-np.sum(p * np.log2(p)))


def schmidt_decompose(
    v: np.ndarray, cut: Union[int, Tuple[int, int]]
) -> SchmidtDecomposition:
    """
    Schmidt decomposition across a bipartition.

    Args:
        v: State vector (normalized internally)
        cut: Number of leading qubits in the left part, or explicit (d_A, d_B)

    Returns:
        Coefficients sorted descending with orthonormal left/right columns
    """
    v = normalized(as_vector(v), "state")
    if isinstance(cut, tuple):
        d_a, d_b = cut
    else:
        n_qubits = int(round(np.log2(v.size)))
        if 2**n_qubits != v.size or not 0 < cut < n_qubits:
            raise DimensionMismatchError(
                f"cannot cut a state of dimension {v.size} after {cut} qubits"
            )
        d_a, d_b = 2**cut, 2 ** (n_qubits - cut)
    if d_a * d_b != v.size or d_a < 1 or d_b < 1:
        raise DimensionMismatchError(f"dimension {v.size} does not factor as {d_a} x {d_b}")

    u, s, vh = np.linalg.svd(v.reshape(d_a, d_b), full_matrices=False)
    return SchmidtDecomposition(coefficients=s, left=u, right=vh.T)


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray


def eig_general(m: np.ndarray) -> EigenDecomposition:
    """
    Eigen-decomposition of a general square matrix.

    Eigenvalues are ordered by modulus, then real part, then imaginary part,
    all descending.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"matrix must be square, got {m.shape}")
    if m.shape[0] > MAX_EIG_DIM:
        raise DimensionMismatchError(f"dimension {m.shape[0]} exceeds {MAX_EIG_DIM}")

    values, vectors = sla.eig(m)
    order = sorted(
        range(len(values)),
        key=lambda k: (
            -round(abs(values[k]), 12),
            -round(values[k].real, 12),
            -round(values[k].imag, 12),
        ),
    )
    values = values[order]
    vectors = vectors[:, order]
    residuals = np.linalg.norm(m @ vectors - vectors * values, axis=0)

    bound = TOL.eig_residual * max(1.0, np.linalg.norm(m, 2))
    if np.any(residuals > bound):
        logger.warning(f"Eigen residual {residuals.max():.2e} above {bound:.2e}")
    return EigenDecomposition(values=values, vectors=vectors, residuals=residuals)


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    """Hermitian square root of a positive semidefinite matrix"""
    herm = 0.5 * (m + dagger(m))
    w, v = np.linalg.eigh(herm)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dagger(v)


def reduced_density(tensor: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Trace-normalized density matrix of the kept axes of a pure-state tensor"""
    keep = list(keep)
    others = [a for a in range(tensor.ndim) if a not in keep]
    rho = np.tensordot(tensor, np.conj(tensor), axes=(others, others))
    dim = int(np.prod([tensor.shape[a] for a in keep]))
    rho = rho.reshape(dim, dim)
    return rho / np.trace(rho).real


def von_neumann_entropy(rho: np.ndarray, base: float = 2.0) -> float:
    w = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))
    w = w[w > TOL.zero_probability]
    return float(max(0.0, -np.sum(w * np.log(w)) / np.log(base)))


def euler_zxz(u: np.ndarray) -> Tuple[float, float, float]:
    """
    Angles (a, b, c) with u = e^{i phase} Rz(a) Rx(b) Rz(c).

    All angles are wrapped into (-pi, pi]; free combinations are split evenly.
    """
    u = as_matrix(u)
    if u.shape != (2, 2) or not is_unitary(u, TOL.atol):
        raise DimensionMismatchError("Euler decomposition needs a 2x2 unitary")
    v = u / np.sqrt(np.linalg.det(u))

    b = 2.0 * np.arctan2(abs(v[1, 0]), abs(v[0, 0]))
    total = -2.0 * np.angle(v[0, 0]) if abs(v[0, 0]) > TOL.atol else 0.0
    diff = 2.0 * (np.angle(v[1, 0]) + np.pi / 2) if abs(v[1, 0]) > TOL.atol else 0.0
    a = wrap_angle(0.5 * (total + diff))
    c = wrap_angle(0.5 * (total - diff))
    return a, wrap_angle(b), c


def random_state(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    return np.asarray(unitary_group.rvs(dim, random_state=rng), dtype=complex)
