"""
Canonical Wires

Conversion of a two-matrix site tensor into the rank-one form

    A[m0] = r0 |phi0><0|,    A[m1] = r1 |phi0><0| + |phi1><1|

and constructors for the built-in wire families.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from src.errors import NotCanonicalError, ResourceError
from src.numerics.linalg import as_matrix, dagger
from src.numerics.tolerances import TOL
from src.resource.wire import (
    SiteTensor,
    WireResource,
    canonical_tensor,
    cluster_tensor,
    theta_tensor,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CanonicalWire:
    """A wire together with its rank-one basis data"""

    base: WireResource
    m_basis: np.ndarray
    phi_basis: np.ndarray
    r0: float
    r1: float
    scale: float = 1.0
    theta: Optional[float] = None
    W: Optional[np.ndarray] = None
    alpha: Optional[float] = None

    @property
    def family(self) -> str:
        return self.base.family

    @property
    def N(self) -> int:
        return self.base.N

    @property
    def m_prime_basis(self) -> np.ndarray:
        """Columns |m'0> = r0|m0> + r1|m1>, |m'1> = |m1>"""
        m0, m1 = self.m_basis[:, 0], self.m_basis[:, 1]
        return np.column_stack([self.r0 * m0 + self.r1 * m1, m1])

    def rank_one_operators(self, column: int = 1) -> Tuple[np.ndarray, np.ndarray]:
        """A[m0], A[m1] of the given site, divided by the normalization scale"""
        site = self.base.site(column)
        return tuple(  # type: ignore[return-value]
            site.outcome_operator(self.m_basis[:, t]) / self.scale for t in (0, 1)
        )

    def reconstruction_residual(self) -> float:
        phi0, phi1 = self.phi_basis[:, 0], self.phi_basis[:, 1]
        bra0 = np.array([1, 0], dtype=complex)
        bra1 = np.array([0, 1], dtype=complex)
        expected0 = self.r0 * np.outer(phi0, bra0)
        expected1 = self.r1 * np.outer(phi0, bra0) + np.outer(phi1, bra1)
        worst = 0.0
        for column in range(1, self.N + 1):
            a_m0, a_m1 = self.rank_one_operators(column)
            worst = max(
                worst,
                float(np.max(np.abs(a_m0 - expected0))),
                float(np.max(np.abs(a_m1 - expected1))),
            )
        return worst

    def with_length(self, n: int) -> "CanonicalWire":
        return CanonicalWire(
            base=self.base.with_length(n),
            m_basis=self.m_basis,
            phi_basis=self.phi_basis,
            r0=self.r0,
            r1=self.r1,
            scale=self.scale,
            theta=self.theta,
            W=self.W,
            alpha=self.alpha,
        )


def _gauge(vector: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first non-zero entry is real positive"""
    v = vector / np.linalg.norm(vector)
    pivot = v[0] if abs(v[0]) > TOL.atol else v[1]
    return v * np.exp(-1j * np.angle(pivot))


def _rank_one_coefficients(a0: np.ndarray, a1: np.ndarray) -> np.ndarray:
    """
    Coefficients (x, y) with x A0 + y A1 annihilating |1>.

    Candidates are the roots of the homogeneous quadratic det(x A0 + y A1) = 0;
    the best one is polished by least squares on the unit sphere.
    """
    qa = np.linalg.det(a0)
    qc = np.linalg.det(a1)
    qb = np.linalg.det(a0 + a1) - qa - qc
    candidates = []
    if abs(qa) > TOL.atol:
        candidates += [np.array([t, 1.0]) for t in np.roots([qa, qb, qc])]
    else:
        candidates.append(np.array([1.0, 0.0]))
    if abs(qc) > TOL.atol:
        candidates += [np.array([1.0, u]) for u in np.roots([qc, qb, qa])]
    else:
        candidates.append(np.array([0.0, 1.0]))

    columns = np.column_stack([a0[:, 1], a1[:, 1]])
    scale = max(np.linalg.norm(a0), np.linalg.norm(a1))

    def leak(xy: np.ndarray) -> float:
        xy = xy / np.linalg.norm(xy)
        return float(np.linalg.norm(columns @ xy) / scale)

    best = min(candidates, key=leak)
    best = best / np.linalg.norm(best)

    def residual(params: np.ndarray) -> np.ndarray:
        xy = np.array([params[0] + 1j * params[1], params[2] + 1j * params[3]])
        r = columns @ xy / scale
        return np.concatenate([r.real, r.imag, [np.linalg.norm(xy) - 1.0]])

    start = np.array([best[0].real, best[0].imag, best[1].real, best[1].imag])
    fit = least_squares(residual, start, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    polished = np.array([fit.x[0] + 1j * fit.x[1], fit.x[2] + 1j * fit.x[3]])
    polished = polished / np.linalg.norm(polished)
    if leak(polished) < leak(best):
        best = polished
    logger.debug(f"Rank-one coefficients {best} with leak {leak(best):.2e}")
    return best


def _canonical_data(tensor: SiteTensor) -> Tuple[np.ndarray, np.ndarray, float, float, float]:
    if tensor.d != 2 or tensor.D != 2:
        raise NotCanonicalError("canonical form is defined for d = D = 2")
    a0, a1 = tensor.matrix(0), tensor.matrix(1)

    completeness = tensor.completeness()
    kappa_sq = np.trace(completeness).real / 2
    if np.max(np.abs(completeness / kappa_sq - np.eye(2))) > TOL.canonical_residual:
        raise NotCanonicalError("sum_s A[s]^dagger A[s] is not proportional to the identity")
    kappa = float(np.sqrt(kappa_sq))
    a0, a1 = a0 / kappa, a1 / kappa

    xy = _rank_one_coefficients(a0, a1)
    m0 = _gauge(np.conj(xy))
    m1 = np.array([-np.conj(m0[1]), np.conj(m0[0])])

    def operator(m: np.ndarray) -> np.ndarray:
        return np.conj(m[0]) * a0 + np.conj(m[1]) * a1

    a_m0 = operator(m0)
    if np.linalg.norm(a_m0[:, 1]) > TOL.canonical_residual:
        raise NotCanonicalError("no basis vector makes a site operator rank one")
    column0 = a_m0[:, 0]
    r0 = float(np.linalg.norm(column0))
    if r0 < TOL.canonical_residual:
        raise NotCanonicalError("rank-one operator vanishes (r0 = 0)")
    phi0 = column0 / r0

    a_m1 = operator(m1)
    w = a_m1[:, 0]
    overlap = np.vdot(phi0, w)
    if np.linalg.norm(w - overlap * phi0) > TOL.canonical_residual:
        raise NotCanonicalError("A[m1]|0> leaves the span of |phi0>")
    if abs(overlap) > TOL.atol:
        m1 = m1 * np.exp(1j * np.angle(overlap))
        a_m1 = operator(m1)
    r1 = float(abs(overlap))
    phi1 = a_m1[:, 1]
    if abs(np.linalg.norm(phi1) - 1.0) > TOL.canonical_residual:
        raise NotCanonicalError(f"|phi1> has norm {np.linalg.norm(phi1):.6f}")
    phi1 = phi1 / np.linalg.norm(phi1)
    if abs(np.vdot(phi0, phi1)) > TOL.canonical_residual:
        raise NotCanonicalError("|phi0> and |phi1> are not orthogonal")
    if abs(r0**2 + r1**2 - 1.0) > TOL.canonical_residual:
        raise NotCanonicalError(f"r0^2 + r1^2 = {r0**2 + r1**2:.12f}")

    return np.column_stack([m0, m1]), np.column_stack([phi0, phi1]), r0, r1, kappa


def canonicalize(wire: WireResource, **extra: object) -> CanonicalWire:
    """Attach rank-one basis data to a wire whose sites share one canonical form"""
    m_basis, phi_basis, r0, r1, kappa = _canonical_data(wire.tensors[0])
    canonical = CanonicalWire(
        base=wire,
        m_basis=m_basis,
        phi_basis=phi_basis,
        r0=r0,
        r1=r1,
        scale=kappa,
        **extra,  # type: ignore[arg-type]
    )
    residual = canonical.reconstruction_residual()
    if residual > TOL.canonical_residual:
        raise NotCanonicalError(f"rank-one form residual {residual:.2e} on {wire.family} wire")
    logger.debug(f"Canonical {wire.family} wire: r1={r1:.12f}, residual={residual:.2e}")
    return canonical


def to_canonical(
    a0: np.ndarray,
    a1: np.ndarray,
    n: int = 2,
    left: Optional[np.ndarray] = None,
    right: Optional[np.ndarray] = None,
    family: str = "custom",
) -> CanonicalWire:
    """
    Find the basis {|m_s>} putting (A0, A1) into rank-one form.

    Args:
        a0: Site matrix A[0]
        a1: Site matrix A[1]
        n: Length of the uniform wire built from the pair
        left: Left boundary vector (default |0>)
        right: Right boundary vector (default |+>)
        family: Family label carried by the wire

    Returns:
        CanonicalWire with r0 > 0, r1 >= 0 and orthonormal bases
    """
    tensor = SiteTensor.from_matrices(as_matrix(a0, "A0"), as_matrix(a1, "A1"))
    wire = WireResource.uniform(tensor, n, left, right, family=family)
    return canonicalize(wire)


def make_theta_wire(
    theta: float,
    n: int,
    left: Optional[np.ndarray] = None,
    right: Optional[np.ndarray] = None,
) -> CanonicalWire:
    """Wire with A[0] = cos(theta) H, A[1] = sin(theta) H Z; r1 = cos(2 theta)"""
    if not 0.0 < theta <= np.pi / 4 + TOL.atol:
        raise ResourceError(f"theta must lie in (0, pi/4], got {theta}")
    wire = WireResource.uniform(
        theta_tensor(theta), n, left, right, family="theta", params={"theta": theta}
    )
    return canonicalize(wire, theta=float(theta))


def make_cluster_wire(
    n: int, left: Optional[np.ndarray] = None, right: Optional[np.ndarray] = None
) -> CanonicalWire:
    """1D cluster wire A[0] = |+><0|, A[1] = |-><1| (r1 = 0)"""
    wire = WireResource.uniform(cluster_tensor(), n, left, right, family="cluster")
    return canonicalize(wire)


def make_canonical_wire(
    w: np.ndarray,
    alpha: float,
    n: int,
    weights: Sequence[float] = (1.0, 1.0),
    left: Optional[np.ndarray] = None,
    right: Optional[np.ndarray] = None,
) -> CanonicalWire:
    """General canonical family A[0] = c0 W, A[1] = c1 W diag(e^{-i alpha}, e^{i alpha})"""
    w = as_matrix(w, "W")
    if np.max(np.abs(dagger(w) @ w - np.eye(2))) > TOL.atol:
        raise ResourceError("W must be unitary")
    wire = WireResource.uniform(
        canonical_tensor(w, alpha, weights),
        n,
        left,
        right,
        family="canonical",
        params={"alpha": alpha, "weights": tuple(weights)},
    )
    return canonicalize(wire, W=w, alpha=float(alpha))
