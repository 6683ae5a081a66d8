"""
Single-qubit rotation compiler

Targets are written as products of H Rz(eta) steps, shortest form first:

    Pauli            no sites
    H Rz(a)          one site
    Rx(b) Rz(c)      two sites
    H Rz Rx Rz       three sites
    Rx Rz Rx Rz      four sites (always available)

Step counts can be forced to a parity, which web preparation uses to land
exactly on a coupling column.
"""

import logging
import math
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from src.errors import BudgetExceededError, CompilationError, DimensionMismatchError
from src.numerics.linalg import (
    H,
    I2,
    MINUS,
    PLUS,
    as_matrix,
    as_vector,
    dagger,
    euler_zxz,
    fidelity,
    is_unitary,
    pauli,
    unitary_distance,
    wrap_angle,
)
from src.numerics.tolerances import TOL
from src.resource.canonical import CanonicalWire

from .families import PhaseFamily, phase_family
from .pattern import MATCH_TOL, MeasurementPattern, PatternStep, check_pattern

logger = logging.getLogger(__name__)

MAX_PATTERN_SITES = 100_000
MAX_STEPS = 4

Candidate = Tuple[List[float], Tuple[int, int]]


def wire_family(wire: CanonicalWire) -> PhaseFamily:
    """Phase family shared by every site of a uniform wire"""
    if not wire.base.is_uniform:
        raise CompilationError("compilation needs a uniform wire")
    return phase_family(wire.base.site(1))


def _is_pauli_angle(angle: float) -> bool:
    return abs(math.sin(angle)) <= TOL.angle_tol


def attempts_for(family: PhaseFamily, epsilon: float, n_steps: int) -> int:
    """Attempt cap per step so that all steps succeed with probability >= 1 - epsilon"""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    q = family.max_failure
    if q <= TOL.atol or n_steps == 0:
        return 1
    return max(1, math.ceil(math.log(epsilon / n_steps) / math.log(q)))


def _candidates(target: np.ndarray) -> List[Candidate]:
    found: List[Candidate] = []
    for bits in ((0, 0), (1, 0), (0, 1), (1, 1)):
        if unitary_distance(target, pauli(*bits)) <= MATCH_TOL:
            found.append(([], bits))
            break

    rotated = H @ target
    if max(abs(rotated[0, 1]), abs(rotated[1, 0])) <= TOL.atol:
        found.append(([wrap_angle(float(np.angle(rotated[1, 1] / rotated[0, 0])))], (0, 0)))

    a, b, c = euler_zxz(target)
    if abs(b) <= TOL.angle_tol:
        found.append(([wrap_angle(a + c), 0.0], (0, 0)))
    elif abs(a) <= TOL.angle_tol:
        found.append(([c, b], (0, 0)))

    a3, b3, c3 = euler_zxz(H @ target)
    found.append(([c3, b3, a3], (0, 0)))
    found.append(([c, b, a, 0.0], (0, 0)))
    return found


def compile_rotation(
    wire: CanonicalWire,
    target: np.ndarray,
    epsilon: float,
    parity: Optional[int] = None,
    label: str = "rotation",
) -> MeasurementPattern:
    """
    Compile a single-qubit unitary into a measurement pattern.

    Args:
        wire: Canonical wire the pattern runs on
        target: 2x2 unitary acting on the correlation space
        epsilon: Allowed probability that some step exhausts its attempts
        parity: Required step count modulo 2, or None for the shortest form
        label: Name carried into the pattern text

    Returns:
        Pattern whose ideal product equals ``target`` up to a global phase

    Raises:
        UnsupportedFamilyError: If the wire has no phase-family structure
        BudgetExceededError: If the attempt budget exceeds the site cap
    """
    target = as_matrix(target, "target")
    if target.shape != (2, 2):
        raise DimensionMismatchError(f"target must be 2x2, got {target.shape}")
    if not is_unitary(target, TOL.atol):
        raise CompilationError("target is not unitary")
    family = wire_family(wire)
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")

    options = [c for c in _candidates(target) if parity is None or len(c[0]) % 2 == parity % 2]
    angles, bits = options[0]
    angles = [wrap_angle(eta) for eta in angles]

    stochastic = [eta for eta in angles if not _is_pauli_angle(eta)]
    attempts = attempts_for(family, epsilon, len(stochastic))
    steps = tuple(PatternStep(eta, 1 if _is_pauli_angle(eta) else attempts) for eta in angles)
    pattern = MeasurementPattern(
        family=wire.family,
        steps=steps,
        target=target,
        epsilon=epsilon if family.max_failure > TOL.atol else 0.0,
        pauli=bits,
        label=label,
    )
    check_pattern(pattern)
    if pattern.declared_length > MAX_PATTERN_SITES:
        raise BudgetExceededError(
            f"{label}: {pattern.declared_length} sites exceed the {MAX_PATTERN_SITES}-site cap "
            f"at epsilon={epsilon:g}"
        )
    logger.debug(
        f"Compiled {label} on {wire.family}: {len(steps)} steps, up to {pattern.declared_length} sites"
    )
    return pattern


def compile_prep(
    wire: CanonicalWire,
    psi: np.ndarray,
    epsilon: float,
    parity: Optional[int] = None,
) -> MeasurementPattern:
    """Pattern taking the left boundary state to ``psi``"""
    psi = as_vector(psi, "psi", normalize=True)
    if psi.shape != (2,):
        raise DimensionMismatchError("prepared state must be a qubit")
    left = wire.base.left
    if fidelity(psi, left) >= 1.0 - TOL.atol and parity in (None, 0):
        target = I2
    else:
        psi_perp = np.array([-np.conj(psi[1]), np.conj(psi[0])])
        left_perp = np.array([-np.conj(left[1]), np.conj(left[0])])
        target = np.column_stack([psi, psi_perp]) @ dagger(np.column_stack([left, left_perp]))
    pattern = compile_rotation(wire, target, epsilon, parity=parity, label="prep")
    return MeasurementPattern(
        family=pattern.family,
        steps=pattern.steps,
        target=pattern.target,
        epsilon=pattern.epsilon,
        pauli=pattern.pauli,
        label="prep",
        prepared_state=psi,
    )


@lru_cache(maxsize=128)
def compile_V(wire: CanonicalWire, which: str = "V", epsilon: float = 1e-6) -> MeasurementPattern:
    """
    Basis-change patterns of the localization protocols.

    ``V`` maps |phi_0>, |phi_1> to |+>, |->; ``V'`` maps them to |0>, |1>.
    """
    phi = wire.phi_basis
    if which == "V":
        target = np.column_stack([PLUS, MINUS]) @ dagger(phi)
    elif which in ("V'", "Vprime"):
        which = "V'"
        target = dagger(phi)
    else:
        raise ValueError(f"unknown basis change {which!r}")
    return compile_rotation(wire, target, epsilon, label=which)


def max_rotation_length(wire: CanonicalWire, epsilon: float) -> int:
    """Site bound valid for any single-qubit target"""
    return MAX_STEPS * (2 * attempts_for(wire_family(wire), epsilon, MAX_STEPS) - 1)
