"""
Localization protocols

Move the logical state held in a wire's correlation space onto one physical
host site. The simple protocol applies to wires with r1 = 0; the general
protocol runs two rounds of filtering with repeat-until-success trials.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.errors import (
    EndOfWireError,
    PatternExhaustedError,
    ProtocolError,
    WireExhaustedError,
    WrongProtocolError,
)
from src.numerics.linalg import dagger, pauli, state_fidelity
from src.numerics.tolerances import TOL
from src.resource.canonical import CanonicalWire
from src.simulator.measurement import MeasurementOp, PauliFrame, Site
from src.simulator.state import (
    SimState,
    apply_measurement,
    release_site,
    retain_site,
    schmidt_coefficients,
    site_density,
)

from src.compiler.executor import run_pattern
from src.compiler.pattern import MeasurementPattern
from src.compiler.rotations import compile_V

from .filter import build_filter

logger = logging.getLogger(__name__)

DEFAULT_MARGIN = 4


@dataclass(frozen=True, eq=False)
class LocalizationResult:
    """Outcome of one localization run on one wire"""

    wire: int
    protocol: str
    succeeded: bool
    host_site: Optional[Site]
    trials_per_phase: Tuple[int, int]
    frame: PauliFrame
    state: SimState
    m_basis: np.ndarray
    target: Optional[np.ndarray] = None
    fidelity: Optional[float] = None
    raw_fidelity: Optional[float] = None
    failed_phase: Optional[int] = None
    factorization: Tuple[float, ...] = ()
    sites_used: int = 0

    @property
    def trials_used(self) -> int:
        return max(self.trials_per_phase)

    @property
    def branch_labels(self) -> Tuple[str, ...]:
        return tuple(self.state.outcomes())


def required_trials(epsilon: float, r1: float) -> int:
    """
    Smallest l with r1^l <= epsilon.

    The correlation-length form 0.5 * ln(1/epsilon) * xi, with
    exp(-1/xi) = sqrt(r1), is logged alongside and checked against l.

    Raises:
        DegenerateWireError: If r1 >= 1
        ProtocolError: If l falls more than one trial short of the xi bound
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    build_filter(r1)
    if r1 <= TOL.atol:
        return 1
    trials = max(1, math.ceil(math.log(epsilon) / math.log(r1) - 1e-12))
    bound = trial_bound(epsilon, -2.0 / math.log(r1))
    if trials < bound - 1:
        raise ProtocolError(f"{trials} trials fall short of the correlation-length bound {bound:.6f}")
    logger.debug(f"epsilon={epsilon:g}, r1={r1:.6f}: {trials} trials, correlation-length bound {bound:.6f}")
    return trials


def trial_bound(epsilon: float, xi: float) -> float:
    """Trials needed in correlation-length units: 0.5 * ln(1/epsilon) * xi"""
    return 0.5 * math.log(1.0 / epsilon) * xi


def required_wire_length(
    wire: CanonicalWire,
    prep: Optional[MeasurementPattern],
    trials: int,
    epsilon: float,
    margin: int = DEFAULT_MARGIN,
) -> int:
    """Columns that suffice for prep and both filtering phases at their worst case"""
    prep_length = prep.declared_length if prep is not None else 0
    v_length = compile_V(wire, "V", epsilon).declared_length
    if wire.r1 <= TOL.atol:
        return prep_length + 1 + v_length + 1 + margin
    v_prime = compile_V(wire, "V'", epsilon).declared_length
    return prep_length + 2 * trials * (1 + v_prime) + v_length + 1 + margin


def apply_frame_correction(vector_m: np.ndarray, frame: PauliFrame, qubit: int = 0) -> np.ndarray:
    """Undo a byproduct X^x Z^z on a host state given in m-basis coordinates"""
    return dagger(pauli(*frame.get(qubit))) @ np.asarray(vector_m, dtype=complex)


def _host_fidelities(
    state: SimState, host: Site, m_basis: np.ndarray, frame: PauliFrame, target: np.ndarray
) -> Tuple[float, float]:
    rho = site_density(state, host)
    correction = frame.correction(0, m_basis)
    corrected = correction @ rho @ dagger(correction)
    psi_m = m_basis @ target
    return state_fidelity(corrected, psi_m), state_fidelity(rho, psi_m)


def _run(
    state: SimState, pattern: MeasurementPattern, wire: int, reset: bool
) -> Tuple[SimState, Tuple[int, int]]:
    if reset:
        state = state.replace(frame=state.frame.set(wire, 0, 0))
    try:
        state = run_pattern(state, pattern, wire)
    except EndOfWireError as e:
        raise WireExhaustedError(f"wire {wire} ended during {pattern.label}: {e}") from e
    return state, state.frame.get(wire)


def _retain(state: SimState, wire: int) -> Tuple[SimState, Site]:
    site = state.cursor_site(wire)
    try:
        return retain_site(state, wire), site
    except EndOfWireError as e:
        raise WireExhaustedError(f"wire {wire} ended before a host site was found") from e


def _prepare(
    state: SimState, prep: Optional[MeasurementPattern], wire: int, k: Optional[int]
) -> Tuple[SimState, Tuple[int, int]]:
    if prep is not None:
        state, _ = _run(state, prep, wire, reset=False)
    if k is not None and state.cursors[wire] - 1 != k:
        raise ProtocolError(
            f"prep ended at column {state.cursors[wire] - 1}, expected {k}"
        )
    return state, state.frame.get(wire)


def _finish(
    state: SimState,
    canonical: CanonicalWire,
    wire: int,
    protocol: str,
    host: Site,
    frame: PauliFrame,
    trials: Tuple[int, int],
    target: Optional[np.ndarray],
    start_column: int,
    factorization: Tuple[float, ...] = (),
) -> LocalizationResult:
    fidelity = raw = None
    if target is not None:
        fidelity, raw = _host_fidelities(state, host, canonical.m_basis, frame, target)
    logger.debug(
        f"{protocol} localization on wire {wire}: host {tuple(host)}, trials {trials}, "
        f"frame {frame.get(0)}" + (f", fidelity {fidelity:.12f}" if fidelity is not None else "")
    )
    return LocalizationResult(
        wire=wire,
        protocol=protocol,
        succeeded=True,
        host_site=host,
        trials_per_phase=trials,
        frame=frame,
        state=state,
        m_basis=canonical.m_basis,
        target=target,
        fidelity=fidelity,
        raw_fidelity=raw,
        factorization=factorization,
        sites_used=state.cursors[wire] - start_column,
    )


def localize_simple(
    state: SimState,
    prep: Optional[MeasurementPattern] = None,
    k: Optional[int] = None,
    wire: int = 0,
    epsilon: float = 1e-6,
) -> LocalizationResult:
    """
    Single-site localization for wires with r1 = 0.

    Args:
        state: Simulator state; the wire's frame is taken as the prep byproduct
        prep: Pattern preparing the logical state, or None if already run
        k: Expected last column of the prep, checked when given
        wire: Wire to localize
        epsilon: Failure budget handed to the basis-change compilation

    Returns:
        Result with the host site at column k + 1, or a failed result with
        ``failed_phase`` 0 if the prep ran out of attempts

    Raises:
        WrongProtocolError: If the wire has r1 > 0
        WireExhaustedError: If the wire ends first
    """
    canonical = state.network.canonical_wire(wire)
    if canonical.r1 > TOL.atol:
        raise WrongProtocolError(f"r1 = {canonical.r1:.6f} needs the general protocol")
    start_column = state.cursors[wire]
    try:
        state, (a, b) = _prepare(state, prep, wire, k)
    except PatternExhaustedError as e:
        return unprepared_result(_exhausted_state(e, state), wire, "simple", start_column)

    state, host = _retain(state, wire)
    state, (c, _) = _run(state, compile_V(canonical, "V", epsilon), wire, reset=True)
    readout = MeasurementOp.projective(canonical.m_basis, labels=("m0", "m1"), name="m-basis")
    try:
        state, t = apply_measurement(state, readout, state.cursor_site(wire))
    except EndOfWireError as e:
        raise WireExhaustedError(f"wire {wire} has no site left for the readout") from e

    frame = PauliFrame((a,), (b ^ c ^ t,), basis="m")
    target = prep.prepared_state if prep is not None else None
    return _finish(state, canonical, wire, "simple", host, frame, (1, 1), target, start_column)


def _failed(
    state: SimState,
    canonical: CanonicalWire,
    wire: int,
    phase: int,
    trials: Tuple[int, int],
    factorization: Tuple[float, ...],
    start_column: int,
    protocol: str = "general",
) -> LocalizationResult:
    if phase == 0:
        logger.warning(f"Preparation on wire {wire} ran out of attempts; localization not started")
    else:
        logger.warning(f"Localization on wire {wire} failed in phase {phase} after {max(trials)} trials")
    return LocalizationResult(
        wire=wire,
        protocol=protocol,
        succeeded=False,
        host_site=None,
        trials_per_phase=trials,
        frame=PauliFrame.identity(1, basis="m"),
        state=state,
        m_basis=canonical.m_basis,
        failed_phase=phase,
        factorization=factorization,
        sites_used=state.cursors[wire] - start_column,
    )


def _exhausted_state(error: PatternExhaustedError, fallback: SimState) -> SimState:
    return error.state if isinstance(error.state, SimState) else fallback


def unprepared_result(
    state: SimState, wire: int, protocol: str = "general", start_column: int = 1
) -> LocalizationResult:
    """
    Failed result for a wire whose preparation pattern ran out of attempts.

    ``failed_phase`` is 0: neither filtering phase was attempted.
    """
    canonical = state.network.canonical_wire(wire)
    return _failed(state, canonical, wire, 0, (0, 0), (), start_column, protocol)


def localize_general(
    state: SimState,
    prep: Optional[MeasurementPattern],
    epsilon: float,
    wire: int = 0,
    trials: Optional[int] = None,
) -> LocalizationResult:
    """
    Two-phase filtered localization.

    Phase (i) retains sites until the filter passes; the passing site is the
    host. Phase (ii) runs V. Phase (iii) filters again and reads the passing
    site in the m-basis. Every failed filter is followed by V' to restart the
    wire from a known correlation state.

    Args:
        state: Simulator state
        prep: Pattern preparing the logical state, or None if already run
        epsilon: Target failure probability; sets the trial budget
        wire: Wire to localize
        trials: Trial budget per phase, overriding the one derived from epsilon

    Returns:
        LocalizationResult; ``succeeded`` is False when a phase runs out of
        trials (``failed_phase`` 1 or 3) or the prep runs out of attempts (0)
    """
    canonical = state.network.canonical_wire(wire)
    if canonical.r1 <= TOL.atol:
        result = localize_simple(state, prep, wire=wire, epsilon=epsilon)
        return dataclasses.replace(result, protocol="general")

    budget = trials if trials is not None else required_trials(epsilon, canonical.r1)
    if budget < 1:
        raise ProtocolError("at least one trial per phase is required")
    filter_op = build_filter(canonical.r1).measurement(canonical.m_basis)
    v = compile_V(canonical, "V", epsilon)
    v_prime = compile_V(canonical, "V'", epsilon)
    start_column = state.cursors[wire]
    try:
        state, (a, b) = _prepare(state, prep, wire, None)
    except PatternExhaustedError as e:
        return unprepared_result(_exhausted_state(e, state), wire, "general", start_column)
    factorization = []

    host = None
    first = 0
    for trial in range(1, budget + 1):
        state, site = _retain(state, wire)
        state, outcome = apply_measurement(state, filter_op, site, release=False)
        if outcome == 0:
            host, first = site, trial
            break
        factorization.append(float(schmidt_coefficients(state, site)[0]))
        state = release_site(state, site)
        state, (e, f) = _run(state, v_prime, wire, reset=True)
        a, b = a ^ e, b ^ f
    if host is None:
        return _failed(state, canonical, wire, 1, (budget, 0), tuple(factorization), start_column)

    state, (c, _) = _run(state, v, wire, reset=True)

    readout = MeasurementOp.projective(canonical.m_basis, labels=("m0", "m1"), name="m-basis")
    e_acc = 0
    t = None
    second = 0
    for trial in range(1, budget + 1):
        state, site = _retain(state, wire)
        state, outcome = apply_measurement(state, filter_op, site, release=False)
        if outcome == 0:
            state, t = apply_measurement(state, readout, site)
            second = trial
            break
        factorization.append(float(schmidt_coefficients(state, site)[0]))
        state = release_site(state, site)
        state, (e, _) = _run(state, v_prime, wire, reset=True)
        e_acc ^= e
    if t is None:
        return _failed(state, canonical, wire, 3, (first, budget), tuple(factorization), start_column)

    frame = PauliFrame((a,), (b ^ c ^ t ^ e_acc,), basis="m")
    target = prep.prepared_state if prep is not None else None
    return _finish(
        state, canonical, wire, "general", host, frame, (first, second), target,
        start_column, tuple(factorization),
    )


def decode_output(result: LocalizationResult, state: Optional[SimState] = None) -> np.ndarray:
    """
    Logical state on the host site after the frame correction.

    Returns the principal eigenvector of the corrected host density matrix,
    in logical (correlation) coordinates, with its first nonzero entry real.
    """
    if not result.succeeded or result.host_site is None:
        raise ProtocolError("no host site: localization did not succeed")
    state = state if state is not None else result.state
    rho = site_density(state, result.host_site)
    correction = result.frame.correction(0, result.m_basis)
    logical = dagger(result.m_basis) @ correction @ rho @ dagger(correction) @ result.m_basis
    _, vectors = np.linalg.eigh(logical)
    psi = vectors[:, -1]
    pivot = psi[0] if abs(psi[0]) > TOL.atol else psi[1]
    return psi * np.exp(-1j * np.angle(pivot))
