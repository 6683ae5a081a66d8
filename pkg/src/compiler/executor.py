"""
Pattern execution

Runs a compiled pattern on the simulator, one site at a time. Each site's
basis depends on the wire's Pauli frame and on the angle still owed by the
current step; failed attempts are undone with a deterministic Hadamard site
and retried with the remaining angle.
"""

import logging
from typing import Tuple

import numpy as np

from src.errors import CompilationError, PatternExhaustedError, SimulationError
from src.numerics.linalg import wrap_angle
from src.numerics.tolerances import TOL
from src.simulator.measurement import MeasurementOp
from src.simulator.state import SimState, apply_measurement

from .families import phase_family
from .pattern import MeasurementPattern, PatternContext, PatternStep

logger = logging.getLogger(__name__)


def _reduce(owed: float, z: int) -> Tuple[float, int]:
    """Fold the owed angle into [-pi/2, pi/2]; a pi shift is a Z byproduct"""
    owed = wrap_angle(owed)
    if owed > np.pi / 2:
        return owed - np.pi, z ^ 1
    if owed < -np.pi / 2:
        return owed + np.pi, z ^ 1
    return owed, z


def _measure_phase(state: SimState, wire: int, angle: float) -> Tuple[SimState, float]:
    """Measure the cursor site for H Rz(angle); returns the angle actually applied"""
    site = state.cursor_site(wire)
    family = phase_family(state.network.wires[wire].site(site.column))
    basis = family.basis(angle)
    op = MeasurementOp.projective(basis, labels=("0", "1"), name=f"phase[{angle:+.6f}]")
    state, outcome = apply_measurement(state, op, site)
    applied = family.outcome_angle(basis[:, outcome])
    if applied is None:
        raise SimulationError(f"outcome {outcome} of {op.name} is not unitary")
    return state, applied


def _hadamard(state: SimState, wire: int, x: int, z: int) -> Tuple[SimState, int, int]:
    state, applied = _measure_phase(state, wire, 0.0)
    x, z = z, x
    if abs(wrap_angle(applied)) <= TOL.angle_tol:
        return state, x, z
    if abs(abs(wrap_angle(applied)) - np.pi) <= TOL.angle_tol:
        return state, x ^ 1, z
    raise SimulationError(f"Hadamard site on wire {wire} applied angle {applied:.6f}")


def run_step(
    state: SimState, step: PatternStep, wire: int, x: int, z: int
) -> Tuple[SimState, int, int]:
    """
    Apply one H Rz(step.angle) with repeat-until-success.

    Frame convention: actual = X^x Z^z * ideal. Measuring for angle eta under
    X^x applies Rz((-1)^x eta) to the ideal state; H then swaps x and z.
    """
    owed, z = _reduce(step.angle, z)
    for attempt in range(1, step.max_attempts + 1):
        context = PatternContext(x, z, owed)
        state, applied = _measure_phase(state, wire, context.measured_angle)
        effective = -applied if x else applied
        x, z = z, x
        diff = wrap_angle(effective - owed)
        if abs(diff) <= TOL.angle_tol:
            return state, x, z
        if abs(abs(diff) - np.pi) <= TOL.angle_tol:
            return state, x ^ 1, z

        logger.debug(f"Step on wire {wire} missed by {diff:+.6f} (attempt {attempt})")
        if attempt == step.max_attempts:
            break
        state, x, z = _hadamard(state, wire, x, z)
        owed, z = _reduce(owed - effective, z)

    raise PatternExhaustedError(
        f"step angle {step.angle:+.6f} on wire {wire} failed {step.max_attempts} attempts",
        state=state.replace(frame=state.frame.set(wire, x, z)),
    )


def run_pattern(state: SimState, pattern: MeasurementPattern, wire: int = 0) -> SimState:
    """
    Execute a pattern on a wire, updating that wire's Pauli frame.

    Raises:
        CompilationError: If the pattern was compiled for another family
        PatternExhaustedError: If a step runs out of attempts; carries the state
            reached so far
        EndOfWireError: If the wire ends first
    """
    canonical = state.network.canonical_wire(wire)
    if canonical.family != pattern.family:
        raise CompilationError(
            f"pattern compiled for {pattern.family} cannot run on a {canonical.family} wire"
        )
    if pattern.is_empty:
        return state.replace(frame=state.frame.toggle(wire, *pattern.pauli))

    x, z = state.frame.get(wire)
    start = state.cursors[wire]
    for step in pattern.steps:
        state, x, z = run_step(state, step, wire, x, z)
    logger.debug(
        f"Ran {pattern.label} on wire {wire}: columns {start}..{state.cursors[wire] - 1}, frame ({x}, {z})"
    )
    return state.replace(frame=state.frame.set(wire, x, z))


def branch_operator(state: SimState, wire: int = 0, start: int = 0) -> np.ndarray:
    """
    Correlation-space operator applied on a wire by the transcript from record ``start``.

    Multiplies the outcome operators of the measured cursor sites, so it is
    independent of the input state. Normalized to determinant one.
    """
    op = np.eye(state.network.D, dtype=complex)
    retained = {r.site for r in state.transcript if r.kind == "retain"}
    for record in state.transcript[start:]:
        if record.kind != "measure" or record.site.wire != wire or record.site in retained:
            continue
        rank_one = record.op.rank_one(record.outcome)
        if rank_one is None:
            continue
        _, v = rank_one
        tensor = state.network.wires[wire].site(record.site.column)
        op = tensor.outcome_operator(v) @ op
    det = np.linalg.det(op)
    if abs(det) <= TOL.zero_probability:
        raise SimulationError("branch operator is singular")
    return op / np.sqrt(det)
