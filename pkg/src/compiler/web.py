"""
Web state preparation

A WebCircuit is a list of local gates and the web's own couplings in column
order. Between consecutive couplings each wire runs one compiled segment,
padded with Hadamard pairs so its cursor lands exactly one past the
coupling column.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from src.errors import CompilationError, DimensionMismatchError, ProtocolError
from src.numerics.linalg import I2, as_matrix, is_unitary, kron, normalized
from src.numerics.tolerances import TOL
from src.resource.web import WebResource
from src.simulator.state import SimState

from .executor import run_pattern
from .pattern import MeasurementPattern, identity_pattern
from .rotations import compile_rotation

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LocalGate:
    wire: int
    unitary: np.ndarray


@dataclass(frozen=True)
class CouplingGate:
    """The web coupling between ``upper`` and ``upper + 1``, at its own column"""

    upper: int


Operation = Union[LocalGate, CouplingGate]


@dataclass(frozen=True, eq=False)
class WebCircuit:
    """Circuit on the wires' correlation spaces, starting from their left boundaries"""

    n_wires: int
    operations: Tuple[Operation, ...]

    @classmethod
    def build(cls, n_wires: int, operations: Sequence[Operation]) -> "WebCircuit":
        ops: List[Operation] = []
        for op in operations:
            if isinstance(op, LocalGate):
                unitary = as_matrix(op.unitary, "local gate")
                if unitary.shape != (2, 2) or not is_unitary(unitary, TOL.atol):
                    raise DimensionMismatchError("local gates must be 2x2 unitaries")
                if not 0 <= op.wire < n_wires:
                    raise CompilationError(f"local gate on missing wire {op.wire}")
                ops.append(LocalGate(op.wire, unitary))
            elif isinstance(op, CouplingGate):
                if not 0 <= op.upper < n_wires - 1:
                    raise CompilationError(f"coupling gate on missing wire pair {op.upper}")
                ops.append(op)
            else:
                raise CompilationError(f"unknown circuit operation {op!r}")
        return cls(n_wires, tuple(ops))

    def target_state(self, web: WebResource) -> np.ndarray:
        """Dense correlation-space state the circuit prepares, wire 0 most significant"""
        psi = kron(*[w.left for w in web.wires])
        coupling_index = 0
        for op in self.operations:
            if isinstance(op, LocalGate):
                ops = [I2] * self.n_wires
                ops[op.wire] = op.unitary
                psi = kron(*ops) @ psi
            else:
                coupling = web.couplings[coupling_index]
                coupling_index += 1
                left = np.eye(2**op.upper)
                right = np.eye(2 ** (self.n_wires - op.upper - 2))
                psi = kron(left, coupling.unitary, right) @ psi
        return normalized(psi)


@dataclass(frozen=True, eq=False)
class WebPreparation:
    """Per-wire segment unitaries of a circuit, with both parity compilations"""

    web: WebResource
    circuit: WebCircuit
    segments: Tuple[Tuple[np.ndarray, ...], ...]
    epsilon: float
    target_state: np.ndarray
    _patterns: Dict[Tuple[int, int, int], MeasurementPattern]

    def pattern(self, wire: int, index: int, parity: int) -> MeasurementPattern:
        key = (wire, index, parity % 2)
        if key not in self._patterns:
            self._patterns[key] = compile_rotation(
                self.web.canonical[wire],
                self.segments[wire][index],
                self.epsilon,
                parity=parity,
                label="segment",
            )
        return self._patterns[key]

    def final_pattern(self, wire: int) -> MeasurementPattern:
        index = len(self.segments[wire]) - 1
        key = (wire, index, -1)
        if key not in self._patterns:
            self._patterns[key] = compile_rotation(
                self.web.canonical[wire], self.segments[wire][index], self.epsilon, label="segment"
            )
        return self._patterns[key]


def compile_web_prep(web: WebResource, circuit: WebCircuit, epsilon: float) -> WebPreparation:
    """
    Split a circuit into per-wire segments between the web's couplings.

    Raises:
        CompilationError: If coupling gates do not match the web's couplings in
            column order, a coupling is not controlled-Z, or a segment could
            run past its coupling column when every attempt fails
    """
    if circuit.n_wires != web.M:
        raise CompilationError(f"circuit has {circuit.n_wires} wires, web has {web.M}")
    for coupling in web.couplings:
        if not coupling.is_cz:
            raise CompilationError("web preparation supports controlled-Z couplings only")

    gates = [op for op in circuit.operations if isinstance(op, CouplingGate)]
    if len(gates) != len(web.couplings) or any(
        g.upper != c.upper for g, c in zip(gates, web.couplings)
    ):
        raise CompilationError("coupling gates must list the web's couplings in column order")

    segments: List[List[np.ndarray]] = [[] for _ in range(web.M)]
    current = [I2.copy() for _ in range(web.M)]
    for op in circuit.operations:
        if isinstance(op, LocalGate):
            current[op.wire] = op.unitary @ current[op.wire]
        else:
            for w in (op.upper, op.upper + 1):
                segments[w].append(current[w])
                current[w] = I2.copy()
    for w in range(web.M):
        segments[w].append(current[w])

    logger.info(
        f"Compiled web circuit: {len(circuit.operations)} operations, "
        f"{sum(len(s) for s in segments)} segments over {web.M} wires"
    )
    prep = WebPreparation(
        web=web,
        circuit=circuit,
        segments=tuple(tuple(s) for s in segments),
        epsilon=epsilon,
        target_state=circuit.target_state(web),
        _patterns={},
    )
    _check_segment_room(prep)
    return prep


def _check_segment_room(prep: WebPreparation) -> None:
    """Every segment must fit before its coupling column even when all attempts fail"""
    for w in range(prep.web.M):
        start = 1
        columns = [c.column for c in prep.web.couplings if w in c.wires]
        for index, column in enumerate(columns):
            available = column - start + 1
            worst = prep.pattern(w, index, available % 2).declared_length
            if worst > available:
                raise CompilationError(
                    f"segment {index} on wire {w} may need {worst} sites but only {available} "
                    f"precede coupling column {column}; couple at a later column"
                )
            start = column + 1


def _run_segment_to(
    state: SimState, prep: WebPreparation, wire: int, index: int, column: int
) -> SimState:
    available = column - state.cursors[wire] + 1
    if available < 0:
        raise ProtocolError(f"wire {wire} passed column {column} before its coupling")
    state = run_pattern(state, prep.pattern(wire, index, available % 2), wire)
    remaining = column + 1 - state.cursors[wire]
    if remaining < 0 or remaining % 2:
        raise ProtocolError(
            f"segment {index} on wire {wire} overran coupling column {column}; couple at a later column"
        )
    if remaining:
        idle = identity_pattern(prep.web.canonical[wire].family, remaining // 2)
        state = run_pattern(state, idle, wire)
    return state


def run_web_preparation(state: SimState, prep: WebPreparation) -> SimState:
    """Run every segment, applying couplings and propagating byproducts through them"""
    web = prep.web
    done = [0] * web.M
    for index, coupling in enumerate(web.couplings):
        for w in coupling.wires:
            state = _run_segment_to(state, prep, w, done[w], coupling.column)
            done[w] += 1
        if index not in state.applied:
            raise ProtocolError(f"coupling {index} was not applied at column {coupling.column}")
        # CZ (X^a Z^b x X^c Z^d) CZ = X^a Z^(b+c) x X^c Z^(d+a)
        xu, zu = state.frame.get(coupling.upper)
        xl, zl = state.frame.get(coupling.lower)
        frame = state.frame.set(coupling.upper, xu, zu ^ xl).set(coupling.lower, xl, zl ^ xu)
        state = state.replace(frame=frame)

    for w in range(web.M):
        state = run_pattern(state, prep.final_pattern(w), w)
    logger.debug(f"Web preparation finished at cursors {state.cursors}")
    return state
