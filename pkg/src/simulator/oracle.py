"""
State-vector oracle

Conditions the dense expanded resource on a transcript and compares its
next-step statistics with the simulator's.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from src.errors import IllegalStepError, SimulationError, SizeGuardError
from src.numerics.linalg import apply_on_axes, reduced_density
from src.numerics.tolerances import TOL
from src.resource.expansion import expand_state
from src.simulator.measurement import MeasurementOp, Site, pauli_measurement
from src.simulator.network import Network
from src.simulator.state import SimState, outcome_distribution

logger = logging.getLogger(__name__)

CHECK_BASES = tuple(pauli_measurement(axis) for axis in ("Z", "X", "Y"))


def _guard(network: Network) -> int:
    total = network.M * network.N
    if total > TOL.max_dense_qubits:
        raise SizeGuardError(f"{total} physical qubits exceed the {TOL.max_dense_qubits}-qubit oracle guard")
    return total


def conditioned_state(state: SimState) -> np.ndarray:
    """Expanded physical state after every recorded measurement, as a (2,)*n tensor"""
    network = state.network
    total = _guard(network)
    psi = expand_state(network.resource).reshape((network.d,) * total)
    for record in state.transcript:
        if record.kind != "measure":
            continue
        kraus = record.op.operators[record.outcome]
        psi = apply_on_axes(psi, kraus, [network.qubit_index(record.site)])
        norm = np.linalg.norm(psi)
        if norm < TOL.zero_probability:
            raise SimulationError(f"transcript record {record.index} has zero oracle probability")
        psi = psi / norm
    return psi


def oracle_distribution(
    psi: np.ndarray, network: Network, op: MeasurementOp, site: Site
) -> np.ndarray:
    axis = network.qubit_index(Site(*site))
    weights = np.array(
        [np.linalg.norm(apply_on_axes(psi, k, [axis])) ** 2 for k in op.operators]
    )
    return weights / weights.sum()


def oracle_site_density(state: SimState, sites: Sequence[Site]) -> np.ndarray:
    """Reduced density matrix of physical sites computed from the full state"""
    psi = conditioned_state(state)
    axes = [state.network.qubit_index(Site(*s)) for s in sites]
    ordered = np.moveaxis(psi, axes, list(range(len(axes))))
    return reduced_density(ordered, list(range(len(axes))))


def reachable_sites(state: SimState) -> List[Site]:
    sites = list(state.retained)
    for wire in range(state.network.M):
        if state.cursors[wire] <= state.network.N:
            sites.append(state.cursor_site(wire))
    return sites


def oracle_check(state: SimState, checks: Optional[Sequence[MeasurementOp]] = None) -> float:
    """
    Worst total-variation distance between simulator and oracle statistics.

    Every reachable site (retained sites and cursor sites whose couplings
    allow a step) is measured in the Z, X and Y bases unless other checks are given.
    Steps the state does not allow are skipped; any other simulator error,
    a CompletenessError in particular, propagates.
    """
    checks = CHECK_BASES if checks is None else tuple(checks)
    psi = conditioned_state(state)
    worst = 0.0
    for site in reachable_sites(state):
        for op in checks:
            try:
                p = outcome_distribution(state, op, site)
            except IllegalStepError as e:
                logger.debug(f"Skipping check on {tuple(site)}: {e}")
                continue
            q = oracle_distribution(psi, state.network, op, site)
            worst = max(worst, 0.5 * float(np.sum(np.abs(p - q))))
    logger.debug(f"Oracle check over {len(state.transcript)} records: max TV {worst:.3e}")
    return worst
