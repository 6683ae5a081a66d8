"""
Localization on webs: prepare a joint correlation state, then localize every wire
"""

import dataclasses
import logging
from typing import List, Optional, Sequence

import numpy as np

from src.errors import PatternExhaustedError, ProtocolError
from src.numerics.linalg import dagger, kron, state_fidelity
from src.simulator.state import SimState, reduced_state

from src.compiler.web import WebPreparation, run_web_preparation

from .localization import LocalizationResult, localize_general, unprepared_result

logger = logging.getLogger(__name__)


def localize_web(
    state: SimState,
    prep: Optional[WebPreparation],
    epsilon: float,
    trials: Optional[int] = None,
) -> List[LocalizationResult]:
    """
    Run web preparation, then the general protocol on each wire in turn.

    Every coupling must be applied before localization starts. Each returned
    result carries the final joint state.
    """
    if prep is not None:
        try:
            state = run_web_preparation(state, prep)
        except PatternExhaustedError as e:
            exhausted = e.state if isinstance(e.state, SimState) else state
            logger.warning(f"Web preparation ran out of attempts: {e}")
            return [unprepared_result(exhausted, w) for w in range(exhausted.network.M)]
    pending = [i for i in range(len(state.network.couplings)) if i not in state.applied]
    if pending:
        raise ProtocolError(f"couplings {pending} lie beyond the localization start")

    results = []
    for wire in range(state.network.M):
        result = localize_general(state, None, epsilon, wire=wire, trials=trials)
        state = result.state
        results.append(result)
    succeeded = sum(r.succeeded for r in results)
    logger.info(f"Web localization: {succeeded}/{len(results)} wires localized")
    return [dataclasses.replace(r, state=state) for r in results]


def joint_output_fidelity(results: Sequence[LocalizationResult], target: np.ndarray) -> float:
    """
    Fidelity of the corrected joint host state with a logical target.

    ``target`` is the dense correlation-space state, wire 0 most significant.
    """
    if not results or not all(r.succeeded for r in results):
        raise ProtocolError("every wire must localize before the joint state is defined")
    state = results[-1].state
    rho = reduced_state(state, [r.host_site for r in results])
    correction = kron(*[r.frame.correction(0, r.m_basis) for r in results])
    corrected = correction @ rho @ dagger(correction)
    psi_m = kron(*[r.m_basis for r in results]) @ np.asarray(target, dtype=complex)
    return state_fidelity(corrected, psi_m)
