"""
Exact Measurement Engine

A SimState holds the joint vector of retained physical sites and the
correlation spaces of every wire, with axes

    [retained site 0, ..., retained site r-1, corr wire 0, ..., corr wire M-1]

Outcome probabilities weigh each branch with the right environment of the
unmeasured remainder, so they are exact for finite wires.
"""

import dataclasses
import logging
from dataclasses import dataclass
from typing import FrozenSet, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import (
    CompletenessError,
    EndOfWireError,
    IllegalStepError,
    SimulationError,
    SiteConsumedError,
    ZeroProbabilityError,
)
from src.numerics.linalg import (
    apply_on_axes,
    apply_site_map,
    reduced_density,
    sqrtm_psd,
    unitary_distance,
)
from src.numerics.tolerances import TOL
from src.simulator.measurement import MeasurementOp, PauliFrame, Site
from src.simulator.network import Network, Resource
from src.simulator.rng import draw_uniform

logger = logging.getLogger(__name__)

RETAINED_CAPACITY = 2


class TranscriptRecord(NamedTuple):
    index: int
    site: Site
    kind: str
    op: Optional[MeasurementOp]
    outcome: int
    label: str
    probability: float
    forced: bool = False


@dataclass(frozen=True, eq=False)
class SimState:
    """Partially measured resource; every update returns a new state"""

    network: Network
    cursors: Tuple[int, ...]
    retained: Tuple[Site, ...]
    joint: np.ndarray
    applied: FrozenSet[int]
    frame: PauliFrame
    seed: int
    transcript: Tuple[TranscriptRecord, ...] = ()
    released: Tuple[Tuple[Site, np.ndarray], ...] = ()

    @property
    def resource(self) -> Resource:
        return self.network.resource

    @property
    def n_retained(self) -> int:
        return len(self.retained)

    def retained_on(self, wire: int) -> List[Site]:
        return [s for s in self.retained if s.wire == wire]

    def cursor_site(self, wire: int = 0) -> Site:
        return Site(wire, self.cursors[wire])

    def remaining(self, wire: int = 0) -> int:
        """Unpassed sites on a wire"""
        return self.network.N - self.cursors[wire] + 1

    def replace(self, **changes: object) -> "SimState":
        return dataclasses.replace(self, **changes)

    def outcomes(self) -> List[str]:
        return [r.label for r in self.transcript if r.kind == "measure"]


class _Branches(NamedTuple):
    probabilities: np.ndarray
    joints: List[np.ndarray]
    factors: List[Optional[np.ndarray]]
    cursors: Tuple[int, ...]
    applied: FrozenSet[int]
    kind: str
    axis: int


def _environment(state: SimState, cursors: Tuple[int, ...], applied: FrozenSet[int]):
    return state.network.environments.environment(cursors, applied)


def _norm_sq(joint: np.ndarray, env: np.ndarray) -> float:
    mat = joint.reshape(-1, env.shape[0])
    return float(np.einsum("rc,cd,rd->", np.conj(mat), env, mat).real)


def _locate(state: SimState, site: Site) -> Tuple[str, int]:
    site = Site(*site)
    if site in state.retained:
        return "retained", state.retained.index(site)
    if not 0 <= site.wire < state.network.M:
        raise SiteConsumedError(f"no wire {site.wire}")
    if site.column == state.cursors[site.wire]:
        return "cursor", site.wire
    raise SiteConsumedError(
        f"site {tuple(site)} is neither retained nor the cursor site "
        f"(cursor at column {state.cursors[site.wire]})"
    )


def _check_advance(state: SimState, wire: int) -> None:
    column = state.cursors[wire]
    if column > state.network.N:
        raise EndOfWireError(f"wire {wire} has no sites left")
    for index, coupling in enumerate(state.network.couplings):
        if wire in coupling.wires and coupling.column < column and index not in state.applied:
            raise IllegalStepError(
                f"wire {wire} cannot pass column {column} before coupling at column "
                f"{coupling.column} is applied"
            )


def _advance(
    state: SimState, wire: int, joints: Sequence[np.ndarray], n_retained: int
) -> Tuple[Tuple[int, ...], FrozenSet[int], List[np.ndarray]]:
    """Move a cursor one column and apply couplings that become due"""
    cursors = list(state.cursors)
    cursors[wire] += 1
    applied = set(state.applied)
    joints = list(joints)
    for index, coupling in enumerate(state.network.couplings):
        if index in applied:
            continue
        if cursors[coupling.upper] > coupling.column and cursors[coupling.lower] > coupling.column:
            axes = [n_retained + coupling.upper, n_retained + coupling.lower]
            joints = [apply_on_axes(j, coupling.unitary, axes) for j in joints]
            applied.add(index)
            logger.debug(f"Applied coupling {coupling.wires} at column {coupling.column}")
    return tuple(cursors), frozenset(applied), joints


def _resolve_site(op: MeasurementOp, site: Optional[Site]) -> Site:
    if site is None:
        site = op.site
    if site is None:
        raise SiteConsumedError(f"{op.name}: no site given")
    return Site(*site)


def _branches(state: SimState, op: MeasurementOp, site: Site) -> _Branches:
    kind, where = _locate(state, site)
    n_ret = state.n_retained
    env, log_scale = _environment(state, state.cursors, state.applied)
    base = _norm_sq(state.joint, env)

    if op.n_outcomes == 1:
        k = op.operators[0]
        if kind == "retained":
            joint = apply_on_axes(state.joint, k, [where])
        elif unitary_distance(k, np.eye(k.shape[0])) <= TOL.unitary_tol:
            joint = state.joint
        else:
            raise IllegalStepError(f"{op.name}: retain the site before applying a unitary to it")
        return _Branches(
            np.ones(1), [joint], [None], state.cursors, state.applied, kind, where
        )

    if kind == "retained":
        joints = [apply_on_axes(state.joint, k, [where]) for k in op.operators]
        factors = [None if op.rank_one(i) is None else op.rank_one(i)[0] for i in range(op.n_outcomes)]
        weights = np.array([_norm_sq(j, env) for j in joints])
        total_ratio = weights.sum() / base
        cursors, applied = state.cursors, state.applied
    else:
        _check_advance(state, where)
        tensor = state.network.wires[where].site(site.column)
        joints, factors = [], []
        for i in range(op.n_outcomes):
            decomposition = op.rank_one(i)
            if decomposition is None:
                raise IllegalStepError(
                    f"{op.name}: outcome {op.labels[i]} is not rank one; retain the site first"
                )
            u, v = decomposition
            joints.append(apply_on_axes(state.joint, tensor.outcome_operator(v), [n_ret + where]))
            factors.append(u)
        cursors, applied, joints = _advance(state, where, joints, n_ret)
        new_env, new_log = _environment(state, cursors, applied)
        weights = np.array([_norm_sq(j, new_env) for j in joints])
        total_ratio = weights.sum() * np.exp(new_log - log_scale) / base

    if abs(total_ratio - 1.0) > TOL.atol:
        raise CompletenessError(f"{op.name}: branch weights sum to {total_ratio:.12f} of the norm")
    probabilities = weights / weights.sum()
    return _Branches(probabilities, joints, factors, cursors, applied, kind, where)


def init_state(resource: Union[Resource, Network], seed: int = 0) -> SimState:
    """Fresh state: no site passed, correlation spaces hold the left boundaries"""
    network = Network.of(resource)
    joint = np.array(1.0 + 0j)
    for wire in network.wires:
        joint = np.multiply.outer(joint, wire.left)
    cursors = (1,) * network.M
    env, _ = network.environments.environment(cursors, frozenset())
    joint = joint / np.sqrt(_norm_sq(joint, env))
    return SimState(
        network=network,
        cursors=cursors,
        retained=(),
        joint=joint,
        applied=frozenset(),
        frame=PauliFrame.identity(network.M),
        seed=int(seed),
    )


def outcome_distribution(
    state: SimState, op: MeasurementOp, site: Optional[Site] = None
) -> np.ndarray:
    """Exact outcome probabilities of ``op`` on a cursor or retained site"""
    return _branches(state, op, _resolve_site(op, site)).probabilities


def apply_measurement(
    state: SimState,
    op: MeasurementOp,
    site: Optional[Site] = None,
    forced_outcome: Optional[int] = None,
    release: bool = True,
) -> Tuple[SimState, int]:
    """
    Measure a site and update the joint state.

    Args:
        state: Current state
        op: Measurement (rank-one elements required on the cursor site)
        site: Target site; defaults to ``op.site``
        forced_outcome: Select the outcome instead of sampling
        release: Factor out a retained site left in a rank-one outcome

    Returns:
        New state and the outcome index
    """
    site = _resolve_site(op, site)
    branches = _branches(state, op, site)
    p = branches.probabilities

    if forced_outcome is not None:
        outcome = int(forced_outcome)
        if not 0 <= outcome < len(p) or p[outcome] < TOL.zero_probability:
            raise ZeroProbabilityError(
                f"{op.name}: forced outcome {forced_outcome} has probability "
                f"{p[outcome] if 0 <= outcome < len(p) else 0.0:.3e}"
            )
    else:
        u = draw_uniform(state.seed, len(state.transcript))
        outcome = int(np.searchsorted(np.cumsum(p), u * p.sum(), side="right"))
        outcome = min(outcome, int(np.flatnonzero(p > 0)[-1]))

    env, _ = _environment(state, branches.cursors, branches.applied)
    joint = branches.joints[outcome]
    joint = joint / np.sqrt(_norm_sq(joint, env))
    retained = state.retained
    released = state.released
    factor = branches.factors[outcome]

    if factor is not None and branches.kind == "cursor":
        released = released + ((site, factor),)
    elif factor is not None and release:
        joint = np.tensordot(np.conj(factor), joint, axes=([0], [branches.axis]))
        retained = tuple(s for s in retained if s != site)
        released = released + ((site, factor),)

    record = TranscriptRecord(
        index=len(state.transcript),
        site=site,
        kind="measure",
        op=op,
        outcome=outcome,
        label=op.labels[outcome],
        probability=float(p[outcome]),
        forced=forced_outcome is not None,
    )
    logger.debug(f"{op.name} on {tuple(site)} -> {op.labels[outcome]} (p={p[outcome]:.6f})")
    new_state = state.replace(
        cursors=branches.cursors,
        applied=branches.applied,
        joint=joint,
        retained=retained,
        released=released,
        transcript=state.transcript + (record,),
    )
    return new_state, outcome


def retain_site(state: SimState, wire: int = 0) -> SimState:
    """Pass the cursor site without measuring, keeping its physical index"""
    if len(state.retained_on(wire)) >= RETAINED_CAPACITY:
        raise IllegalStepError(f"wire {wire} already retains {RETAINED_CAPACITY} sites")
    _check_advance(state, wire)
    site = state.cursor_site(wire)
    n_ret = state.n_retained
    tensor = state.network.wires[wire].site(site.column)
    joint = apply_site_map(state.joint, tensor.array, corr_axis=n_ret + wire, phys_position=n_ret)
    cursors, applied, (joint,) = _advance(state, wire, [joint], n_ret + 1)
    env, _ = _environment(state, cursors, applied)
    joint = joint / np.sqrt(_norm_sq(joint, env))
    record = TranscriptRecord(
        index=len(state.transcript),
        site=site,
        kind="retain",
        op=None,
        outcome=-1,
        label="retain",
        probability=1.0,
    )
    return state.replace(
        cursors=cursors,
        applied=applied,
        joint=joint,
        retained=state.retained + (site,),
        transcript=state.transcript + (record,),
    )


def release_site(state: SimState, site: Site) -> SimState:
    """Factor a retained site out of the joint state; it must be a product factor"""
    kind, axis = _locate(state, site)
    if kind != "retained":
        raise SiteConsumedError(f"site {tuple(site)} is not retained")
    moved = np.moveaxis(state.joint, axis, 0)
    u, s, vh = np.linalg.svd(moved.reshape(moved.shape[0], -1), full_matrices=False)
    if s[1] > TOL.atol * s[0]:
        raise SimulationError(
            f"site {tuple(site)} is entangled with the rest (second Schmidt value {s[1] / s[0]:.2e})"
        )
    factor = u[:, 0]
    joint = np.tensordot(np.conj(factor), state.joint, axes=([0], [axis]))
    env, _ = _environment(state, state.cursors, state.applied)
    joint = joint / np.sqrt(_norm_sq(joint, env))
    return state.replace(
        joint=joint,
        retained=tuple(r for r in state.retained if r != Site(*site)),
        released=state.released + ((Site(*site), factor),),
    )


def physical_view(state: SimState) -> np.ndarray:
    """
    Tensor isometric to the physical state of every unmeasured site.

    Axes are the retained sites followed by one axis that purifies the
    unpassed remainder; inner products match the physical state exactly.
    """
    env, _ = _environment(state, state.cursors, state.applied)
    root = sqrtm_psd(env)
    mat = state.joint.reshape(-1, env.shape[0]) @ root.T
    view = mat.reshape((state.network.d,) * state.n_retained + (env.shape[0],))
    return view / np.linalg.norm(view)


def reduced_state(state: SimState, sites: Sequence[Site]) -> np.ndarray:
    """Density matrix of retained sites, in the order given"""
    axes = []
    for site in sites:
        kind, axis = _locate(state, site)
        if kind != "retained":
            raise SiteConsumedError(f"site {tuple(site)} is not retained")
        axes.append(axis)
    view = physical_view(state)
    ordered = np.moveaxis(view, axes, list(range(len(axes))))
    return reduced_density(ordered, list(range(len(axes))))


def site_density(state: SimState, site: Site) -> np.ndarray:
    return reduced_state(state, [site])


def schmidt_coefficients(state: SimState, site: Site) -> np.ndarray:
    """Schmidt coefficients across (site | everything else), descending"""
    w = np.linalg.eigvalsh(site_density(state, site))
    return np.sqrt(np.clip(w[::-1], 0.0, None))


def readout_distribution(state: SimState, basis: np.ndarray, wire: int = 0) -> np.ndarray:
    """Statistics of measuring the cursor site of a wire in a configurable basis"""
    op = MeasurementOp.projective(basis, name="readout")
    return outcome_distribution(state, op, state.cursor_site(wire))
