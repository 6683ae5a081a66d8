"""
Uniform view of wires and webs for the simulator, with cached right environments
"""

import logging
import weakref
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

import numpy as np

from src.errors import ResourceError
from src.numerics.linalg import dagger, kron
from src.numerics.tolerances import TOL
from src.resource.canonical import CanonicalWire
from src.resource.web import Coupling, WebResource
from src.resource.wire import WireResource
from src.simulator.measurement import Site

logger = logging.getLogger(__name__)

Resource = Union[WireResource, CanonicalWire, WebResource]

_NETWORKS: "weakref.WeakKeyDictionary[object, Network]" = weakref.WeakKeyDictionary()


@dataclass(frozen=True, eq=False)
class Network:
    """M wires (M = 1 for a plain wire) plus couplings"""

    resource: Resource
    canonical: Tuple[Optional[CanonicalWire], ...]
    wires: Tuple[WireResource, ...]
    couplings: Tuple[Coupling, ...]

    @classmethod
    def of(cls, resource: Union[Resource, "Network"]) -> "Network":
        """Shared network for a resource, so environment caches are reused"""
        if isinstance(resource, Network):
            return resource
        cached = _NETWORKS.get(resource)
        if cached is not None:
            return cached
        if isinstance(resource, WebResource):
            network = cls(resource, resource.canonical, resource.wires, resource.couplings)
        elif isinstance(resource, CanonicalWire):
            network = cls(resource, (resource,), (resource.base,), ())
        elif isinstance(resource, WireResource):
            network = cls(resource, (None,), (resource,), ())
        else:
            raise ResourceError(f"unsupported resource type {type(resource).__name__}")
        _NETWORKS[resource] = network
        return network

    @property
    def M(self) -> int:
        return len(self.wires)

    @property
    def N(self) -> int:
        return self.wires[0].N

    @property
    def D(self) -> int:
        return self.wires[0].D

    @property
    def d(self) -> int:
        return self.wires[0].d

    def canonical_wire(self, wire: int) -> CanonicalWire:
        canonical = self.canonical[wire]
        if canonical is None:
            raise ResourceError(f"wire {wire} carries no canonical form")
        return canonical

    def qubit_index(self, site: Site) -> int:
        """Position of a physical site in the expanded state"""
        return site.wire * self.N + site.column - 1

    @cached_property
    def environments(self) -> "EnvironmentCache":
        return EnvironmentCache(self)


class EnvironmentCache:
    """
    Right environments E with norm = v^dagger E v for a correlation vector v.

    Each environment is trace-normalized and returned with its log scale.
    Configurations without pending couplings factor into per-wire suffixes;
    the rest are contracted backwards once and memoized.
    """

    def __init__(self, network: Network):
        self.network = network
        self._suffix = [self._wire_suffix(w) for w in network.wires]
        self._joint: Dict[Tuple[Tuple[int, ...], FrozenSet[int]], Tuple[np.ndarray, float]] = {}

    @staticmethod
    def _wire_suffix(wire: WireResource) -> Tuple[np.ndarray, np.ndarray]:
        n, dim = wire.N, wire.D
        mats = np.zeros((n + 2, dim, dim), dtype=complex)
        logs = np.zeros(n + 2)
        env = np.outer(wire.right, np.conj(wire.right))
        mats[n + 1] = env
        for column in range(n, 0, -1):
            a = wire.site(column).array
            env = np.einsum("sba,bc,scd->ad", np.conj(a), env, a)
            trace = np.trace(env).real
            if trace <= TOL.zero_probability:
                raise ResourceError(f"right environment vanishes at column {column}")
            env = env / trace
            mats[column] = env
            logs[column] = logs[column + 1] + np.log(trace)
        return mats, logs

    def environment(
        self, cursors: Tuple[int, ...], applied: FrozenSet[int]
    ) -> Tuple[np.ndarray, float]:
        pending = [i for i in range(len(self.network.couplings)) if i not in applied]
        if not pending:
            mats = [self._suffix[w][0][c] for w, c in enumerate(cursors)]
            log_scale = sum(self._suffix[w][1][c] for w, c in enumerate(cursors))
            return kron(*mats), float(log_scale)

        key = (tuple(cursors), frozenset(applied))
        cached = self._joint.get(key)
        if cached is None:
            cached = self._contract(cursors, pending)
            self._joint[key] = cached
        return cached

    def _embed(self, op: np.ndarray, first: int) -> np.ndarray:
        span = int(round(np.log2(op.shape[0])))
        left = np.eye(2**first)
        right = np.eye(2 ** (self.network.M - first - span))
        return kron(left, op, right)

    def _contract(self, cursors: Tuple[int, ...], pending: List[int]) -> Tuple[np.ndarray, float]:
        network = self.network
        env = kron(*[np.outer(w.right, np.conj(w.right)) for w in network.wires])
        log_scale = 0.0
        for column in range(network.N, 0, -1):
            for index in pending:
                coupling = network.couplings[index]
                if coupling.column == column:
                    u = self._embed(coupling.unitary, coupling.upper)
                    env = dagger(u) @ env @ u
            for w, wire in enumerate(network.wires):
                if cursors[w] <= column:
                    ops = [self._embed(a, w) for a in wire.site(column).array]
                    env = sum(dagger(op) @ env @ op for op in ops)
            trace = np.trace(env).real
            if trace <= TOL.zero_probability:
                raise ResourceError(f"joint environment vanishes at column {column}")
            env = env / trace
            log_scale += np.log(trace)
        logger.debug(f"Contracted joint environment for cursors {cursors}")
        return env, float(log_scale)
