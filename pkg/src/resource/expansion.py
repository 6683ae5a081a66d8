"""
Full-state expansion of wires and webs (dense oracle)

Physical qubit (wire w, column j) sits at position w * N + (j - 1).
"""

import logging
from typing import Union

import numpy as np

from src.errors import ResourceError, SizeGuardError
from src.numerics.linalg import apply_on_axes, apply_site_map
from src.numerics.tolerances import TOL
from src.resource.canonical import CanonicalWire
from src.resource.web import WebResource
from src.resource.wire import WireResource

logger = logging.getLogger(__name__)

Resource = Union[WireResource, CanonicalWire, WebResource]


def expand_state(resource: Resource) -> np.ndarray:
    """Normalized amplitude vector over every physical site"""
    if isinstance(resource, CanonicalWire):
        resource = resource.base
    if isinstance(resource, WireResource):
        wires = (resource,)
        couplings = ()
    else:
        wires = resource.wires
        couplings = resource.couplings

    m, n = len(wires), wires[0].N
    if m * n > TOL.max_dense_qubits:
        raise SizeGuardError(f"{m * n} physical qubits exceed the {TOL.max_dense_qubits}-qubit guard")

    # axes: physical sites in column-major order, then one correlation axis per wire
    tensor = np.array(1.0 + 0j)
    for w in wires:
        tensor = np.multiply.outer(tensor, w.left)
    n_phys = 0
    for column in range(1, n + 1):
        for index, w in enumerate(wires):
            tensor = apply_site_map(
                tensor, w.site(column).array, corr_axis=n_phys + index, phys_position=n_phys
            )
            n_phys += 1
        for coupling in couplings:
            if coupling.column == column:
                tensor = apply_on_axes(
                    tensor, coupling.unitary, [n_phys + coupling.upper, n_phys + coupling.lower]
                )

    for index in reversed(range(m)):
        tensor = np.tensordot(tensor, np.conj(wires[index].right), axes=([n_phys + index], [0]))

    # column-major (j, w) -> wire-major (w, j)
    order = [(j - 1) * m + w for w in range(m) for j in range(1, n + 1)]
    tensor = np.transpose(tensor, order)
    vector = tensor.reshape(-1)
    norm = np.linalg.norm(vector)
    if norm < TOL.zero_probability:
        raise ResourceError("resource state has zero norm")
    logger.debug(f"Expanded {m}x{n} resource, raw norm {norm:.6e}")
    return vector / norm
