"""
Resource Module

Matrix-product wires, canonical rank-one forms, coupled webs and the dense
full-state expansion used as an oracle
"""

from .canonical import (
    CanonicalWire,
    canonicalize,
    make_canonical_wire,
    make_cluster_wire,
    make_theta_wire,
    to_canonical,
)
from .expansion import expand_state
from .web import Coupling, WebResource, make_web
from .wire import SiteTensor, WireResource, make_product_wire

__all__ = [
    "CanonicalWire",
    "Coupling",
    "SiteTensor",
    "WebResource",
    "WireResource",
    "canonicalize",
    "expand_state",
    "make_canonical_wire",
    "make_cluster_wire",
    "make_product_wire",
    "make_theta_wire",
    "make_web",
    "to_canonical",
]
