"""
QCS Localization - Measurement-based quantum computation in correlation space

Simulates matrix-product-state wires and webs, compiles adaptive measurement
patterns, and localizes correlation-space output onto physical sites.
"""

__version__ = "0.1.0"
