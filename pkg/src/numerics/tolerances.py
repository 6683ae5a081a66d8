"""
Centralized numerical tolerances
"""

from pydantic import BaseModel, ConfigDict, Field


class Tolerances(BaseModel):
    """Single knob for every numerical comparison in the toolkit"""

    model_config = ConfigDict(frozen=True)

    atol: float = Field(default=1e-10, gt=0)
    unitary_tol: float = Field(default=1e-12, gt=0)
    eig_residual: float = Field(default=1e-9, gt=0)
    zero_probability: float = Field(default=1e-14, gt=0)
    canonical_residual: float = Field(default=1e-8, gt=0)
    angle_tol: float = Field(default=1e-9, gt=0)
    max_dense_qubits: int = Field(default=20, ge=1)


TOL = Tolerances()
