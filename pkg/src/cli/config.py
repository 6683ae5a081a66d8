"""
Experiment configuration

YAML files map onto ExperimentConfig. Complex numbers are written as
"re,im" strings, vectors as lists of them.
"""

import logging
import math
from pathlib import Path
from typing import List, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from src.errors import ConfigError
from src.numerics.linalg import H, I2, X, Y, Z, rz

logger = logging.getLogger(__name__)

NAMED_GATES = {
    "I": I2,
    "H": H,
    "X": X,
    "Y": Y,
    "Z": Z,
    "S": np.diag([1, 1j]),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
}


def parse_complex(value: Union[str, float, int, complex]) -> complex:
    """'re,im' -> complex; plain numbers pass through"""
    if isinstance(value, (int, float, complex)):
        return complex(value)
    parts = str(value).split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) != 2:
        raise ValueError(f"complex numbers are written 're,im', got {value!r}")
    return complex(float(parts[0]), float(parts[1]))


def parse_vector(values: List[Union[str, float]]) -> np.ndarray:
    return np.array([parse_complex(v) for v in values], dtype=complex)


class CouplingSpec(BaseModel):
    upper: int = Field(..., ge=0, description="Upper wire of the coupled pair")
    column: int = Field(..., ge=1, description="Column after which CZ acts")


class ResourceSpec(BaseModel):
    family: Literal["cluster", "theta"] = "theta"
    theta: Optional[float] = Field(None, description="Wire angle in (0, pi/4]")
    n: Optional[int] = Field(None, ge=2, description="Sites per wire; derived when omitted")
    wires: int = Field(1, ge=1, le=4)
    couplings: List[CouplingSpec] = Field(default_factory=list)
    left: Optional[List[Union[str, float]]] = None
    right: Optional[List[Union[str, float]]] = None

    @field_validator("theta")
    @classmethod
    def theta_in_range(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not 0.0 < v <= math.pi / 4 + 1e-15:
            raise ValueError(f"theta must lie in (0, pi/4], got {v}")
        return v

    @field_validator("left", "right")
    @classmethod
    def boundary_is_qubit(cls, v: Optional[List[Union[str, float]]]) -> Optional[List[Union[str, float]]]:
        if v is not None:
            vector = parse_vector(v)
            if vector.shape != (2,) or np.linalg.norm(vector) == 0:
                raise ValueError("boundaries are non-zero 2-component vectors")
        return v

    @model_validator(mode="after")
    def family_parameters(self) -> "ResourceSpec":
        if self.family == "theta" and self.theta is None:
            raise ValueError("the theta family needs a theta value")
        if self.couplings and self.wires < 2:
            raise ValueError("couplings need at least two wires")
        for coupling in self.couplings:
            if coupling.upper >= self.wires - 1:
                raise ValueError(f"coupling wire {coupling.upper} has no lower neighbour")
        return self

    @property
    def effective_theta(self) -> float:
        return math.pi / 4 if self.family == "cluster" else float(self.theta)  # type: ignore[arg-type]


class GateSpec(BaseModel):
    """One circuit operation: a named or explicit local gate, or a web coupling"""

    op: Literal["local", "coupling"] = "local"
    wire: int = Field(0, ge=0)
    gate: Optional[str] = None
    matrix: Optional[List[List[Union[str, float]]]] = None
    angle: Optional[float] = Field(None, description="Rz angle when gate is 'RZ'")

    def unitary(self) -> np.ndarray:
        if self.matrix is not None:
            return np.array([[parse_complex(v) for v in row] for row in self.matrix])
        if self.gate == "RZ":
            return rz(float(self.angle or 0.0))
        if self.gate not in NAMED_GATES:
            raise ValueError(f"unknown gate {self.gate!r}")
        return np.asarray(NAMED_GATES[self.gate], dtype=complex)


class TargetSpec(BaseModel):
    kind: Literal["fixed", "random"] = "random"
    state: Optional[List[Union[str, float]]] = None

    @model_validator(mode="after")
    def fixed_has_state(self) -> "TargetSpec":
        if self.kind == "fixed":
            if self.state is None:
                raise ValueError("a fixed target needs a state")
            if parse_vector(self.state).shape != (2,):
                raise ValueError("target states are qubits")
        return self


class ProtocolSpec(BaseModel):
    kind: Literal["simple", "general", "web"] = "general"
    epsilon: float = Field(1e-3, description="Failure budget in (0, 1)")
    trials: Optional[int] = Field(None, ge=1, description="Trials per phase; derived from epsilon when omitted")
    margin: int = Field(4, ge=0)
    target: TargetSpec = Field(default_factory=TargetSpec)
    circuit: List[GateSpec] = Field(default_factory=list)
    fidelity_tolerance: float = Field(1e-9, gt=0)
    chi2_alpha: float = Field(0.01, gt=0, lt=1)
    oracle: bool = Field(False, description="Cross-check host densities with the state-vector oracle")

    @field_validator("epsilon")
    @classmethod
    def epsilon_in_range(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {v}")
        return v


class OutputSpec(BaseModel):
    dir: str = "results"
    transcripts: bool = False


class ExperimentConfig(BaseModel):
    name: str = "experiment"
    seed: int = Field(..., ge=0, description="Master seed; every random draw derives from it")
    shots: int = Field(100, ge=1)
    jobs: int = Field(1, ge=1)
    resource: ResourceSpec
    protocol: ProtocolSpec = Field(default_factory=ProtocolSpec)
    output: OutputSpec = Field(default_factory=OutputSpec)

    @model_validator(mode="after")
    def protocol_fits_resource(self) -> "ExperimentConfig":
        if self.protocol.kind == "web" and self.resource.wires < 2:
            raise ValueError("the web protocol needs at least two wires")
        if self.protocol.kind != "web" and self.resource.wires != 1:
            raise ValueError(f"the {self.protocol.kind} protocol runs on a single wire")
        if self.protocol.kind == "simple" and self.resource.family != "cluster":
            if abs(self.resource.effective_theta - math.pi / 4) > 1e-12:
                raise ValueError("the simple protocol needs r1 = 0 (cluster or theta = pi/4)")
        return self


def load_config(path: Union[str, Path], **overrides: object) -> ExperimentConfig:
    """
    Read and validate a YAML experiment file.

    Args:
        path: YAML file
        **overrides: Top-level values replacing the file's (None is ignored)

    Raises:
        ConfigError: If the file is missing, not YAML, or fails validation
    """
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except FileNotFoundError as e:
        raise ConfigError(f"config file {path} not found") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"config file {path} is not valid YAML: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a mapping")

    for key, value in overrides.items():
        if value is None:
            continue
        if key == "out":
            raw.setdefault("output", {})["dir"] = str(value)
        else:
            raw[key] = value
    try:
        config = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"invalid config {path}:\n{e}") from e
    logger.info(f"Loaded config {config.name} from {path}")
    return config
