"""
Measurement patterns

A pattern is a sequence of phase steps. Step k implements H Rz(angle_k) on
the correlation space; the product over a pattern is

    H Rz(angle_n) ... H Rz(angle_1)

Steps on stochastic families carry an attempt budget. A pattern never lists
its sites' bases up front: they follow from the step angle and the Pauli
frame at run time (see ``PatternContext``).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.errors import CompilationError
from src.numerics.linalg import H, I2, pauli, rz, unitary_distance

logger = logging.getLogger(__name__)

TEXT_HEADER = "# qcs-pattern v1"

# Choi trace distance grows like the square root of rounding error
MATCH_TOL = 1e-6


@dataclass(frozen=True)
class PatternStep:
    """One H Rz(angle) with up to ``max_attempts`` repeat-until-success tries"""

    angle: float
    max_attempts: int = 1

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise CompilationError("a step needs at least one attempt")

    @property
    def max_sites(self) -> int:
        # each failed attempt costs one extra deterministic Hadamard site
        return 2 * self.max_attempts - 1


@dataclass(frozen=True)
class PatternContext:
    """Classical data a step's basis depends on: the wire frame and the angle owed"""

    x: int
    z: int
    owed: float

    @property
    def measured_angle(self) -> float:
        return -self.owed if self.x else self.owed


@dataclass(frozen=True, eq=False)
class MeasurementPattern:
    """Compiled sequence of phase steps with its target operation"""

    family: str
    steps: Tuple[PatternStep, ...]
    target: np.ndarray
    epsilon: float = 0.0
    pauli: Tuple[int, int] = (0, 0)
    label: str = "rotation"
    prepared_state: Optional[np.ndarray] = field(default=None)

    @property
    def is_empty(self) -> bool:
        return not self.steps

    @property
    def min_length(self) -> int:
        return len(self.steps)

    @property
    def declared_length(self) -> int:
        """Largest number of sites the pattern may consume"""
        return sum(step.max_sites for step in self.steps)

    @property
    def parity(self) -> int:
        """Consumed site count modulo 2, fixed regardless of failures"""
        return len(self.steps) % 2

    @property
    def angles(self) -> List[float]:
        return [step.angle for step in self.steps]

    def ideal_operator(self) -> np.ndarray:
        op = pauli(*self.pauli) if self.is_empty else I2
        for step in self.steps:
            op = H @ rz(step.angle) @ op
        return op

    def to_text(self) -> str:
        def fmt(z: complex) -> str:
            return f"{complex(z).real!r},{complex(z).imag!r}"

        target = " ; ".join(" ".join(fmt(v) for v in row) for row in self.target)
        lines = [
            TEXT_HEADER,
            f"# family={self.family} label={self.label} epsilon={self.epsilon!r} "
            f"steps={len(self.steps)} max_sites={self.declared_length}",
            f"# target={target}",
            f"# pauli={self.pauli[0]} {self.pauli[1]}",
        ]
        if self.prepared_state is not None:
            lines.append(f"# prepared={' '.join(fmt(v) for v in self.prepared_state)}")
        for index, step in enumerate(self.steps):
            lines.append(f"{index} phase angle={step.angle!r} max_attempts={step.max_attempts}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MeasurementPattern":
        """Parse the format written by ``to_text``"""

        def parse_complex(token: str) -> complex:
            re, im = token.split(",")
            return complex(float(re), float(im))

        lines = [line.strip() for line in text.strip().splitlines() if line.strip()]
        if not lines or lines[0] != TEXT_HEADER:
            raise CompilationError("not a measurement pattern file")
        meta = {}
        prepared = None
        target = None
        bits = (0, 0)
        steps = []
        try:
            for line in lines[1:]:
                if line.startswith("# target="):
                    rows = line[len("# target="):].split(";")
                    target = np.array([[parse_complex(t) for t in row.split()] for row in rows])
                elif line.startswith("# pauli="):
                    x, z = line[len("# pauli="):].split()
                    bits = (int(x), int(z))
                elif line.startswith("# prepared="):
                    prepared = np.array([parse_complex(t) for t in line[len("# prepared="):].split()])
                elif line.startswith("#"):
                    for token in line[1:].split():
                        key, value = token.split("=", 1)
                        meta[key] = value
                else:
                    _, kind, *fields = line.split()
                    if kind != "phase":
                        raise CompilationError(f"unknown step kind {kind!r}")
                    values = dict(f.split("=", 1) for f in fields)
                    steps.append(PatternStep(float(values["angle"]), int(values["max_attempts"])))
        except (KeyError, ValueError) as e:
            raise CompilationError(f"malformed pattern text: {e}") from e

        if target is None or "family" not in meta:
            raise CompilationError("pattern text lacks a target or family")
        if int(meta.get("steps", len(steps))) != len(steps):
            raise CompilationError("step count does not match the header")
        return cls(
            family=meta["family"],
            steps=tuple(steps),
            target=target,
            epsilon=float(meta.get("epsilon", 0.0)),
            pauli=bits,
            label=meta.get("label", "rotation"),
            prepared_state=prepared,
        )


def identity_pattern(family: str, pairs: int = 1) -> MeasurementPattern:
    """``pairs`` consecutive H H pairs: consumes 2 * pairs sites, does nothing"""
    return MeasurementPattern(
        family=family,
        steps=tuple(PatternStep(0.0) for _ in range(2 * pairs)),
        target=I2,
        label="idle",
    )


def check_pattern(pattern: MeasurementPattern) -> None:
    """Raise CompilationError if the steps do not multiply to the target"""
    distance = unitary_distance(pattern.ideal_operator(), pattern.target)
    if distance > MATCH_TOL:
        raise CompilationError(f"pattern {pattern.label} misses its target by {distance:.2e}")


def pattern_to_text(pattern: MeasurementPattern) -> str:
    return pattern.to_text()


def pattern_from_text(text: str, verify: bool = True) -> MeasurementPattern:
    """Parse a pattern file, checking that its steps still realize its target"""
    pattern = MeasurementPattern.from_text(text)
    if verify and not pattern.is_empty:
        check_pattern(pattern)
    return pattern
