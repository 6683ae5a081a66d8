"""
Exception hierarchy shared by every subpackage.

Input-validation errors also derive from ValueError so callers that only
know the builtin still catch them.
"""


class QCSError(Exception):
    """Base class for all toolkit errors"""


class DimensionMismatchError(QCSError, ValueError):
    """Array shapes do not fit the requested operation"""


class ResourceError(QCSError, ValueError):
    """Invalid wire or web resource parameters"""


class NotCanonicalError(ResourceError):
    """Site tensors are outside the canonical rank-one family"""


class SizeGuardError(QCSError):
    """Dense state-vector work requested beyond the qubit limit"""


class SimulationError(QCSError):
    """Simulator step failed or left the state inconsistent"""


class IllegalStepError(SimulationError):
    """Step not allowed from the current state: unreachable site, capacity, coupling order"""


class SiteConsumedError(IllegalStepError):
    """Site is neither the cursor site nor retained"""


class EndOfWireError(IllegalStepError):
    """Every site of the wire has been passed"""


class CompletenessError(SimulationError, ValueError):
    """Kraus elements or outcome weights do not sum to the identity"""


class ZeroProbabilityError(SimulationError):
    """Forced outcome has vanishing probability"""


class CompilationError(QCSError):
    """Target cannot be compiled into a measurement pattern"""


class UnsupportedFamilyError(CompilationError):
    """Wire family has no known unitary-outcome measurement scheme"""


class BudgetExceededError(CompilationError):
    """Pattern would exceed the hard site cap"""


class PatternExhaustedError(CompilationError):
    """A repeat-until-success step ran out of attempts at runtime"""

    def __init__(self, message: str, state: object = None) -> None:
        super().__init__(message)
        self.state = state


class ProtocolError(QCSError, ValueError):
    """Localization protocol misuse"""


class WrongProtocolError(ProtocolError):
    """Protocol variant does not match the wire"""


class WireExhaustedError(ProtocolError):
    """Wire ended before the protocol finished"""


class DegenerateWireError(ProtocolError):
    """r1 = 1: the site basis degenerates and cannot be filtered"""


class ConfigError(QCSError, ValueError):
    """Experiment configuration could not be loaded"""
