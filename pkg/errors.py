"""
Exceptions raised by the symcontract modules
Absence of a witness (no conjugation, no relation) is returned as a value, not raised
"""


class SymContractError(Exception):
    """Base class for every error raised by this package"""


class InvalidInput(SymContractError, ValueError):
    """Malformed, non-finite or dimensionally inconsistent input"""


class NotSymmetric(SymContractError):
    """A complex symmetric (A = A^T) matrix was required"""


class NotPSD(SymContractError):
    """A positive semidefinite matrix was required"""


class NotAContraction(SymContractError):
    """Operator norm exceeds 1 beyond the clamping tolerance"""


class NotCSymmetric(SymContractError):
    """T is not C-symmetric for the given conjugation"""


class OutOfDisk(SymContractError):
    """Evaluation point outside the open unit disk"""


class NoDefect(SymContractError):
    """The characteristic function acts between zero-dimensional spaces"""


class NumericalDegeneracy(SymContractError):
    """Pole proximity, failed root finding or a failed self-check"""


class NotNonnegative(SymContractError):
    """Trigonometric polynomial takes negative values on the circle"""


class CbNotB(SymContractError):
    """b is not a fixed point of the model-space conjugation"""


class FactorizationFailed(SymContractError):
    """The constructed companion function failed verification"""


class FixedPointViolated(SymContractError):
    """A claimed fixed point of C is not fixed"""


class CoincidenceFailed(SymContractError):
    """No coincidence found within tolerance"""
