"""Exception hierarchy shared across the package.

The CLI maps these onto its stable exit codes, so new failure modes should
reuse one of the classes below rather than raising bare ValueErrors.
"""


class DensecodeError(Exception):
    """Base class for all package-specific errors."""


class InvariantError(DensecodeError):
    """An object violates a structural invariant (non-PSD, trace != 1, ...)."""


class DimensionMismatchError(InvariantError):
    """Operands have incompatible tensor-factor dimensions."""


class SizeGuardError(DensecodeError):
    """A requested computation exceeds the desk-scale size guards."""


class NotAProgramError(DensecodeError):
    """A program-register state does not induce a unitary map within tolerance."""


class ConvergenceError(DensecodeError):
    """An optimizer failed to converge and strict mode was requested."""


class FormatError(DensecodeError):
    """A file or JSON document does not follow the documented formats."""
