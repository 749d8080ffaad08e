"""Exception types shared across the package."""


class TracesumError(Exception):
    """Base class for all package errors."""


class VerificationError(TracesumError):
    """Base for errors meaning 'a checked mathematical statement failed'."""


class IdentityViolation(VerificationError):
    """Two independently computed forms of the same quantity disagree."""


class LemmaViolation(VerificationError):
    """An audited bound or vanishing statement failed on an instance."""


class NotInvertible(TracesumError):
    """Requested inverse of a residue not coprime to the modulus."""


class NotCoprime(TracesumError):
    """Arguments required to be coprime to the modulus are not."""


class InvalidSpec(TracesumError):
    """Malformed trace-function descriptor string or constructor arguments."""


class TrivialCharacter(TracesumError):
    """Operation undefined for the trivial character."""


class InvalidInstance(TracesumError):
    """Parameters violate the divisibility/coprimality constraints of an instance."""


class EmptyMeasure(TracesumError):
    """Averaging measure has no support."""


class TruncationTooCoarse(TracesumError):
    """Requested truncation cap too small for the target tail bound."""


class QuadratureFailure(TracesumError):
    """Adaptive quadrature failed to reach its tolerance."""


class DegenerateNorm(TracesumError):
    """A norm in a denominator vanished."""


class OutOfRange(TracesumError):
    """Argument outside the precomputed table range."""


class Overflow(TracesumError):
    """Value exceeds the fixed integer width of a storage format."""
