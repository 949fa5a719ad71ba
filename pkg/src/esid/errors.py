"""Exception hierarchy shared by every module of the toolkit."""


class EsidError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(EsidError, ValueError):
    """An input object violates a probability invariant (row sums, negativity, ...)."""


class NegativeMass(ValidationError):
    pass


class ZeroMass(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class AlphaOutOfRange(OutOfRange):
    pass


class SupportViolation(ValidationError):
    """The reference measure vanishes somewhere the first argument does not."""


class NoAdmissibleGamma(EsidError):
    pass


class CapExceeded(EsidError):
    """An exact enumeration would exceed the configured size cap."""


class AlphabetTooLarge(CapExceeded):
    pass


class InfeasibleStealth(EsidError):
    """No input distribution reproduces the requested eavesdropper output."""
