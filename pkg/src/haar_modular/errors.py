"""Exception hierarchy shared by all modules."""


class HaarModularError(ValueError):
    """Base class for every error raised by this package."""


class InvalidModulusError(HaarModularError):
    pass


class DomainError(HaarModularError):
    """Argument outside the domain of an operation (range, shape, ring mismatch)."""


class InvalidReductionError(HaarModularError):
    pass


class NotLocalRingError(HaarModularError):
    pass


class PreconditionError(HaarModularError):
    pass


class SamplingFailure(HaarModularError):
    pass


class TooLargeError(HaarModularError):
    pass


class InsufficientDataError(HaarModularError):
    pass


class FormatError(HaarModularError):
    pass
