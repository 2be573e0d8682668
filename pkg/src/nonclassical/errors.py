"""Exception hierarchy shared by all modules."""


class NonclassicalityError(Exception):
    """Base class for every error raised by this package."""


class CutoffTooSmallError(NonclassicalityError, ValueError):
    pass


class TailMassExceededError(NonclassicalityError, ValueError):
    """Truncating a state at the requested cutoff discards too much mass."""


class CutoffCapExceededError(NonclassicalityError, ValueError):
    """No cutoff below the configured cap meets the tail tolerance."""


class ZeroNormError(NonclassicalityError, ValueError):
    pass


class NotNormalizedError(NonclassicalityError, ValueError):
    pass


class NotADensityMatrixError(NonclassicalityError, ValueError):
    pass


class NotADistributionError(NonclassicalityError, ValueError):
    pass


class NotIsometryError(NonclassicalityError, ValueError):
    pass


class DimensionMismatchError(NonclassicalityError, ValueError):
    pass


class DimensionTooLargeError(NonclassicalityError, ValueError):
    """Support of a density matrix exceeds the optimizer cap."""


class UnknownFamilyError(NonclassicalityError, LookupError):
    pass


class NoSignChangeError(NonclassicalityError, ValueError):
    pass


class MalformedInputError(NonclassicalityError, ValueError):
    """A serialized state could not be parsed."""


class InternalConsistencyError(NonclassicalityError, RuntimeError):
    """A quantity that must be non-negative came out clearly negative."""


#: errors caused by hitting a configured resource limit (CLI exit code 5)
RESOURCE_ERRORS = (CutoffCapExceededError, DimensionTooLargeError)
