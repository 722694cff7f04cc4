class L1CodecError(Exception):
    """Base class for numeric failures raised by this package."""


class DimensionError(L1CodecError, ValueError):
    pass


class RankError(L1CodecError):
    pass


class SingularityError(L1CodecError):
    pass


class EnumerationCapError(L1CodecError):
    """Exhaustive subset enumeration would exceed the configured cap."""


class NoSolutionError(L1CodecError):
    pass


class BracketError(L1CodecError):
    pass


class SolverError(L1CodecError):
    """An LP solve finished with a non-optimal status."""

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status
