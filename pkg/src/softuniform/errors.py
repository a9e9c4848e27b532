"""Exception hierarchy shared by all modules."""


class SoftError(ValueError):
    """Malformed input: bad names, out-of-section pairs, wrong shapes."""


class HostMismatchError(SoftError):
    pass


class SizeCapError(SoftError):
    """An enumeration would exceed a configured size cap."""


class NotValidatedError(SoftError):
    """The operation needs a base that passed validation."""


class NonCarrierError(SoftError):
    """The host has an empty section, so it has no soft elements."""


class NotOpenError(SoftError):
    pass


class CoverError(SoftError):
    pass


class MetricError(SoftError):
    pass


class InternalInconsistency(AssertionError):
    """Two independent computations of the same fact disagree."""
