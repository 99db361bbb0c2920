"""Exception types raised across the package."""


class TnStreamError(Exception):
    """Base class for all package-specific errors."""


class EmptyPointSet(TnStreamError):
    pass


class DimensionMismatch(TnStreamError):
    pass


class UnknownId(TnStreamError):
    pass


class KTooLarge(TnStreamError):
    pass


class SamePoint(TnStreamError):
    pass


class AllScoresInfinite(TnStreamError):
    pass


class NonpositiveThreshold(TnStreamError):
    pass


class NotAdd(TnStreamError):
    pass


class OutlierPoint(TnStreamError):
    pass


class SubsetNotContained(TnStreamError):
    pass


class OutOfOrderArrival(TnStreamError):
    pass


class LengthMismatch(TnStreamError):
    pass


class EmptyLabels(TnStreamError):
    pass


class ParseError(TnStreamError):
    def __init__(self, row, message):
        super().__init__(f"row {row}: {message}")
        self.row = row


class ArityMismatch(TnStreamError):
    def __init__(self, row, expected, got):
        super().__init__(f"row {row}: expected {expected} fields, got {got}")
        self.row = row
        self.expected = expected
        self.got = got


class InvalidSpec(TnStreamError):
    pass


class ConfigError(TnStreamError):
    pass
