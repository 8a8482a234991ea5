"""Exception hierarchy shared by every occmine module."""


class OccMineError(Exception):
    """Base class for all errors raised by occmine."""


class MalformedTree(OccMineError, ValueError):
    """Parent links do not describe a single rooted tree in preorder."""


class InvalidVertex(OccMineError, IndexError):
    pass


class InvalidAttachPoint(OccMineError, ValueError):
    pass


class ParseError(OccMineError, ValueError):
    """Dataset or pattern text could not be decoded.

    ``line`` is the 1-based line number when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BadToken(ParseError):
    pass


class UnbalancedBacktrack(ParseError):
    pass


class DuplicateTid(ParseError):
    pass


class CountOverflow(OccMineError, OverflowError):
    """A 64-bit occurrence counter would wrap.

    The miner attaches the offending pattern as ``pattern`` before
    propagating.
    """

    def __init__(self, message="occurrence count exceeds 2**64 - 1", pattern=None):
        self.pattern = pattern
        super().__init__(message)


class ExplosionGuard(OccMineError, RuntimeError):
    """An enumeration exceeded its configured size cap."""

    def __init__(self, cap, message=None):
        self.cap = cap
        super().__init__(message or f"enumeration exceeded guard cap of {cap}")


class InfeasibleShape(OccMineError, ValueError):
    pass
