"""Exception types shared across the toolkit.

Every error raised by the public API derives from FasdnetError, so callers
(including the command line front end) can map failures to exit codes
without string matching.
"""


class FasdnetError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(FasdnetError):
    """Operand shapes are incompatible; the message names both shapes."""


class NonFiniteError(FasdnetError):
    """A public operation produced or received NaN or infinity."""


class ConfigError(FasdnetError):
    """A network or experiment configuration violates its invariants."""


class ContractError(FasdnetError):
    """An operation was called in a way its contract forbids."""


class NotFittedError(FasdnetError):
    """A fitted transform was applied before fitting."""


class DataError(FasdnetError):
    """Dataset contents violate an invariant (labels, class counts, sizes)."""


class ParseError(DataError):
    """A CSV cell could not be parsed; carries row and column context."""


class SchemaError(DataError):
    """A file's column layout does not match the battery schema."""


class UnknownFeatureError(DataError):
    """A feature name was requested that the dataset does not contain."""


class DivergenceError(FasdnetError):
    """Training produced a non-finite loss; records the failing epoch."""

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch


class ReportError(FasdnetError):
    """A report was requested over inputs that cannot produce one."""
