"""Exception hierarchy shared across the package.

The CLI maps these onto stable exit codes: InvalidInputError -> 2,
ConfigError -> 3, everything else -> 1.
"""


class FlowSelectError(Exception):
    """Base class for all package errors."""


class InvalidInputError(FlowSelectError):
    """Caller-supplied data is malformed (bad values, shapes, files)."""


class ConfigError(FlowSelectError):
    """Configuration or artifact metadata is inconsistent with the data."""


class NumericError(FlowSelectError):
    """A numeric computation produced non-finite values or failed to converge."""


class ChecksumError(InvalidInputError):
    """A binary artifact failed its CRC32 integrity check."""


class DegenerateConditionalError(NumericError):
    """A discrete conditional has zero mass on its entire support."""


class StageError(FlowSelectError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}': {message}")
        self.stage = stage
