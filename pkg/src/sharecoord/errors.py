"""Exception types shared across the pipeline, mapped to CLI exit codes."""


class ShareCoordError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 2


class ConfigError(ShareCoordError):
    """Invalid configuration value or parameter combination."""

    exit_code = 1


class DataError(ShareCoordError):
    """Input data is malformed, inconsistent, or unusable."""

    exit_code = 2


class ParseError(DataError):
    """Malformed input record; carries the 1-based line number when known."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class EmptyCorpusError(DataError):
    """No users or tweets survive the activity filters."""


class UndefinedSimilarityError(DataError):
    """Similarity requested for a row with empty support."""


class ConvergenceError(ShareCoordError):
    """An iterative numerical routine failed to converge."""

    exit_code = 3

    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class StageError(ShareCoordError):
    """Pipeline stage failure; wraps the underlying error with the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.__cause__ = cause
        if isinstance(cause, ShareCoordError):
            self.exit_code = cause.exit_code
