"""
Exception types shared by the ranking aggregation modules.
"""


class RankAggError(Exception):
    """Base class for all library errors"""


class InvalidArgumentError(RankAggError, ValueError):
    """An argument violates an operation's precondition"""


class ProfileParseError(RankAggError, ValueError):
    """A profile file does not match the profile CSV format"""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedSizeError(RankAggError):
    """Exhaustive search requested on too many alternatives"""


class ConfigurationError(RankAggError):
    """An experiment configuration is invalid"""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
