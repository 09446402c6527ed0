"""Exception types raised across the package."""


class MorbitError(Exception):
    """Base class for all library errors."""


class VariantMismatchError(MorbitError, TypeError):
    """A point does not belong to the state space of the system it was used with."""


class ValidationError(MorbitError, ValueError):
    """Malformed input data (measures, schedules, chains, configs)."""


class CapExceededError(MorbitError):
    """A configured size cap (pieces, periods, assignment size, LCM) was exceeded."""


class CoveringError(ValidationError):
    """A covering chain does not satisfy f(I_i) >= I_{i+1}."""


class NotPeriodicError(ValidationError):
    """A point was required to satisfy T^q x = x and does not."""


class ConfigError(ValidationError):
    """A configuration document is malformed; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
