"""Exception types shared across the package."""


class SkewflowError(Exception):
    """Base class for all library errors."""


class OutOfRange(SkewflowError, ValueError):
    pass


class SearchLimitExceeded(SkewflowError):
    pass


class IndexOutOfRange(SkewflowError, IndexError):
    pass


class UnsupportedChain(SkewflowError, TypeError):
    pass


class BudgetExceeded(SkewflowError):
    """Raised when a direct iteration is asked to run past its step budget."""


class SOutOfRange(SkewflowError, ValueError):
    pass


class ValidationFailure(SkewflowError):
    """A cocycle family violates one of the structural conditions.

    ``condition`` is one of ``"C1"``, ``"C2"``, ``"C3"``; ``level`` is the
    first offending level (or ``None`` for profile-wide failures).
    """

    def __init__(self, condition, level, message):
        super().__init__(f"{condition} violated at level {level}: {message}")
        self.condition = condition
        self.level = level


class ConfigurationBroken(SkewflowError):
    def __init__(self, time, deviation):
        super().__init__(f"configuration spacing broken at time {time} (deviation {deviation:.3e})")
        self.time = time
        self.deviation = deviation


class PreconditionError(SkewflowError, ValueError):
    pass
