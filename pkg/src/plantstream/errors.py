"""Exception hierarchy shared by every subpackage."""


class PlantStreamError(Exception):
    pass


class InvalidParams(PlantStreamError, ValueError):
    """A parameter violates its invariant. ``field`` names the offender."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class UnsupportedKind(PlantStreamError, ValueError):
    pass


class DimensionMismatch(PlantStreamError, ValueError):
    pass


class ShapeMismatch(PlantStreamError, ValueError):
    pass


class RejectionBudgetExceeded(PlantStreamError, RuntimeError):
    pass


class NotApplicable(PlantStreamError, ValueError):
    pass


class SupportMismatch(PlantStreamError, ValueError):
    pass


class EmptyTruncationWindow(PlantStreamError, ValueError):
    pass


class InfeasibleExact(PlantStreamError, ValueError):
    pass


class TooLarge(PlantStreamError, ValueError):
    pass


class IncompatibleDetector(PlantStreamError, ValueError):
    pass


class TrialFailure(PlantStreamError, RuntimeError):
    pass
