"""Exception hierarchy shared across the toolkit.

Two branches matter to callers: :class:`ConfigError` for bad setup
(maps to CLI exit code 2) and :class:`RunError` for failures at run
time (exit code 1).
"""


class FlolaError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(FlolaError):
    """Invalid configuration, flags, or preconditions chosen by the user."""


class RunError(FlolaError):
    """Failure while executing an otherwise valid configuration."""


class OutOfBoundsError(RunError):
    """A coordinate vector lies outside the design space."""


class DuplicatePointError(RunError):
    """A candidate coincides with an existing design point.

    Carries the offending index and the normalized distance so the
    rejection is diagnosable.
    """

    def __init__(self, index, distance):
        self.index = int(index)
        self.distance = float(distance)
        super().__init__(
            f"candidate duplicates design point {self.index} "
            f"(normalized distance {self.distance:.3e})"
        )


class BudgetExhaustedError(ConfigError):
    """The evaluation budget has been used up; no further proposals."""


class EvaluationError(RunError):
    """The black-box evaluator failed.

    The proposed point is preserved so the caller can retry it.
    """

    def __init__(self, point, message="evaluator failed"):
        self.point = tuple(float(c) for c in point)
        super().__init__(f"{message} at point {self.point}")


class LockHeldError(RunError):
    """Another command currently owns the run directory."""


class PendingProposalError(RunError):
    """Ask/tell protocol violation (missing or mismatched proposal)."""
