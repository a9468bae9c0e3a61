"""Exception hierarchy for the ucbench toolkit."""

from __future__ import annotations


class UcbenchError(Exception):
    """Base class for all ucbench errors."""


class DataError(UcbenchError):
    """Invalid input data: parse failures, schema violations, bad field values."""


class StructuralError(UcbenchError):
    """Network structure makes the request meaningless (e.g. disconnected grid)."""


class NumericalError(UcbenchError):
    """A numerical computation failed (e.g. singular susceptance matrix)."""


class UnbalancedInjectionError(UcbenchError):
    """Injection vector does not sum to zero; flows are undefined."""


class InfeasibleError(UcbenchError):
    """The problem was proven infeasible.

    `cause` names the first binding reason found (a capacity-shortfall hour or
    the set of transmission constraints active when the solver certified
    infeasibility).
    """

    def __init__(self, cause: str, *, hour: int | None = None,
                 line_pool: frozenset | None = None):
        super().__init__(cause)
        self.cause = cause
        self.hour = hour
        self.line_pool = line_pool if line_pool is not None else frozenset()


class SolveLimitError(UcbenchError):
    """A time or iteration limit was hit before meeting the gap target.

    Carries the incumbent solution (if any) and the gap it was left at.
    """

    def __init__(self, message: str, *, partial=None, gap: float | None = None):
        super().__init__(message)
        self.partial = partial
        self.gap = gap


class LogicViolationError(UcbenchError):
    """A fixed commitment schedule violates unit on/off logic.

    Distinct from dispatch (LP) infeasibility: schedules fed to the OPF come
    from solved problems on the same system, so a logic violation indicates
    corrupted data rather than a benchmark outcome.
    """

    def __init__(self, message: str, *, generator: int | None = None,
                 hour: int | None = None):
        super().__init__(message)
        self.generator = generator
        self.hour = hour


class EnumerationLimitError(UcbenchError):
    """The instance is too large for exhaustive enumeration."""
