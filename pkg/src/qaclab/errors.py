"""Exception types shared across the package."""

from __future__ import annotations


class CircuitValidationError(ValueError):
    """A circuit's structure violates the layered model.

    Carries the full list of problems so callers can report all of them
    at once instead of fixing one at a time.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class PreconditionError(ValueError):
    """An operation was called outside its domain of validity."""


class WitnessConstructionError(RuntimeError):
    """A certificate construction failed one of its named checks.

    The message always names the failed check and the measured quantity
    that violated it, so a failure is directly diagnosable.
    """
