"""Exception types shared across the package."""


class BudgetExceededError(RuntimeError):
    """An exact combinatorial mode would exceed its evaluation budget."""


class InvariantViolationError(RuntimeError):
    """A structural invariant failed at construction or during a run."""


class HorizonExhaustedError(RuntimeError):
    """A recursive construction ran out of indices before completing."""
