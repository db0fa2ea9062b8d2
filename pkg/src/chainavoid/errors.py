"""Exception hierarchy. The CLI maps each class to an exit code."""


class ChainAvoidError(Exception):
    exit_code = 1


class ParameterError(ChainAvoidError, ValueError):
    """Invalid argument or unmet precondition."""


class NotSparseError(ParameterError):
    """The family leaves some color without a forbidden monochromatic chain."""

    def __init__(self, missing_colors):
        self.missing_colors = list(missing_colors)
        super().__init__(f"not sparse: no monochromatic pattern for colors {self.missing_colors}")


class StateSpaceTooLarge(ChainAvoidError):
    exit_code = 2


class BudgetExceeded(ChainAvoidError):
    """A search hit its node or size cap. ``partial`` carries what was reached."""

    exit_code = 2

    def __init__(self, message, partial=None):
        self.partial = partial
        super().__init__(message)


class InvariantViolation(ChainAvoidError):
    """A checked inequality failed; carries the counterexample."""

    exit_code = 3

    def __init__(self, message, counterexample=None):
        self.counterexample = counterexample
        super().__init__(message)
