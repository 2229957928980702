class InvalidArgument(ValueError):
    """An argument violates an operation's precondition."""


class BudgetExceeded(InvalidArgument):
    """Exhaustive enumeration would visit more subsets than allowed."""


class MissingRipConstants(InvalidArgument):
    """A check needs delta_s / theta_ss and none were supplied."""


class NumericalFailure(ArithmeticError):
    """An iterate became non-finite."""

    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"non-finite iterate at t={t}")
