"""Exception types raised by bjjmz."""


class ConvergenceError(ArithmeticError):
    """An iterative numerical kernel failed to converge."""


class BifurcationBoundError(ValueError):
    """Detection imbalance violates ``|delta| < |E_C|/2``."""
