"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): bad input
versus a computation that cannot deliver a result.
"""


class BecthreshError(Exception):
    """Base class for all package errors."""


class InputError(BecthreshError):
    """Invalid user input (malformed ensemble, spec, or parameters)."""


class ComputationError(BecthreshError):
    """A numerically or structurally impossible computation."""


# --- ensemble validation ---

class NegativeCoefficient(InputError):
    pass


class SumNotOne(InputError):
    pass


class DegreeTooSmall(InputError):
    pass


class NonPositiveRate(InputError):
    pass


# --- threshold computation ---

class IterationBudgetExhausted(ComputationError):
    """Recursion neither converged nor stalled; the config is too tight."""


class FixedPointSearchFailed(ComputationError):
    pass


class DomainError(ComputationError):
    """The fixed-point map was evaluated outside its domain."""


# --- positivity certification ---

class NotPPositive(ComputationError):
    pass


class NumericallyIndeterminate(ComputationError):
    """Polynomial sign decision within tolerance of zero; boundary case."""


class ResultExceedsOne(ComputationError):
    pass


# --- optimization ---

class NoFeasibleCandidate(ComputationError):
    pass


class NoPPositiveSolution(ComputationError):
    pass


class SingularSystem(ComputationError):
    pass


# --- simulation ---

class InfeasibleSize(ComputationError):
    """Block length too small to realize the degree distribution."""
