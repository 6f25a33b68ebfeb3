"""
Exception hierarchy

Every error carries the process exit code the CLI reports for it.
Recolouring and colouring failures are result values, not exceptions.
"""


class ColourspaceError(Exception):
    """Base class for all library errors"""

    exit_code = 1


class InvalidVertexError(ColourspaceError, ValueError):
    """A vertex id outside 0..n-1"""

    exit_code = 2


class InfeasibleParametersError(ColourspaceError, ValueError):
    """Parameters outside the documented range of an operation"""

    exit_code = 2


class ImproperColouringError(ColourspaceError, ValueError):
    """A colouring that was required to be proper is not"""

    exit_code = 2


class PreconditionError(ColourspaceError, ValueError):
    """A structural precondition (independence, girth, model kind) fails"""

    exit_code = 2


class BoundDomainError(ColourspaceError, ValueError):
    """A formula evaluated where it is mathematically undefined"""

    exit_code = 2


class EmptySolutionSpaceError(ColourspaceError):
    """No proper colouring exists for the requested instance"""

    exit_code = 1


class BudgetExceededError(ColourspaceError):
    """A configured node or colouring budget was exhausted"""

    exit_code = 3

    def __init__(self, what: str, budget: int):
        self.what = what
        self.budget = budget
        super().__init__(f"{what} exceeded budget of {budget}")


class ConfigError(ColourspaceError):
    """An experiment config could not be parsed or validated"""

    exit_code = 2


class SuiteError(ColourspaceError):
    """A validation suite directory is missing or empty"""

    exit_code = 2
