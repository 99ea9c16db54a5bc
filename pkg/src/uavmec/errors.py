"""Exception hierarchy shared by the model, solvers and the CLI."""


class UavMecError(Exception):
    """Base class for every error raised by this package."""


class DomainError(UavMecError, ValueError):
    """An argument lies outside the domain of a model formula."""


class InfeasibleError(UavMecError):
    """No admissible point exists for the requested problem.

    ``constraint`` names the binding constraint when it can be identified.
    """

    def __init__(self, message: str, constraint: str | None = None):
        super().__init__(message)
        self.constraint = constraint


class InfeasibleTimeError(InfeasibleError):
    """Remote computing has no time left (denominator ``T_max - t <= 0``)."""


class SicInfeasibleError(InfeasibleError):
    """NOMA finite-blocklength SIC margin ``1 - Y1*Y2`` is not positive."""

    def __init__(self, message: str, margin: float):
        super().__init__(message, constraint="sic_margin")
        self.margin = margin


class SolverError(UavMecError):
    """An inner numerical routine failed to produce a usable point."""


class ScenarioError(UavMecError):
    """Malformed scenario file (bad key, unit or value)."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(UavMecError, ValueError):
    """A configuration value violates a documented invariant."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
