"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """Distribution or chart parameters outside their valid domain."""


class ConvergenceError(RuntimeError):
    """Every optimizer start failed to produce a finite likelihood."""


class BracketError(RuntimeError):
    """The calibration target cannot be bracketed by the allowed L range."""


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NegativeCountError(ParseError):
    pass


class BoundaryWarning(UserWarning):
    """A fitted parameter sits on the edge of its space (reduced model)."""


class InsufficientPhase1(UserWarning):
    """Phase-I sample is too short for reliable parameter estimates."""
