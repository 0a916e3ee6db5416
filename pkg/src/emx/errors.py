"""Exception hierarchy shared by every emx module."""

from __future__ import annotations


class EmxError(Exception):
    """Base class for all emx errors."""


class DomainError(EmxError, ValueError):
    """A physics formula was evaluated outside its domain.

    Parameters
    ----------
    operation : str
        Name of the model operation that refused the input.
    message : str
        Human readable reason.
    """

    def __init__(self, operation: str, message: str):
        super().__init__(f"{operation}: {message}")
        self.operation = operation


class PullInError(DomainError):
    """Bias beyond the electrostatic instability of a mode."""


class RankDeficiencyError(EmxError, ArithmeticError):
    """Normal equations are singular.

    ``directions`` holds one mapping ``{parameter name: component}`` per
    degenerate direction in parameter space.
    """

    def __init__(self, directions: list[dict[str, float]]):
        parts = []
        for d in directions:
            parts.append(" ".join(f"{v:+.3f}*{k}" for k, v in d.items() if abs(v) > 1e-3))
        super().__init__("singular normal equations along: " + "; ".join(parts))
        self.directions = directions


class FitRejectedError(EmxError):
    """Data cannot support the requested extraction."""


class ConfigError(EmxError, ValueError):
    """Configuration document failed validation.

    ``path`` is the JSON path of the offending field, e.g. ``mode.frequency_hz``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path or '<root>'}: {message}")
        self.path = path
