"""Gain, noise and sensitivity toolkit for dc-biased electromechanical rf-to-microwave transducers."""

from emx.errors import ConfigError, DomainError, FitRejectedError, PullInError, RankDeficiencyError

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "FitRejectedError",
    "PullInError",
    "RankDeficiencyError",
    "__version__",
]
