"""Derived quantities with propagated uncertainties."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from emx.estimate.lm import FitResult

IMPRECISE = 0.2


@dataclass
class Quantity:
    """One extracted value.

    ``limit`` is ``"upper"`` when the data only bound the quantity from
    above; ``value`` then holds the bound and ``stderr`` is NaN.
    """

    value: float
    stderr: float
    unit: str
    source: str
    limit: str | None = None
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.limit is None and self.value != 0 and math.isfinite(self.stderr):
            if abs(self.stderr / self.value) > IMPRECISE and "imprecise" not in self.flags:
                self.flags.append("imprecise")

    @property
    def is_estimate(self) -> bool:
        return self.limit is None

    def to_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "unit": self.unit, "source": self.source,
                "limit": self.limit, "flags": list(self.flags)}


@dataclass
class ExtractionReport:
    recipe: str
    quantities: dict[str, Quantity]
    fit: FitResult
    flags: list[str] = field(default_factory=list)

    def __getitem__(self, name: str) -> Quantity:
        return self.quantities[name]

    def __contains__(self, name: str) -> bool:
        return name in self.quantities

    @property
    def converged(self) -> bool:
        return self.fit.converged

    def to_dict(self) -> dict:
        return {
            "recipe": self.recipe,
            "converged": self.fit.converged,
            "quantities": {k: q.to_dict() for k, q in self.quantities.items()},
            "fit": self.fit.to_dict(),
            "flags": list(self.flags),
        }


def delta_method(func: Callable[[np.ndarray], float], values, covariance, rel_step: float = 1e-6) -> tuple[float, float]:
    """Value and first-order standard error of ``func(values)``."""
    p = np.asarray(values, dtype=float)
    f0 = float(func(p))
    grad = np.empty(p.size)
    for i in range(p.size):
        h = rel_step * max(abs(p[i]), math.sqrt(max(covariance[i][i], 0.0)), 1e-300)
        up, dn = p.copy(), p.copy()
        up[i] += h
        dn[i] -= h
        grad[i] = (func(up) - func(dn)) / (2 * h)
    var = float(grad @ np.asarray(covariance) @ grad)
    return f0, math.sqrt(max(var, 0.0))
