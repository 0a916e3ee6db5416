"""Physical constants (CODATA, via :mod:`scipy.constants`)."""

from __future__ import annotations

from dataclasses import dataclass

from scipy import constants as _codata


@dataclass(frozen=True)
class PhysicalConstants:
    vacuum_permittivity: float = _codata.epsilon_0
    reduced_planck: float = _codata.hbar
    boltzmann: float = _codata.k
    elementary_charge: float = _codata.e


CODATA = PhysicalConstants()
