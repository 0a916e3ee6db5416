"""Immutable value types for the transducer model.

All fields are SI; angular frequencies and rates are in rad/s.
Validation happens in ``__post_init__`` so an instance is always usable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from emx.errors import DomainError


def _require_positive(obj, *names):
    for name in names:
        value = getattr(obj, name)
        if not (value > 0) or not math.isfinite(value):
            raise DomainError(type(obj).__name__, f"{name} must be finite and > 0, got {value!r}")


def _require_nonnegative(obj, *names):
    for name in names:
        value = getattr(obj, name)
        if not (value >= 0) or math.isnan(value):
            raise DomainError(type(obj).__name__, f"{name} must be >= 0, got {value!r}")


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle given by its center and full extents (m)."""

    center_y: float
    center_z: float
    size_y: float
    size_z: float

    def __post_init__(self):
        _require_positive(self, "size_y", "size_z")

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (
            self.center_y - self.size_y / 2,
            self.center_y + self.size_y / 2,
            self.center_z - self.size_z / 2,
            self.center_z + self.size_z / 2,
        )


@dataclass(frozen=True)
class MembraneGeometry:
    """Stressed rectangular membrane with a metal electrode patch.

    The membrane spans ``[0, length_y] x [0, length_z]``; ``electrode_region``
    is expressed in the same frame and must lie inside it.
    """

    length_y: float
    length_z: float
    thickness: float
    stress: float
    density: float
    metal_thickness: float
    metal_density: float
    electrode_region: Rectangle

    def __post_init__(self):
        _require_positive(self, "length_y", "length_z", "thickness", "stress", "density")
        _require_nonnegative(self, "metal_thickness", "metal_density")
        y0, y1, z0, z1 = self.electrode_region.bounds
        tol = 1e-12 * max(self.length_y, self.length_z)
        if y0 < -tol or z0 < -tol or y1 > self.length_y + tol or z1 > self.length_z + tol:
            raise DomainError("MembraneGeometry", "electrode region extends outside the membrane")

    @classmethod
    def with_centered_electrode(cls, length_y, length_z, thickness, stress, density,
                                metal_thickness, metal_density, electrode_y, electrode_z):
        region = Rectangle(length_y / 2, length_z / 2, electrode_y, electrode_z)
        return cls(length_y, length_z, thickness, stress, density,
                   metal_thickness, metal_density, region)


@dataclass(frozen=True)
class MechanicalMode:
    """A membrane drum mode at zero bias."""

    index_p: int
    index_q: int
    omega_m0: float
    gamma_m0: float
    m_eff: float

    def __post_init__(self):
        if self.index_p < 1 or self.index_q < 1:
            raise DomainError("MechanicalMode", "mode indices must be >= 1")
        _require_positive(self, "omega_m0", "m_eff")
        _require_nonnegative(self, "gamma_m0")

    @property
    def quality_factor(self) -> float:
        if self.gamma_m0 == 0:
            return math.inf
        return self.omega_m0 / self.gamma_m0


@dataclass(frozen=True)
class CapacitorStack:
    """Vacuum-gap membrane capacitor in series with the bias capacitor.

    ``bias_cap`` may be ``math.inf`` for an ideal (non-diluting) bias capacitor.
    """

    gap: float
    membrane_cap_area: float
    stray_cap: float
    bias_cap: float
    bias_resistance: float = 0.0

    def __post_init__(self):
        _require_positive(self, "gap", "membrane_cap_area", "stray_cap")
        if not self.bias_cap > 0:
            raise DomainError("CapacitorStack", "bias_cap must be > 0")
        _require_nonnegative(self, "bias_resistance")


@dataclass(frozen=True)
class MicrowaveCavity:
    """Lumped LC resonator coupled to a read-out line."""

    inductance: float
    kappa_c: float
    kappa_i: float
    line_impedance: float = 50.0

    def __post_init__(self):
        _require_positive(self, "inductance", "kappa_c", "kappa_i", "line_impedance")

    @property
    def kappa(self) -> float:
        return self.kappa_c + self.kappa_i


@dataclass(frozen=True)
class OperatingPoint:
    """Bias, pump and noise environment.

    PSDs are voltage spectral densities in V^2/Hz; ``pump_power`` is the
    power reaching the device, in W.
    """

    bias_voltage: float = 0.0
    charge_offset_voltage: float = 0.0
    pump_power: float = 0.0
    pump_detuning: float = 0.0
    temperature: float = 0.0
    rf_drive_psd: float = 0.0
    rf_noise_psd: float = 0.0
    detector_psd: float = 0.0
    rf_frequency: float = 0.0

    def __post_init__(self):
        _require_nonnegative(self, "pump_power", "temperature", "rf_drive_psd",
                             "rf_noise_psd", "detector_psd", "rf_frequency")

    @property
    def effective_bias(self) -> float:
        return self.bias_voltage - self.charge_offset_voltage


@dataclass(frozen=True)
class NoiseBudget:
    """Force-referred noise channels (N^2/Hz)."""

    thermal: float
    electrical: float
    backaction: float
    detector_equivalent: float

    def __post_init__(self):
        _require_nonnegative(self, "thermal", "electrical", "backaction", "detector_equivalent")

    @property
    def total(self) -> float:
        return sum(getattr(self, f.name) for f in fields(self))
