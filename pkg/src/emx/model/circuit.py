"""Capacitor network, LC resonator and optomechanical coupling.

The membrane capacitor is a parallel-plate closure ``C_m(x) = eps0 A / (d - x)``
with no fringing field. Positive ``x`` closes the gap.
"""

from __future__ import annotations

import math

from emx.constants import CODATA, PhysicalConstants
from emx.errors import DomainError
from emx.model.types import CapacitorStack, MicrowaveCavity, OperatingPoint


def _check_displacement(stack: CapacitorStack, x: float, operation: str) -> float:
    if not abs(x) < stack.gap:
        raise DomainError(operation, f"|x| = {abs(x):.3e} m must stay below the gap {stack.gap:.3e} m")
    return stack.gap - x


def membrane_capacitance(stack: CapacitorStack, x: float = 0.0,
                         constants: PhysicalConstants = CODATA) -> float:
    """Capacitance seen by the bias circuit, ``eps0 A / (d - x)``."""
    s = _check_displacement(stack, x, "membrane_capacitance")
    return constants.vacuum_permittivity * stack.membrane_cap_area / s


def membrane_dcdx(stack: CapacitorStack, x: float = 0.0,
                  constants: PhysicalConstants = CODATA) -> float:
    s = _check_displacement(stack, x, "membrane_capacitance")
    return constants.vacuum_permittivity * stack.membrane_cap_area / s**2


def membrane_d2cdx2(stack: CapacitorStack, x: float = 0.0,
                    constants: PhysicalConstants = CODATA) -> float:
    s = _check_displacement(stack, x, "membrane_capacitance")
    return 2.0 * constants.vacuum_permittivity * stack.membrane_cap_area / s**3


def voltage_dilution(stack: CapacitorStack, x: float = 0.0,
                     constants: PhysicalConstants = CODATA) -> float:
    """Fraction ``C_b / (C_b + C_m)`` of the bias dropping across the membrane gap."""
    cm = membrane_capacitance(stack, x, constants)
    return 1.0 / (1.0 + cm / stack.bias_cap)


def equivalent_capacitance(stack: CapacitorStack, x: float = 0.0,
                           constants: PhysicalConstants = CODATA) -> float:
    cm = membrane_capacitance(stack, x, constants)
    return 1.0 / (1.0 / cm + 1.0 / stack.bias_cap)


def equivalent_dcdx(stack: CapacitorStack, x: float = 0.0,
                    constants: PhysicalConstants = CODATA) -> float:
    """First derivative of the series network, ``eta^2 dC_m/dx``."""
    eta = voltage_dilution(stack, x, constants)
    return eta**2 * membrane_dcdx(stack, x, constants)


def equivalent_d2cdx2(stack: CapacitorStack, x: float = 0.0,
                      constants: PhysicalConstants = CODATA) -> float:
    """Second derivative of the series network (exact chain rule).

    ``eta^2 C_m'' - 2 eta^3 C_m'^2 / C_b``; the second term vanishes for an
    ideal bias capacitor.
    """
    eta = voltage_dilution(stack, x, constants)
    d1 = membrane_dcdx(stack, x, constants)
    d2 = membrane_d2cdx2(stack, x, constants)
    return eta**2 * d2 - 2.0 * eta**3 * d1**2 / stack.bias_cap


def cavity_frequency(cavity: MicrowaveCavity, stack: CapacitorStack, x: float = 0.0,
                     constants: PhysicalConstants = CODATA) -> float:
    """LC resonance ``(L (C_m/4 + C_s))^-1/2`` in rad/s."""
    cm = membrane_capacitance(stack, x, constants)
    return 1.0 / math.sqrt(cavity.inductance * (cm / 4.0 + stack.stray_cap))


def frequency_pull(cavity: MicrowaveCavity, stack: CapacitorStack, x: float = 0.0,
                   constants: PhysicalConstants = CODATA) -> float:
    """``d omega_c / dx`` in rad/s per m. Negative: closing the gap lowers omega_c."""
    wc = cavity_frequency(cavity, stack, x, constants)
    return -(wc**3) * cavity.inductance * membrane_dcdx(stack, x, constants) / 8.0


def inductance_for_frequency(omega_c: float, stack: CapacitorStack,
                             constants: PhysicalConstants = CODATA) -> float:
    """Inductance placing the loaded resonance at ``omega_c`` for ``x = 0``."""
    cm = membrane_capacitance(stack, 0.0, constants)
    return 1.0 / (omega_c**2 * (cm / 4.0 + stack.stray_cap))


def participation_ratio(f_bare: float, f_loaded: float) -> float:
    """``C_m / (C_m + 4 C_s)`` from resonances without and with the membrane.

    Only the ratio of the two frequencies matters, so any common unit works.
    """
    if not (f_bare > f_loaded > 0):
        raise DomainError("participation_ratio", "loaded frequency must be positive and below the bare one")
    r = (f_bare / f_loaded) ** 2
    return (r - 1.0) / r


def zero_point_fluctuation(m_eff: float, omega_m: float,
                           constants: PhysicalConstants = CODATA) -> float:
    return math.sqrt(constants.reduced_planck / (2.0 * m_eff * omega_m))


def vacuum_coupling(coupling: float, m_eff: float, omega_m: float,
                    constants: PhysicalConstants = CODATA) -> float:
    """``g0 = |G| x_zpf`` in rad/s."""
    return abs(coupling) * zero_point_fluctuation(m_eff, omega_m, constants)


def photon_number(cavity: MicrowaveCavity, omega_c: float, op: OperatingPoint,
                  constants: PhysicalConstants = CODATA) -> float:
    """Intracavity photons for a pump of ``op.pump_power`` at detuning ``op.pump_detuning``.

    ``n = (P / hbar w_d) kappa_c / (Delta^2 + kappa^2 / 4)``.
    """
    if op.pump_power == 0:
        return 0.0
    omega_d = omega_c + op.pump_detuning
    if omega_d <= 0:
        raise DomainError("photon_number", "pump frequency must be positive")
    flux = op.pump_power / (constants.reduced_planck * omega_d)
    return flux * cavity.kappa_c / (op.pump_detuning**2 + cavity.kappa**2 / 4.0)


def pump_power_for_photons(n: float, cavity: MicrowaveCavity, omega_c: float, detuning: float,
                           constants: PhysicalConstants = CODATA) -> float:
    """Inverse of :func:`photon_number`."""
    omega_d = omega_c + detuning
    return n * constants.reduced_planck * omega_d * (detuning**2 + cavity.kappa**2 / 4.0) / cavity.kappa_c


def cooperativity(g0: float, n: float, kappa: float, gamma_m: float) -> float:
    """``C = 4 g0^2 n / (kappa Gamma_m)``."""
    if not gamma_m > 0:
        raise DomainError("cooperativity", "mechanical linewidth must be > 0")
    return 4.0 * g0**2 * n / (kappa * gamma_m)
