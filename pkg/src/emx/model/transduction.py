"""Gains, noise spectra, signal-to-noise ratio and sensitivity.

Spectral densities follow the Langevin convention ``S_FF = 2 m Gamma k_B T``,
so displacement variances are ``integral_0^inf S_xx dw / pi``. Every bias
``V`` below is the effective bias ``V - V0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from emx.errors import DomainError
from emx.model.device import Transducer
from emx.model.mechanics import mechanical_susceptibility
from emx.model.types import NoiseBudget


def _out(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def cavity_response(kappa: float, detuning: float, omega):
    """``A_-(w) = 1 / (-i (Delta + w) + kappa / 2)`` in s."""
    w = np.asarray(omega, dtype=float)
    return _out(1.0 / (-1j * (detuning + w) + kappa / 2.0))


def susceptibility(dev: Transducer, omega, cold_damped: bool = False):
    linewidth = dev.gamma_em if cold_damped else None
    return mechanical_susceptibility(dev.mode, dev.stack, dev.op, omega, linewidth, dev.constants)


def electrostatic_gain(dev: Transducer, omega, cold_damped: bool = False):
    """``|chi_m(w) V dC_eq/dx|`` in m/V."""
    chi = np.abs(susceptibility(dev, omega, cold_damped))
    return _out(chi * abs(dev.effective_bias * dev.dcdx))


def electromechanical_gain(dev: Transducer, omega):
    """Resolved-sideband read-out gain in V/m.

    ``G sqrt(n kappa_c) |A_-(w)| sqrt(hbar w_c Z / 2)``
    """
    a = np.abs(cavity_response(dev.cavity.kappa, dev.op.pump_detuning, omega))
    scale = dev.coupling * math.sqrt(dev.photon_number * dev.cavity.kappa_c) * math.sqrt(
        dev.constants.reduced_planck * dev.omega_c * dev.cavity.line_impedance / 2.0)
    return _out(scale * a)


def total_gain(dev: Transducer, omega, cold_damped: bool = False):
    """Voltage-to-voltage gain, product of the two cascaded stages."""
    return _out(np.asarray(electromechanical_gain(dev, omega)) * np.asarray(electrostatic_gain(dev, omega, cold_damped)))


def total_gain_resonant(cooperativity: float, kappa_c: float, kappa: float, impedance: float,
                        omega_c: float, omega_m: float, m_eff: float, gamma_m: float,
                        bias: float, dcdx: float) -> float:
    """Closed-form total gain at ``w = Omega_m`` for a pump at ``Delta = -Omega_m``."""
    if not gamma_m > 0:
        raise DomainError("total_gain_resonant", "mechanical linewidth must be > 0")
    return math.sqrt(cooperativity * kappa_c * impedance * omega_c / (kappa * omega_m * m_eff * gamma_m)) * abs(bias * dcdx)


def total_gain_resonant_for(dev: Transducer) -> float:
    return total_gain_resonant(dev.cooperativity, dev.cavity.kappa_c, dev.cavity.kappa,
                               dev.cavity.line_impedance, dev.omega_c, dev.omega_m, dev.mode.m_eff,
                               dev.gamma_m, dev.effective_bias, dev.dcdx)


def thermal_force_psd(m_eff: float, gamma: float, temperature: float, boltzmann: float) -> float:
    return 2.0 * m_eff * gamma * boltzmann * temperature


def backaction_force_psd(dev: Transducer, omega=None):
    w = dev.omega_m if omega is None else omega
    a2 = np.abs(cavity_response(dev.cavity.kappa, dev.op.pump_detuning, w)) ** 2
    return _out(dev.constants.reduced_planck**2 * dev.coupling**2 * dev.photon_number * dev.cavity.kappa * a2)


def force_noise_budget(dev: Transducer, omega: float | None = None, cold_damped: bool = True) -> NoiseBudget:
    """Force-referred noise channels at ``omega`` (default: the mode frequency).

    With ``cold_damped`` the thermal channel is evaluated with the total
    linewidth, which lumps the pump-induced damping into it. The detector
    channel is the detector PSD divided by the read-out transfer through the
    cold-damped susceptibility.
    """
    w = dev.omega_m if omega is None else float(omega)
    gamma = dev.gamma_em if cold_damped else dev.gamma_m
    thermal = thermal_force_psd(dev.mode.m_eff, gamma, dev.op.temperature, dev.constants.boltzmann)
    electrical = (dev.effective_bias * dev.dcdx) ** 2 * dev.op.rf_noise_psd
    backaction = backaction_force_psd(dev, w)
    if dev.op.detector_psd == 0:
        detector = 0.0
    else:
        transfer = electromechanical_gain(dev, w) ** 2 * abs(susceptibility(dev, w, cold_damped=True)) ** 2
        detector = math.inf if transfer == 0 else dev.op.detector_psd / transfer
    return NoiseBudget(thermal, electrical, backaction, detector)


@dataclass(frozen=True)
class SidebandComponents:
    """Output spectrum split by origin, V^2/Hz at the device port."""

    electrical: np.ndarray
    thermal: np.ndarray
    backaction: np.ndarray
    detector: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.electrical + self.thermal + self.backaction + self.detector


def sideband_components(dev: Transducer, omega_grid) -> SidebandComponents:
    """Noise part of the transduced sideband spectrum on ``omega_grid`` (rad/s).

    The motion responds through the cold-damped susceptibility while the
    thermal bath force is set by the intrinsic linewidth, so that the peak
    area matches :func:`sideband_area`.
    """
    w = np.asarray(omega_grid, dtype=float)
    if w.ndim != 1 or not np.all(np.isfinite(w)):
        raise DomainError("sideband_spectrum", "omega grid must be a finite 1-D array")
    if w.size > 1 and np.any(np.diff(w) <= 0):
        raise DomainError("sideband_spectrum", "omega grid must be strictly increasing")
    transfer = np.asarray(electromechanical_gain(dev, w)) ** 2 * np.abs(susceptibility(dev, w, cold_damped=True)) ** 2
    s_th = thermal_force_psd(dev.mode.m_eff, dev.gamma_m, dev.op.temperature, dev.constants.boltzmann)
    s_ba = np.asarray(backaction_force_psd(dev, w))
    s_el = (dev.effective_bias * dev.dcdx) ** 2 * dev.op.rf_noise_psd
    return SidebandComponents(
        electrical=transfer * s_el,
        thermal=transfer * s_th,
        backaction=transfer * s_ba,
        detector=np.full_like(w, dev.op.detector_psd),
    )


def sideband_spectrum(dev: Transducer, omega_grid) -> np.ndarray:
    """Total noise spectrum (V^2/Hz). The coherent drive is handled by :func:`tone_psd`."""
    return sideband_components(dev, omega_grid).total


def tone_psd(dev: Transducer) -> float:
    """Output PSD of the coherent rf drive in its bin, ``G_tot(Omega_rf)^2 S_VV^s``."""
    if dev.op.rf_drive_psd == 0:
        return 0.0
    return total_gain(dev, dev.op.rf_frequency, cold_damped=True) ** 2 * dev.op.rf_drive_psd


@dataclass(frozen=True)
class SidebandArea:
    thermal: float
    electrical: float

    @property
    def total(self) -> float:
        return self.thermal + self.electrical


def sideband_area(dev: Transducer, chain_gain: float | None = None) -> SidebandArea:
    """Integrated mechanical sideband, in V^2 (or m^2 for ``chain_gain=1``).

    ``A = g / (m Omega^2) (k_B T Gamma / Gamma_em + S_VV^n dC^2 V^2 / (m Gamma_em))``

    The thermal term equals the quadrature of the spectrum's thermal part.
    The electrical term is twice the quadrature of the spectrum's electrical
    part; the two closed forms are kept as they are used for fitting.
    """
    if not dev.gamma_em > 0:
        raise DomainError("sideband_area", "total linewidth must be > 0")
    g = dev.chain_gain if chain_gain is None else chain_gain
    m = dev.mode.m_eff
    prefactor = g / (m * dev.omega_m**2)
    thermal = dev.constants.boltzmann * dev.op.temperature * dev.gamma_m / dev.gamma_em
    electrical = dev.op.rf_noise_psd * dev.dcdx**2 * dev.effective_bias**2 / (m * dev.gamma_em)
    return SidebandArea(prefactor * thermal, prefactor * electrical)


def snr(dev: Transducer, cold_damped: bool = True) -> float:
    """On-resonance amplitude signal-to-noise ratio of the transduced rf tone.

    ``SNR^2 = u^2 S^s / (u^2 S^n + S_th + S_ba + S_det_eq)`` with ``u = V dC_eq/dx``.
    """
    budget = force_noise_budget(dev, cold_damped=cold_damped)
    u2 = (dev.effective_bias * dev.dcdx) ** 2
    denom = budget.total
    if denom == 0:
        raise DomainError("snr", "all noise channels vanish")
    return math.sqrt(u2 * dev.op.rf_drive_psd / denom)


def snr_from_spectrum_terms(dev: Transducer, omega: float | None = None, cold_damped: bool = True) -> float:
    """Same ratio written with output-referred gains instead of forces."""
    w = dev.omega_m if omega is None else omega
    gtot2 = total_gain(dev, w, cold_damped=True) ** 2
    transfer = electromechanical_gain(dev, w) ** 2 * abs(susceptibility(dev, w, cold_damped=True)) ** 2
    gamma = dev.gamma_em if cold_damped else dev.gamma_m
    s_th = thermal_force_psd(dev.mode.m_eff, gamma, dev.op.temperature, dev.constants.boltzmann)
    denom = gtot2 * dev.op.rf_noise_psd + transfer * (s_th + backaction_force_psd(dev, w)) + dev.op.detector_psd
    if denom == 0:
        raise DomainError("snr", "all noise channels vanish")
    return math.sqrt(gtot2 * dev.op.rf_drive_psd / denom)


def min_voltage_sensitivity(m_eff: float, gamma_m: float, temperature: float, bias: float,
                            dcdx: float, boltzmann: float) -> float:
    """Thermal-limited input voltage noise for SNR = 1, in V/sqrt(Hz)."""
    lever = abs(bias * dcdx)
    if lever == 0:
        raise DomainError("min_sensitivity", "zero effective bias gives no transduction")
    return math.sqrt(2.0 * m_eff * gamma_m * boltzmann * temperature) / lever


def charge_sensitivity(voltage_sensitivity: float, c_eq: float, elementary_charge: float) -> float:
    """Convert V/sqrt(Hz) into e/sqrt(Hz) through the bias-circuit capacitance."""
    return c_eq * voltage_sensitivity / elementary_charge


@dataclass(frozen=True)
class Sensitivity:
    voltage: float
    charge: float


def min_sensitivity(dev: Transducer, cold_damped: bool = False) -> Sensitivity:
    gamma = dev.gamma_em if cold_damped else dev.gamma_m
    sv = min_voltage_sensitivity(dev.mode.m_eff, gamma, dev.op.temperature, dev.effective_bias,
                                 dev.dcdx, dev.constants.boltzmann)
    return Sensitivity(sv, charge_sensitivity(sv, dev.c_eq, dev.constants.elementary_charge))
