"""Stateless evaluation of the transducer gain, noise and sensitivity model."""

from emx.model.circuit import (
    cavity_frequency,
    cooperativity,
    equivalent_capacitance,
    equivalent_d2cdx2,
    equivalent_dcdx,
    frequency_pull,
    inductance_for_frequency,
    membrane_capacitance,
    membrane_d2cdx2,
    membrane_dcdx,
    participation_ratio,
    photon_number,
    pump_power_for_photons,
    vacuum_coupling,
    voltage_dilution,
    zero_point_fluctuation,
)
from emx.model.device import Transducer
from emx.model.mechanics import (
    EffectiveMass,
    anti_spring_frequency,
    bias_damping,
    cold_damped_linewidth,
    effective_mass,
    mechanical_susceptibility,
    plate_mode_frequency,
    pull_in_voltage,
)
from emx.model.transduction import (
    Sensitivity,
    SidebandArea,
    SidebandComponents,
    cavity_response,
    charge_sensitivity,
    electromechanical_gain,
    electrostatic_gain,
    force_noise_budget,
    min_sensitivity,
    min_voltage_sensitivity,
    sideband_area,
    sideband_components,
    sideband_spectrum,
    snr,
    snr_from_spectrum_terms,
    thermal_force_psd,
    tone_psd,
    total_gain,
    total_gain_resonant,
    total_gain_resonant_for,
)
from emx.model.types import (
    CapacitorStack,
    MechanicalMode,
    MembraneGeometry,
    MicrowaveCavity,
    NoiseBudget,
    OperatingPoint,
    Rectangle,
)

__all__ = [name for name in dir() if not name.startswith("_")]
