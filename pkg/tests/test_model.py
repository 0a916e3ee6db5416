"""Worked examples for the model layer.

Frozen constants were produced by an independent 40-digit mpmath
evaluation of the closed forms from the raw device numbers (not by calling
emx), then pasted here.
"""

import math

import numpy as np
import pytest

from emx import DomainError, PullInError
from emx.constants import CODATA
from emx.model import (
    CapacitorStack,
    MechanicalMode,
    MembraneGeometry,
    MicrowaveCavity,
    OperatingPoint,
    Rectangle,
    Transducer,
    anti_spring_frequency,
    bias_damping,
    cavity_frequency,
    cavity_response,
    charge_sensitivity,
    cold_damped_linewidth,
    cooperativity,
    effective_mass,
    electromechanical_gain,
    electrostatic_gain,
    equivalent_capacitance,
    equivalent_dcdx,
    force_noise_budget,
    frequency_pull,
    mechanical_susceptibility,
    membrane_capacitance,
    membrane_d2cdx2,
    membrane_dcdx,
    min_sensitivity,
    min_voltage_sensitivity,
    participation_ratio,
    photon_number,
    plate_mode_frequency,
    sideband_area,
    sideband_components,
    sideband_spectrum,
    snr,
    thermal_force_psd,
    total_gain,
    total_gain_resonant,
    voltage_dilution,
    zero_point_fluctuation,
)
from emx.units import TWO_PI, amplitude_to_db, dbm_to_watt, hz_to_rad, tone_power_to_psd

EPS0 = CODATA.vacuum_permittivity


def geom(ly=110e-6, lz=140e-6, ey=90e-6, ez=120e-6, metal=30e-9):
    return MembraneGeometry(ly, lz, 90e-9, 1e9, 3100.0, metal, 2700.0, Rectangle(ly / 2, lz / 2, ey, ez))


# --- plate modes and mass -------------------------------------------------

def test_square_membrane_modes_degenerate():
    g = geom(100e-6, 100e-6, 50e-6, 50e-6)
    assert plate_mode_frequency(g, 1, 2) == plate_mode_frequency(g, 2, 1)


def test_mode_ratio_against_measured():
    g = geom()
    r = plate_mode_frequency(g, 1, 2) / plate_mode_frequency(g, 1, 1)
    assert r == pytest.approx(1.4646, abs=5e-4)
    assert abs(r / (3.75 / 2.54) - 1) < 0.02


def test_plate_frequency_frozen():
    assert plate_mode_frequency(geom(), 1, 1) == pytest.approx(20628988.608794799, rel=1e-12)


def test_plate_frequency_rejects_bad_geometry():
    with pytest.raises(DomainError):
        MembraneGeometry(1e-4, 1e-4, 1e-7, 0.0, 3100.0, 0, 0, Rectangle(5e-5, 5e-5, 1e-5, 1e-5))
    with pytest.raises(DomainError):
        plate_mode_frequency(geom(), 0, 1)


def test_full_electrode_gives_quarter_mass():
    g = geom(110e-6, 140e-6, 110e-6, 140e-6, metal=0.0)
    em = effective_mass(g, 1, 1)
    assert em.dilution_factor == pytest.approx(1.0, rel=1e-12)
    assert em.m_eff == pytest.approx(em.physical_mass / 4, rel=1e-12)


def test_dilution_matches_analytic_integral():
    # Per axis: centred window of fraction a gives a + sin(pi a)/pi.
    em = effective_mass(geom(), 1, 1)
    assert em.dilution_factor == pytest.approx(0.98557165585009657, abs=1e-9)


def test_electrode_outside_membrane_rejected():
    with pytest.raises(DomainError):
        MembraneGeometry(1e-4, 1e-4, 1e-7, 1e9, 3100.0, 0, 0, Rectangle(9e-5, 5e-5, 4e-5, 1e-5))


def test_effective_mass_ratio_reported():
    g = geom()
    model_ratio = effective_mass(g, 1, 1).m_eff / effective_mass(g, 1, 2).m_eff
    assert 6.25 / 4.27 == pytest.approx(1.4637, abs=1e-4)
    assert 0.5 < model_ratio < 2.0


# --- capacitors ------------------------------------------------------------

def plate_stack(cb=math.inf):
    return CapacitorStack(500e-9, (20e-6) ** 2, 1e-15, cb)


def test_projection_capacitance_scale():
    s = plate_stack()
    assert membrane_capacitance(s) == pytest.approx(7.0834e-15, rel=1e-4)
    assert abs(membrane_dcdx(s) / 15e-9 - 1) < 0.10
    assert 1 / 1.5 <= membrane_capacitance(s) / 10e-15 <= 1.5


def test_half_gap_doubles_capacitance():
    s = plate_stack()
    assert membrane_capacitance(s, s.gap / 2) == pytest.approx(2 * membrane_capacitance(s), rel=1e-14)


def test_capacitance_derivatives_finite_difference():
    s = plate_stack()
    h = s.gap * 1e-6
    for x in (0.0, 0.3 * s.gap, -0.4 * s.gap):
        fd1 = (membrane_capacitance(s, x + h) - membrane_capacitance(s, x - h)) / (2 * h)
        fd2 = (membrane_dcdx(s, x + h) - membrane_dcdx(s, x - h)) / (2 * h)
        assert fd1 == pytest.approx(membrane_dcdx(s, x), rel=1e-6)
        assert fd2 == pytest.approx(membrane_d2cdx2(s, x), rel=1e-6)


def test_touching_plates_rejected():
    with pytest.raises(DomainError):
        membrane_capacitance(plate_stack(), 500e-9)


def test_series_limits():
    s = plate_stack()
    assert voltage_dilution(s) == 1.0
    assert equivalent_capacitance(s) == pytest.approx(membrane_capacitance(s), rel=1e-15)
    cm = membrane_capacitance(s)
    s2 = plate_stack(cm)
    assert voltage_dilution(s2) == pytest.approx(0.5, rel=1e-14)
    assert equivalent_capacitance(s2) == pytest.approx(cm / 2, rel=1e-14)


def test_equivalent_dcdx_finite_difference():
    s = plate_stack(5e-15)
    h = s.gap * 1e-6
    fd = (equivalent_capacitance(s, h) - equivalent_capacitance(s, -h)) / (2 * h)
    assert fd == pytest.approx(equivalent_dcdx(s), rel=1e-6)
    assert equivalent_dcdx(s) == pytest.approx(voltage_dilution(s) ** 2 * membrane_dcdx(s), rel=1e-14)


# --- cavity ------------------------------------------------------------------

def test_bare_resonator_limit():
    s = CapacitorStack(1e-6, 1e-18, 1e-13, math.inf)
    cav = MicrowaveCavity(1e-8, 1e6, 1e6)
    assert cavity_frequency(cav, s) == pytest.approx(1 / math.sqrt(1e-8 * 1e-13), rel=1e-6)


def test_participation_ratio_from_flip_chip_shift():
    assert participation_ratio(7.04, 6.21) == pytest.approx(0.2219, abs=1e-4)
    assert abs(participation_ratio(7.04e9, 6.21e9) - 0.22) <= 0.01
    with pytest.raises(DomainError):
        participation_ratio(6.0, 7.0)


def test_frequency_pull_finite_difference(dev11):
    s, cav = dev11.stack, dev11.cavity
    h = s.gap * 1e-6
    fd = (cavity_frequency(cav, s, h) - cavity_frequency(cav, s, -h)) / (2 * h)
    assert fd == pytest.approx(frequency_pull(cav, s), rel=1e-6)
    assert frequency_pull(cav, s) < 0


# --- mechanics --------------------------------------------------------------

def test_antispring_zero_effective_bias(dev11):
    d = dev11.with_op(bias_voltage=dev11.op.charge_offset_voltage)
    assert d.omega_m == d.mode.omega_m0


def test_antispring_symmetric(dev11):
    v0 = dev11.op.charge_offset_voltage
    for u in (3.0, 17.5, 48.0):
        a = anti_spring_frequency(dev11.mode, dev11.stack, OperatingPoint(v0 + u, v0))
        b = anti_spring_frequency(dev11.mode, dev11.stack, OperatingPoint(v0 - u, v0))
        assert a == b


def test_antispring_shift_frozen(dev11):
    shift = (dev11.omega_m - dev11.mode.omega_m0) / TWO_PI
    assert shift == pytest.approx(-7447.7601724397525, rel=1e-9)


def test_pull_in_raised(dev11):
    with pytest.raises(PullInError):
        anti_spring_frequency(dev11.mode, dev11.stack, OperatingPoint(1e4))


def test_bias_damping_limits(dev11):
    lossless = CapacitorStack(dev11.stack.gap, dev11.stack.membrane_cap_area, dev11.stack.stray_cap,
                              dev11.stack.bias_cap, 0.0)
    for v in (0.0, 20.0, 49.0):
        assert bias_damping(dev11.mode, lossless, OperatingPoint(v)) == dev11.mode.gamma_m0
    v0 = dev11.op.charge_offset_voltage
    assert bias_damping(dev11.mode, dev11.stack, OperatingPoint(v0, v0)) == dev11.mode.gamma_m0


def test_bias_damping_frozen(dev11):
    extra = (dev11.gamma_m - dev11.mode.gamma_m0) / TWO_PI
    assert extra == pytest.approx(5.7095355007083639, rel=1e-9)


def test_susceptibility_static_and_resonant(dev11):
    m, s, op = dev11.mode, dev11.stack, dev11.op
    chi0 = mechanical_susceptibility(m, s, op, 0.0)
    assert chi0.imag == 0
    assert chi0.real == pytest.approx(1 / (m.m_eff * dev11.omega_m**2), rel=1e-14)
    chir = mechanical_susceptibility(m, s, op, dev11.omega_m)
    assert abs(chir.real) < 1e-9 * abs(chir.imag)
    assert abs(chir) == pytest.approx(1 / (m.m_eff * dev11.omega_m * dev11.gamma_m), rel=1e-12)


def test_susceptibility_fwhm_is_linewidth(dev11):
    w0, g = dev11.omega_m, dev11.gamma_m
    w = np.linspace(w0 - 5 * g, w0 + 5 * g, 400001)
    p = np.abs(mechanical_susceptibility(dev11.mode, dev11.stack, dev11.op, w)) ** 2
    above = w[p >= p.max() / 2]
    assert above[-1] - above[0] == pytest.approx(g, rel=1e-3)


def test_cavity_response_resonant_sideband():
    kappa, wm = 8e6, 1.5e7
    assert abs(cavity_response(kappa, -wm, wm)) == pytest.approx(2 / kappa, rel=1e-14)
    assert abs(cavity_response(kappa, -wm, 1e15)) < 1e-14


def test_cavity_response_half_width():
    kappa, wm = 8e6, 1.5e7
    w = np.linspace(wm - 2 * kappa, wm + 2 * kappa, 800001)
    a2 = np.abs(cavity_response(kappa, -wm, w)) ** 2
    above = w[a2 >= a2.max() / 2]
    assert (above[-1] - above[0]) / 2 == pytest.approx(kappa / 2, rel=1e-4)


def test_electrostatic_gain_vanishes_at_v0(dev11):
    d = dev11.with_op(bias_voltage=dev11.op.charge_offset_voltage)
    assert electrostatic_gain(d, d.omega_m) == 0


def test_electrostatic_gain_linear_in_bias(dev11):
    v0 = dev11.op.charge_offset_voltage
    d1, d2 = dev11.with_op(bias_voltage=v0 + 10), dev11.with_op(bias_voltage=v0 + 20)
    w = dev11.mode.omega_m0
    from emx.model.transduction import susceptibility
    lever1 = electrostatic_gain(d1, w) / abs(susceptibility(d1, w))
    lever2 = electrostatic_gain(d2, w) / abs(susceptibility(d2, w))
    assert lever2 == pytest.approx(2 * lever1, rel=1e-13)


def test_electrostatic_gain_frozen(dev11):
    assert electrostatic_gain(dev11, dev11.omega_m) == pytest.approx(6.4954759813907783e-06, rel=1e-9)


# --- optomechanics -----------------------------------------------------------

def test_photon_number_zero_pump(dev11):
    assert photon_number(dev11.cavity, dev11.omega_c, OperatingPoint()) == 0


def test_photon_number_zero_detuning(dev11):
    cav, wc = dev11.cavity, dev11.omega_c
    p = 1e-9
    n = photon_number(cav, wc, OperatingPoint(pump_power=p))
    assert n == pytest.approx(4 * p * cav.kappa_c / (CODATA.reduced_planck * wc * cav.kappa**2), rel=1e-14)


def test_photon_number_frozen(dev11):
    assert dev11.photon_number == pytest.approx(99264147.434330486, rel=1e-9)


def test_zero_point_fluctuation(dev11):
    x = zero_point_fluctuation(6.25e-12, hz_to_rad(2.4e6))
    assert x == pytest.approx(7.4797575188814480e-16, rel=1e-12)
    assert zero_point_fluctuation(12.5e-12, hz_to_rad(2.4e6)) == pytest.approx(x / math.sqrt(2), rel=1e-14)
    d = dev11.with_op(bias_voltage=dev11.op.charge_offset_voltage)
    assert d.x_zpf == pytest.approx(x, rel=1e-12)


def test_calibrated_g0_overrides_geometry(dev11, dev12):
    for dev, g0 in ((dev11, 0.29), (dev12, 0.23)):
        d = dev.with_op(bias_voltage=dev.op.charge_offset_voltage)
        assert d.vacuum_coupling == pytest.approx(hz_to_rad(g0), rel=1e-14)
    geometric = dev11.replace(g0=None)
    assert geometric.vacuum_coupling != pytest.approx(dev11.vacuum_coupling, rel=1e-3)


def test_cooperativity_basics():
    assert cooperativity(1.0, 0.0, 1e6, 100.0) == 0
    assert cooperativity(1.0, 2e6, 1e6, 100.0) == pytest.approx(2 * cooperativity(1.0, 1e6, 1e6, 100.0))
    with pytest.raises(DomainError):
        cooperativity(1.0, 1e6, 1e6, 0.0)


def test_measured_cooperativities(dev11, dev12):
    for dev, c in ((dev11, 0.28), (dev12, 0.5)):
        d = dev.with_op(bias_voltage=dev.op.charge_offset_voltage)
        assert d.cooperativity == pytest.approx(c, rel=1e-3)


@pytest.mark.parametrize("gamma, c, target", [(89.0, 0.28, 114.0), (16.0, 0.5, 24.0)])
def test_cold_damping(gamma, c, target):
    assert abs(cold_damped_linewidth(gamma, c) / target - 1) < 0.01


def test_cold_damping_zero_cooperativity():
    assert cold_damped_linewidth(89.0, 0.0) == 89.0


def test_em_gain_scaling(dev11):
    assert electromechanical_gain(dev11.with_op(pump_power=0.0), dev11.omega_m) == 0
    g1 = electromechanical_gain(dev11, dev11.omega_m)
    g4 = electromechanical_gain(dev11.with_op(pump_power=4 * dev11.op.pump_power), dev11.omega_m)
    assert g4 == pytest.approx(2 * g1, rel=1e-13)


def test_em_gain_frozen(dev11):
    assert electromechanical_gain(dev11, dev11.omega_m) == pytest.approx(92753.508348792067, rel=1e-9)


def test_projection_total_gain():
    g = total_gain_resonant(0.1, hz_to_rad(0.5e6), hz_to_rad(1.5e6), 50.0, hz_to_rad(6e9), hz_to_rad(4e6),
                            1e-12, hz_to_rad(0.01), 50.0, 15e-9)
    assert abs(amplitude_to_db(g) - 44.0) <= 1.0


def test_total_gain_zero_at_v0(dev11):
    d = dev11.with_op(bias_voltage=dev11.op.charge_offset_voltage)
    assert total_gain(d, d.omega_m) == 0


# --- noise -------------------------------------------------------------------

def test_budget_only_detector(dev11):
    d = dev11.with_op(temperature=0.0, pump_power=0.0, rf_noise_psd=0.0)
    nb = force_noise_budget(d, cold_damped=False)
    assert nb.thermal == nb.electrical == nb.backaction == 0
    assert nb.detector_equivalent > 0


def test_thermal_force_frozen():
    s = thermal_force_psd(1e-12, hz_to_rad(0.01), 0.01, CODATA.boltzmann)
    assert s == pytest.approx(1.7349747022344378e-38, rel=1e-12)
    assert math.sqrt(s) == pytest.approx(1.3e-19, rel=0.05)


def test_electrical_channel_even_quadratic(dev11):
    v0 = dev11.op.charge_offset_voltage
    e = [force_noise_budget(dev11.with_op(bias_voltage=v0 + u)).electrical for u in (10.0, -10.0, 20.0)]
    assert e[0] == pytest.approx(e[1], rel=1e-14)
    assert e[2] == pytest.approx(4 * e[0], rel=1e-13)


def test_spectrum_flat_when_everything_off(dev11):
    d = dev11.with_op(temperature=0.0, pump_power=0.0, rf_noise_psd=0.0, rf_drive_psd=0.0)
    w = np.linspace(d.omega_m - 1e4, d.omega_m + 1e4, 101)
    assert np.all(sideband_spectrum(d, w) == d.op.detector_psd)


def test_peak_to_floor_ratio(dev12):
    comp = sideband_components(dev12, [dev12.omega_m])
    ratio = comp.total[0] / comp.detector[0]
    transfer = electromechanical_gain(dev12, dev12.omega_m) ** 2 * abs(
        1 / (dev12.mode.m_eff * dev12.omega_m * dev12.gamma_em)) ** 2
    s_det = dev12.op.detector_psd / transfer
    s_th = thermal_force_psd(dev12.mode.m_eff, dev12.gamma_m, dev12.op.temperature, CODATA.boltzmann)
    s_el = (dev12.effective_bias * dev12.dcdx) ** 2 * dev12.op.rf_noise_psd
    from emx.model.transduction import backaction_force_psd
    assert ratio == pytest.approx((s_th + s_el + backaction_force_psd(dev12) + s_det) / s_det, rel=1e-9)


def _thermal_quadrature(dev, span_linewidths, points=20001):
    w0, g = dev.omega_m, dev.gamma_em
    w = np.linspace(w0 - span_linewidths * g / 2, w0 + span_linewidths * g / 2, points)
    th = sideband_components(dev, w).thermal
    return np.trapezoid(th, w) / math.pi, w


def test_spectrum_area_quadrature_wide_span(dev11):
    d = dev11.replace(chain_gain=1.0)
    # Convert the output spectrum to displacement units with the on-resonance read-out gain.
    q, _ = _thermal_quadrature(d, 200)
    gem2 = electromechanical_gain(d, d.omega_m) ** 2
    assert q / gem2 == pytest.approx(sideband_area(d).thermal, rel=0.01)


def test_spectrum_area_quadrature_twenty_linewidths_tail_corrected(dev11):
    d = dev11.replace(chain_gain=1.0)
    q, w = _thermal_quadrature(d, 20)
    gem2 = electromechanical_gain(d, d.omega_m) ** 2
    # A Lorentzian of FWHM g over +/- s carries (2/pi) atan(2 s / g) of its area.
    half = (w[-1] - w[0]) / 2
    captured = 2 / math.pi * math.atan(2 * half / d.gamma_em)
    assert q / gem2 / captured == pytest.approx(sideband_area(d).thermal, rel=0.01)


def test_area_linear_in_temperature_at_v0(dev11):
    d = dev11.with_op(bias_voltage=dev11.op.charge_offset_voltage)
    a = [sideband_area(d.with_op(temperature=t)).total for t in (0.0, 0.01, 0.5)]
    assert a[0] == 0
    assert a[2] / a[1] == pytest.approx(50.0, rel=1e-12)


def test_area_slope_calibrated(dev11):
    d = dev11.with_op(bias_voltage=dev11.op.charge_offset_voltage)
    slope = sideband_area(d.with_op(temperature=1.0)).thermal
    assert slope == pytest.approx(3.57e-10, rel=0.01)


def test_area_parabola_coefficient_frozen(dev11):
    coeff = sideband_area(dev11).electrical / dev11.effective_bias**2
    assert coeff == pytest.approx(3.9342376603098228e-15, rel=1e-9)


# --- snr and sensitivity -------------------------------------------------------

def test_snr_zero_without_drive(dev11):
    assert snr(dev11.with_op(rf_drive_psd=0.0)) == 0


def test_snr_linear_at_small_bias(dev11):
    d = dev11.with_op(rf_noise_psd=0.0)
    v0 = d.op.charge_offset_voltage
    s1, s2 = snr(d.with_op(bias_voltage=v0 + 0.5)), snr(d.with_op(bias_voltage=v0 + 1.0))
    assert s2 / s1 == pytest.approx(2.0, rel=0.01)


def test_snr_plateau_mode12(dev12):
    ss = tone_power_to_psd(dbm_to_watt(-70.3), 50.0, 1.5)
    sn = 7.8e-9**2
    bound_db = amplitude_to_db(math.sqrt(ss / sn))
    assert bound_db == pytest.approx(77.086895398993768, abs=1e-9)
    d = dev12.with_op(rf_drive_psd=ss, rf_noise_psd=sn)
    assert amplitude_to_db(snr(d)) <= bound_db
    assert bound_db - amplitude_to_db(snr(d)) < 1.0


def test_snr_all_noise_zero_raises(dev11):
    d = dev11.with_op(temperature=0.0, pump_power=0.0, rf_noise_psd=0.0, detector_psd=0.0)
    with pytest.raises(DomainError):
        snr(d)


def test_projection_sensitivity():
    sv = min_voltage_sensitivity(1e-12, hz_to_rad(0.01), 0.01, 50.0, 15e-9, CODATA.boltzmann)
    assert sv == pytest.approx(1.7562e-13, rel=1e-3)
    assert sv <= 200e-15
    q = charge_sensitivity(sv, 10e-15, CODATA.elementary_charge)
    assert abs(q / 10e-9 - 1) < 0.15


def test_sensitivity_sqrt_temperature(dev11):
    a = min_sensitivity(dev11).voltage
    b = min_sensitivity(dev11.with_op(temperature=dev11.op.temperature / 2)).voltage
    assert b == pytest.approx(a / math.sqrt(2), rel=1e-14)


def test_sensitivity_at_v0_raises(dev11):
    with pytest.raises(DomainError, match="min_sensitivity"):
        min_sensitivity(dev11.with_op(bias_voltage=dev11.op.charge_offset_voltage))


def test_table_charge_conversion():
    q = charge_sensitivity(0.9e-9, 15e-15, CODATA.elementary_charge) * 1e6
    assert q == pytest.approx(84.260372505220295, rel=1e-12)
    assert abs(q / 87 - 1) < 0.05


def test_invalid_types_rejected():
    with pytest.raises(DomainError):
        MechanicalMode(0, 1, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        CapacitorStack(1e-6, 1e-9, 1e-14, 0.0)
    with pytest.raises(DomainError):
        OperatingPoint(temperature=-1.0)
    with pytest.raises(DomainError):
        Transducer(MechanicalMode(1, 1, 1e7, 10.0, 1e-12), plate_stack(),
                   MicrowaveCavity(-1.0, 1e6, 1e6))
