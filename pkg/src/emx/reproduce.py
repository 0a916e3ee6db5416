"""One-shot check of the published figures of merit against the model.

Each check returns rows of ``computed`` versus ``target`` with the tolerance
it is judged at. Measured figures are reproduced on synthetic data drawn
from the bundled device configs with fixed seeds.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

from emx import config
from emx.constants import CODATA
from emx.design import reproduce_projection
from emx.estimate import fit_antispring, fit_area_vs_T, fit_snr_vs_V, sensitivity_report
from emx.model import (
    CapacitorStack,
    MembraneGeometry,
    Rectangle,
    charge_sensitivity,
    cold_damped_linewidth,
    membrane_capacitance,
    membrane_dcdx,
    min_voltage_sensitivity,
    participation_ratio,
    plate_mode_frequency,
    total_gain_resonant,
)
from emx.units import TWO_PI, amplitude_to_db, hz_to_rad
from emx.workflows import synthesize

SEED = 2024


@dataclass
class Row:
    criterion: int
    name: str
    computed: float
    target: float
    tolerance: str
    passed: bool
    quoted: str


def _rel(computed, target, tol):
    return abs(computed - target) <= tol * abs(target)


# Optimised-device projection inputs, as quoted.
PROJ = dict(cooperativity=0.1, kappa_c=hz_to_rad(0.5e6), kappa=hz_to_rad(1.5e6), impedance=50.0,
            omega_c=hz_to_rad(6e9), omega_m=hz_to_rad(4e6), m_eff=1e-12, gamma_m=hz_to_rad(0.01),
            bias=50.0, dcdx=15e-9)


def check_gain() -> list[Row]:
    elapsed = math.inf
    for _ in range(5):
        t0 = time.perf_counter()
        g = total_gain_resonant(**PROJ)
        elapsed = min(elapsed, time.perf_counter() - t0)
    db = amplitude_to_db(g)
    return [Row(1, "projected total gain (dB)", db, 44.0, "+/- 1 dB", abs(db - 44) <= 1, "44 dB"),
            Row(1, "gain evaluation time (s)", elapsed, 1e-3, "< 1 ms", elapsed < 1e-3, "")]


def check_sensitivity() -> list[Row]:
    sv = min_voltage_sensitivity(PROJ["m_eff"], PROJ["gamma_m"], 0.01, 50.0, 15e-9, CODATA.boltzmann)
    q = charge_sensitivity(sv, 10e-15, CODATA.elementary_charge) * 1e9
    return [Row(2, "projected voltage sensitivity (V/rtHz)", sv, 200e-15, "<= target", sv <= 200e-15,
                "200 fV/rtHz"),
            Row(2, "projected charge sensitivity (ne/rtHz)", q, 10.0, "15 %", _rel(q, 10.0, 0.15), "10 ne/rtHz")]


def check_capacitance() -> list[Row]:
    s = CapacitorStack(500e-9, (20e-6) ** 2, 1e-15, math.inf)
    cm, dc = membrane_capacitance(s), membrane_dcdx(s)
    return [Row(3, "dC_m/dx (F/m)", dc, 15e-9, "10 %", _rel(dc, 15e-9, 0.10), "15 nF/m"),
            Row(3, "C_m (F)", cm, 10e-15, "factor 1.5", 1 / 1.5 <= cm / 10e-15 <= 1.5, "10 fF")]


def check_mode_ratio() -> list[Row]:
    g = MembraneGeometry(110e-6, 140e-6, 90e-9, 1e9, 3100.0, 0.0, 0.0, Rectangle(55e-6, 70e-6, 90e-6, 120e-6))
    r = plate_mode_frequency(g, 1, 2) / plate_mode_frequency(g, 1, 1)
    target = 3.75 / 2.54
    return [Row(4, "mode (1,2)/(1,1) frequency ratio", r, target, "2 %", _rel(r, target, 0.02), "3.75/2.54 MHz")]


def check_participation() -> list[Row]:
    p = participation_ratio(7.04e9, 6.21e9)
    return [Row(5, "participation ratio", p, 0.22, "+/- 0.01", abs(p - 0.22) <= 0.01, "0.22")]


def check_cold_damping() -> list[Row]:
    rows = []
    for g, c, target in ((89.0, 0.28, 114.0), (16.0, 0.5, 24.0)):
        v = cold_damped_linewidth(g, c)
        rows.append(Row(6, f"cold-damped linewidth from {g:g} Hz, C={c:g} (Hz)", v, target, "1 %",
                        _rel(v, target, 0.01), f"{target:g} Hz"))
    return rows


def _snr_fit(name: str):
    cfg = config.load(name)
    ds = synthesize(cfg, "snr_vs_V", SEED)
    rep = fit_snr_vs_V(ds, cfg.transducer, cfg.rbw_hz)
    return rep, sensitivity_report(rep, cfg.transducer)


def check_table(cache: dict) -> list[Row]:
    e = CODATA.elementary_charge
    rows = []
    for sv, target in ((0.9e-9, 87.0), (7.8e-9, 760.0)):
        q = 15e-15 * sv / e * 1e6
        rows.append(Row(7, f"{sv * 1e9:g} nV/rtHz to charge with 15 fF (ue/rtHz)", q, target, "5 %",
                        _rel(q, target, 0.05), f"{target:g} ue/rtHz"))
    for name, target in (("mode11", 96.0), ("mode12", 78.0)):
        rep, table = cache.setdefault(name, _snr_fit(name))
        rows.append(Row(7, f"{name} max SNR (dB)", table["max_snr_db"], target, "+/- 1 dB",
                        abs(table["max_snr_db"] - target) <= 1.0, f"{target:g} dB"))
    return rows


def check_noise_extraction(cache: dict) -> list[Row]:
    rep, _ = cache.setdefault("mode12", _snr_fit("mode12"))
    asd = rep["rf_noise_asd_v_per_rthz"]
    drive = rep["rf_drive_power_dbm"].value
    return [Row(8, "mode12 electrical noise (V/rtHz)", asd.value, 7.8e-9, "15 %",
                asd.is_estimate and _rel(asd.value, 7.8e-9, 0.15), "7.8 nV/rtHz"),
            Row(8, "mode12 drive power (dBm)", drive, -70.0, "+/- 0.5 dB", abs(drive + 70.0) <= 0.5, "-70 dBm")]


def check_slopes() -> list[Row]:
    rows = []
    for name, target in (("mode11", 3.57e-10), ("mode12", 9.8e-11)):
        cfg = config.load(name)
        dev = cfg.transducer
        rep = fit_area_vs_T(synthesize(cfg, "area_vs_T", SEED), dev.with_op(bias_voltage=dev.op.charge_offset_voltage))
        s = rep["slope_v2_per_k"].value
        rows.append(Row(9, f"{name} thermalization slope (V^2/K)", s, target, "10 %", _rel(s, target, 0.10),
                        f"{target:g} V^2/K"))
    return rows


def check_antispring() -> list[Row]:
    rows = []
    for name in ("mode11", "mode12"):
        cfg = config.load(name)
        dev = cfg.transducer
        rep = fit_antispring(synthesize(cfg, "antispring", SEED), dev)
        gap = rep["gap_m"].value
        f0 = rep["frequency_hz"].value
        f_true = dev.mode.omega_m0 / TWO_PI
        rows.append(Row(11, f"{name} gap (m)", gap, 1.5e-6, "5 %", _rel(gap, 1.5e-6, 0.05), "1.5 um"))
        rows.append(Row(11, f"{name} zero-bias frequency (Hz)", f0, f_true, "0.1 %", _rel(f0, f_true, 1e-3),
                        f"{f_true / 1e6:g} MHz"))
    return rows


def check_projection_report() -> list[Row]:
    rep = reproduce_projection()
    return [Row(1 if r["name"] == "total_gain_db" else 2, f"design projection: {r['name']}", r["computed"],
                r["target"], r["tolerance"], r["passed"], "") for r in rep["rows"]]


def run_all() -> list[Row]:
    cache: dict = {}
    rows = []
    rows += check_gain()
    rows += check_sensitivity()
    rows += check_projection_report()
    rows += check_capacitance()
    rows += check_mode_ratio()
    rows += check_participation()
    rows += check_cold_damping()
    rows += check_table(cache)
    rows += check_noise_extraction(cache)
    rows += check_slopes()
    rows += check_antispring()
    return rows


def as_dicts(rows: list[Row]) -> list[dict]:
    return [asdict(r) for r in rows]
