"""Unit conversions used at the I/O boundary.

Everything inside the model works in SI with angular frequencies in rad/s.
Files and the command line speak Hz, dBm, volts and kelvin.
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def hz_to_rad(f):
    return _scalar_or_array(TWO_PI * np.asarray(f, dtype=float))


def rad_to_hz(w):
    return _scalar_or_array(np.asarray(w, dtype=float) / TWO_PI)


def dbm_to_watt(p_dbm):
    return _scalar_or_array(1e-3 * 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0))


def watt_to_dbm(p_w):
    return _scalar_or_array(10.0 * np.log10(np.asarray(p_w, dtype=float) / 1e-3))


def amplitude_to_db(x):
    return _scalar_or_array(20.0 * np.log10(np.asarray(x, dtype=float)))


def db_to_amplitude(x_db):
    return _scalar_or_array(10.0 ** (np.asarray(x_db, dtype=float) / 20.0))


def tone_power_to_psd(p_w: float, impedance: float, rbw_hz: float) -> float:
    """Voltage PSD (V^2/Hz) of a coherent tone of power ``p_w`` landing in one RBW bin."""
    return p_w * impedance / rbw_hz


def psd_to_tone_power(psd: float, impedance: float, rbw_hz: float) -> float:
    return psd * rbw_hz / impedance
