"""Seeded synthetic measurements drawn from the transducer model.

Every generator is a pure function of its inputs and a seed. Each returned
dataset stores the full device record used to produce it, so a fit can be
scored blind against the truth.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from emx.config import to_document
from emx.errors import DomainError
from emx.model import Transducer, sideband_components, snr, tone_psd
from emx.model.transduction import sideband_area
from emx.units import TWO_PI, rad_to_hz

# Column contract per dataset kind. The last two columns are always the
# reading and its one-sigma uncertainty.
COLUMNS: dict[str, tuple[str, ...]] = {
    "spectrum": ("frequency_hz", "psd_v2_per_hz", "sigma"),
    "ringdown": ("time_s", "amplitude", "sigma"),
    "area_vs_T": ("temperature_k", "area_v2", "sigma"),
    "area_vs_V": ("bias_v", "temperature_k", "area_v2", "sigma"),
    "snr_vs_V": ("bias_v", "snr", "sigma"),
    "antispring": ("bias_v", "frequency_hz", "sigma"),
}
KINDS = tuple(COLUMNS)


@dataclass(frozen=True)
class TraceSpec:
    """Frequency grid and averaging of a spectrum-analyser trace."""

    frequency_grid: np.ndarray
    rbw: float
    n_averages: int
    seed: int = 0

    def __post_init__(self):
        grid = np.asarray(self.frequency_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or not np.all(np.isfinite(grid)):
            raise DomainError("TraceSpec", "frequency grid must be a finite 1-D array of >= 2 points")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("TraceSpec", "frequency grid must be strictly increasing")
        if not self.rbw > 0:
            raise DomainError("TraceSpec", "rbw must be > 0")
        if int(self.n_averages) != self.n_averages or self.n_averages < 1:
            raise DomainError("TraceSpec", "n_averages must be a positive integer")
        object.__setattr__(self, "frequency_grid", grid)

    @classmethod
    def centered(cls, center_hz: float, span_hz: float, points: int, rbw: float = 1.0,
                 n_averages: int = 1, seed: int = 0) -> TraceSpec:
        grid = np.linspace(center_hz - span_hz / 2, center_hz + span_hz / 2, points)
        return cls(grid, rbw, n_averages, seed)


@dataclass
class SyntheticDataset:
    kind: str
    columns: dict[str, np.ndarray]
    true_params: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in COLUMNS:
            raise DomainError("SyntheticDataset", f"unknown kind {self.kind!r}")
        if tuple(self.columns) != COLUMNS[self.kind]:
            raise DomainError("SyntheticDataset", f"columns must be {COLUMNS[self.kind]}")
        self.columns = {k: np.asarray(v, dtype=float) for k, v in self.columns.items()}
        lengths = {v.shape for v in self.columns.values()}
        if len(lengths) != 1:
            raise DomainError("SyntheticDataset", "columns must share one length")

    @property
    def x(self) -> np.ndarray:
        return self.columns[COLUMNS[self.kind][0]]

    @property
    def y(self) -> np.ndarray:
        return self.columns[COLUMNS[self.kind][-2]]

    @property
    def sigma(self) -> np.ndarray:
        return self.columns[COLUMNS[self.kind][-1]]

    def __len__(self) -> int:
        return self.x.size


def _truth(dev: Transducer, rbw: float = 1.0, **extra) -> dict:
    return {"device": to_document(dev, rbw), **extra}


def gen_spectrum(dev: Transducer, trace: TraceSpec, include_tone: bool = True) -> SyntheticDataset:
    """Averaged sideband PSD with periodogram statistics.

    Each bin is the model noise PSD times a Gamma(n, 1/n) multiplier, the
    exact law of an n-fold average of exponential periodogram bins. The
    coherent drive lands in the single bin nearest ``rf_frequency`` and is
    not scattered by the multiplier.
    """
    rng = np.random.default_rng(trace.seed)
    f = trace.frequency_grid
    truth_psd = sideband_components(dev, TWO_PI * f).total
    n = int(trace.n_averages)
    psd = truth_psd * rng.gamma(shape=n, scale=1.0 / n, size=f.size)
    tone_bin = None
    tone = tone_psd(dev) if include_tone else 0.0
    f_rf = rad_to_hz(dev.op.rf_frequency)
    if tone > 0 and f[0] <= f_rf <= f[-1]:
        tone_bin = int(np.argmin(np.abs(f - f_rf)))
        psd[tone_bin] += tone
    sigma = truth_psd / math.sqrt(n)
    peak = float(sideband_components(dev, [dev.omega_m]).total[0])
    truth = _truth(dev, trace.rbw,
                   center_hz=rad_to_hz(dev.omega_m), fwhm_hz=rad_to_hz(dev.gamma_em),
                   floor_v2_per_hz=dev.op.detector_psd, peak_v2_per_hz=peak,
                   tone_v2_per_hz=tone)
    meta = {"rbw_hz": trace.rbw, "n_averages": n, "seed": trace.seed, "tone_bin": tone_bin,
            "sideband_resolution": dev.sideband_resolution}
    return SyntheticDataset("spectrum", {"frequency_hz": f, "psd_v2_per_hz": psd, "sigma": sigma}, truth, meta)


def gen_ringdown(dev: Transducer, sample_rate: float, duration: float, seed: int = 0,
                 initial_amplitude: float = 1.0, noise_sigma: float = 0.0) -> SyntheticDataset:
    """Free decay of the amplitude after the drive is switched off.

    The amplitude decays at half the linewidth, so the energy decays at the
    full linewidth ``Gamma_em``. Noise is additive Gaussian on the amplitude.
    """
    if not (sample_rate > 0 and duration > 0):
        raise DomainError("gen_ringdown", "sample rate and duration must be > 0")
    gamma = dev.gamma_em
    if duration * gamma < 3:
        warnings.warn("ringdown shorter than three energy decay times", stacklevel=2)
    rng = np.random.default_rng(seed)
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    clean = initial_amplitude * np.exp(-0.5 * gamma * t)
    y = clean + noise_sigma * rng.standard_normal(t.size)
    sigma = np.full_like(t, noise_sigma)
    truth = _truth(dev, linewidth_hz=rad_to_hz(gamma), initial_amplitude=initial_amplitude)
    meta = {"seed": seed, "sample_rate_hz": sample_rate}
    return SyntheticDataset("ringdown", {"time_s": t, "amplitude": y, "sigma": sigma}, truth, meta)


def _area(dev: Transducer) -> float:
    return sideband_area(dev).total


def gen_area_series(dev: Transducer, temperatures=None, biases=None, seed: int = 0,
                    relative_sigma: float = 0.0) -> SyntheticDataset:
    """Sideband areas versus temperature, or versus bias at one or more temperatures.

    Pass ``temperatures`` alone for a thermalization sweep at the device bias.
    Pass ``biases`` (optionally with ``temperatures``) for bias sweeps. The
    noise is multiplicative Gaussian with the given relative sigma.
    """
    rng = np.random.default_rng(seed)
    if biases is None:
        if temperatures is None or len(temperatures) == 0:
            raise DomainError("gen_area_series", "sweep must be non-empty")
        t = np.asarray(temperatures, dtype=float)
        clean = np.array([_area(dev.with_op(temperature=float(x))) for x in t])
        y = clean * (1.0 + relative_sigma * rng.standard_normal(t.size))
        slope = _area(dev.with_op(temperature=1.0)) - _area(dev.with_op(temperature=0.0))
        truth = _truth(dev, slope_v2_per_k=slope, intercept_v2=_area(dev.with_op(temperature=0.0)))
        cols = {"temperature_k": t, "area_v2": y, "sigma": relative_sigma * clean}
        return SyntheticDataset("area_vs_T", cols, truth, {"seed": seed, "relative_sigma": relative_sigma})
    if len(biases) == 0:
        raise DomainError("gen_area_series", "sweep must be non-empty")
    temps = [dev.op.temperature] if temperatures is None else list(temperatures)
    v = np.tile(np.asarray(biases, dtype=float), len(temps))
    t = np.repeat(np.asarray(temps, dtype=float), len(biases))
    clean = np.array([_area(dev.with_op(bias_voltage=float(a), temperature=float(b))) for a, b in zip(v, t)])
    y = clean * (1.0 + relative_sigma * rng.standard_normal(v.size))
    truth = _truth(dev, rf_noise_psd_v2_per_hz=dev.op.rf_noise_psd,
                   charge_offset_v=dev.op.charge_offset_voltage)
    cols = {"bias_v": v, "temperature_k": t, "area_v2": y, "sigma": relative_sigma * clean}
    return SyntheticDataset("area_vs_V", cols, truth, {"seed": seed, "relative_sigma": relative_sigma})


def gen_snr_series(dev: Transducer, biases, seed: int = 0, relative_sigma: float = 0.0,
                   rbw: float = 1.0) -> SyntheticDataset:
    """On-resonance amplitude SNR of the rf tone versus bias, multiplicative noise.

    ``rbw`` only enters the recorded device, where it converts the drive PSD
    back to a tone power.
    """
    if len(biases) == 0:
        raise DomainError("gen_snr_series", "bias list must be non-empty")
    rng = np.random.default_rng(seed)
    v = np.asarray(biases, dtype=float)
    clean = np.array([snr(dev.with_op(bias_voltage=float(b))) for b in v])
    y = clean * (1.0 + relative_sigma * rng.standard_normal(v.size))
    truth = _truth(dev, rbw, rf_drive_psd_v2_per_hz=dev.op.rf_drive_psd, rf_noise_psd_v2_per_hz=dev.op.rf_noise_psd)
    cols = {"bias_v": v, "snr": y, "sigma": relative_sigma * clean}
    return SyntheticDataset("snr_vs_V", cols, truth, {"seed": seed, "relative_sigma": relative_sigma, "rbw_hz": rbw})


def gen_antispring_series(dev: Transducer, biases, seed: int = 0, sigma_hz: float = 0.0) -> SyntheticDataset:
    """Mode frequency versus bias with additive Gaussian read-out noise."""
    if len(biases) == 0:
        raise DomainError("gen_antispring_series", "bias list must be non-empty")
    rng = np.random.default_rng(seed)
    v = np.asarray(biases, dtype=float)
    clean = np.array([rad_to_hz(dev.with_op(bias_voltage=float(b)).omega_m) for b in v])
    y = clean + sigma_hz * rng.standard_normal(v.size)
    truth = _truth(dev, gap_m=dev.stack.gap, frequency_hz=rad_to_hz(dev.mode.omega_m0),
                   charge_offset_v=dev.op.charge_offset_voltage)
    cols = {"bias_v": v, "frequency_hz": y, "sigma": np.full_like(v, sigma_hz)}
    return SyntheticDataset("antispring", cols, truth, {"seed": seed})
