"""Config-driven dataset generation and fitting, shared by the CLI and the reproduction suite."""

from __future__ import annotations

import math

import numpy as np

from emx.config import Config
from emx.errors import ConfigError
from emx.estimate import (
    FitOptions,
    detector_noise_from_floor,
    fit_antispring,
    fit_area_vs_T,
    fit_area_vs_V,
    fit_lorentzian,
    fit_ringdown,
    fit_snr_vs_V,
    sensitivity_report,
)
from emx.synth import (
    SyntheticDataset,
    TraceSpec,
    gen_antispring_series,
    gen_area_series,
    gen_ringdown,
    gen_snr_series,
    gen_spectrum,
)
from emx.units import rad_to_hz

RECIPE_KIND = {
    "lorentzian": "spectrum",
    "detector_noise": "spectrum",
    "ringdown": "ringdown",
    "antispring": "antispring",
    "area_vs_T": "area_vs_T",
    "area_vs_V": "area_vs_V",
    "snr_vs_V": "snr_vs_V",
}
DEFAULT_BIASES = [-49.0, -40.0, -30.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0, 49.0]


def _device(cfg: Config):
    if cfg.transducer is None:
        raise ConfigError("mode", "this command needs mode, capacitors and cavity sections")
    return cfg.transducer


def synthesize(cfg: Config, kind: str, seed: int = 0) -> SyntheticDataset:
    """Generate one dataset of ``kind`` from the config's device and synth section."""
    dev = _device(cfg)
    s = cfg.synth.get(kind, {})
    if kind == "spectrum":
        center = s.get("center_hz", rad_to_hz(dev.omega_m))
        span = s.get("span_hz", s.get("span_linewidths", 200.0) * rad_to_hz(dev.gamma_em))
        trace = TraceSpec.centered(center, span, s.get("points", 4001), cfg.rbw_hz, s.get("n_averages", 100), seed)
        return gen_spectrum(dev, trace)
    if kind == "ringdown":
        gamma = dev.gamma_em
        duration = s.get("duration_s", 8.0 / gamma)
        rate = s.get("sample_rate_hz", 250.0 / duration)
        return gen_ringdown(dev, rate, duration, seed, s.get("initial_amplitude", 1.0), s.get("noise_sigma", 0.01))
    if kind == "area_vs_T":
        temps = s.get("temperatures_k", [0.01, 0.1, 0.2, 0.3, 0.4, 0.5])
        at_v0 = dev.with_op(bias_voltage=dev.op.charge_offset_voltage)
        return gen_area_series(at_v0, temperatures=temps, seed=seed, relative_sigma=s.get("relative_sigma", 0.03))
    if kind == "area_vs_V":
        return gen_area_series(dev, temperatures=s.get("temperatures_k"), biases=s.get("bias_v", DEFAULT_BIASES),
                               seed=seed, relative_sigma=s.get("relative_sigma", 0.03))
    if kind == "snr_vs_V":
        biases = s.get("bias_v", [1, 2, 3, 5, 7, 10, 15, 20, 25, 30, 35, 40, 45, 49])
        return gen_snr_series(dev, biases, seed, s.get("relative_sigma", 0.03), cfg.rbw_hz)
    if kind == "antispring":
        return gen_antispring_series(dev, s.get("bias_v", DEFAULT_BIASES), seed, s.get("sigma_hz", 1.0))
    raise ConfigError("kind", f"unknown dataset kind {kind!r}")


def _options(cfg: Config | None) -> FitOptions:
    f = cfg.fit if cfg is not None else {}
    return FitOptions(max_iterations=f.get("max_iterations", 200), ftol=f.get("ftol", 1e-10),
                      xtol=f.get("xtol", 1e-10))


def fit(cfg: Config | None, ds: SyntheticDataset, recipe: str) -> dict:
    """Run ``recipe`` on ``ds`` and return a JSON-ready report."""
    if recipe not in RECIPE_KIND:
        raise ConfigError("recipe", f"unknown recipe {recipe!r} (valid: {', '.join(RECIPE_KIND)})")
    if RECIPE_KIND[recipe] != ds.kind:
        raise ConfigError("recipe", f"recipe {recipe} needs a {RECIPE_KIND[recipe]} dataset, got {ds.kind}")
    opts = _options(cfg)
    if recipe == "lorentzian":
        r = fit_lorentzian(ds, options=opts)
        return {"recipe": recipe, "converged": r.converged, "fit": r.to_dict()}
    if recipe == "ringdown":
        r = fit_ringdown(ds, opts)
        return {"recipe": recipe, "converged": r.converged, "fit": r.to_dict()}
    if cfg is None:
        raise ConfigError("config", f"recipe {recipe} needs a device config")
    dev = _device(cfg)
    if recipe == "detector_noise":
        lor = fit_lorentzian(ds, options=opts)
        rep = detector_noise_from_floor(lor, dev)
    elif recipe == "antispring":
        rep = fit_antispring(ds, dev, opts)
    elif recipe == "area_vs_T":
        rep = fit_area_vs_T(ds, dev.with_op(bias_voltage=dev.op.charge_offset_voltage), opts)
    elif recipe == "area_vs_V":
        rep = fit_area_vs_V(ds, dev, options=opts)
    else:
        rep = fit_snr_vs_V(ds, dev, cfg.rbw_hz, opts)
        out = rep.to_dict()
        out["sensitivity"] = sensitivity_report(rep, dev)
        return out
    return rep.to_dict()


def predict(cfg: Config, points: int = 401) -> dict:
    """Model outputs at the configured operating point."""
    from emx.model import (
        electromechanical_gain,
        electrostatic_gain,
        force_noise_budget,
        min_sensitivity,
        sideband_area,
        sideband_spectrum,
        snr,
        total_gain,
        total_gain_resonant_for,
    )
    from emx.units import amplitude_to_db

    dev = _device(cfg)
    w = dev.omega_m
    budget = force_noise_budget(dev)
    sens = min_sensitivity(dev)
    sens_em = min_sensitivity(dev, cold_damped=True)
    span = 20 * dev.gamma_em
    grid = np.linspace(w - span / 2, w + span / 2, points)
    gtot = total_gain(dev, w, cold_damped=True)
    out = {
        "mode_frequency_hz": rad_to_hz(w),
        "linewidth_hz": rad_to_hz(dev.gamma_m),
        "total_linewidth_hz": rad_to_hz(dev.gamma_em),
        "cavity_frequency_hz": rad_to_hz(dev.omega_c),
        "c_eq_f": dev.c_eq,
        "dcdx_f_per_m": dev.dcdx,
        "d2cdx2_f_per_m2": dev.d2cdx2,
        "vacuum_coupling_hz": rad_to_hz(dev.vacuum_coupling),
        "photon_number": dev.photon_number,
        "cooperativity": dev.cooperativity,
        "sideband_resolution": dev.sideband_resolution,
        "electrostatic_gain_m_per_v": electrostatic_gain(dev, w, cold_damped=True),
        "electromechanical_gain_v_per_m": electromechanical_gain(dev, w),
        "total_gain_db": amplitude_to_db(gtot) if gtot > 0 else -math.inf,
        "total_gain_resonant_db": amplitude_to_db(total_gain_resonant_for(dev)) if dev.effective_bias else -math.inf,
        "noise_budget_n2_per_hz": {"thermal": budget.thermal, "electrical": budget.electrical,
                                   "backaction": budget.backaction, "detector": budget.detector_equivalent,
                                   "total": budget.total},
        "sideband_area_v2": sideband_area(dev).total,
        "min_sensitivity_v_per_rthz": sens.voltage,
        "charge_sensitivity_e_per_rthz": sens.charge,
        "min_sensitivity_cold_damped_v_per_rthz": sens_em.voltage,
        "spectrum": {"frequency_hz": rad_to_hz(grid), "psd_v2_per_hz": sideband_spectrum(dev, grid)},
    }
    if dev.op.rf_drive_psd > 0 and budget.total > 0:
        s = snr(dev)
        out["snr"] = s
        out["snr_db"] = amplitude_to_db(s) if s > 0 else -math.inf
    return out

