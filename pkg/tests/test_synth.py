"""Synthetic data generators: statistics, determinism and embedded truth."""

import copy
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from emx import DomainError, config, io
from emx.model import sideband_components, snr, tone_psd
from emx.synth import (
    COLUMNS,
    SyntheticDataset,
    TraceSpec,
    gen_antispring_series,
    gen_area_series,
    gen_ringdown,
    gen_snr_series,
    gen_spectrum,
)
from emx.units import TWO_PI, rad_to_hz
from emx.workflows import synthesize


def _trace(dev, points=2001, n=100, seed=0, span_lw=40.0, rbw=1.0):
    return TraceSpec.centered(rad_to_hz(dev.omega_m), span_lw * rad_to_hz(dev.gamma_em), points, rbw, n, seed)


def _truth_psd(dev, ds):
    return sideband_components(dev, TWO_PI * ds.x).total


def test_trace_spec_validation():
    with pytest.raises(DomainError):
        TraceSpec(np.array([1.0, 1.0, 2.0]), 1.0, 1)
    with pytest.raises(DomainError):
        TraceSpec(np.array([1.0, 2.0]), 0.0, 1)
    with pytest.raises(DomainError):
        TraceSpec(np.array([1.0, 2.0]), 1.0, 0)
    with pytest.raises(DomainError):
        TraceSpec(np.array([1.0, 2.0]), 1.0, 2.5)


def test_dataset_rejects_wrong_columns():
    with pytest.raises(DomainError):
        SyntheticDataset("spectrum", {"x": [1.0], "y": [1.0], "sigma": [1.0]}, {})
    with pytest.raises(DomainError):
        SyntheticDataset("nonsense", {}, {})


@pytest.mark.parametrize("kind", COLUMNS)
def test_same_seed_same_bytes(mode12, kind, tmp_path):
    a, _ = io.write_dataset(synthesize(mode12, kind, 7), tmp_path / "a.csv")
    b, _ = io.write_dataset(synthesize(mode12, kind, 7), tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()
    assert io.sidecar_path(a).read_bytes() == io.sidecar_path(b).read_bytes()


@settings(max_examples=20)
@given(st.integers(0, 2**63 - 1))
def test_spectrum_determinism_any_seed(dev12, seed):
    a = gen_spectrum(dev12, _trace(dev12, points=64, seed=seed))
    b = gen_spectrum(dev12, _trace(dev12, points=64, seed=seed))
    assert np.array_equal(a.y, b.y)


def test_different_seeds_differ(dev12):
    a = gen_spectrum(dev12, _trace(dev12, seed=1))
    b = gen_spectrum(dev12, _trace(dev12, seed=2))
    assert not np.array_equal(a.y, b.y)


def test_gamma_multipliers_pass_ks(dev12):
    n = 10
    ds = gen_spectrum(dev12, _trace(dev12, points=100_000, n=n, seed=3), include_tone=False)
    mult = ds.y / _truth_psd(dev12, ds)
    p = stats.kstest(mult, stats.gamma(a=n, scale=1.0 / n).cdf).pvalue
    assert p > 0.01


def test_large_average_converges_to_model(dev12):
    ds = gen_spectrum(dev12, _trace(dev12, points=4001, n=10_000, seed=4), include_tone=False)
    truth = _truth_psd(dev12, ds)
    assert np.mean(ds.y / truth) == pytest.approx(1.0, abs=0.03)
    assert np.max(np.abs(ds.y / truth - 1.0)) < 0.06


def test_sigma_is_model_over_sqrt_n(dev12):
    ds = gen_spectrum(dev12, _trace(dev12, n=25))
    assert np.allclose(ds.sigma, _truth_psd(dev12, ds) / 5.0, rtol=1e-14)


def test_noise_free_device_gives_flat_floor(dev12):
    quiet = dev12.with_op(temperature=0.0, rf_noise_psd=0.0, rf_drive_psd=0.0, pump_power=0.0)
    ds = gen_spectrum(quiet, _trace(quiet, n=400, seed=5))
    assert np.allclose(_truth_psd(quiet, ds), quiet.op.detector_psd, rtol=1e-12)
    assert np.mean(ds.y) == pytest.approx(quiet.op.detector_psd, rel=0.01)
    assert ds.metadata["tone_bin"] is None


def test_tone_is_a_single_bin_spike(dev12):
    spec = _trace(dev12, seed=6)
    with_tone = gen_spectrum(dev12, spec)
    without = gen_spectrum(dev12, spec, include_tone=False)
    diff = with_tone.y - without.y
    k = with_tone.metadata["tone_bin"]
    assert k == int(np.argmin(np.abs(with_tone.x - rad_to_hz(dev12.op.rf_frequency))))
    assert diff[k] == pytest.approx(tone_psd(dev12), rel=1e-12)
    assert np.count_nonzero(diff) == 1


def test_tone_scales_inversely_with_rbw():
    doc = config.bundled("mode12")
    doc2 = copy.deepcopy(doc)
    doc2["readout"]["rbw_hz"] = 2 * doc["readout"]["rbw_hz"]
    t1 = tone_psd(config.build(doc).transducer)
    t2 = tone_psd(config.build(doc2).transducer)
    assert t2 == pytest.approx(t1 / 2, rel=1e-12)


def test_ringdown_exact_without_noise(dev12):
    ds = gen_ringdown(dev12, 2e5, 8 / dev12.gamma_em, seed=0, initial_amplitude=2.0, noise_sigma=0.0)
    assert np.array_equal(ds.y, 2.0 * np.exp(-0.5 * dev12.gamma_em * ds.x))
    assert ds.true_params["linewidth_hz"] == pytest.approx(rad_to_hz(dev12.gamma_em), rel=1e-15)


def test_ringdown_energy_decays_at_linewidth(dev12):
    ds = gen_ringdown(dev12, 2e5, 8 / dev12.gamma_em)
    energy = ds.y**2
    rate = -np.polyfit(ds.x, np.log(energy), 1)[0]
    assert rate == pytest.approx(dev12.gamma_em, rel=1e-10)


def test_short_ringdown_warns(dev12):
    with pytest.warns(UserWarning):
        gen_ringdown(dev12, 1e5, 1 / dev12.gamma_em)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        gen_ringdown(dev12, 1e5, 4 / dev12.gamma_em)


def test_area_bias_sweep_symmetric_about_offset(dev12):
    v0 = dev12.op.charge_offset_voltage
    u = np.array([5.0, 20.0, 40.0])
    ds = gen_area_series(dev12, biases=np.concatenate([v0 - u, v0 + u]))
    assert np.allclose(ds.y[:3], ds.y[3:], rtol=1e-12)


def test_area_bias_minimum_at_offset(dev12):
    v0 = dev12.op.charge_offset_voltage
    grid = np.linspace(-10, 10, 401)
    ds = gen_area_series(dev12, biases=grid)
    step = grid[1] - grid[0]
    assert abs(grid[int(np.argmin(ds.y))] - v0) <= step


def test_area_temperature_sweep_is_linear(dev11):
    at_v0 = dev11.with_op(bias_voltage=dev11.op.charge_offset_voltage)
    temps = np.array([0.01, 0.1, 0.2, 0.3, 0.4, 0.5])
    ds = gen_area_series(at_v0, temperatures=temps)
    slope, intercept = np.polyfit(temps, ds.y, 1)
    assert slope == pytest.approx(ds.true_params["slope_v2_per_k"], rel=1e-9)
    assert intercept == pytest.approx(ds.true_params["intercept_v2"], rel=1e-6, abs=1e-9 * slope)


def test_area_noise_is_multiplicative(dev12):
    clean = gen_area_series(dev12, biases=[-30.0, 10.0, 30.0])
    noisy = gen_area_series(dev12, biases=[-30.0, 10.0, 30.0], seed=3, relative_sigma=0.05)
    assert np.allclose(noisy.sigma, 0.05 * clean.y, rtol=1e-14)


def test_multi_temperature_area_layout(dev12):
    ds = gen_area_series(dev12, temperatures=[0.01, 0.5], biases=[-10.0, 0.0, 10.0])
    assert list(ds.columns["temperature_k"]) == [0.01] * 3 + [0.5] * 3
    assert list(ds.x) == [-10.0, 0.0, 10.0] * 2


@pytest.mark.parametrize("fn", [lambda d: gen_area_series(d), lambda d: gen_area_series(d, biases=[]),
                                lambda d: gen_snr_series(d, []), lambda d: gen_antispring_series(d, [])])
def test_empty_sweeps_rejected(dev12, fn):
    with pytest.raises(DomainError):
        fn(dev12)


def test_snr_plateau_reached_only_for_mode12(mode11, mode12):
    for cfg, plateau in ((mode11, False), (mode12, True)):
        dev = cfg.transducer
        bound = math.sqrt(dev.op.rf_drive_psd / dev.op.rf_noise_psd)
        ds = synthesize(cfg, "snr_vs_V", 0)
        top = float(np.max(ds.y))
        assert (top > 0.9 * bound) is plateau
        assert (top < 0.5 * bound) is not plateau


def test_snr_small_bias_slope_tracks_dcdx(dev12):
    v0 = dev12.op.charge_offset_voltage
    ds = gen_snr_series(dev12, [v0 + 1e-3, v0 + 2e-3])
    d = dev12.with_op(bias_voltage=v0 + 1e-3)
    assert ds.y[1] / ds.y[0] == pytest.approx(2.0, rel=1e-3)
    assert ds.y[0] == pytest.approx(snr(d), rel=1e-14)


def test_antispring_series_is_noise_free_model(dev12):
    ds = gen_antispring_series(dev12, [-20.0, 0.0, 20.0], sigma_hz=0.0)
    for v, f in zip(ds.x, ds.y):
        assert f == rad_to_hz(dev12.with_op(bias_voltage=v).omega_m)


@pytest.mark.parametrize("kind", COLUMNS)
def test_true_params_round_trip(mode12, kind, tmp_path):
    ds = synthesize(mode12, kind, 11)
    back = io.read_dataset(io.write_dataset(ds, tmp_path / f"{kind}.csv")[0])
    assert back.true_params == io._jsonable(ds.true_params)
    rebuilt = config.build(back.true_params["device"]).transducer
    dev = mode12.transducer
    if kind == "area_vs_T":
        # thermalization sweeps are taken at the charge offset
        dev = dev.with_op(bias_voltage=dev.op.charge_offset_voltage)
    for attr in ("omega_m", "gamma_m", "gamma_em", "photon_number", "omega_c", "dcdx"):
        assert getattr(rebuilt, attr) == pytest.approx(getattr(dev, attr), rel=1e-12)
    assert rebuilt.op.rf_drive_psd == pytest.approx(dev.op.rf_drive_psd, rel=1e-12)
    assert rebuilt.op.rf_frequency == pytest.approx(dev.op.rf_frequency, rel=1e-15)
