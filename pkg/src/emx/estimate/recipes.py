"""Extraction recipes turning measured series into device parameters.

Every recipe takes a :class:`~emx.synth.SyntheticDataset` (synthetic or read
from CSV) and, where the extraction needs the device model, a
:class:`~emx.model.Transducer` holding the known parameters.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from emx.errors import DomainError, FitRejectedError, RankDeficiencyError
from emx.estimate.lm import FitOptions, FitResult, least_squares
from emx.estimate.report import ExtractionReport, Quantity, delta_method
from emx.model import (
    CapacitorStack,
    Transducer,
    electromechanical_gain,
    equivalent_d2cdx2,
    force_noise_budget,
    min_sensitivity,
)
from emx.model.transduction import backaction_force_psd, susceptibility, thermal_force_psd
from emx.synth import SyntheticDataset
from emx.units import TWO_PI, amplitude_to_db, psd_to_tone_power, rad_to_hz, watt_to_dbm


def _require(ds: SyntheticDataset, kind: str, recipe: str) -> None:
    if ds.kind != kind:
        raise DomainError(recipe, f"expects a {kind} dataset, got {ds.kind}")


def _sigma_or_none(sigma: np.ndarray):
    return sigma if np.all(sigma > 0) and np.all(np.isfinite(sigma)) else None


def _smooth(y: np.ndarray, width: int) -> np.ndarray:
    if width <= 1:
        return y
    kernel = np.ones(width) / width
    pad = width // 2
    return np.convolve(np.pad(y, pad, mode="edge"), kernel, mode="valid")[: y.size]


def lorentzian(f, center, fwhm, area, floor):
    """Peak of integrated area ``area`` (PSD x Hz) on a flat floor."""
    w = abs(fwhm)
    return floor + (2.0 * area / (math.pi * w)) / (1.0 + (2.0 * (np.asarray(f) - center) / w) ** 2)


def fit_lorentzian(ds: SyntheticDataset, n_averages: int | None = None, reweight: int = 3,
                   options: FitOptions | None = None) -> FitResult:
    """Fit ``floor + h / (1 + (2 (f - c) / w)^2)`` to a PSD trace.

    Reported parameters are ``center_hz``, ``fwhm_hz``, ``area`` and
    ``floor``; the height is ``2 area / (pi fwhm)``. Bins are weighted by the
    periodogram variance ``(model / sqrt(n))^2``, refreshed ``reweight``
    times from the current model. The coherent-tone bin is excluded.

    Initial guess: centre at the maximum of a 5-bin moving average, floor at
    the median, width from the half-height crossings.
    """
    _require(ds, "spectrum", "fit_lorentzian")
    f, y = ds.x, ds.y
    keep = np.ones(f.size, bool)
    tone_bin = ds.metadata.get("tone_bin")
    if tone_bin is not None:
        keep[int(tone_bin)] = False
    f, y, sig = f[keep], y[keep], ds.sigma[keep]
    n = n_averages or ds.metadata.get("n_averages")
    sm = _smooth(y, 5)
    if n:
        rel = 1.0 / math.sqrt(n)
    else:
        good = (sig > 0) & (sm > 0)
        rel = float(np.median(sig[good] / sm[good])) if np.any(good) else 0.1
    df = float(np.median(np.diff(f)))
    i0 = int(np.argmax(sm))
    floor0 = float(np.median(y))
    h0 = max(float(sm[i0]) - floor0, rel * abs(floor0), 1e-300)
    above = sm > floor0 + h0 / 2
    lo = i0
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = i0
    while hi < f.size - 1 and above[hi + 1]:
        hi += 1
    w0 = max((hi - lo + 1) * df, 2 * df)
    c0 = float(f[i0])
    p0 = [0.0, w0, 0.5 * math.pi * h0 * w0, floor0]
    scale = [w0, w0, abs(p0[2]), max(abs(floor0), h0)]

    def model(x, p):
        return lorentzian(x, c0 + p[0], p[1], p[2], p[3])

    names = ["center_hz", "fwhm_hz", "area", "floor"]
    flags: list[str] = []
    sigma = np.maximum(np.abs(sm), 1e-300) * rel
    res = None
    p = np.array(p0)
    try:
        for _ in range(max(1, reweight)):
            res = least_squares(model, p, f, y, sigma, names, options, x_scale=scale)
            p = res.values
            sigma = np.maximum(np.abs(model(f, p)), 1e-300) * rel
    except RankDeficiencyError:
        flags += ["low_significance", "rank_deficient"]
        cov = np.full((4, 4), math.inf)
        vals = np.array([c0 + p[0], abs(p[1]), p[2], p[3]])
        return FitResult(names, vals, cov, math.nan, 0, False, "degenerate peak", f.size - 4, flags)

    vals = res.values.copy()
    vals[0] += c0
    vals[1] = abs(vals[1])
    res.values = vals
    height, sh = delta_method(lambda q: 2 * q[2] / (math.pi * abs(q[1])), vals, res.covariance)
    if not height > 3 * sh:
        flags.append("low_significance")
    if f[-1] - f[0] < 5 * vals[1]:
        flags.append("narrow_span")
    res.flags = flags
    return res


def lorentzian_height(fit: FitResult) -> tuple[float, float]:
    return delta_method(lambda q: 2 * q[2] / (math.pi * abs(q[1])), fit.values, fit.covariance)


def fit_ringdown(ds: SyntheticDataset, options: FitOptions | None = None) -> FitResult:
    """Exponential amplitude decay ``a0 exp(-pi w t)``.

    The fitted ``linewidth_hz`` is the energy decay rate over 2 pi, i.e. the
    amplitude decays at half of it. Initialised by a log-linear regression
    on the points well above the noise.
    """
    _require(ds, "ringdown", "fit_ringdown")
    t, y = ds.x, ds.y
    if t.size < 10:
        raise DomainError("fit_ringdown", "needs at least 10 samples")
    sigma = _sigma_or_none(ds.sigma)
    floor = 3 * float(np.max(ds.sigma)) if sigma is not None else 0.0
    use = y > max(floor, 1e-300)
    if use.sum() < 2:
        use = np.abs(y) > 0
    slope, intercept = np.polyfit(t[use], np.log(np.abs(y[use])), 1)
    a0 = math.exp(intercept)
    lw0 = -slope / math.pi
    if lw0 == 0:
        lw0 = 1.0 / (math.pi * max(t[-1] - t[0], 1e-300))

    def model(x, p):
        return p[0] * np.exp(-math.pi * p[1] * x)

    res = least_squares(model, [a0, lw0], t, y, sigma, ["amplitude", "linewidth_hz"], options)
    if res.value("linewidth_hz") <= 0:
        res.flags.append("not_decaying")
    return res


def _gap_for_curvature(d2c: float, stack: CapacitorStack, constants) -> float:
    def excess(d):
        return equivalent_d2cdx2(CapacitorStack(d, stack.membrane_cap_area, stack.stray_cap,
                                                stack.bias_cap, stack.bias_resistance),
                                 0.0, constants) - d2c

    lo, hi = 1e-10, 1e-2
    if excess(lo) < 0 or excess(hi) > 0:
        raise DomainError("fit_antispring", "curvature outside the range of the capacitor model")
    return brentq(excess, lo, hi, xtol=1e-18, rtol=1e-14)


def fit_antispring(ds: SyntheticDataset, dev: Transducer, options: FitOptions | None = None) -> ExtractionReport:
    """Mode frequency versus bias: ``f(V)^2 = f0^2 - a (V - V0)^2``.

    The curvature gives ``C_eq'' = 8 pi^2 m_eff a``, inverted for the gap
    with the parallel-plate model using the device's electrode area and
    bias capacitor as priors.
    """
    _require(ds, "antispring", "fit_antispring")
    v, f = ds.x, ds.y
    if v.size < 5:
        raise DomainError("fit_antispring", "needs at least 5 bias points")
    c2, c1, c0 = np.polyfit(v, f**2, 2)
    if c2 >= 0:
        raise DomainError("fit_antispring", "upward curvature: not an anti-spring dataset")
    a0 = -c2
    v00 = c1 / (2 * a0)
    f00 = math.sqrt(max(c0 + a0 * v00**2, float(np.max(f)) ** 2))
    if not (np.min(v) < v00 < np.max(v)):
        raise DomainError("fit_antispring", "bias points must straddle the vertex")

    def model(x, p):
        return np.sqrt(np.maximum(p[0] ** 2 - p[1] * (x - p[2]) ** 2, 0.0))

    span = float(np.ptp(v))
    res = least_squares(model, [f00, a0, v00], v, f, _sigma_or_none(ds.sigma),
                        ["frequency_hz", "curvature_hz2_per_v2", "charge_offset_v"], options,
                        x_scale=[f00, a0, span])
    f0, a, v0 = res.values
    flags = []
    if a <= 0:
        raise DomainError("fit_antispring", "upward curvature: not an anti-spring dataset")
    if res.values[2] - res.error("charge_offset_v") > np.max(v) or res.values[2] + res.error("charge_offset_v") < np.min(v):
        flags.append("vertex_outside_data")
    m = dev.mode.m_eff
    d2c, sd2c = delta_method(lambda q: 2 * m * TWO_PI**2 * q[1], res.values, res.covariance)
    gap, sgap = delta_method(lambda q: _gap_for_curvature(2 * m * TWO_PI**2 * q[1], dev.stack, dev.constants),
                             res.values, res.covariance)
    q = {
        "frequency_hz": Quantity(f0, res.error("frequency_hz"), "Hz", "fit_antispring"),
        "charge_offset_v": Quantity(v0, res.error("charge_offset_v"), "V", "fit_antispring"),
        "d2cdx2_f_per_m2": Quantity(d2c, sd2c, "F/m^2", "fit_antispring"),
        "gap_m": Quantity(gap, sgap, "m", "fit_antispring"),
    }
    return ExtractionReport("antispring", q, res, flags)


def _thermal_area_per_kelvin(dev: Transducer) -> float:
    """Displacement area per kelvin, ``k_B Gamma_m / (Gamma_em m Omega^2)``."""
    return dev.constants.boltzmann * dev.gamma_m / (dev.gamma_em * dev.mode.m_eff * dev.omega_m**2)


def fit_area_vs_T(ds: SyntheticDataset, dev: Transducer, options: FitOptions | None = None) -> ExtractionReport:
    """Straight line through area versus temperature.

    The chain gain (V^2/m^2) equates the slope to the thermal term of the
    area model at the device's bias and pump, which includes the
    ``Gamma_m / Gamma_em`` correction for cold damping.
    """
    _require(ds, "area_vs_T", "fit_area_vs_T")
    t, y = ds.x, ds.y
    if np.unique(t).size < 3:
        raise DomainError("fit_area_vs_T", "needs at least 3 temperatures")
    s0, b0 = np.polyfit(t, y, 1)
    span = float(np.ptp(y)) or float(np.max(np.abs(y))) or 1.0
    res = least_squares(lambda x, p: p[0] * x + p[1], [s0, b0], t, y, _sigma_or_none(ds.sigma),
                        ["slope_v2_per_k", "intercept_v2"], options,
                        x_scale=[span / float(np.ptp(t)), span])
    flags = []
    slope = res.value("slope_v2_per_k")
    if slope <= 0:
        flags.append("thermalization_failure")
    per_k = _thermal_area_per_kelvin(dev)
    q = {
        "slope_v2_per_k": Quantity(slope, res.error("slope_v2_per_k"), "V^2/K", "fit_area_vs_T"),
        "intercept_v2": Quantity(res.value("intercept_v2"), res.error("intercept_v2"), "V^2", "fit_area_vs_T"),
        "chain_gain_v2_per_m2": Quantity(slope / per_k, res.error("slope_v2_per_k") / per_k, "V^2/m^2",
                                         "fit_area_vs_T"),
    }
    return ExtractionReport("area_vs_T", q, res, flags)


def _area_terms(dev: Transducer, v: np.ndarray, t: np.ndarray, v0: float):
    # Per point: thermal area per unit chain gain, and electrical area per unit (chain gain x S^n).
    thermal = np.empty(v.size)
    electrical = np.empty(v.size)
    cache: dict[float, tuple[float, float]] = {}
    for i, (vi, ti) in enumerate(zip(v, t)):
        u = float(vi - v0)
        if u not in cache:
            d = dev.with_op(bias_voltage=u, charge_offset_voltage=0.0)
            pre = 1.0 / (d.mode.m_eff * d.omega_m**2)
            cache[u] = (pre * d.constants.boltzmann * d.gamma_m / d.gamma_em,
                        pre * d.dcdx**2 * u**2 / (d.mode.m_eff * d.gamma_em))
        k, e = cache[u]
        thermal[i] = k * ti
        electrical[i] = e
    return thermal, electrical


def _upper_or_estimate(value: float, err: float, unit: str, source: str, nsigma: float = 3.0) -> Quantity:
    if not (value > nsigma * err):
        return Quantity(max(value, 0.0) + 2 * err, math.nan, unit, source, limit="upper")
    return Quantity(value, err, unit, source)


def _offset_profile_error(dev: Transducer, v, t, y, sigma, gain: float | None, v_hat: float, se: float,
                          span: float) -> float:
    """Half-width of the profile-likelihood interval of ``V0``.

    When a bias point sits near ``V0`` the area is quadratic in the offset
    there and the curvature error is unreliable, so the interval is found
    from chi-square itself. For fixed ``V0`` the model is linear in the
    remaining amplitudes, which are profiled out by linear least squares.
    """
    w = 1.0 / sigma if sigma is not None else np.ones_like(y)

    def chi2(v0):
        th, el = _area_terms(dev, v, t, v0)
        if gain is None:
            a = np.column_stack([th, el]) * w[:, None]
            rhs = y * w
        else:
            a = (el * w)[:, None]
            rhs = (y - gain * th) * w
        norms = np.linalg.norm(a, axis=0)
        norms[norms == 0] = 1.0
        coef = np.linalg.lstsq(a / norms, rhs, rcond=None)[0]
        r = rhs - (a / norms) @ coef
        return float(r @ r)

    base = chi2(v_hat)
    dof = y.size - (3 if gain is None else 2)
    level = 1.0 if sigma is not None else (base / dof if dof > 0 else math.nan)
    if not (math.isfinite(se) and se > 0 and math.isfinite(level) and level > 0):
        return se

    def excess(v0):
        return chi2(v0) - base - level

    ends = []
    for sign in (-1.0, 1.0):
        d = max(se, 1e-9 * span)
        while excess(v_hat + sign * d) < 0 and d < span:
            d *= 2.0
        if excess(v_hat + sign * d) < 0:
            return math.inf
        ends.append(brentq(lambda u: excess(v_hat + sign * u), 0.0, d, xtol=1e-6 * d))
    return 0.5 * (ends[0] + ends[1])


def fit_area_vs_V(ds: SyntheticDataset, dev: Transducer, chain_gain: float | None = None,
                  options: FitOptions | None = None) -> ExtractionReport:
    """Joint fit of area versus bias at one or more temperatures.

    Free parameters are ``S_VV^n``, ``V0`` and, when at least two
    temperatures are present and ``chain_gain`` is not given, the chain gain.
    Bias-dependent frequency and linewidths come from the device model.
    A noise PSD not resolved at 3 sigma is reported as an upper limit.
    """
    _require(ds, "area_vs_V", "fit_area_vs_V")
    v, t, y = ds.columns["bias_v"], ds.columns["temperature_k"], ds.y
    free_gain = chain_gain is None and np.unique(t).size >= 2
    g_fixed = dev.chain_gain if chain_gain is None else chain_gain

    c2, c1, _ = np.polyfit(v, y, 2)
    v00 = -c1 / (2 * c2) if c2 > 0 else 0.0
    v00 = float(np.clip(v00, np.min(v), np.max(v)))
    th, el = _area_terms(dev, v, t, v00)
    # Linear start on relative residuals, columns normalised.
    wrow = 1.0 / np.maximum(np.abs(y), 1e-300)
    if free_gain:
        a = np.column_stack([th, el]) * wrow[:, None]
        norms = np.linalg.norm(a, axis=0)
        sol = np.linalg.lstsq(a / norms, y * wrow, rcond=None)[0] / norms
        g0 = sol[0] if sol[0] > 0 else g_fixed
        sn0 = sol[1] / g0
    else:
        g0 = g_fixed
        a = (el * wrow)[:, None]
        sn0 = float(np.linalg.lstsq(a, (y - g0 * th) * wrow, rcond=None)[0][0]) / g0
    sn_scale = abs(sn0) if sn0 != 0 else 1e-18
    span = float(np.ptp(v)) or 1.0

    if free_gain:
        def model(x, p):
            th_, el_ = _area_terms(dev, v, t, p[1])
            return p[2] * (th_ + p[0] * el_)

        p0, names, scale = [sn0, v00, g0], ["rf_noise_psd_v2_per_hz", "charge_offset_v", "chain_gain_v2_per_m2"], \
            [sn_scale, span, g0]
    else:
        def model(x, p):
            th_, el_ = _area_terms(dev, v, t, p[1])
            return g0 * (th_ + p[0] * el_)

        p0, names, scale = [sn0, v00], ["rf_noise_psd_v2_per_hz", "charge_offset_v"], [sn_scale, span]

    # The offset enters almost only through (V - V0)^2, so the mirrored start
    # is a competing minimum; keep whichever fits better.
    sigma = _sigma_or_none(ds.sigma)
    res = None
    for start in (v00, -v00) if v00 != 0 else (v00,):
        p0[1] = start
        cand = least_squares(model, p0, v, y, sigma, names, options, x_scale=scale)
        if res is None or cand.residual_norm < res.residual_norm:
            res = cand
    sn, ssn = res.value("rf_noise_psd_v2_per_hz"), res.error("rf_noise_psd_v2_per_hz")
    sv0 = _offset_profile_error(dev, v, t, y, sigma, None if free_gain else g0, res.value("charge_offset_v"),
                                res.error("charge_offset_v"), span)
    q = {
        "rf_noise_psd_v2_per_hz": _upper_or_estimate(sn, ssn, "V^2/Hz", "fit_area_vs_V"),
        "charge_offset_v": Quantity(res.value("charge_offset_v"), sv0, "V", "fit_area_vs_V"),
    }
    if q["rf_noise_psd_v2_per_hz"].is_estimate:
        q["rf_noise_asd_v_per_rthz"] = Quantity(math.sqrt(sn), ssn / (2 * math.sqrt(sn)), "V/sqrt(Hz)",
                                                "fit_area_vs_V")
    if free_gain:
        q["chain_gain_v2_per_m2"] = Quantity(res.value("chain_gain_v2_per_m2"), res.error("chain_gain_v2_per_m2"),
                                             "V^2/m^2", "fit_area_vs_V")
    return ExtractionReport("area_vs_V", q, res, [])


def _snr_noise_terms(dev: Transducer, v: np.ndarray):
    # u^2 and force noise without the electrical channel, per bias point.
    u2 = np.empty(v.size)
    rest = np.empty(v.size)
    for i, vi in enumerate(v):
        d = dev.with_op(bias_voltage=float(vi), rf_noise_psd=0.0)
        u2[i] = (d.effective_bias * d.dcdx) ** 2
        rest[i] = force_noise_budget(d).total
    return u2, rest


def fit_snr_vs_V(ds: SyntheticDataset, dev: Transducer, rbw_hz: float = 1.0,
                 options: FitOptions | None = None) -> ExtractionReport:
    """Fit ``SNR^2 = u^2 S^s / (u^2 S^n + S_th + S_ba + S_det_eq)``, ``u = (V - V0) dC_eq/dx``.

    Thermal, back-action and detector-equivalent channels are taken from the
    device model (the detector PSD must be set, e.g. from
    :func:`detector_noise_from_floor`). ``S^n`` is reported as an estimate
    only when resolved at 3 sigma, otherwise as an upper limit.

    Raises
    ------
    FitRejectedError
        If no point lies in the linear, noise-floor-limited regime.
    """
    _require(ds, "snr_vs_V", "fit_snr_vs_V")
    v, y = ds.x, ds.y
    if v.size < 3:
        raise FitRejectedError("fit_snr_vs_V needs at least 3 bias points")
    u2, rest = _snr_noise_terms(dev, v)
    if np.any(u2 == 0):
        raise FitRejectedError("fit_snr_vs_V: a bias point sits at the charge offset")
    order = np.argsort(u2)
    low = order[: max(2, v.size // 4)]
    ss0 = float(np.median(y[low] ** 2 * rest[low] / u2[low]))
    ratio = ss0 / np.maximum(y**2, 1e-300) - rest / u2
    sn0 = max(float(np.median(ratio[order[-max(2, v.size // 4):]])), ss0 / float(np.max(y)) ** 2 * 1e-3)

    def model(x, p):
        # A negative trial S^s gives NaN, which the solver rejects as a step.
        with np.errstate(invalid="ignore"):
            return np.sqrt(u2 * p[0] / np.maximum(u2 * p[1] + rest, 1e-300))

    try:
        res = least_squares(model, [ss0, sn0], v, y, _sigma_or_none(ds.sigma),
                            ["rf_drive_psd_v2_per_hz", "rf_noise_psd_v2_per_hz"], options, x_scale=[ss0, sn0])
    except RankDeficiencyError as exc:
        # Saturated data fix only the ratio S^s / S^n.
        raise FitRejectedError(f"fit_snr_vs_V: no linear regime resolved ({exc})") from exc
    ss, sn = res.values
    sss, ssn = res.error("rf_drive_psd_v2_per_hz"), res.error("rf_noise_psd_v2_per_hz")
    electrical_share = u2 * max(sn, 0.0) / (u2 * max(sn, 0.0) + rest)
    if electrical_share[order[0]] > 0.5 or not ss > 3 * sss:
        raise FitRejectedError("fit_snr_vs_V: no linear regime resolved")
    z = dev.cavity.line_impedance
    drive_dbm, sdbm = delta_method(lambda q: watt_to_dbm(psd_to_tone_power(q[0], z, rbw_hz)), res.values, res.covariance)
    sn_q = _upper_or_estimate(sn, ssn, "V^2/Hz", "fit_snr_vs_V")
    imax = int(np.argmax(np.abs(v - dev.op.charge_offset_voltage)))
    snr_max, s_snr = delta_method(lambda q: float(model(None, q)[imax]), res.values, res.covariance)
    sens, s_sens = delta_method(lambda q: math.sqrt(q[0]) / float(model(None, q)[imax]), res.values, res.covariance)
    q = {
        "rf_drive_psd_v2_per_hz": Quantity(ss, sss, "V^2/Hz", "fit_snr_vs_V"),
        "rf_drive_power_dbm": Quantity(drive_dbm, sdbm, "dBm", "fit_snr_vs_V"),
        "rf_noise_psd_v2_per_hz": sn_q,
        "max_snr": Quantity(snr_max, s_snr, "1", "fit_snr_vs_V"),
        "max_snr_bias_v": Quantity(float(v[imax]), 0.0, "V", "fit_snr_vs_V"),
        "measured_sensitivity_v_per_rthz": Quantity(sens, s_sens, "V/sqrt(Hz)", "fit_snr_vs_V"),
    }
    if sn_q.is_estimate:
        q["rf_noise_asd_v_per_rthz"] = Quantity(math.sqrt(sn), ssn / (2 * math.sqrt(sn)), "V/sqrt(Hz)",
                                                "fit_snr_vs_V")
    else:
        q["rf_noise_asd_v_per_rthz"] = Quantity(math.sqrt(sn_q.value), math.nan, "V/sqrt(Hz)", "fit_snr_vs_V",
                                                limit="upper")
    return ExtractionReport("snr_vs_V", q, res, [])


def detector_noise_from_floor(fit: FitResult, dev: Transducer) -> ExtractionReport:
    """Detector-equivalent force noise from the peak-to-floor ratio of a noise trace.

    ``S_FF^det = (S_th + S_ba + S_el) / (ratio - 1)`` with the thermal force
    at the intrinsic linewidth, matching how the bath drives the cold-damped
    mode. Also returns the output-referred detector PSD.
    """
    if not fit.converged or fit.value("floor") <= 0:
        raise DomainError("detector_noise_from_floor", "needs a converged Lorentzian fit with positive floor")
    w = dev.omega_m
    s_th = thermal_force_psd(dev.mode.m_eff, dev.gamma_m, dev.op.temperature, dev.constants.boltzmann)
    s_ba = backaction_force_psd(dev, w)
    s_el = (dev.effective_bias * dev.dcdx) ** 2 * dev.op.rf_noise_psd
    known = s_th + s_ba + s_el

    def ratio(q):
        return 1.0 + 2 * q[2] / (math.pi * abs(q[1])) / q[3]

    r, sr = delta_method(ratio, fit.values, fit.covariance)
    if r <= 1:
        raise DomainError("detector_noise_from_floor", "peak-to-floor ratio must exceed 1")
    det, sdet = delta_method(lambda q: known / (ratio(q) - 1.0), fit.values, fit.covariance)
    transfer = electromechanical_gain(dev, w) ** 2 * abs(susceptibility(dev, w, cold_damped=True)) ** 2
    q = {
        "peak_to_floor_ratio": Quantity(r, sr, "1", "detector_noise_from_floor"),
        "detector_force_psd_n2_per_hz": Quantity(det, sdet, "N^2/Hz", "detector_noise_from_floor"),
        "detector_psd_v2_per_hz": Quantity(det * transfer, sdet * transfer, "V^2/Hz", "detector_noise_from_floor"),
    }
    flags = ["detector_dominated"] if det > known else []
    return ExtractionReport("detector_noise_from_floor", q, fit, flags)


def noise_budget_vs_V(dev: Transducer, biases, rf_noise_psd: float | None = None,
                      detector_psd: float | None = None) -> dict:
    """Force-noise channels (N^2/Hz) per bias, plus the electrical/detector crossover.

    Channels follow :func:`~emx.model.force_noise_budget` with cold damping
    folded into the thermal term. The crossover is the smallest ``|V - V0|``
    where the electrical channel equals the detector channel, or ``None``.
    """
    changes = {}
    if rf_noise_psd is not None:
        changes["rf_noise_psd"] = rf_noise_psd
    if detector_psd is not None:
        changes["detector_psd"] = detector_psd
    base = dev.with_op(**changes) if changes else dev
    rows = []
    for b in np.asarray(biases, dtype=float):
        nb = force_noise_budget(base.with_op(bias_voltage=float(b)))
        rows.append({"bias_v": float(b), "detector": nb.detector_equivalent,
                     "thermal_backaction": nb.thermal + nb.backaction, "electrical": nb.electrical,
                     "total": nb.total})

    def gap(u):
        nb = force_noise_budget(base.with_op(bias_voltage=base.op.charge_offset_voltage + u))
        return nb.electrical - nb.detector_equivalent

    v = np.asarray(biases, dtype=float)
    umax = float(np.max(np.abs(v - base.op.charge_offset_voltage))) if v.size else 0.0
    crossover = None
    if umax > 0 and base.op.rf_noise_psd > 0:
        grid = np.linspace(umax * 1e-3, umax, 200)
        vals = [gap(u) for u in grid]
        for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
            if fa < 0 <= fb:
                crossover = brentq(gap, a, b, xtol=1e-12)
                break
    return {"rows": rows, "crossover_effective_bias_v": crossover}


def sensitivity_report(snr_report: ExtractionReport, dev: Transducer) -> dict:
    """Table-style summary: max SNR, measured and ideal sensitivities.

    Measured sensitivity is ``sqrt(S^s) / max SNR``. Ideal sensitivities are
    the thermal limit at the bias of the maximum SNR, with both the
    intrinsic and the cold-damped linewidth. Charges use ``C_eq``.
    """
    e = dev.constants.elementary_charge
    meas = snr_report["measured_sensitivity_v_per_rthz"]
    snr_max = snr_report["max_snr"]
    d = dev.with_op(bias_voltage=snr_report["max_snr_bias_v"].value)
    ideal = min_sensitivity(d)
    ideal_em = min_sensitivity(d, cold_damped=True)
    return {
        "max_snr_db": amplitude_to_db(snr_max.value),
        "max_snr_db_stderr": 20 / math.log(10) * snr_max.stderr / snr_max.value,
        "measured_v_per_rthz": meas.value,
        "measured_v_per_rthz_stderr": meas.stderr,
        "measured_e_per_rthz": d.c_eq * meas.value / e,
        "ideal_v_per_rthz": ideal.voltage,
        "ideal_e_per_rthz": ideal.charge,
        "ideal_cold_damped_v_per_rthz": ideal_em.voltage,
        "ideal_cold_damped_e_per_rthz": ideal_em.charge,
        "gamma_m_hz": rad_to_hz(d.gamma_m),
        "gamma_em_hz": rad_to_hz(d.gamma_em),
        "c_eq_f": d.c_eq,
    }
