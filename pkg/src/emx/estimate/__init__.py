"""Least-squares engine and the extraction recipes built on it."""

from emx.estimate.lm import FitOptions, FitResult, least_squares, numeric_jacobian
from emx.estimate.recipes import (
    detector_noise_from_floor,
    fit_antispring,
    fit_area_vs_T,
    fit_area_vs_V,
    fit_lorentzian,
    fit_ringdown,
    fit_snr_vs_V,
    lorentzian,
    lorentzian_height,
    noise_budget_vs_V,
    sensitivity_report,
)
from emx.estimate.report import ExtractionReport, Quantity, delta_method

__all__ = [name for name in dir() if not name.startswith("_")]
