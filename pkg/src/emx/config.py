"""Versioned JSON configuration documents.

Every physical key carries its unit as a suffix (``gap_m``, ``kappa_c_hz``,
``pump_power_dbm``). Conversion to the SI / rad/s model types happens here
and nowhere else.
"""

from __future__ import annotations

import copy
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from emx.constants import CODATA, PhysicalConstants
from emx.errors import ConfigError
from emx.model import (
    CapacitorStack,
    MechanicalMode,
    MembraneGeometry,
    MicrowaveCavity,
    OperatingPoint,
    Rectangle,
    Transducer,
    anti_spring_frequency,
    effective_mass,
    inductance_for_frequency,
    pump_power_for_photons,
)
from emx.units import dbm_to_watt, hz_to_rad, tone_power_to_psd

SCHEMA_VERSION = 1

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}


def _obj(props: dict, required: list[str] = ()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_axis = _obj({
    "name": {"type": "string"},
    "min": _num,
    "max": _num,
    "count": {"type": "integer", "minimum": 1},
    "scale": {"enum": ["linear", "log"]},
}, ["name", "min", "max", "count"])

SCHEMA: dict = _obj({
    "version": {"const": SCHEMA_VERSION},
    "description": {"type": "string"},
    "constants": _obj({
        "vacuum_permittivity_f_per_m": _pos,
        "reduced_planck_j_s": _pos,
        "boltzmann_j_per_k": _pos,
        "elementary_charge_c": _pos,
    }),
    "geometry": _obj({
        "length_y_m": _pos, "length_z_m": _pos, "thickness_m": _pos,
        "stress_pa": _pos, "density_kg_per_m3": _pos,
        "metal_thickness_m": _nonneg, "metal_density_kg_per_m3": _nonneg,
        "electrode_center_y_m": _num, "electrode_center_z_m": _num,
        "electrode_size_y_m": _pos, "electrode_size_z_m": _pos,
    }, ["length_y_m", "length_z_m", "thickness_m", "stress_pa", "density_kg_per_m3",
        "metal_thickness_m", "metal_density_kg_per_m3", "electrode_size_y_m", "electrode_size_z_m"]),
    "mode": _obj({
        "index_p": {"type": "integer", "minimum": 1},
        "index_q": {"type": "integer", "minimum": 1},
        "frequency_hz": _pos,
        "linewidth_hz": _nonneg,
        "effective_mass_kg": _pos,
        "g0_hz": _pos,
    }, ["index_p", "index_q", "frequency_hz", "linewidth_hz"]),
    "capacitors": _obj({
        "gap_m": _pos,
        "area_m2": _pos,
        "stray_capacitance_f": _pos,
        "bias_capacitance_f": {"oneOf": [_pos, {"type": "null"}]},
        "bias_resistance_ohm": _nonneg,
    }, ["gap_m", "area_m2", "stray_capacitance_f"]),
    "cavity": {
        **_obj({
            "inductance_h": _pos,
            "frequency_hz": _pos,
            "kappa_c_hz": _pos,
            "kappa_i_hz": _pos,
            "line_impedance_ohm": _pos,
        }, ["kappa_c_hz", "kappa_i_hz"]),
        "oneOf": [{"required": ["inductance_h"]}, {"required": ["frequency_hz"]}],
    },
    "operating_point": {
        **_obj({
            "bias_v": _num,
            "charge_offset_v": _num,
            "pump_power_dbm": _num,
            "line_attenuation_db": _nonneg,
            "cooperativity": _nonneg,
            "pump_detuning_hz": _num,
            "temperature_k": _nonneg,
            "rf_drive_power_dbm": _num,
            "rf_drive_psd_v2_per_hz": _nonneg,
            "rf_noise_psd_v2_per_hz": _nonneg,
            "detector_psd_v2_per_hz": _nonneg,
            "rf_frequency_hz": _nonneg,
        }),
        "not": {"anyOf": [
            {"required": ["pump_power_dbm", "cooperativity"]},
            {"required": ["rf_drive_power_dbm", "rf_drive_psd_v2_per_hz"]},
        ]},
    },
    "readout": _obj({
        "chain_gain_v2_per_m2": _pos,
        "rbw_hz": _pos,
    }),
    "synth": _obj({
        "spectrum": _obj({
            "center_hz": _pos, "span_hz": _pos, "span_linewidths": _pos,
            "points": {"type": "integer", "minimum": 2},
            "n_averages": {"type": "integer", "minimum": 1},
        }),
        "ringdown": _obj({
            "sample_rate_hz": _pos, "duration_s": _pos,
            "initial_amplitude": _pos, "noise_sigma": _nonneg,
        }),
        "area_vs_T": _obj({"temperatures_k": {"type": "array", "items": _nonneg, "minItems": 1},
                           "relative_sigma": _nonneg}),
        "area_vs_V": _obj({"bias_v": {"type": "array", "items": _num, "minItems": 1},
                           "temperatures_k": {"type": "array", "items": _nonneg, "minItems": 1},
                           "relative_sigma": _nonneg}),
        "snr_vs_V": _obj({"bias_v": {"type": "array", "items": _num, "minItems": 1},
                          "relative_sigma": _nonneg}),
        "antispring": _obj({"bias_v": {"type": "array", "items": _num, "minItems": 1},
                            "sigma_hz": _nonneg}),
    }),
    "fit": _obj({
        "max_iterations": {"type": "integer", "minimum": 1},
        "ftol": _pos,
        "xtol": _pos,
    }),
    "sweep": _obj({
        "axes": {"type": "array", "items": _axis, "minItems": 1},
        "fixed": {"type": "object", "additionalProperties": _num},
        "objectives": {"type": "array", "items": {"enum": [
            "total_gain_db", "min_sensitivity", "charge_sensitivity", "cooperativity"]}},
        "max_points": {"type": "integer", "minimum": 1},
        "constraints": _obj({"max_bias_v": _pos, "min_gap_m": _pos, "max_cooperativity": _pos,
                             "min_sideband_resolution": _pos}),
    }, ["axes"]),
}, ["version"])


def _json_path(err: jsonschema.ValidationError) -> str:
    return ".".join(str(p) for p in err.absolute_path)


def validate(doc: dict) -> None:
    """Raise :class:`ConfigError` naming the first offending field."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(list(e.absolute_path)), str(e.absolute_path)))
    if errors:
        err = errors[0]
        path = _json_path(err)
        if err.validator == "additionalProperties":
            extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
            path = ".".join(p for p in (path, extra[0] if extra else "") if p)
            raise ConfigError(path, "unknown key")
        if err.validator == "required":
            missing = err.message.split("'")[1] if "'" in err.message else ""
            path = ".".join(p for p in (path, missing) if p)
            raise ConfigError(path, "required field missing")
        raise ConfigError(path, err.message)


@dataclass
class Config:
    """A validated document plus the model objects built from it."""

    doc: dict
    transducer: Transducer | None
    rbw_hz: float = 1.0
    geometry: MembraneGeometry | None = None

    @property
    def synth(self) -> dict:
        return self.doc.get("synth", {})

    @property
    def fit(self) -> dict:
        return self.doc.get("fit", {})

    @property
    def sweep(self) -> dict | None:
        return self.doc.get("sweep")

    def inputs_hash(self) -> str:
        blob = json.dumps(self.doc, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def _constants(section: dict | None) -> PhysicalConstants:
    if not section:
        return CODATA
    return PhysicalConstants(
        vacuum_permittivity=section.get("vacuum_permittivity_f_per_m", CODATA.vacuum_permittivity),
        reduced_planck=section.get("reduced_planck_j_s", CODATA.reduced_planck),
        boltzmann=section.get("boltzmann_j_per_k", CODATA.boltzmann),
        elementary_charge=section.get("elementary_charge_c", CODATA.elementary_charge),
    )


def _geometry(section: dict) -> MembraneGeometry:
    ly, lz = section["length_y_m"], section["length_z_m"]
    region = Rectangle(section.get("electrode_center_y_m", ly / 2), section.get("electrode_center_z_m", lz / 2),
                       section["electrode_size_y_m"], section["electrode_size_z_m"])
    return MembraneGeometry(ly, lz, section["thickness_m"], section["stress_pa"], section["density_kg_per_m3"],
                            section["metal_thickness_m"], section["metal_density_kg_per_m3"], region)


def build(doc: dict) -> Config:
    """Validate ``doc`` and construct the model objects."""
    validate(doc)
    constants = _constants(doc.get("constants"))
    geometry = _geometry(doc["geometry"]) if "geometry" in doc else None
    readout = doc.get("readout", {})
    rbw = readout.get("rbw_hz", 1.0)
    if not all(k in doc for k in ("mode", "capacitors", "cavity")):
        return Config(copy.deepcopy(doc), None, rbw, geometry)

    m = doc["mode"]
    if "effective_mass_kg" in m:
        m_eff = m["effective_mass_kg"]
    elif geometry is not None:
        m_eff = effective_mass(geometry, m["index_p"], m["index_q"]).m_eff
    else:
        raise ConfigError("mode.effective_mass_kg", "required when no geometry section is given")
    mode = MechanicalMode(m["index_p"], m["index_q"], hz_to_rad(m["frequency_hz"]),
                          hz_to_rad(m["linewidth_hz"]), m_eff)

    c = doc["capacitors"]
    bias_cap = c.get("bias_capacitance_f")
    stack = CapacitorStack(c["gap_m"], c["area_m2"], c["stray_capacitance_f"],
                           math.inf if bias_cap is None else bias_cap, c.get("bias_resistance_ohm", 0.0))

    cv = doc["cavity"]
    kappa_c, kappa_i = hz_to_rad(cv["kappa_c_hz"]), hz_to_rad(cv["kappa_i_hz"])
    impedance = cv.get("line_impedance_ohm", 50.0)
    if "inductance_h" in cv:
        inductance = cv["inductance_h"]
    else:
        inductance = inductance_for_frequency(hz_to_rad(cv["frequency_hz"]), stack, constants)
    cavity = MicrowaveCavity(inductance, kappa_c, kappa_i, impedance)

    o = doc.get("operating_point", {})
    detuning = hz_to_rad(o["pump_detuning_hz"]) if "pump_detuning_hz" in o else -mode.omega_m0
    g0 = hz_to_rad(m["g0_hz"]) if "g0_hz" in m else None
    if "cooperativity" in o:
        # Pump set so the cooperativity at the operating bias equals the target.
        probe = Transducer(mode, stack, cavity, OperatingPoint(bias_voltage=o.get("bias_v", 0.0),
                                                               charge_offset_voltage=o.get("charge_offset_v", 0.0)),
                           g0=g0, constants=constants)
        if not probe.gamma_m > 0:
            raise ConfigError("operating_point.cooperativity", "needs a nonzero mode linewidth")
        n = o["cooperativity"] * cavity.kappa * probe.gamma_m / (4.0 * probe.vacuum_coupling**2)
        pump = pump_power_for_photons(n, cavity, probe.omega_c, detuning, constants)
    elif "pump_power_dbm" in o:
        pump = dbm_to_watt(o["pump_power_dbm"] - o.get("line_attenuation_db", 0.0))
    else:
        pump = 0.0
    if "rf_drive_power_dbm" in o:
        drive = tone_power_to_psd(dbm_to_watt(o["rf_drive_power_dbm"]), impedance, rbw)
    else:
        drive = o.get("rf_drive_psd_v2_per_hz", 0.0)
    op = OperatingPoint(
        bias_voltage=o.get("bias_v", 0.0),
        charge_offset_voltage=o.get("charge_offset_v", 0.0),
        pump_power=pump,
        pump_detuning=detuning,
        temperature=o.get("temperature_k", 0.0),
        rf_drive_psd=drive,
        rf_noise_psd=o.get("rf_noise_psd_v2_per_hz", 0.0),
        detector_psd=o.get("detector_psd_v2_per_hz", 0.0),
    )
    # The drive tone sits on the bias-softened resonance unless placed explicitly.
    rf = hz_to_rad(o["rf_frequency_hz"]) if "rf_frequency_hz" in o else anti_spring_frequency(mode, stack, op,
                                                                                               constants=constants)
    op = dataclasses.replace(op, rf_frequency=rf)
    dev = Transducer(mode, stack, cavity, op, g0=g0,
                     chain_gain=readout.get("chain_gain_v2_per_m2", 1.0), constants=constants)
    return Config(copy.deepcopy(doc), dev, rbw, geometry)


def load(source: str | Path) -> Config:
    """Load a config from a path, or a bundled config by bare name (``mode11``)."""
    path = Path(source)
    if path.suffix != ".json" and not path.exists():
        return build(bundled(str(source)))
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from exc
    return build(doc)


def bundled_names() -> list[str]:
    files = resources.files("emx") / "data"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def bundled(name: str) -> dict:
    res = resources.files("emx") / "data" / f"{name}.json"
    if not res.is_file():
        raise ConfigError("", f"no bundled config named {name!r} (have: {', '.join(bundled_names())})")
    return json.loads(res.read_text())


def to_document(dev: Transducer, rbw_hz: float = 1.0) -> dict:
    """Serialize a :class:`Transducer` back into a config document.

    Powers are written as PSDs and the pump as device-level dBm, so the
    round trip is exact up to floating point.
    """
    from emx.units import rad_to_hz, watt_to_dbm

    mode, stack, cav, op = dev.mode, dev.stack, dev.cavity, dev.op
    doc: dict[str, Any] = {
        "version": SCHEMA_VERSION,
        "mode": {
            "index_p": mode.index_p, "index_q": mode.index_q,
            "frequency_hz": rad_to_hz(mode.omega_m0), "linewidth_hz": rad_to_hz(mode.gamma_m0),
            "effective_mass_kg": mode.m_eff,
        },
        "capacitors": {
            "gap_m": stack.gap, "area_m2": stack.membrane_cap_area, "stray_capacitance_f": stack.stray_cap,
            "bias_capacitance_f": None if math.isinf(stack.bias_cap) else stack.bias_cap,
            "bias_resistance_ohm": stack.bias_resistance,
        },
        "cavity": {
            "inductance_h": cav.inductance, "kappa_c_hz": rad_to_hz(cav.kappa_c),
            "kappa_i_hz": rad_to_hz(cav.kappa_i), "line_impedance_ohm": cav.line_impedance,
        },
        "operating_point": {
            "bias_v": op.bias_voltage, "charge_offset_v": op.charge_offset_voltage,
            "pump_detuning_hz": rad_to_hz(op.pump_detuning), "temperature_k": op.temperature,
            "rf_drive_psd_v2_per_hz": op.rf_drive_psd, "rf_noise_psd_v2_per_hz": op.rf_noise_psd,
            "detector_psd_v2_per_hz": op.detector_psd, "rf_frequency_hz": rad_to_hz(op.rf_frequency),
        },
        "readout": {"chain_gain_v2_per_m2": dev.chain_gain, "rbw_hz": rbw_hz},
    }
    if dev.g0 is not None:
        doc["mode"]["g0_hz"] = rad_to_hz(dev.g0)
    if op.pump_power > 0:
        doc["operating_point"]["pump_power_dbm"] = watt_to_dbm(op.pump_power)
    if dev.constants != CODATA:
        c = dev.constants
        doc["constants"] = {
            "vacuum_permittivity_f_per_m": c.vacuum_permittivity, "reduced_planck_j_s": c.reduced_planck,
            "boltzmann_j_per_k": c.boltzmann, "elementary_charge_c": c.elementary_charge,
        }
    return doc


__all__ = ["Config", "SCHEMA", "build", "bundled", "bundled_names", "load", "to_document", "validate"]
