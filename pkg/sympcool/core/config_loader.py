import configparser
import hashlib
import logging
import os
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import ValidationError

from sympcool.config import (
    DEFAULT_COOLING,
    DEFAULT_DETECTION,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_PUMPING,
    DEFAULT_SCATTER,
    DEFAULT_SPECIES,
    OUTPUT_DIR_ENV_VAR,
)
from sympcool.core.constants import load_constants
from sympcool.core.units import parse_quantity
from sympcool.types import ExperimentConfig, StageEnum


logger = logging.getLogger(__name__)


# ============================================
# FIELD TABLE (section -> key -> kind)
# ============================================

# Quantity kinds go through parse_quantity; the rest are plain literals.
FIELD_KINDS: Dict[str, Dict[str, str]] = {
    "trap": {
        "omega_r": "angular_frequency",
        "omega_z": "angular_frequency",
        "b_field": "field",
    },
    "species": {
        "coolant_name": "str",
        "coolant_mass": "mass",
        "memory_name": "str",
        "memory_mass": "mass",
    },
    "cooling": {
        "pulse_target_n": "int",
        "repump_duration": "time",
        "photons_per_repump": "dimensionless",
        "eta_recoil": "dimensionless",
        "heating_rate": "rate",
        "cycle_wall_time": "time",
        "idealized": "bool",
        "retune_per_cycle": "bool",
        "retune_schedule": "int_list",
        "probe_duration": "time",
        "n_max": "int",
    },
    "scatter": {
        "delta": "angular_frequency",
        "g_factor": "dimensionless",
        "h_factor": "dimensionless",
        "elastic_fraction": "dimensionless",
        "pumping_leak": "dimensionless",
        "photons_per_repump": "dimensionless",
        "target_epsilon": "dimensionless",
    },
    "detection": {
        "p_shelve_down": "dimensionless",
        "p_shelve_up": "dimensionless",
        "shots_per_point": "int",
        "prep_clock_fraction": "dimensionless",
        "coolant_p_dark": "dimensionless",
        "coolant_p_bright": "dimensionless",
    },
    "pumping": {
        "intensity": "intensity",
        "laser_detuning": "angular_frequency",
        "elastic_fraction": "dimensionless",
    },
    "sequence": {
        "stages": "str_list",
        "seed": "int",
        "precool": "str",
        "cycles": "int",
        "cooling_modes": "str_list",
        "scan_modes": "str_list",
        "points": "int",
        "cycle_counts": "int_list",
        "repeats": "int",
        "repump_pulses": "int",
        "repump_start": "time",
        "repump_stop": "time",
        "repump_points": "int",
        "noiseless": "bool",
        "readout_corrected": "bool",
        "workers": "int",
    },
    "output": {
        "directory": "str",
        "label": "str",
    },
}

REQUIRED_SECTIONS = ("trap", "sequence")

STAGE_SECTIONS = {
    StageEnum.sideband_cool: ("cooling",),
    StageEnum.ramsey_decay: ("scatter",),
    StageEnum.repump_control: ("scatter",),
    StageEnum.repump_scan: ("pumping",),
}


def _parse_value(raw: str, kind: str):
    text = raw.strip()

    if kind == "str":
        return text
    if kind == "str_list":
        return [item.strip() for item in text.split(",") if item.strip()]
    if kind == "int":
        try:
            return int(text)
        except ValueError:
            raise ValueError(f"expected an integer, got '{text}'")
    if kind == "int_list":
        try:
            return [int(item) for item in text.split(",") if item.strip()]
        except ValueError:
            raise ValueError(f"expected a comma-separated integer list, got '{text}'")
    if kind == "bool":
        lowered = text.lower()
        if lowered not in configparser.ConfigParser.BOOLEAN_STATES:
            raise ValueError(f"expected a boolean, got '{text}'")
        return configparser.ConfigParser.BOOLEAN_STATES[lowered]

    try:
        return parse_quantity(text, kind)
    except ValueError as e:
        raise ValueError(str(e).replace("config_error: ", ""))


def hash_config(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _defaults(constants: Dict[str, float]) -> Dict[str, Dict]:
    return {
        "species": {
            "coolant_name": DEFAULT_SPECIES["coolant"]["name"],
            "coolant_mass": constants.get("mass_40", DEFAULT_SPECIES["coolant"]["mass"]),
            "memory_name": DEFAULT_SPECIES["memory"]["name"],
            "memory_mass": constants.get("mass_43", DEFAULT_SPECIES["memory"]["mass"]),
        },
        "cooling": dict(DEFAULT_COOLING),
        "scatter": dict(DEFAULT_SCATTER),
        "detection": dict(DEFAULT_DETECTION),
        "pumping": dict(DEFAULT_PUMPING),
        "output": {"directory": DEFAULT_OUTPUT_DIR},
    }


def parse_experiment_config(
    text: str,
    source: str = "<string>",
    constants: Optional[Dict[str, float]] = None,
) -> ExperimentConfig:
    """
    Parses an INI experiment description. Every violation found, whether a
    bad unit, an unknown key or a failed model constraint, is collected and
    reported together with its dotted field path.
    """

    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str

    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ValueError(f"config_error: {source}: {e}")

    errors: List[str] = []
    data = _defaults(constants if constants is not None else load_constants())

    for section in parser.sections():
        if section not in FIELD_KINDS:
            errors.append(f"{section}: unknown section")
            continue
        values = data.setdefault(section, {})
        for key, raw in parser.items(section):
            kind = FIELD_KINDS[section].get(key)
            if kind is None:
                errors.append(f"{section}.{key}: unknown field")
                continue
            try:
                values[key] = _parse_value(raw, kind)
            except ValueError as e:
                errors.append(f"{section}.{key}: {e}")

    for section in REQUIRED_SECTIONS:
        if not parser.has_section(section):
            errors.append(f"{section}: section is required")

    for stage in data.get("sequence", {}).get("stages", []):
        try:
            needed = STAGE_SECTIONS.get(StageEnum(stage), ())
        except ValueError:
            continue
        errors.extend(
            f"{section}: section required by stage '{stage}'"
            for section in needed
            if not parser.has_section(section)
        )

    override = os.getenv(OUTPUT_DIR_ENV_VAR)
    if override:
        data["output"]["directory"] = override

    species = data.pop("species")
    data["species"] = {
        "coolant": {"name": species["coolant_name"], "mass": species["coolant_mass"], "is_coolant": True},
        "memory": {"name": species["memory_name"], "mass": species["memory_mass"], "is_coolant": False},
    }
    data["config_hash"] = hash_config(text)

    config = None
    try:
        config = ExperimentConfig(**data)
    except ValidationError as e:
        for err in e.errors():
            path = ".".join(str(part) for part in err["loc"])
            errors.append(f"{path}: {err['msg']}")

    if errors:
        raise ValueError(f"config_error: {source}: {len(errors)} violation(s)\n  " + "\n  ".join(errors))

    return config


def load_experiment_config(path: Path, constants: Optional[Dict[str, float]] = None) -> ExperimentConfig:
    if not path.is_file():
        raise ValueError(f"config_error: config file not found: {path}")

    config = parse_experiment_config(path.read_text(encoding="utf-8"), source=str(path), constants=constants)
    logger.info("loaded %s (sha256 %s...)", path, config.config_hash[:12])
    return config
