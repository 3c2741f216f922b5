import math
import re
from typing import Literal, Tuple


QuantityKind = Literal[
    "angular_frequency",
    "frequency",
    "time",
    "length",
    "field",
    "intensity",
    "mass",
    "rate",
    "dimensionless",
    "coupling",
]


# ============================================
# UNIT TABLE (suffix -> (kind family, SI factor))
# ============================================

_FREQUENCY_UNITS = {
    "Hz": 1.0,
    "kHz": 1e3,
    "MHz": 1e6,
    "GHz": 1e9,
}

_UNITS = {
    "rad/s": ("angular_frequency", 1.0),
    "s": ("time", 1.0),
    "ms": ("time", 1e-3),
    "us": ("time", 1e-6),
    "ns": ("time", 1e-9),
    "m": ("length", 1.0),
    "mm": ("length", 1e-3),
    "um": ("length", 1e-6),
    "nm": ("length", 1e-9),
    "T": ("field", 1.0),
    "mT": ("field", 1e-3),
    "G": ("field", 1e-4),
    "W/m2": ("intensity", 1.0),
    "mW/cm2": ("intensity", 10.0),
    "amu": ("mass", 1.0),
    "1/s": ("rate", 1.0),
    "(rad/s)^2 m2/W": ("coupling", 1.0),
    "rad": ("dimensionless", 1.0),
    "mrad": ("dimensionless", 1e-3),
    "1": ("dimensionless", 1.0),
    "": ("dimensionless", 1.0),
}

_QUANTITY = re.compile(r"^\s*([-+0-9.eE]+)\s*(.*?)\s*$")


def split_quantity(text: str) -> Tuple[float, str]:
    match = _QUANTITY.match(text)
    if not match:
        raise ValueError(f"config_error: cannot parse quantity '{text}'")
    try:
        value = float(match.group(1))
    except ValueError:
        raise ValueError(f"config_error: cannot parse number in '{text}'")
    return value, match.group(2)


def parse_quantity(text: str, kind: QuantityKind) -> float:
    """
    Converts "500 kHz" style strings to SI.

    Frequencies in Hz..GHz become rad/s when the target kind is an
    angular frequency, and stay in Hz for kind "frequency".
    """

    value, unit = split_quantity(text)

    if unit in _FREQUENCY_UNITS:
        factor = _FREQUENCY_UNITS[unit]
        if kind == "angular_frequency":
            return 2 * math.pi * value * factor
        if kind == "frequency":
            return value * factor
        raise ValueError(f"config_error: unit '{unit}' is not a {kind}")

    if unit not in _UNITS:
        raise ValueError(f"config_error: unknown unit '{unit}'")

    family, factor = _UNITS[unit]

    if family == "angular_frequency" and kind == "frequency":
        return value / (2 * math.pi)

    if family != kind:
        raise ValueError(f"config_error: unit '{unit}' is not a {kind}")

    return value * factor


def infer_kind(unit: str) -> QuantityKind:
    if unit in _FREQUENCY_UNITS:
        return "angular_frequency"
    if unit in _UNITS:
        return _UNITS[unit][0]
    raise ValueError(f"config_error: unknown unit '{unit}'")
