import logging
import os
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional

from sympcool.config import CONSTANTS_ENV_VAR, CONSTANTS_FILE
from sympcool.core.units import infer_kind, parse_quantity, split_quantity


logger = logging.getLogger(__name__)


PACKAGE_CONSTANTS = Path(__file__).resolve().parent.parent / CONSTANTS_FILE

REQUIRED_SYMBOLS = (
    "gamma_p12",
    "lambda_397",
    "rabi_sq_per_intensity",
    "mass_40",
    "mass_43",
    "nuclear_spin_43",
    "offset_4_4",
    "offset_4_3",
    "offset_3_4",
    "offset_3_3",
    "strength_4_4",
    "strength_4_3",
    "strength_3_4",
    "strength_3_3",
)


def resolve_constants_path(path: Optional[str] = None) -> Path:
    if path:
        return Path(path)

    override = os.getenv(CONSTANTS_ENV_VAR)
    if override:
        return Path(override)

    return PACKAGE_CONSTANTS


def parse_constants(text: str, source: str = "<string>") -> Dict[str, float]:
    constants: Dict[str, float] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        if "=" not in line:
            raise ValueError(f"constants_error: {source}:{lineno}: expected 'symbol = value unit'")

        symbol, quantity = (part.strip() for part in line.split("=", 1))
        _, unit = split_quantity(quantity)

        try:
            constants[symbol] = parse_quantity(quantity, infer_kind(unit))
        except ValueError as e:
            raise ValueError(f"constants_error: {source}:{lineno}: {e}")

    missing = [s for s in REQUIRED_SYMBOLS if s not in constants]
    if missing:
        raise ValueError(f"constants_error: {source}: missing symbols {', '.join(missing)}")

    return constants


def load_constants(path: Optional[str] = None) -> Dict[str, float]:
    """
    Loads the constants file into a dict of SI values.

    Frequencies are angular (rad/s), wavelengths in metres, masses in amu.
    """

    resolved = resolve_constants_path(path)

    if not resolved.is_file():
        raise ValueError(f"constants_error: constants file not found: {resolved}")

    logger.debug("loading constants from %s", resolved)
    return parse_constants(resolved.read_text(encoding="utf-8"), source=str(resolved))


@lru_cache(maxsize=None)
def default_constants() -> Dict[str, float]:
    return load_constants(str(PACKAGE_CONSTANTS))
