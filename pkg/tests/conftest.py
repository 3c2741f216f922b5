import math
from pathlib import Path

import pytest

from sympcool.config import (
    CONSTANTS_ENV_VAR,
    DEFAULT_DETECTION,
    DEFAULT_TRAP,
    OUTPUT_DIR_ENV_VAR,
    PROBE_PULSE_DURATION,
    RAMAN_CROSSING_ANGLE,
)
from sympcool.core.constants import PACKAGE_CONSTANTS, load_constants
from sympcool.core.crystal import axial_modes, raman_wavenumber, with_lamb_dicke
from sympcool.core.motion import pi_time_rabi
from sympcool.core.pumping import default_pumping_model
from sympcool.types import DetectionModel, ModeEnum, ScatterParams, SidebandScanModel


CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

MEASURED_DELTA_Q = 2 * math.pi * 623.0
MEASURED_ALPHA = 21.0


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV_VAR, raising=False)
    monkeypatch.delenv(CONSTANTS_ENV_VAR, raising=False)


@pytest.fixture(scope="session")
def constants():
    return load_constants()


@pytest.fixture(scope="session")
def modes(constants):
    structure = axial_modes(constants["mass_40"], constants["mass_43"], DEFAULT_TRAP["omega_z"])
    return with_lamb_dicke(structure, raman_wavenumber(constants["lambda_397"], RAMAN_CROSSING_ANGLE))


def _probe(modes, mode):
    eta = modes.eta(1, mode)
    return SidebandScanModel(
        pulse_duration=PROBE_PULSE_DURATION,
        rabi_carrier=pi_time_rabi(eta, PROBE_PULSE_DURATION),
        eta=eta,
        mode_freq=modes.frequency(mode),
    )


@pytest.fixture(scope="session")
def probe_in(modes):
    return _probe(modes, ModeEnum.in_phase)


@pytest.fixture(scope="session")
def probe_out(modes):
    return _probe(modes, ModeEnum.out_of_phase)


@pytest.fixture
def ideal_detection():
    return DetectionModel(p_shelve_down=1.0, p_shelve_up=0.0, shots_per_point=500)


@pytest.fixture
def default_detection():
    return DetectionModel(**DEFAULT_DETECTION)


@pytest.fixture(scope="session")
def scatter(constants, modes):
    return ScatterParams(
        gamma=constants["gamma_p12"],
        delta=2 * math.pi * 30e9,
        delta_I=abs(constants["offset_3_3"]),
        eta=modes.eta(1, ModeEnum.out_of_phase),
    )


@pytest.fixture(scope="session")
def pumping(constants):
    return default_pumping_model(10.6, constants_table=constants)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    out = tmp_path / "out"
    monkeypatch.setenv(OUTPUT_DIR_ENV_VAR, str(out))
    return out


@pytest.fixture
def perturbed_constants(tmp_path):
    """Constants file with the P1/2 linewidth doubled."""
    text = PACKAGE_CONSTANTS.read_text(encoding="utf-8")
    path = tmp_path / "constants_gamma_x2.txt"
    path.write_text(text.replace("gamma_p12 = 21.5 MHz", "gamma_p12 = 43.0 MHz"), encoding="utf-8")
    return path
