import math
from pathlib import Path

import pytest

from sympcool.core.config_loader import hash_config, load_experiment_config, parse_experiment_config
from sympcool.core.constants import PACKAGE_CONSTANTS, load_constants, parse_constants
from sympcool.core.units import parse_quantity
from sympcool.types import ModeEnum, StageEnum


CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


MINIMAL = """
[trap]
omega_r = 700 kHz
omega_z = 500 kHz

[sequence]
stages = precool, sideband_cool, sideband_scan
seed = 7
"""


# ============================================
# UNITS
# ============================================

@pytest.mark.parametrize(
    "text, kind, expected",
    [
        ("500 kHz", "angular_frequency", 2 * math.pi * 500e3),
        ("500 kHz", "frequency", 500e3),
        ("3141.59 rad/s", "frequency", 3141.59 / (2 * math.pi)),
        ("24 us", "time", 24e-6),
        ("0.17 mT", "field", 0.17e-3),
        ("1.06 mW/cm2", "intensity", 10.6),
        ("396.959 nm", "length", 396.959e-9),
        ("39 mrad", "dimensionless", 0.039),
        ("0.033", "dimensionless", 0.033),
    ],
)
def test_parse_quantity(text, kind, expected):
    assert parse_quantity(text, kind) == pytest.approx(expected)


@pytest.mark.parametrize("text, kind", [("500 parsecs", "length"), ("24 us", "field"), ("fast", "time"), ("1.2.3 s", "time")])
def test_parse_quantity_rejects_bad_input(text, kind):
    with pytest.raises(ValueError, match="config_error"):
        parse_quantity(text, kind)


# ============================================
# CONSTANTS FILE
# ============================================

def test_package_constants_in_si(constants):
    assert constants["gamma_p12"] == pytest.approx(2 * math.pi * 21.5e6)
    assert constants["lambda_397"] == pytest.approx(396.959e-9)
    assert constants["mass_43"] == pytest.approx(42.95877)
    assert constants["offset_3_3"] == pytest.approx(-2 * math.pi * 887.2547e6)


def test_constants_errors_name_file_and_line():
    with pytest.raises(ValueError, match=r"constants_error: consts.txt:2"):
        parse_constants("gamma_p12 = 21.5 MHz\nlambda_397 396.959 nm\n", source="consts.txt")
    with pytest.raises(ValueError, match="constants_error: .*missing symbols"):
        parse_constants("gamma_p12 = 21.5 MHz\n")


def test_constants_path_from_environment(monkeypatch, perturbed_constants):
    monkeypatch.setenv("SYMPCOOL_CONSTANTS", str(perturbed_constants))
    assert load_constants()["gamma_p12"] == pytest.approx(2 * math.pi * 43.0e6)
    assert load_constants(str(PACKAGE_CONSTANTS))["gamma_p12"] == pytest.approx(2 * math.pi * 21.5e6)


def test_missing_constants_file(tmp_path):
    with pytest.raises(ValueError, match="constants_error: constants file not found"):
        load_constants(str(tmp_path / "absent.txt"))


# ============================================
# EXPERIMENT CONFIG
# ============================================

def test_minimal_config_takes_defaults(constants):
    config = parse_experiment_config(MINIMAL, constants=constants)

    assert config.trap.omega_z == pytest.approx(2 * math.pi * 500e3)
    assert config.species.memory.mass == pytest.approx(constants["mass_43"])
    assert config.sequence.stages == [StageEnum.precool, StageEnum.sideband_cool, StageEnum.sideband_scan]
    assert config.sequence.cooling_modes == [ModeEnum.in_phase, ModeEnum.out_of_phase]
    assert config.detection.p_shelve_down == 0.90
    assert config.output.directory == "output"
    assert config.config_hash == hash_config(MINIMAL)


@pytest.mark.parametrize("name", ["fig1.cfg", "fig2.cfg", "fig3.cfg"])
def test_shipped_configs_load(name, constants):
    config = load_experiment_config(CONFIG_DIR / name, constants=constants)
    assert len(config.config_hash) == 64


def test_shipped_config_values(constants):
    fig2 = load_experiment_config(CONFIG_DIR / "fig2.cfg", constants=constants)
    assert fig2.scatter.delta == pytest.approx(2 * math.pi * 30e9)
    assert fig2.cooling.retune_schedule == [2, 1]
    assert fig2.sequence.repeats == 8
    assert fig2.scatter.pumping_leak == 0.0

    fig3 = load_experiment_config(CONFIG_DIR / "fig3.cfg", constants=constants)
    assert fig3.sequence.repump_stop == pytest.approx(5e-3)
    assert fig3.sequence.readout_corrected is True


def test_pumping_leak_is_read_and_bounded(constants):
    text = MINIMAL + "\n[scatter]\ndelta = 30 GHz\npumping_leak = 0.002\n"
    assert parse_experiment_config(text, constants=constants).scatter.pumping_leak == pytest.approx(0.002)

    with pytest.raises(ValueError, match="scatter.pumping_leak"):
        parse_experiment_config(text.replace("0.002", "1.5"), constants=constants)


def test_every_violation_is_listed(constants):
    text = MINIMAL.replace("omega_z = 500 kHz", "omega_z = 500 kHz\nb_field = 3 parsecs") + """
[detection]
p_shelve_down = 1.5
colour = blue

[lasers]
power = 1 W
"""
    with pytest.raises(ValueError) as info:
        parse_experiment_config(text, source="bad.cfg", constants=constants)

    message = str(info.value)
    assert message.startswith("config_error: bad.cfg: 4 violation(s)")
    for fragment in ("trap.b_field", "detection.colour: unknown field", "lasers: unknown section", "detection.p_shelve_down"):
        assert fragment in message


def test_stage_needs_its_section(constants):
    text = MINIMAL.replace("stages = precool, sideband_cool, sideband_scan", "stages = repump_scan")
    with pytest.raises(ValueError, match="pumping: section required by stage 'repump_scan'"):
        parse_experiment_config(text, constants=constants)


@pytest.mark.parametrize(
    "line, fragment",
    [
        ("stages = precool, precool", "stages must not repeat"),
        ("stages = teleport", "sequence.stages"),
        ("repump_start = 6 ms", "repump_stop must exceed"),
        ("points = 2", "sequence.points"),
        ("cycles = many", "expected an integer"),
    ],
)
def test_sequence_constraints(constants, line, fragment):
    key = line.split("=")[0].strip()
    lines = [l for l in MINIMAL.splitlines() if not l.startswith(f"{key} ")]
    text = "\n".join(lines) + f"\n{line}\n"
    with pytest.raises(ValueError, match="config_error") as info:
        parse_experiment_config(text, constants=constants)
    assert fragment in str(info.value)


def test_ramsey_decay_needs_three_cycle_counts(constants):
    text = MINIMAL.replace("stages = precool, sideband_cool, sideband_scan", "stages = ramsey_decay") + "cycle_counts = 0, 10\n\n[scatter]\ndelta = 30 GHz\n"
    with pytest.raises(ValueError, match="3 distinct cycle_counts"):
        parse_experiment_config(text, constants=constants)


def test_output_directory_from_environment(output_dir, constants):
    config = load_experiment_config(CONFIG_DIR / "fig1.cfg", constants=constants)
    assert config.output.directory == str(output_dir)


def test_missing_config_file(tmp_path):
    with pytest.raises(ValueError, match="config_error: config file not found"):
        load_experiment_config(tmp_path / "absent.cfg")


def test_unparseable_ini(constants):
    with pytest.raises(ValueError, match="config_error: <string>"):
        parse_experiment_config("omega_z = 500 kHz\n", constants=constants)
