import json
import math
from pathlib import Path

import pandas as pd
import pytest

from sympcool.core.measurement import synth_ramsey_scan
from sympcool.core.records import write_record
from sympcool.main import main
from sympcool.types import RamseyFringe


CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def _summary(directory: Path) -> dict:
    frame = pd.read_csv(directory / "summary.csv", comment="#")
    return {row.quantity: row for row in frame.itertuples(index=False)}


def _log_lines(directory: Path) -> list:
    return [json.loads(line) for line in (directory / "run_log.jsonl").read_text().splitlines()]


# ============================================
# SELFCHECK
# ============================================

def test_selfcheck_passes_with_packaged_constants(output_dir, capsys):
    assert main(["selfcheck"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert "PASS  light_shift_delta_q" in out

    entry = _log_lines(output_dir)[-1]
    assert entry["command"] == "selfcheck"
    assert entry["status"] == "ok"


def test_selfcheck_fails_with_doubled_linewidth(output_dir, perturbed_constants, capsys):
    assert main(["selfcheck", "--constants", str(perturbed_constants)]) == 4

    captured = capsys.readouterr()
    assert "FAIL  pumping_alpha" in captured.out
    for name in ("constants_load", "mode_frequencies", "thermometry_round_trip", "fit_jacobians", "light_shift_delta_q"):
        assert f"PASS  {name}" in captured.out
    assert captured.out.count("FAIL") == 1
    assert captured.err.startswith("selfcheck_failure:")
    assert _log_lines(output_dir)[-1]["status"] == "selfcheck_failure"


def test_selfcheck_missing_constants_file(output_dir, tmp_path, capsys):
    assert main(["--constants", str(tmp_path / "absent.txt"), "selfcheck"]) == 2
    assert "constants_error" in capsys.readouterr().err


def test_unwritable_run_log_fails_closed(output_dir, capsys):
    (output_dir / "run_log.jsonl").mkdir(parents=True)
    assert main(["selfcheck"]) == 5
    assert "logging_failure" in capsys.readouterr().err


# ============================================
# RUN
# ============================================

def test_ground_state_cooling_run_is_reproducible(tmp_path, monkeypatch):
    dirs = [tmp_path / "a", tmp_path / "b"]
    for directory in dirs:
        monkeypatch.setenv("SYMPCOOL_OUTPUT_DIR", str(directory))
        assert main(["run", str(CONFIG_DIR / "fig1.cfg")]) == 0

    files = sorted(p.relative_to(dirs[0]) for p in dirs[0].rglob("*") if p.is_file() and p.name != "run_log.jsonl")
    assert Path("summary.csv") in files
    assert Path("records/sideband_out_of_phase.csv") in files
    for name in files:
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes(), name

    summary = _summary(dirs[0])
    for mode in ("in_phase", "out_of_phase"):
        assert summary[f"nbar_cooled_{mode}"].value < 0.12
        assert summary[f"ground_state_fraction_{mode}"].value > 0.9
        fitted = summary[f"nbar_fit_{mode}"]
        assert fitted.value < 0.12
        assert abs(fitted.value - fitted.truth) < 0.05


def test_run_log_records_seed_override(output_dir):
    assert main(["run", str(CONFIG_DIR / "fig1.cfg"), "--seed", "5"]) == 0

    entry = _log_lines(output_dir)[-1]
    assert entry["seed"] == 5
    assert entry["status"] == "ok"
    assert len(entry["config_hash"]) == 64
    assert str(output_dir / "summary.csv") in entry["outputs"]
    assert entry["wall_time_ms"] >= 0

    manifest = pd.read_csv(output_dir / "manifest.csv", comment="#")
    assert "cooling_trajectory.csv" in manifest["file"].tolist()


def test_contrast_decay_run(output_dir):
    assert main(["run", str(CONFIG_DIR / "fig2.cfg")]) == 0
    summary = _summary(output_dir)

    assert summary["epsilon"].value == pytest.approx(0.033, abs=0.01)
    assert summary["epsilon"].sigma < 0.01
    assert summary["r_rsb"].value == pytest.approx(0.01595, rel=5e-3)
    assert 0.0 <= summary["repump_epsilon_bound"].value < 0.02

    control = pd.read_csv(output_dir / "repump_control.csv", comment="#")
    assert control.loc[0, "pulses"] == 10
    assert control.loc[0, "scatter_per_pulse"] == pytest.approx(2 * control.loc[0, "alpha"] * 10e-6)

    curve = pd.read_csv(output_dir / "contrast_vs_cycles.csv", comment="#")
    assert sorted(curve["cycles"].unique()) == [0, 2, 4, 6, 8, 10]
    assert len(curve) == 6 * 8

    report = (output_dir / "fits_report.txt").read_text().splitlines()
    assert report[0].startswith("# config_hash=")
    assert report[1] == "# seed=" + str(_log_lines(output_dir)[-1]["seed"])

    for path in output_dir.rglob("*"):
        if path.is_file() and path.name != "run_log.jsonl":
            header = [line for line in path.read_text().splitlines() if line.startswith("#")]
            assert any(line.startswith("# config_hash=") for line in header), path.name
            assert any(line.startswith("# seed=") for line in header), path.name


def test_repump_scan_run(output_dir):
    assert main(["run", str(CONFIG_DIR / "fig3.cfg")]) == 0
    summary = _summary(output_dir)

    delta_q = summary["repump_delta_q"]
    assert delta_q.value / (2 * math.pi) == pytest.approx(620.0, abs=30.0)
    assert delta_q.truth / (2 * math.pi) == pytest.approx(619.9, abs=1.0)
    assert 15.0 < summary["repump_alpha"].value < 30.0
    assert summary["repump_amplitude"].value == pytest.approx(0.075, abs=0.015)


def test_run_reports_config_errors(output_dir, tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text((CONFIG_DIR / "fig1.cfg").read_text().replace("points = 20", "points = 2"))

    assert main(["run", str(bad)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("config_error:")
    assert "sequence.points" in err
    assert _log_lines(output_dir)[-1]["status"] == "config_error"


def test_missing_config_file(output_dir, capsys):
    assert main(["run", "absent.cfg"]) == 2
    assert "config file not found" in capsys.readouterr().err


# ============================================
# BUDGET AND FIT
# ============================================

def test_budget_sweep(output_dir, capsys):
    assert main(["budget", str(CONFIG_DIR / "fig2.cfg"), "--sweep", "nbar=0.05,1.0"]) == 0

    frame = pd.read_csv(output_dir / "budget.csv", comment="#")
    assert len(frame) == 4
    assert frame["cycles"].unique().tolist() == [10]
    assert frame["eta"].iloc[0] == pytest.approx(0.1413, rel=2e-3)


def test_budget_rejects_bad_sweep(output_dir, capsys):
    assert main(["budget", str(CONFIG_DIR / "fig2.cfg"), "--sweep", "temperature=1"]) == 2
    assert "unknown sweep axis" in capsys.readouterr().err


def test_fit_command_on_ramsey_record(output_dir, tmp_path, default_detection, capsys):
    fringe = RamseyFringe(offset=0.5, amplitude=0.4, phase=0.7, contrast=0.8)
    path = write_record(synth_ramsey_scan(fringe, default_detection, seed=3), tmp_path / "fringe.csv", {"config_hash": "abc"})

    assert main(["fit", str(path), "--model", "ramsey", "--readout-corrected"]) == 0
    assert "ramsey fit [fringe.csv]" in capsys.readouterr().out

    frame = pd.read_csv(output_dir / "fringe_ramsey_fit.csv", comment="#")
    assert frame.loc[0, "amplitude"] == pytest.approx(0.4, abs=0.05)
    assert _log_lines(output_dir)[-1]["config_hash"] == "abc"


def test_fit_wrong_model_for_record(output_dir, tmp_path, default_detection, capsys):
    fringe = RamseyFringe(offset=0.5, amplitude=0.4, phase=0.7, contrast=0.8)
    path = write_record(synth_ramsey_scan(fringe, default_detection, seed=3), tmp_path / "fringe.csv")

    assert main(["fit", str(path), "--model", "sideband"]) == 2
    assert "record_error" in capsys.readouterr().err


def test_fit_missing_record(output_dir, capsys):
    assert main(["fit", "absent.csv", "--model", "repump"]) == 2
    assert "record_error" in capsys.readouterr().err
