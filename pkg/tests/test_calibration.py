"""Frequentist checks of the fitted uncertainties over many seeds."""

import math
from pathlib import Path

import numpy as np
import pytest

from sympcool.core.analysis import fit_repump_scan, fit_sideband_scan
from sympcool.core.config_loader import load_experiment_config
from sympcool.core.fit_models import FIT_MODELS
from sympcool.core.measurement import synth_repump_scan, synth_sideband_scan
from sympcool.core.motion import thermal_state
from sympcool.core.orchestrator import RunContext, stage_ramsey_decay


CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

REPUMP_TRUTH = [21.0, 0.076, 60.0, 2 * math.pi * 623.0]


def _covered(values, sigmas, truth):
    values, sigmas = np.asarray(values), np.asarray(sigmas)
    return float(np.mean(np.abs(values - truth) <= sigmas))


@pytest.mark.parametrize("nbar_true", [0.06, 0.07])
def test_thermometry_error_bars_cover_truth(probe_out, default_detection, nbar_true):
    dist = thermal_state(nbar_true)

    fits = [fit_sideband_scan(synth_sideband_scan(dist, probe_out, default_detection, seed=s)) for s in range(200)]
    nbar = [f.derived["nbar"] for f in fits]
    sigma = [f.derived_sigmas["nbar"] for f in fits]

    assert _covered(nbar, sigma, nbar_true) >= 0.68
    assert abs(np.median(nbar) - nbar_true) < 0.5 * np.median(sigma)
    # sample scatter of the estimate agrees with the quoted error
    assert np.std(nbar) == pytest.approx(np.median(sigma), rel=0.35)


def test_repump_fit_error_bars_cover_truth(default_detection):
    t = np.linspace(0, 5e-3, 41)
    truth = lambda x: FIT_MODELS["repump"].function(x, REPUMP_TRUTH)

    fits = [
        fit_repump_scan(synth_repump_scan(truth, t, default_detection, seed=s), readout_corrected=True)
        for s in range(200)
    ]
    fits = [f for f in fits if "degenerate_delta_q" not in f.flags]
    assert len(fits) >= 190

    for name, value in zip(("alpha", "amplitude", "delta_q"), (REPUMP_TRUTH[0], REPUMP_TRUTH[1], REPUMP_TRUTH[3])):
        coverage = _covered([f.params[name] for f in fits], [f.sigmas[name] for f in fits], value)
        assert 0.60 <= coverage <= 0.76, name


def test_contrast_loss_per_cycle_recovered_across_seeds(tmp_path, constants):
    base = load_experiment_config(CONFIG_DIR / "fig2.cfg", constants=constants)
    hits, estimates = 0, []

    for seed in range(200):
        config = base.model_copy(update={
            "sequence": base.sequence.model_copy(update={"seed": seed}),
            "output": base.output.model_copy(update={"directory": str(tmp_path / f"s{seed}")}),
        })
        ctx = RunContext(config, constants)
        stage_ramsey_decay(ctx)

        eps = next(row["value"] for row in ctx.summary if row["quantity"] == "epsilon")
        estimates.append(eps)
        hits += abs(eps - 0.033) <= 0.004

    assert hits >= 136
    assert np.mean(estimates) == pytest.approx(0.033, abs=0.001)
