import csv
import math
import os
import sys

import numpy as np

from sympcool.config import DEFAULT_DETECTION, DEFAULT_TRAP, PROBE_PULSE_DURATION, RAMAN_CROSSING_ANGLE
from sympcool.core.analysis import fit_repump_scan, fit_sideband_scan
from sympcool.core.constants import load_constants
from sympcool.core.crystal import axial_modes, raman_wavenumber, with_lamb_dicke
from sympcool.core.fit_models import FIT_MODELS
from sympcool.core.measurement import synth_repump_scan, synth_sideband_scan
from sympcool.core.motion import pi_time_rabi, thermal_state
from sympcool.types import DetectionModel, ModeEnum, SidebandScanModel

# ============================================
# CONFIGURATION
# ============================================

SEEDS = int(sys.argv[1]) if len(sys.argv) > 1 else 200

OUTPUT_DIR = "output"
OUTPUT_FILE = os.path.join(OUTPUT_DIR, "calibration_report.csv")

NBAR_VALUES = [0.02, 0.06, 0.2]
REPUMP_TRUTH = [21.0, 0.076, 60.0, 2 * math.pi * 623.0]

os.makedirs(OUTPUT_DIR, exist_ok=True)

detection = DetectionModel(**DEFAULT_DETECTION)
constants = load_constants()


def coverage(values, sigmas, truth):
    values, sigmas = np.asarray(values), np.asarray(sigmas)
    return float(np.mean(np.abs(values - truth) <= sigmas))


# ============================================
# THERMOMETRY
# ============================================

modes = with_lamb_dicke(
    axial_modes(constants["mass_40"], constants["mass_43"], DEFAULT_TRAP["omega_z"]),
    raman_wavenumber(constants["lambda_397"], RAMAN_CROSSING_ANGLE),
)
eta = modes.eta(1, ModeEnum.out_of_phase)
probe = SidebandScanModel(
    pulse_duration=PROBE_PULSE_DURATION,
    rabi_carrier=pi_time_rabi(eta, PROBE_PULSE_DURATION),
    eta=eta,
    mode_freq=modes.frequency(ModeEnum.out_of_phase),
)

rows = []

for nbar in NBAR_VALUES:
    dist = thermal_state(nbar)
    reference = fit_sideband_scan(synth_sideband_scan(dist, probe, detection, seed=0, noiseless=True)).derived["nbar"]
    fits = [fit_sideband_scan(synth_sideband_scan(dist, probe, detection, seed=s)) for s in range(SEEDS)]

    values = [f.derived["nbar"] for f in fits]
    sigmas = [f.derived_sigmas["nbar"] for f in fits]

    rows.append({
        "quantity": f"nbar@{nbar}",
        "truth": nbar,
        "noiseless_fit": reference,
        "mean": np.mean(values),
        "std": np.std(values),
        "median_sigma": np.median(sigmas),
        "coverage": coverage(values, sigmas, reference),
    })
    print(f"nbar {nbar}: coverage {rows[-1]['coverage']:.3f}, std {rows[-1]['std']:.4f}")

# ============================================
# REPUMP SCAN
# ============================================

durations = np.linspace(0, 5e-3, 41)
truth_curve = lambda t: FIT_MODELS["repump"].function(t, REPUMP_TRUTH)

fits = [
    fit_repump_scan(synth_repump_scan(truth_curve, durations, detection, seed=s), readout_corrected=True)
    for s in range(SEEDS)
]
fits = [f for f in fits if "degenerate_delta_q" not in f.flags]

for name, truth in zip(FIT_MODELS["repump"].param_names, REPUMP_TRUTH):
    values = [f.params[name] for f in fits]
    sigmas = [f.sigmas[name] for f in fits]
    rows.append({
        "quantity": f"repump_{name}",
        "truth": truth,
        "noiseless_fit": truth,
        "mean": np.mean(values),
        "std": np.std(values),
        "median_sigma": np.median(sigmas),
        "coverage": coverage(values, sigmas, truth),
    })
    print(f"repump {name}: coverage {rows[-1]['coverage']:.3f}")

# ============================================
# SAVE REPORT
# ============================================

with open(OUTPUT_FILE, "w", newline="") as f:
    writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)

print(f"Calibration report saved to {OUTPUT_FILE}")
