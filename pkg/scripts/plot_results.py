import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from sympcool.core.fit_models import FIT_MODELS
from sympcool.core.records import read_record

# ================================
# CONFIGURATION
# ================================

OUTPUT_ROOT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("output")

FIG1 = OUTPUT_ROOT / "fig1"
FIG2 = OUTPUT_ROOT / "fig2"
FIG3 = OUTPUT_ROOT / "fig3"

plt.style.use("seaborn-v0_8-whitegrid")


def read_table(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def fit_params(directory: Path, label: str) -> dict:
    fits = read_table(directory / "fits.csv")
    return fits[fits["label"] == label].iloc[0].to_dict()


def save(filename: Path):
    plt.tight_layout()
    plt.savefig(filename, dpi=300)
    plt.close()
    print(f"wrote {filename}")


# ================================
# SIDEBAND SPECTRA
# ================================

def plot_sidebands(directory: Path):
    modes = ["in_phase", "out_of_phase"]
    fig, axes = plt.subplots(len(modes), 2, figsize=(10, 3.5 * len(modes)), squeeze=False)

    for row, mode in enumerate(modes):
        path = directory / "records" / f"sideband_{mode}.csv"
        if not path.is_file():
            continue

        record = read_record(path)
        x, y = record.xs(), record.fractions()
        sigma = np.sqrt(y * (1 - y) / record.shots())

        p = fit_params(directory, f"sideband_{mode}")
        params = [p[name] for name in FIT_MODELS["sideband"].param_names]
        pulse = float(record.metadata["pulse_duration"])

        for col, mask in enumerate([x < 0, x > 0]):
            dense = np.linspace(x[mask].min(), x[mask].max(), 400)
            ax = axes[row][col]
            ax.errorbar(x[mask] / 1e3, y[mask], yerr=sigma[mask], fmt="o", ms=3)
            ax.plot(dense / 1e3, FIT_MODELS["sideband"].function(dense, params, pulse_duration=pulse))
            ax.set_title(f"{mode} {'red' if col == 0 else 'blue'} sideband  (nbar = {p['nbar']:.3f})")
            ax.set_xlabel("Raman detuning (kHz)")
            ax.set_ylabel("P(dark)")

    save(directory / "sidebands.png")


# ================================
# COOLING AND CONTRAST DECAY
# ================================

def plot_cooling(directory: Path):
    trajectory = read_table(directory / "cooling_trajectory.csv")

    plt.figure(figsize=(7, 4.5))
    for mode, rows in trajectory.groupby("mode"):
        plt.semilogy(rows["cycle"], rows["nbar"], "o-", label=mode)
    plt.xlabel("cooling cycles")
    plt.ylabel("mean phonon number")
    plt.legend()
    save(directory / "cooling_trajectory.png")


def plot_contrast(directory: Path):
    curve = read_table(directory / "contrast_vs_cycles.csv")
    decay = fit_params(directory, "contrast_decay")

    pooled = curve.groupby("cycles")["normalized"].agg(["mean", "sem"]).reset_index()
    n = np.linspace(0, pooled["cycles"].max(), 200)

    plt.figure(figsize=(7, 4.5))
    plt.errorbar(pooled["cycles"], pooled["mean"], yerr=pooled["sem"], fmt="o", label="normalized amplitude")
    plt.plot(n, FIT_MODELS["decay"].function(n, [decay["a0"], decay["epsilon"]]),
             label=f"epsilon = {decay['epsilon']:.4f} +/- {decay['sigma_epsilon']:.4f}")
    plt.xlabel("cooling cycles in Ramsey gap")
    plt.ylabel("fringe amplitude / control")
    plt.legend()
    save(directory / "contrast_vs_cycles.png")


# ================================
# REPUMP SCAN
# ================================

def plot_repump(directory: Path):
    record = read_record(directory / "records" / "repump_scan.csv")
    truth = read_table(directory / "repump_truth.csv")
    p = fit_params(directory, "repump_scan")

    t = record.xs()
    p_down, p_up = float(record.metadata["p_shelve_down"]), float(record.metadata["p_shelve_up"])
    y = (record.fractions() - p_up) / (p_down - p_up)

    dense = np.linspace(t.min(), t.max(), 500)
    params = [p[name] for name in FIT_MODELS["repump"].param_names]

    plt.figure(figsize=(8, 4.5))
    plt.plot(t * 1e3, y, "o", ms=4, label="synthetic data (readout corrected)")
    plt.plot(dense * 1e3, FIT_MODELS["repump"].function(dense, params),
             label=f"fit: delta_q/2pi = {p['delta_q'] / (2 * np.pi):.0f} Hz, alpha = {p['alpha']:.1f} /s")
    plt.plot(truth["duration"] * 1e3, truth["p_f4"], "--", label="rate-equation truth")
    plt.xlabel("repump duration (ms)")
    plt.ylabel("P(F=4)")
    plt.legend()
    save(directory / "repump_scan.png")


# ================================
# GENERATE VISUALS
# ================================

if (FIG1 / "fits.csv").is_file():
    plot_sidebands(FIG1)
    plot_cooling(FIG1)

if (FIG2 / "fits.csv").is_file():
    plot_cooling(FIG2)
    plot_contrast(FIG2)

if (FIG3 / "fits.csv").is_file():
    plot_repump(FIG3)

print("Plots generated.")
