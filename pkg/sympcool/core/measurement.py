import logging
import math
from typing import Callable, Dict, Literal, Optional, Sequence

import numpy as np
from scipy import stats

from sympcool.config import POINTS_PER_SCAN
from sympcool.core.motion import sideband_excitation
from sympcool.types import (
    DetectionModel,
    ExperimentRecord,
    FockDistribution,
    RamseyFringe,
    RecordPoint,
    SidebandEnum,
    SidebandScanModel,
)


logger = logging.getLogger(__name__)


Readout = Literal["qubit", "coolant"]


# ============================================
# RANDOM STREAMS
# ============================================

def point_rng(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for one scan point."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


# ============================================
# DETECTION
# ============================================

def effective_probability(p_true: float, det: DetectionModel, readout: Readout = "qubit") -> float:
    if not -1e-12 <= p_true <= 1 + 1e-12:
        raise ValueError(f"domain_error: probability {p_true} outside [0, 1]")
    p_true = min(max(p_true, 0.0), 1.0)

    if readout == "qubit":
        # shelved (dark) when the ion was in F=4
        return p_true * det.p_shelve_down + (1.0 - p_true) * det.p_shelve_up
    return p_true * det.coolant_p_dark + (1.0 - p_true) * det.coolant_p_bright


def sample_point(
    p_true: float,
    det: DetectionModel,
    rng_seed: int,
    index: int = 0,
    readout: Readout = "qubit",
    noiseless: bool = False,
) -> float:
    p_eff = effective_probability(p_true, det, readout)

    if noiseless:
        return p_eff * det.shots_per_point

    return float(point_rng(rng_seed, index).binomial(det.shots_per_point, p_eff))


def _record(
    scan_variable: str,
    unit: str,
    xs: np.ndarray,
    truth: np.ndarray,
    det: DetectionModel,
    seed: int,
    readout: Readout,
    noiseless: bool,
    metadata: Dict[str, str],
) -> ExperimentRecord:
    points = [
        RecordPoint(
            x=float(x),
            successes=sample_point(float(p), det, seed, k, readout, noiseless),
            shots=det.shots_per_point,
        )
        for k, (x, p) in enumerate(zip(xs, truth))
    ]

    header = {
        "readout": readout,
        "noiseless": str(noiseless).lower(),
        "p_shelve_down": repr(det.p_shelve_down),
        "p_shelve_up": repr(det.p_shelve_up),
        "coolant_p_dark": repr(det.coolant_p_dark),
        "coolant_p_bright": repr(det.coolant_p_bright),
    }
    header.update(metadata)

    return ExperimentRecord(scan_variable=scan_variable, unit=unit, points=points, seed=seed, metadata=header)


# ============================================
# SYNTHETIC SCANS
# ============================================

def sideband_grid(mode_freq_hz: float, pulse_duration: float, points: int = POINTS_PER_SCAN) -> np.ndarray:
    """Red then blue sideband detunings (Hz from the carrier), `points` each."""
    half_span = 1.2 / pulse_duration
    offsets = np.linspace(-half_span, half_span, points)
    return np.concatenate([-mode_freq_hz + offsets, mode_freq_hz + offsets])


def sideband_truth(dist: FockDistribution, model: SidebandScanModel, grid_hz: np.ndarray) -> np.ndarray:
    mode_hz = model.mode_freq / (2 * math.pi)
    red = sideband_excitation(dist, model, 2 * math.pi * (grid_hz + mode_hz), SidebandEnum.red)
    blue = sideband_excitation(dist, model, 2 * math.pi * (grid_hz - mode_hz), SidebandEnum.blue)
    return np.clip(np.atleast_1d(red) + np.atleast_1d(blue), 0.0, 1.0)


def synth_sideband_scan(
    dist: FockDistribution,
    model: SidebandScanModel,
    det: DetectionModel,
    seed: int,
    grid: Optional[Sequence[float]] = None,
    noiseless: bool = False,
    metadata: Optional[Dict[str, str]] = None,
) -> ExperimentRecord:
    mode_hz = model.mode_freq / (2 * math.pi)
    xs = np.asarray(grid, dtype=float) if grid is not None else sideband_grid(mode_hz, model.pulse_duration)
    if xs.size == 0:
        raise ValueError("domain_error: empty scan grid")

    meta = {
        "experiment": "sideband",
        "pulse_duration": repr(model.pulse_duration),
        "mode_freq_hz": repr(mode_hz),
    }
    meta.update(metadata or {})

    return _record("raman_detuning", "Hz", xs, sideband_truth(dist, model, xs), det, seed, "coolant", noiseless, meta)


def ramsey_grid(points: int = POINTS_PER_SCAN) -> np.ndarray:
    return np.linspace(0.0, 2 * math.pi, points, endpoint=False)


def synth_ramsey_scan(
    fringe: RamseyFringe,
    det: DetectionModel,
    seed: int,
    grid: Optional[Sequence[float]] = None,
    noiseless: bool = False,
    metadata: Optional[Dict[str, str]] = None,
) -> ExperimentRecord:
    xs = np.asarray(grid, dtype=float) if grid is not None else ramsey_grid()
    if xs.size == 0:
        raise ValueError("domain_error: empty scan grid")

    meta = {"experiment": "ramsey"}
    meta.update(metadata or {})

    truth = np.clip(fringe.probability(xs), 0.0, 1.0)
    return _record("analysis_phase", "rad", xs, truth, det, seed, "qubit", noiseless, meta)


def synth_repump_scan(
    truth: Callable[[np.ndarray], np.ndarray],
    durations: Sequence[float],
    det: DetectionModel,
    seed: int,
    noiseless: bool = False,
    metadata: Optional[Dict[str, str]] = None,
) -> ExperimentRecord:
    xs = np.asarray(durations, dtype=float)
    if xs.size == 0:
        raise ValueError("domain_error: empty scan grid")

    meta = {"experiment": "repump"}
    meta.update(metadata or {})

    # The empirical curve may exceed 1 near t=0; probabilities are clipped for sampling.
    p = np.clip(truth(xs), 0.0, 1.0)
    return _record("repump_duration", "s", xs, p, det, seed, "qubit", noiseless, meta)


# ============================================
# READOUT CORRECTION AND CALIBRATION
# ============================================

def correct_readout(fractions: np.ndarray, p_dark_given_true: float, p_dark_given_false: float) -> np.ndarray:
    span = p_dark_given_true - p_dark_given_false
    if span <= 0:
        raise ValueError("domain_error: readout fidelities do not separate the two outcomes")
    return (np.asarray(fractions) - p_dark_given_false) / span


def record_readout_pair(record: ExperimentRecord) -> tuple:
    meta = record.metadata
    if meta.get("readout") == "coolant":
        return float(meta["coolant_p_dark"]), float(meta["coolant_p_bright"])
    return float(meta.get("p_shelve_down", 1.0)), float(meta.get("p_shelve_up", 0.0))


def randomized_pit_zscores(
    counts: np.ndarray,
    shots: np.ndarray,
    p_eff: np.ndarray,
    seed: int,
) -> np.ndarray:
    """
    Randomized probability-integral transform of binomial counts, mapped to
    normal scores. Exactly standard normal when the counts follow the
    assumed binomial law.
    """

    rng = np.random.default_rng(seed)
    lower = stats.binom.cdf(np.asarray(counts) - 1, shots, p_eff)
    upper = stats.binom.cdf(counts, shots, p_eff)
    u = lower + rng.uniform(size=np.shape(counts)) * (upper - lower)
    return stats.norm.ppf(np.clip(u, 1e-300, 1 - 1e-16))
