import logging

import numpy as np

from sympcool.config import DEFAULT_N_MAX, FOCK_TAIL_TOLERANCE
from sympcool.types import FockDistribution, SidebandEnum, SidebandScanModel


logger = logging.getLogger(__name__)


def thermal_state(nbar: float, n_max: int = DEFAULT_N_MAX) -> FockDistribution:
    if nbar < 0:
        raise ValueError(f"domain_error: nbar must be non-negative, got {nbar}")
    if n_max < 0:
        raise ValueError(f"domain_error: n_max must be non-negative, got {n_max}")

    n = np.arange(n_max + 1)

    if nbar == 0:
        probs = (n == 0).astype(float)
    else:
        # log form keeps large n_max finite
        log_ratio = np.log(nbar) - np.log(nbar + 1.0)
        weights = np.exp(n * log_ratio)
        probs = weights / weights.sum()

    if probs[-1] > FOCK_TAIL_TOLERANCE:
        logger.warning("thermal state nbar=%.3g truncated at n_max=%d leaves tail %.2e", nbar, n_max, probs[-1])

    return FockDistribution(probs=probs)


def fock_state(n: int, n_max: int = DEFAULT_N_MAX) -> FockDistribution:
    if not 0 <= n <= n_max:
        raise ValueError(f"domain_error: level {n} outside 0..{n_max}")
    probs = np.zeros(n_max + 1)
    probs[n] = 1.0
    return FockDistribution(probs=probs)


def mean_n(dist: FockDistribution) -> float:
    return float(np.arange(dist.probs.size) @ dist.probs)


def ground_state_fraction(dist: FockDistribution) -> float:
    return float(dist.probs[0])


def sideband_rabi_frequencies(n_max: int, model: SidebandScanModel, sideband: SidebandEnum) -> np.ndarray:
    n = np.arange(n_max + 1, dtype=float)

    if sideband == SidebandEnum.red:
        return model.eta * model.rabi_carrier * np.sqrt(n)
    if sideband == SidebandEnum.blue:
        return model.eta * model.rabi_carrier * np.sqrt(n + 1.0)
    return np.full_like(n, model.rabi_carrier)


def sideband_excitation(
    dist: FockDistribution,
    model: SidebandScanModel,
    detuning: float,
    sideband: SidebandEnum,
):
    """
    Excitation probability after a fixed-length probe pulse, averaged over
    the Fock distribution. `detuning` is measured from the resonance of the
    chosen sideband and may be an array.
    """

    rabi = sideband_rabi_frequencies(dist.n_max, model, sideband)
    delta = np.atleast_1d(np.asarray(detuning, dtype=float))

    rabi_sq = rabi[None, :] ** 2
    generalized_sq = rabi_sq + delta[:, None] ** 2

    with np.errstate(invalid="ignore", divide="ignore"):
        weight = np.where(generalized_sq > 0, rabi_sq / generalized_sq, 0.0)

    flop = np.sin(np.sqrt(generalized_sq) * model.pulse_duration / 2) ** 2
    excitation = np.clip((weight * flop) @ dist.probs, 0.0, 1.0)

    if np.ndim(detuning) == 0:
        return float(excitation[0])
    return excitation


def sideband_ratio(dist: FockDistribution, model: SidebandScanModel) -> float:
    red = sideband_excitation(dist, model, 0.0, SidebandEnum.red)
    blue = sideband_excitation(dist, model, 0.0, SidebandEnum.blue)
    if blue <= 0:
        raise ValueError("domain_error: blue sideband amplitude vanishes")
    return red / blue


def nbar_from_ratio(r: float) -> float:
    if r < 0:
        raise ValueError(f"domain_error: sideband ratio must be non-negative, got {r}")
    if r >= 1:
        raise ValueError(f"domain_error: sideband ratio {r} >= 1 is unphysical for a thermal state")
    return r / (1.0 - r)


def ratio_from_nbar(nbar: float) -> float:
    if nbar < 0:
        raise ValueError(f"domain_error: nbar must be non-negative, got {nbar}")
    return nbar / (nbar + 1.0)


def pi_time_rabi(eta: float, pulse_duration: float) -> float:
    """Carrier Rabi frequency that makes the probe a pi-pulse on the n=0 blue sideband."""
    if eta <= 0 or pulse_duration <= 0:
        raise ValueError("domain_error: eta and pulse duration must be positive")
    return np.pi / (eta * pulse_duration)
