import logging
from functools import lru_cache
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from sympcool.config import NBAR_CONTINUOUS_RAMAN, NBAR_DOPPLER
from sympcool.core.motion import thermal_state
from sympcool.types import CoolingParams, FockDistribution


logger = logging.getLogger(__name__)


@lru_cache(maxsize=16)
def _diffusion_generator(n_max: int) -> np.ndarray:
    """
    Rate matrix of diagonal motional diffusion: n -> n+1 at rate (n+1),
    n -> n-1 at rate n. The mean grows by exactly one per unit strength
    away from the truncation edge. Columns sum to zero.
    """

    size = n_max + 1
    generator = np.zeros((size, size))

    for n in range(size):
        up = float(n + 1) if n < n_max else 0.0
        down = float(n)
        generator[n, n] = -(up + down)
        if n < n_max:
            generator[n + 1, n] = up
        if n > 0:
            generator[n - 1, n] = down

    generator.flags.writeable = False
    return generator


def diffuse(dist: FockDistribution, strength: float) -> FockDistribution:
    if strength < 0:
        raise ValueError(f"domain_error: diffusion strength must be non-negative, got {strength}")
    if strength == 0:
        return dist

    probs = expm(strength * _diffusion_generator(dist.n_max)) @ dist.probs
    probs = np.clip(probs, 0.0, None)
    return FockDistribution(probs=probs / probs.sum())


def transfer_fractions(n_max: int, params: CoolingParams, target_n: Optional[int] = None) -> np.ndarray:
    n = np.arange(n_max + 1, dtype=float)

    if params.idealized:
        fractions = np.ones_like(n)
    else:
        target = params.pulse_target_n if target_n is None else target_n
        fractions = np.sin((np.pi / 2) * np.sqrt(n / target)) ** 2

    fractions[0] = 0.0
    return fractions


def red_sideband_map(
    dist: FockDistribution,
    params: CoolingParams,
    target_n: Optional[int] = None,
) -> Tuple[FockDistribution, float]:
    """
    Red-sideband pi-pulse tuned to level `target_n`: level n hands the
    fraction sin^2(pi/2 sqrt(n / target_n)) down to n-1 with a spin flip.
    Returns the new distribution and the total spin-flipped fraction.
    """

    fractions = transfer_fractions(dist.n_max, params, target_n)
    moved = dist.probs * fractions

    probs = dist.probs - moved
    probs[:-1] += moved[1:]

    return FockDistribution(probs=probs), float(moved.sum())


def repump_map(dist: FockDistribution, params: CoolingParams) -> FockDistribution:
    # Spin-flipped population returns to the cooled state; only recoil touches motion.
    return diffuse(dist, params.photons_per_repump * params.eta_recoil**2)


def cooling_cycle(dist: FockDistribution, params: CoolingParams, cycle: int = 0) -> FockDistribution:
    cooled, _ = red_sideband_map(dist, params, params.target_for_cycle(cycle))
    repumped = repump_map(cooled, params)
    return diffuse(repumped, params.heating_rate * params.cycle_wall_time)


def run_cooling(dist: FockDistribution, params: CoolingParams, cycles: int) -> List[FockDistribution]:
    if cycles < 0:
        raise ValueError(f"domain_error: cycle count must be non-negative, got {cycles}")

    trajectory = [dist]
    for cycle in range(cycles):
        trajectory.append(cooling_cycle(trajectory[-1], params, cycle))

    return trajectory


def run_cooling_modes(
    dists: Sequence[FockDistribution],
    params_per_mode: Sequence[CoolingParams],
    cycles: int,
) -> List[List[FockDistribution]]:
    """
    Interleaved cooling of several modes: each cycle runs one sideband
    pulse and repump per mode in turn. Recoil from every repump heats
    every mode.
    """

    if len(dists) != len(params_per_mode):
        raise ValueError("domain_error: one parameter block per mode required")
    if cycles < 0:
        raise ValueError(f"domain_error: cycle count must be non-negative, got {cycles}")

    trajectories = [[d] for d in dists]

    for cycle in range(cycles):
        current = [t[-1] for t in trajectories]

        for k, params in enumerate(params_per_mode):
            current[k], _ = red_sideband_map(current[k], params, params.target_for_cycle(cycle))
            for j, spectator in enumerate(params_per_mode):
                current[j] = repump_map(current[j], spectator)

        for j, params in enumerate(params_per_mode):
            current[j] = diffuse(current[j], params.heating_rate * params.cycle_wall_time * len(params_per_mode))
            trajectories[j].append(current[j])

    return trajectories


def precool(
    stage: Literal["doppler", "continuous_raman"],
    n_max: int,
    nbar_doppler: float = NBAR_DOPPLER,
    nbar_continuous: float = NBAR_CONTINUOUS_RAMAN,
) -> FockDistribution:
    if stage == "doppler":
        return thermal_state(nbar_doppler, n_max)
    if stage == "continuous_raman":
        return thermal_state(nbar_continuous, n_max)
    raise ValueError(f"domain_error: unknown precooling stage '{stage}'")


def pi_pulse_duration(params: CoolingParams, target_n: int) -> float:
    if params.eta <= 0 or params.rabi_carrier <= 0:
        return 0.0
    return float(np.pi / (params.eta * params.rabi_carrier * np.sqrt(target_n)))
