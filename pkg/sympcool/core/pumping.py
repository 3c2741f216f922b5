"""
Rate-equation model of optical pumping of the 43Ca+ ground state by the
sigma-minus repump light tuned to the 40Ca+ S1/2 -> P1/2 line.

The light is far detuned from every 43Ca+ hyperfine component, so each
S1/2 |F, m> sublevel sees an off-resonant scattering rate and an AC Stark
shift. Scattering redistributes population over the ground sublevels
according to the excited-state branching ratios. The clock coherence
between |4, 0> and |3, 0> rotates at their differential shift.
"""

import logging
import math
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Rational
from sympy.physics.wigner import clebsch_gordan, wigner_6j

from sympcool.config import RK4_STEPS_PER_RATE
from sympcool.core.constants import default_constants
from sympcool.types import PumpingModel, PumpingScan


logger = logging.getLogger(__name__)


GROUND_LEVELS = (3, 4)
EXCITED_LEVELS = (3, 4)

# S1/2 sublevels in fixed order: F=3, m=-3..3 then F=4, m=-4..4.
SUBLEVELS: Tuple[Tuple[int, int], ...] = tuple(
    (f, m) for f in GROUND_LEVELS for m in range(-f, f + 1)
)
EXCITED: Tuple[Tuple[int, int], ...] = tuple(
    (f, m) for f in EXCITED_LEVELS for m in range(-f, f + 1)
)

CLOCK_UP = SUBLEVELS.index((3, 0))
CLOCK_DOWN = SUBLEVELS.index((4, 0))

# sigma-minus absorption lowers m by one
SIGMA_MINUS_Q = 1


def component_key(f_ground: int, f_excited: int) -> str:
    return f"{f_ground}:{f_excited}"


@lru_cache(maxsize=None)
def _clebsch_squared(f_excited: int, m_excited: int, q: int, f_ground: int, m_ground: int) -> float:
    # <F' m'; 1 q | F m>^2
    return float(clebsch_gordan(f_excited, 1, f_ground, m_excited, q, m_ground) ** 2)


def line_strength_from_6j(f_ground: int, f_excited: int, nuclear_spin: float) -> float:
    """(2F'+1)(2J+1){J J' 1; F' F I}^2 for the J = J' = 1/2 line."""
    half = Rational(1, 2)
    spin = Rational(int(round(2 * nuclear_spin)), 2)
    six_j = wigner_6j(half, half, 1, f_excited, f_ground, spin)
    return float((2 * f_excited + 1) * 2 * six_j**2)


def branching(model: PumpingModel, ground: Tuple[int, int], excited: Tuple[int, int]) -> float:
    """Decay fraction |F' m'> -> |F m>, equal to the relative coupling strength."""
    q = ground[1] - excited[1]
    if abs(q) > 1:
        return 0.0
    strength = model.relative_strengths[component_key(ground[0], excited[0])]
    return strength * _clebsch_squared(excited[0], excited[1], q, ground[0], ground[1])


def _couplings(model: PumpingModel) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Squared Rabi frequencies and detunings for every (ground, excited)
    pair driven by the sigma-minus beam, plus the full branching table.

    The coupling scale comes from the dipole constant alone, so the
    linewidth enters the shifts and rates only through the line shape.
    """

    scale = model.rabi_sq_per_intensity * model.intensity

    rabi_sq = np.zeros((len(SUBLEVELS), len(EXCITED)))
    detuning = np.ones((len(SUBLEVELS), len(EXCITED)))
    decay = np.zeros((len(SUBLEVELS), len(EXCITED)))

    for i, ground in enumerate(SUBLEVELS):
        for j, excited in enumerate(EXCITED):
            b = branching(model, ground, excited)
            decay[i, j] = b
            if ground[1] - excited[1] == SIGMA_MINUS_Q:
                rabi_sq[i, j] = scale * b
            detuning[i, j] = model.laser_detuning - model.component_detunings[component_key(ground[0], excited[0])]

    return rabi_sq, detuning, decay


def light_shifts(model: PumpingModel) -> np.ndarray:
    rabi_sq, detuning, _ = _couplings(model)
    return np.sum(rabi_sq * detuning / (4 * detuning**2 + model.gamma**2), axis=1)


def scattering_rates(model: PumpingModel) -> np.ndarray:
    """Off-resonant photon scattering rate from each ground sublevel via each excited sublevel."""
    rabi_sq, detuning, _ = _couplings(model)
    saturation = 2 * rabi_sq / model.gamma**2
    return (model.gamma / 2) * saturation / (1 + saturation + (2 * detuning / model.gamma) ** 2)


def rate_matrix(model: PumpingModel) -> np.ndarray:
    """W with dP/dt = W P; columns sum to zero."""
    rates = scattering_rates(model)
    _, _, decay = _couplings(model)

    # transfer[k, i]: rate from sublevel i into sublevel k
    transfer = decay @ rates.T
    np.fill_diagonal(transfer, 0.0)

    return transfer - np.diag(transfer.sum(axis=0))


def prepared_fill(clock_fraction: float) -> List[float]:
    """F=3 preparation: `clock_fraction` in |3, 0>, the rest spread evenly over F=3, m != 0."""
    if not 0 <= clock_fraction <= 1:
        raise ValueError(f"domain_error: clock fraction must lie in [0, 1], got {clock_fraction}")

    spectators = [k for k, (f, m) in enumerate(SUBLEVELS) if f == 3 and m != 0]
    fill = [0.0] * len(SUBLEVELS)
    fill[CLOCK_UP] = clock_fraction
    for k in spectators:
        fill[k] = (1.0 - clock_fraction) / len(spectators)
    return fill


def default_pumping_model(
    intensity: float,
    clock_fraction: float = 0.15,
    constants_table: Optional[Dict[str, float]] = None,
    **overrides,
) -> PumpingModel:
    c = constants_table if constants_table is not None else default_constants()

    fields = {
        "intensity": intensity,
        "gamma": c["gamma_p12"],
        "rabi_sq_per_intensity": c["rabi_sq_per_intensity"],
        "nuclear_spin": c["nuclear_spin_43"],
        "component_detunings": {
            component_key(fg, fe): c[f"offset_{fg}_{fe}"] for fg in GROUND_LEVELS for fe in EXCITED_LEVELS
        },
        "relative_strengths": {
            component_key(fg, fe): c[f"strength_{fg}_{fe}"] for fg in GROUND_LEVELS for fe in EXCITED_LEVELS
        },
        "zeeman_fill": prepared_fill(clock_fraction),
    }
    fields.update(overrides)
    return PumpingModel(**fields)


# ============================================
# DERIVED FIT-MODEL PARAMETERS
# ============================================

def differential_light_shift(model: PumpingModel) -> float:
    shifts = light_shifts(model)
    return float(abs(shifts[CLOCK_DOWN] - shifts[CLOCK_UP]))


def spectator_pumping_rate(model: PumpingModel) -> float:
    """Fill-weighted F=3 -> F=4 rate of the F=3, m != 0 sublevels."""
    w = rate_matrix(model)
    f4_rows = [k for k, (f, _) in enumerate(SUBLEVELS) if f == 4]
    to_f4 = w[f4_rows, :].sum(axis=0)

    spectators = [k for k, (f, m) in enumerate(SUBLEVELS) if f == 3 and m != 0]
    weights = np.array([model.zeeman_fill[k] for k in spectators])

    if weights.sum() <= 0:
        return 0.0
    return float(weights @ to_f4[spectators] / weights.sum())


def clock_decoherence_rate(model: PumpingModel) -> float:
    total = scattering_rates(model).sum(axis=1)
    return float((1.0 - model.elastic_fraction) * (total[CLOCK_UP] + total[CLOCK_DOWN]) / 2)


def intensity_from_light_shift(delta_q: float, model: PumpingModel) -> float:
    """Intensity that produces the differential light shift `delta_q` (linear far from saturation)."""
    if delta_q < 0:
        raise ValueError(f"domain_error: light shift magnitude must be non-negative, got {delta_q}")
    per_unit = differential_light_shift(model.model_copy(update={"intensity": 1.0}))
    if per_unit <= 0:
        raise ValueError("domain_error: configuration produces no differential light shift")
    return delta_q / per_unit


# ============================================
# RAMSEY SCAN WITH A REPUMP PULSE IN THE GAP
# ============================================

def _rk4_step(w: np.ndarray, p: np.ndarray, h: float) -> np.ndarray:
    k1 = w @ p
    k2 = w @ (p + 0.5 * h * k1)
    k3 = w @ (p + 0.5 * h * k2)
    k4 = w @ (p + h * k3)
    return p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_populations(model: PumpingModel, initial: np.ndarray, durations: np.ndarray) -> Tuple[np.ndarray, float]:
    w = rate_matrix(model)
    fastest = float(np.max(np.abs(np.diag(w)))) if w.size else 0.0
    max_step = 1.0 / (RK4_STEPS_PER_RATE * fastest) if fastest > 0 else np.inf

    populations = np.empty((durations.size, initial.size))
    p = initial.astype(float).copy()
    t = 0.0
    worst = abs(p.sum() - 1.0)

    for k, target in enumerate(durations):
        span = target - t
        steps = int(math.ceil(span / max_step)) if span > 0 and np.isfinite(max_step) else 0
        for _ in range(steps):
            p = _rk4_step(w, p, span / steps)
            worst = max(worst, abs(p.sum() - 1.0))
        t = target
        populations[k] = p

    return populations, worst


def pumping_scan(model: PumpingModel, durations: Sequence[float]) -> PumpingScan:
    """
    P(F=4) after the second Ramsey pulse versus repump duration, plus the
    equivalent parameters (alpha, delta_q, A, beta) of the empirical model
    (1 - exp(-alpha t)) + A [1 + exp(-beta t) cos(delta_q t)].
    """

    grid = np.asarray(durations, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or grid[0] < 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("domain_error: durations must be a non-empty ascending grid starting at t >= 0")

    fill = np.array(model.zeeman_fill, dtype=float)
    clock = fill[CLOCK_UP] + fill[CLOCK_DOWN]

    # First pi/2 pulse splits the clock population evenly.
    initial = fill.copy()
    initial[CLOCK_UP] = initial[CLOCK_DOWN] = clock / 2
    coherence = abs(fill[CLOCK_UP] - fill[CLOCK_DOWN]) / 2

    populations, worst = integrate_populations(model, initial, grid)

    delta_q = differential_light_shift(model)
    beta = clock_decoherence_rate(model)

    f4_spectators = [k for k, (f, m) in enumerate(SUBLEVELS) if f == 4 and m != 0]
    p_f4 = (
        populations[:, f4_spectators].sum(axis=1)
        + (populations[:, CLOCK_UP] + populations[:, CLOCK_DOWN]) / 2
        + coherence * np.exp(-beta * grid) * np.cos(delta_q * grid)
    )

    logger.debug("pumping scan: delta_q/2pi=%.1f Hz alpha=%.2f /s beta=%.2f /s", delta_q / (2 * math.pi), spectator_pumping_rate(model), beta)

    return PumpingScan(
        durations=grid,
        p_f4=p_f4,
        alpha=spectator_pumping_rate(model),
        delta_q=delta_q,
        amplitude=coherence,
        beta=beta,
        max_population_error=worst,
    )
