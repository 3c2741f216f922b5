import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from sympcool.config import CONTROL_CONFIDENCE, TARGET_EPSILON
from sympcool.types import (
    GapOp,
    PulseErrors,
    QubitCoherence,
    RamseyFringe,
    ScatterBudget,
    ScatterParams,
)


logger = logging.getLogger(__name__)


def wrap_phase(phase: float) -> float:
    """Wraps to (-pi, pi]."""
    wrapped = math.remainder(phase, 2 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2 * math.pi
    return wrapped


# ============================================
# PHOTON SCATTERING PER COOLING CYCLE
# ============================================

def scattering_per_cycle(p: ScatterParams) -> ScatterBudget:
    """
    R = R_rsb + R_sigma, photons scattered by the memory ion per cycle.

    R_rsb = g * pi * Gamma / (eta * Delta) during the red-sideband pulse,
    R_sigma = h * (Gamma / 2 Delta_I)^2 per repump photon on the coolant.
    """

    r_rsb = p.g_factor * math.pi * p.gamma / (p.eta * p.delta)
    r_sigma = p.h_factor * (p.gamma / (2 * p.delta_I)) ** 2 * p.photons_per_repump
    r_total = r_rsb + r_sigma

    return ScatterBudget(
        r_rsb=r_rsb,
        r_sigma=r_sigma,
        r_total=r_total,
        r_decohering=r_total * (1.0 - p.elastic_fraction),
    )


def sweep_order_unity(
    p: ScatterParams,
    g_values: Iterable[float],
    h_values: Iterable[float],
) -> List[Dict[str, float]]:
    rows = []
    for g in g_values:
        for h in h_values:
            budget = scattering_per_cycle(p.model_copy(update={"g_factor": g, "h_factor": h}))
            rows.append({"g_factor": g, "h_factor": h, **budget.model_dump()})
    return rows


def calibrate_eps_raman(budget: ScatterBudget, target_eps: float = TARGET_EPSILON) -> float:
    """
    Phenomenological off-resonant Raman loss that brings the total
    per-cycle contrast loss to `target_eps`.
    """

    if not 0 <= target_eps < 1:
        raise ValueError(f"domain_error: target epsilon must lie in [0, 1), got {target_eps}")

    eps_raman = 1.0 - (1.0 - target_eps) / (1.0 - budget.r_decohering)

    if eps_raman < 0:
        logger.warning("scattering alone (%.4g) exceeds target epsilon %.4g", budget.r_decohering, target_eps)
        return 0.0

    return eps_raman


# ============================================
# LIGHT SHIFT AND COHERENCE BOOKKEEPING
# ============================================

def light_shift_phase(delta_q: float, duration: float) -> float:
    if duration < 0:
        raise ValueError(f"domain_error: duration must be non-negative, got {duration}")
    return delta_q * duration


def apply_cooling_decoherence(
    q: QubitCoherence,
    p: ScatterParams,
    eps_raman: float,
    delta_q: float,
    tau_sigma: float,
    leak: float = 0.0,
) -> QubitCoherence:
    if not 0 <= eps_raman <= 1 or not 0 <= leak <= 1:
        raise ValueError("domain_error: per-cycle losses must lie in [0, 1]")

    budget = scattering_per_cycle(p)
    population_leak = 1.0 - (1.0 - q.population_leak) * (1.0 - leak)
    contrast = q.contrast * (1.0 - budget.r_decohering) * (1.0 - eps_raman)

    return QubitCoherence(
        contrast=min(max(contrast, 0.0), 1.0 - population_leak),
        phase=q.phase + light_shift_phase(delta_q, tau_sigma),
        population_leak=population_leak,
    )


def apply_repump_only(
    q: QubitCoherence,
    p: ScatterParams,
    delta_q: float,
    tau_sigma: float,
) -> QubitCoherence:
    budget = scattering_per_cycle(p)
    contrast = q.contrast * (1.0 - budget.r_sigma * (1.0 - p.elastic_fraction))

    return QubitCoherence(
        contrast=max(contrast, 0.0),
        phase=q.phase + light_shift_phase(delta_q, tau_sigma),
        population_leak=q.population_leak,
    )


def gap_op_factor(op: GapOp, p: ScatterParams, eps_raman: float) -> float:
    if op.kind == "cooling":
        return (1.0 - scattering_per_cycle(p).r_decohering) * (1.0 - eps_raman)
    if op.kind == "repump":
        return 1.0 - scattering_per_cycle(p).r_sigma * (1.0 - p.elastic_fraction)
    return 1.0


def ramsey_sequence(
    q0: QubitCoherence,
    pulse_errors: Optional[PulseErrors],
    gap_ops: Sequence[GapOp],
    detuning: float,
    gap_time: float,
    p: ScatterParams,
    eps_raman: float = 0.0,
    delta_q: float = 0.0,
    tau_sigma: float = 0.0,
    clock_population: float = 1.0,
    pumping_leak: float = 0.0,
) -> RamseyFringe:
    """
    Fringe P(phi) = B + (C/2) cos(phi + accumulated phase) for a Ramsey
    sequence with the given operations inserted in the gap. Pulse area
    errors enter through the general two-pulse result; `clock_population`
    scales the fringe for partial preparation of the clock state, and
    `pumping_leak` moves that fraction of the clock population out of the
    manifold on every cooling operation.
    """

    pulses = pulse_errors or PulseErrors()

    q = q0
    for op in gap_ops:
        if op.kind == "cooling":
            q = apply_cooling_decoherence(q, p, eps_raman, delta_q, tau_sigma, leak=pumping_leak)
        elif op.kind == "repump":
            q = apply_repump_only(q, p, delta_q, tau_sigma)

    theta1, theta2 = pulses.first_area, pulses.second_area
    scale = clock_population * (1.0 - q.population_leak)

    offset = scale * (1.0 - math.cos(theta1) * math.cos(theta2)) / 2
    amplitude = scale * q.contrast * math.sin(theta1) * math.sin(theta2) / 2
    phase = q.phase + detuning * gap_time

    if amplitude < 0:
        amplitude, phase = -amplitude, phase + math.pi

    return RamseyFringe(
        offset=offset,
        amplitude=amplitude,
        phase=wrap_phase(phase),
        contrast=q.contrast,
    )


# ============================================
# REPUMP BOUNDS
# ============================================

def repump_scatter_rate(alpha: float, tau_sigma: float) -> float:
    """Photons scattered per repump pulse by an ion fully in the clock manifold."""
    if alpha < 0 or tau_sigma < 0:
        raise ValueError("domain_error: alpha and tau_sigma must be non-negative")
    return 2.0 * alpha * tau_sigma


def repump_decoherence_bound(beta: float, tau_sigma: float) -> float:
    if beta < 0 or tau_sigma < 0:
        raise ValueError("domain_error: beta and tau_sigma must be non-negative")
    return beta * tau_sigma


def control_epsilon_bound(
    ratio: float,
    sigma: float,
    pulses: int,
    confidence: float = CONTROL_CONFIDENCE,
) -> float:
    """
    One-sided upper bound on the per-pulse loss from a fringe amplitude
    ratio measured after `pulses` inserted pulses.
    """

    if pulses < 1 or sigma < 0 or not 0 < confidence < 1:
        raise ValueError("domain_error: need pulses >= 1, sigma >= 0, 0 < confidence < 1")

    lower = ratio - stats.norm.ppf(confidence) * sigma
    if lower <= 0:
        return 1.0
    if lower >= 1:
        return 0.0

    return 1.0 - lower ** (1.0 / pulses)


def addressing_crosstalk(separation: float, waist: float) -> float:
    if waist <= 0:
        raise ValueError(f"domain_error: beam waist must be positive, got {waist}")
    if separation < 0:
        raise ValueError(f"domain_error: separation must be non-negative, got {separation}")
    return math.exp(-2.0 * separation**2 / waist**2)


def gate_error_budget(eta: float, nbar: float, cycles: float, eps: float) -> Tuple[float, float]:
    if min(eta, nbar, cycles, eps) < 0:
        raise ValueError("domain_error: budget inputs must be non-negative")

    gamma_thermal = 0.3 * math.pi**2 * eta**4 * nbar * (nbar + 1.0)
    return gamma_thermal, gamma_thermal + cycles * eps
