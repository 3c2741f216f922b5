import logging
import math
from typing import Callable, Dict, List, Optional

import numpy as np

from sympcool.config import (
    DEFAULT_ALPHA,
    DEFAULT_DELTA_Q,
    DEFAULT_DETECTION,
    DEFAULT_PUMPING_INTENSITY,
    DEFAULT_TRAP,
    PROBE_PULSE_DURATION,
    RAMAN_CROSSING_ANGLE,
    SELFCHECK_TOLERANCES,
)
from sympcool.core.analysis import fit_sideband_scan
from sympcool.core.constants import load_constants
from sympcool.core.crystal import axial_modes, lamb_dicke, raman_wavenumber
from sympcool.core.fit_models import FIT_MODELS
from sympcool.core.measurement import synth_sideband_scan
from sympcool.core.motion import pi_time_rabi, thermal_state
from sympcool.core.pumping import default_pumping_model, differential_light_shift, spectator_pumping_rate
from sympcool.types import DetectionModel, ModeEnum, SidebandScanModel


logger = logging.getLogger(__name__)


CheckResult = Dict[str, object]


def _result(name: str, passed: bool, detail: str) -> CheckResult:
    return {"check": name, "passed": bool(passed), "detail": detail}


def check_mode_frequencies(constants: Dict[str, float]) -> CheckResult:
    decimals = SELFCHECK_TOLERANCES["mode_ratio_decimals"]
    modes = axial_modes(constants["mass_40"], constants["mass_43"], DEFAULT_TRAP["omega_z"])
    equal = axial_modes(40.0, 40.0, 1.0)

    mixed_ok = (round(modes.ratios[0], decimals), round(modes.ratios[1], decimals)) == (0.98, 1.70)
    equal_ok = (
        abs(equal.ratios[0] - 1.0) < SELFCHECK_TOLERANCES["equal_mass"]
        and abs(equal.ratios[1] - math.sqrt(3.0)) < SELFCHECK_TOLERANCES["equal_mass"]
    )

    return _result(
        "mode_frequencies",
        mixed_ok and equal_ok,
        f"ratios {modes.ratios[0]:.4f}, {modes.ratios[1]:.4f}; equal-mass {equal.ratios[1]:.12f}",
    )


def check_thermometry(constants: Dict[str, float]) -> CheckResult:
    modes = axial_modes(constants["mass_40"], constants["mass_43"], DEFAULT_TRAP["omega_z"])
    k_eff = raman_wavenumber(constants["lambda_397"], RAMAN_CROSSING_ANGLE)
    eta = lamb_dicke(modes, 1, k_eff, ModeEnum.out_of_phase)

    model = SidebandScanModel(
        pulse_duration=PROBE_PULSE_DURATION,
        rabi_carrier=pi_time_rabi(eta, PROBE_PULSE_DURATION),
        eta=eta,
        mode_freq=modes.frequency(ModeEnum.out_of_phase),
    )

    truth = 0.06
    record = synth_sideband_scan(thermal_state(truth), model, DetectionModel(**DEFAULT_DETECTION), seed=0, noiseless=True)
    fitted = fit_sideband_scan(record).derived["nbar"]
    error = abs(fitted - truth) / truth

    return _result(
        "thermometry_round_trip",
        error < SELFCHECK_TOLERANCES["thermometry_relative"],
        f"nbar {fitted:.5f} vs {truth} (relative error {error:.2e})",
    )


# Representative points inside each model's working range.
JACOBIAN_POINTS = {
    "sideband": (np.linspace(-900e3, 900e3, 61), [0.05, -851e3, 0.9, 851e3, 20e3], {"pulse_duration": 24e-6}),
    "ramsey": (np.linspace(0, 2 * math.pi, 20), [0.07, 0.06, 0.4], {}),
    "decay": (np.arange(0, 11, dtype=float), [0.9, 0.033], {}),
    "exponential": (np.arange(0, 11, dtype=float), [0.9, 0.034], {}),
    "repump": (np.linspace(0, 5e-3, 41), [21.0, 0.076, 60.0, 2 * math.pi * 623], {}),
    "baseline": (np.linspace(0, 5e-3, 41), [21.0], {}),
}


def jacobian_error(name: str, x: np.ndarray, params: List[float], fixed: Dict) -> float:
    """Largest relative gap between the analytic Jacobian and central differences."""

    model = FIT_MODELS[name]
    analytic = model.jacobian(x, params, **fixed)
    numeric = np.empty_like(analytic)

    for j, value in enumerate(params):
        step = 1e-6 * max(abs(value), 1e-3)
        up, down = list(params), list(params)
        up[j], down[j] = value + step, value - step
        numeric[:, j] = (model.function(x, up, **fixed) - model.function(x, down, **fixed)) / (2 * step)

    scale = np.maximum(np.abs(analytic).max(axis=0), 1e-12)
    return float(np.max(np.abs(analytic - numeric) / scale))


def check_jacobians(constants: Dict[str, float]) -> CheckResult:
    errors = {name: jacobian_error(name, *JACOBIAN_POINTS[name]) for name in FIT_MODELS}
    worst = max(errors, key=errors.get)
    return _result(
        "fit_jacobians",
        errors[worst] < SELFCHECK_TOLERANCES["jacobian_relative"],
        f"worst {worst} relative error {errors[worst]:.2e}",
    )


def check_light_shift(constants: Dict[str, float]) -> CheckResult:
    model = default_pumping_model(DEFAULT_PUMPING_INTENSITY, constants_table=constants)
    delta_q = differential_light_shift(model)
    error = abs(delta_q - DEFAULT_DELTA_Q) / DEFAULT_DELTA_Q
    return _result(
        "light_shift_delta_q",
        error < SELFCHECK_TOLERANCES["delta_q_relative"],
        f"delta_q/2pi {delta_q / (2 * math.pi):.1f} Hz",
    )


def check_pumping_rate(constants: Dict[str, float]) -> CheckResult:
    model = default_pumping_model(DEFAULT_PUMPING_INTENSITY, constants_table=constants)
    alpha = spectator_pumping_rate(model)
    return _result(
        "pumping_alpha",
        abs(alpha - DEFAULT_ALPHA) <= SELFCHECK_TOLERANCES["alpha_absolute"],
        f"alpha {alpha:.2f} /s",
    )


CHECKS: List[Callable[[Dict[str, float]], CheckResult]] = [
    check_mode_frequencies,
    check_thermometry,
    check_jacobians,
    check_light_shift,
    check_pumping_rate,
]


def run_selfcheck(constants_path: Optional[str] = None) -> List[CheckResult]:
    """
    Runs every built-in oracle check against the constants file. A missing
    or malformed constants file raises before any check runs.
    """

    constants = load_constants(constants_path)
    results = [_result("constants_load", True, f"{len(constants)} symbols")]

    for check in CHECKS:
        try:
            results.append(check(constants))
        except ValueError as e:
            results.append(_result(check.__name__.replace("check_", ""), False, str(e)))

    for r in results:
        log = logger.info if r["passed"] else logger.error
        log("selfcheck %-24s %s  %s", r["check"], "PASS" if r["passed"] else "FAIL", r["detail"])

    return results
