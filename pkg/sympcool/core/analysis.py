import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from sympcool.config import DEGENERATE_AMPLITUDE, FFT_PAD_FACTOR, FIT_TOLERANCES
from sympcool.core.fit_models import FIT_MODELS, FitModel
from sympcool.core.measurement import correct_readout, record_readout_pair
from sympcool.core.qubit import wrap_phase
from sympcool.types import ExperimentRecord, FitResult


logger = logging.getLogger(__name__)


# ============================================
# WEIGHTED DAMPED LEAST SQUARES
# ============================================

def binomial_sigmas(successes: np.ndarray, shots: np.ndarray) -> np.ndarray:
    # +1/2 count regularization keeps empty and full points finite
    p = (successes + 0.5) / (shots + 1.0)
    return np.sqrt(p * (1.0 - p) / shots)


class ScanData(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    sigma: np.ndarray
    shots: np.ndarray
    readout: Tuple[float, float]


def _record_data(record: ExperimentRecord, readout_corrected: bool) -> ScanData:
    readout = record_readout_pair(record) if readout_corrected else (1.0, 0.0)
    span = readout[0] - readout[1]

    y = correct_readout(record.fractions(), *readout)
    sigma = binomial_sigmas(record.successes(), record.shots()) / span

    return ScanData(record.xs(), y, sigma, record.shots(), readout)


def model_sigmas(p_model: np.ndarray, data: ScanData) -> np.ndarray:
    """Binomial errors of the expected counts under the fitted model, in corrected units."""
    p_true, p_false = data.readout
    p_detected = np.clip(p_false + (p_true - p_false) * np.asarray(p_model), 0.0, 1.0)
    return binomial_sigmas(p_detected * data.shots, data.shots) / (p_true - p_false)


def least_squares_fit(
    model: FitModel,
    x: np.ndarray,
    y: np.ndarray,
    sigma: np.ndarray,
    p0: Sequence[float],
    bounds: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    relative_sigma: bool = False,
    **fixed,
) -> FitResult:
    """
    Levenberg-Marquardt fit of `model` to (x, y) with per-point standard
    errors. Bounded problems use the trust-region reflective variant.

    Covariance is (J^T W J)^-1 with the supplied errors taken as absolute.
    With `relative_sigma` the errors only set relative weights and the
    covariance is rescaled by chi^2 / dof.

    `gradient_norm` is the largest cosine between the residual vector and a
    Jacobian column of a parameter off its bounds; a fit counts as converged
    only when it sits below FIT_TOLERANCES["gradient_cosine"] or the
    residual vanishes.
    """

    weights = 1.0 / np.asarray(sigma, dtype=float)

    def residual(p):
        return (model.function(x, p, **fixed) - y) * weights

    def jacobian(p):
        return model.jacobian(x, p, **fixed) * weights[:, None]

    tolerances = dict(
        ftol=FIT_TOLERANCES["ftol"],
        xtol=FIT_TOLERANCES["xtol"],
        gtol=FIT_TOLERANCES["gtol"],
        x_scale="jac",
    )

    if bounds is None:
        solution = least_squares(
            residual, np.asarray(p0, dtype=float), jac=jacobian, method="lm",
            max_nfev=FIT_TOLERANCES["max_iterations"] * (len(p0) + 1), **tolerances,
        )
    else:
        solution = least_squares(
            residual, np.asarray(p0, dtype=float), jac=jacobian, method="trf", bounds=bounds,
            max_nfev=FIT_TOLERANCES["max_iterations"], **tolerances,
        )

    j = jacobian(solution.x)
    chi2 = float(solution.fun @ solution.fun)
    covariance = np.linalg.pinv(j.T @ j)
    covariance = 0.5 * (covariance + covariance.T)

    dof = len(y) - len(p0)
    if relative_sigma and dof > 0:
        covariance = covariance * chi2 / dof

    sigmas = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    gradient_norm = _gradient_cosine(j, solution.fun, np.asarray(solution.active_mask) == 0)

    converged = solution.status > 0 and (
        gradient_norm <= FIT_TOLERANCES["gradient_cosine"] or math.sqrt(chi2) <= FIT_TOLERANCES["residual_floor"]
    )

    flags = []
    if not converged:
        flags.append("not_converged")
        logger.warning("%s fit did not converge: %s (gradient %.2e)", model.name, solution.message, gradient_norm)

    return FitResult(
        model_name=model.name,
        params=dict(zip(model.param_names, map(float, solution.x))),
        sigmas=dict(zip(model.param_names, map(float, sigmas))),
        covariance=covariance.tolist(),
        residual_norm=math.sqrt(chi2),
        converged=converged,
        iterations=int(solution.nfev),
        gradient_norm=gradient_norm,
        flags=flags,
    )


def _gradient_cosine(j: np.ndarray, r: np.ndarray, free: np.ndarray) -> float:
    r_norm = np.linalg.norm(r)
    col_norms = np.linalg.norm(j, axis=0)
    usable = free & (col_norms > 0)

    if r_norm == 0 or not np.any(usable):
        return 0.0
    return float(np.max(np.abs(j.T @ r)[usable] / (col_norms[usable] * r_norm)))


def reweighted_fit(
    model: FitModel,
    data: ScanData,
    p0: Sequence[float],
    bounds: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    **fixed,
) -> FitResult:
    """
    Fit with count-based weights, then refit once with weights taken from the
    fitted model so that downward fluctuations do not buy extra weight.
    """

    first = least_squares_fit(model, data.x, data.y, data.sigma, p0, bounds, **fixed)
    params = list(first.params.values())
    sigma = model_sigmas(model.function(data.x, params, **fixed), data)
    return least_squares_fit(model, data.x, data.y, sigma, params, bounds, **fixed)


# ============================================
# SIDEBAND THERMOMETRY
# ============================================

def fit_sideband_scan(record: ExperimentRecord, readout_corrected: bool = False) -> FitResult:
    """
    Simultaneous fit of red and blue sideband lineshapes sharing one Rabi
    width, then nbar = r / (1 - r) from the amplitude ratio r.
    """

    if "pulse_duration" not in record.metadata:
        raise ValueError("record_error: sideband record lacks 'pulse_duration' metadata")
    pulse_duration = float(record.metadata["pulse_duration"])

    data = _record_data(record, readout_corrected)
    x, y = data.x, data.y
    red, blue = x < 0, x > 0
    if red.sum() < 3 or blue.sum() < 3:
        raise ValueError("fit_error: record must cover both red (x < 0) and blue (x > 0) sidebands")

    def peak_seed(mask):
        k = np.flatnonzero(mask)[np.argmax(y[mask])]
        return max(float(y[k]), 1e-6), float(x[k])

    a_red, c_red = peak_seed(red)
    a_blue, c_blue = peak_seed(blue)
    width = 1.0 / (2 * pulse_duration)

    result = reweighted_fit(
        FIT_MODELS["sideband"], data, [a_red, c_red, a_blue, c_blue, width],
        pulse_duration=pulse_duration,
    )

    params, cov = result.params, np.array(result.covariance)
    a_red, a_blue = params["a_red"], params["a_blue"]
    flags = list(result.flags)

    if a_blue <= 0:
        raise ValueError("fit_error: blue sideband amplitude is not positive")

    ratio = a_red / a_blue
    grad = np.zeros(len(params))
    grad[0], grad[2] = 1.0 / a_blue, -a_red / a_blue**2
    sigma_ratio = float(math.sqrt(max(grad @ cov @ grad, 0.0)))

    if ratio < 0:
        flags.append("negative_ratio_clamped")
        ratio = 0.0

    if ratio >= 1:
        flags.append("unbounded_nbar")
        nbar, sigma_nbar = math.inf, math.inf
    else:
        nbar = ratio / (1.0 - ratio)
        sigma_nbar = sigma_ratio / (1.0 - ratio) ** 2

    return result.model_copy(update={
        "flags": flags,
        "derived": {"r": ratio, "nbar": nbar},
        "derived_sigmas": {"r": sigma_ratio, "nbar": sigma_nbar},
    })


# ============================================
# RAMSEY FRINGES
# ============================================

def fit_ramsey_fringe(record: ExperimentRecord, readout_corrected: bool = False) -> FitResult:
    data = _record_data(record, readout_corrected)
    x, y, sigma = data.x, data.y, data.sigma

    if x.size < 4:
        raise ValueError("fit_error: a fringe fit needs at least 4 points")

    order = np.sort(x)
    spacing = float(np.median(np.diff(order))) if x.size > 1 else 0.0
    if order[-1] - order[0] + spacing < 2 * math.pi - 1e-9:
        raise ValueError("fit_error: scan does not span one fringe period")

    # Linear seed: y = o + c1 cos(x) - c2 sin(x) with c1 = a cos(phi), c2 = a sin(phi).
    basis = np.column_stack([np.ones_like(x), np.cos(x), -np.sin(x)]) / sigma[:, None]
    (offset, c1, c2), *_ = np.linalg.lstsq(basis, y / sigma, rcond=None)

    result = reweighted_fit(
        FIT_MODELS["ramsey"], data, [offset, math.hypot(c1, c2), math.atan2(c2, c1)],
    )

    params = dict(result.params)
    if params["amplitude"] < 0:
        params["amplitude"] = -params["amplitude"]
        params["phase"] += math.pi
    params["phase"] = wrap_phase(params["phase"])

    return result.model_copy(update={"params": params})


# ============================================
# CONTRAST DECAY PER COOLING CYCLE
# ============================================

def fit_contrast_decay(
    cycles: Sequence[float],
    amplitudes: Sequence[float],
    sigmas: Optional[Sequence[float]] = None,
    control: float = 1.0,
    control_sigma: float = 0.0,
) -> FitResult:
    """
    A(N) = A0 (1 - eps)^N on amplitudes normalized to the control fringe.
    The exponential form A0 exp(-k N) is fitted alongside and reported as
    derived `rate` and `epsilon_from_rate`. Without `sigmas` the points are
    weighted equally and the uncertainties come from the scatter about the fit.
    """

    n = np.asarray(cycles, dtype=float)
    amp = np.asarray(amplitudes, dtype=float)

    if n.size != amp.size:
        raise ValueError("fit_error: cycles and amplitudes differ in length")
    if np.unique(n).size < 3:
        raise ValueError("fit_error: need at least 3 distinct cycle counts")
    if np.any(amp <= 0) or control <= 0:
        raise ValueError("fit_error: amplitudes must be positive")

    sig = np.ones_like(amp) if sigmas is None else np.asarray(sigmas, dtype=float)
    y = amp / control
    sigma = np.sqrt((sig / control) ** 2 + (amp * control_sigma / control**2) ** 2)

    slope, intercept = np.polyfit(n, np.log(y), 1, w=y / sigma)
    eps_seed = 1.0 - math.exp(slope)
    a0_seed = math.exp(intercept)

    relative = sigmas is None
    primary = least_squares_fit(FIT_MODELS["decay"], n, y, sigma, [a0_seed, eps_seed], relative_sigma=relative)
    exponential = least_squares_fit(FIT_MODELS["exponential"], n, y, sigma, [a0_seed, -slope], relative_sigma=relative)

    rate = exponential.params["rate"]
    return primary.model_copy(update={
        "derived": {"rate": rate, "epsilon_from_rate": 1.0 - math.exp(-rate)},
        "derived_sigmas": {
            "rate": exponential.sigmas["rate"],
            "epsilon_from_rate": math.exp(-rate) * exponential.sigmas["rate"],
        },
        "flags": primary.flags + exponential.flags,
    })


# ============================================
# REPUMP SCAN (light shift, pumping baseline)
# ============================================

def fft_frequency_seed(t: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """Angular frequency and amplitude of the strongest oscillation after removing a quadratic trend."""

    order = np.argsort(t)
    t, y = t[order], y[order]

    uniform = np.linspace(t[0], t[-1], t.size)
    values = np.interp(uniform, t, y)
    values = values - np.polyval(np.polyfit(uniform, values, 2), uniform)

    step = uniform[1] - uniform[0]
    size = FFT_PAD_FACTOR * values.size
    spectrum = np.abs(np.fft.rfft(values, n=size))
    freqs = np.fft.rfftfreq(size, d=step)

    k = int(np.argmax(spectrum[1:]) + 1)
    return 2 * math.pi * float(freqs[k]), 2 * float(spectrum[k]) / values.size


def fit_repump_scan(record: ExperimentRecord, readout_corrected: bool = False) -> FitResult:
    """Four-parameter fit of (1 - exp(-alpha t)) + A [1 + exp(-beta t) cos(delta_q t)]."""

    data = _record_data(record, readout_corrected)
    t, y, sigma = data.x, data.y, data.sigma
    if t.size < 6:
        raise ValueError("fit_error: repump scan needs at least 6 points")

    slope, intercept = np.polyfit(t, y, 1, w=1.0 / sigma)
    delta_q, _ = fft_frequency_seed(t, y)

    p0 = [max(slope, 0.0), max(intercept, 0.0), 10.0, delta_q]
    bounds = ([-np.inf, -np.inf, 0.0, 0.0], [np.inf, np.inf, np.inf, np.inf])
    result = reweighted_fit(FIT_MODELS["repump"], data, p0, bounds=bounds)

    flags = list(result.flags)
    amplitude, sigma_amplitude = result.params["amplitude"], result.sigmas["amplitude"]

    if abs(amplitude) <= max(DEGENERATE_AMPLITUDE, 2.0 * sigma_amplitude):
        flags.append("degenerate_delta_q")
        logger.warning("light-shift oscillation not resolved (A=%.3g +/- %.3g); fitting baseline only", amplitude, sigma_amplitude)
        baseline = reweighted_fit(FIT_MODELS["baseline"], data, [max(slope, 0.0)])
        return baseline.model_copy(update={
            "model_name": "repump",
            "params": {"alpha": baseline.params["alpha"], "amplitude": 0.0, "beta": 0.0, "delta_q": math.nan},
            "sigmas": {"alpha": baseline.sigmas["alpha"], "amplitude": 0.0, "beta": 0.0, "delta_q": math.nan},
            "flags": flags + baseline.flags,
        })

    if result.params["beta"] == 0.0:
        flags.append("beta_floored")

    periods = (t.max() - t.min()) * result.params["delta_q"] / (2 * math.pi)
    if periods < 2:
        flags.append("short_scan")

    return result.model_copy(update={
        "flags": flags,
        "derived": {"delta_q_hz": result.params["delta_q"] / (2 * math.pi)},
        "derived_sigmas": {"delta_q_hz": result.sigmas["delta_q"] / (2 * math.pi)},
    })


# ============================================
# BATCH FITTING
# ============================================

FITTERS: Dict[str, Callable[..., FitResult]] = {
    "sideband": fit_sideband_scan,
    "ramsey": fit_ramsey_fringe,
    "repump": fit_repump_scan,
}


def fit_batch(
    records: Sequence[ExperimentRecord],
    model: str,
    workers: int = 4,
    readout_corrected: bool = False,
) -> List[FitResult]:
    if model not in FITTERS:
        raise ValueError(f"fit_error: unknown fit model '{model}'")

    fitter = FITTERS[model]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(lambda r: fitter(r, readout_corrected), records))
