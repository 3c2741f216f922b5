"""
Fit model families with analytic Jacobians.

Every model is `f(x, params, **fixed)`, its Jacobian `jac(x, params, **fixed)`
returns an array of shape (len(x), len(params)).
"""

from typing import Callable, Dict, NamedTuple, Tuple

import numpy as np


TWO_PI = 2 * np.pi


class FitModel(NamedTuple):
    name: str
    param_names: Tuple[str, ...]
    function: Callable
    jacobian: Callable


# ============================================
# RABI LINESHAPE (one sideband)
# ============================================

def rabi_lineshape(x, amplitude, center, width, pulse_duration):
    """A * (W^2 / R^2) * sin^2(R t / 2), W = 2 pi width, R^2 = W^2 + (2 pi (x - center))^2."""
    w = TWO_PI * width
    d = TWO_PI * (np.asarray(x, dtype=float) - center)
    r = np.sqrt(w**2 + d**2)
    return amplitude * (w**2 / r**2) * np.sin(r * pulse_duration / 2) ** 2


def rabi_lineshape_partials(x, amplitude, center, width, pulse_duration):
    t = pulse_duration
    w = TWO_PI * width
    d = TWO_PI * (np.asarray(x, dtype=float) - center)
    r2 = w**2 + d**2
    r = np.sqrt(r2)

    u = w**2 / r2
    s = np.sin(r * t / 2) ** 2
    ds_dr = (t / 2) * np.sin(r * t)

    du_dw = 2 * w * d**2 / r2**2
    du_dd = -2 * w**2 * d / r2**2

    d_amplitude = u * s
    d_center = -TWO_PI * amplitude * (du_dd * s + u * ds_dr * d / r)
    d_width = TWO_PI * amplitude * (du_dw * s + u * ds_dr * w / r)

    return d_amplitude, d_center, d_width


def sideband_pair(x, params, pulse_duration):
    """Red and blue sidebands sharing one Rabi width: params (A_red, c_red, A_blue, c_blue, width)."""
    a_red, c_red, a_blue, c_blue, width = params
    return (
        rabi_lineshape(x, a_red, c_red, width, pulse_duration)
        + rabi_lineshape(x, a_blue, c_blue, width, pulse_duration)
    )


def sideband_pair_jacobian(x, params, pulse_duration):
    a_red, c_red, a_blue, c_blue, width = params
    ra, rc, rw = rabi_lineshape_partials(x, a_red, c_red, width, pulse_duration)
    ba, bc, bw = rabi_lineshape_partials(x, a_blue, c_blue, width, pulse_duration)
    return np.column_stack([ra, rc, ba, bc, rw + bw])


# ============================================
# RAMSEY FRINGE
# ============================================

def fringe(x, params):
    offset, amplitude, phase = params
    return offset + amplitude * np.cos(np.asarray(x, dtype=float) + phase)


def fringe_jacobian(x, params):
    _, amplitude, phase = params
    arg = np.asarray(x, dtype=float) + phase
    return np.column_stack([np.ones_like(arg), np.cos(arg), -amplitude * np.sin(arg)])


# ============================================
# CONTRAST DECAY
# ============================================

def contrast_decay(n, params):
    a0, eps = params
    return a0 * (1.0 - eps) ** np.asarray(n, dtype=float)


def contrast_decay_jacobian(n, params):
    a0, eps = params
    n = np.asarray(n, dtype=float)
    return np.column_stack([
        (1.0 - eps) ** n,
        -a0 * n * (1.0 - eps) ** (n - 1.0),
    ])


def exponential_decay(n, params):
    a0, rate = params
    return a0 * np.exp(-rate * np.asarray(n, dtype=float))


def exponential_decay_jacobian(n, params):
    a0, rate = params
    n = np.asarray(n, dtype=float)
    e = np.exp(-rate * n)
    return np.column_stack([e, -a0 * n * e])


# ============================================
# REPUMP SCAN
# ============================================

def repump_curve(t, params):
    """(1 - exp(-alpha t)) + A [1 + exp(-beta t) cos(delta_q t)]"""
    alpha, amplitude, beta, delta_q = params
    t = np.asarray(t, dtype=float)
    return (1.0 - np.exp(-alpha * t)) + amplitude * (1.0 + np.exp(-beta * t) * np.cos(delta_q * t))


def repump_curve_jacobian(t, params):
    alpha, amplitude, beta, delta_q = params
    t = np.asarray(t, dtype=float)
    decay = np.exp(-beta * t)
    return np.column_stack([
        t * np.exp(-alpha * t),
        1.0 + decay * np.cos(delta_q * t),
        -amplitude * t * decay * np.cos(delta_q * t),
        -amplitude * t * decay * np.sin(delta_q * t),
    ])


def baseline_curve(t, params):
    (alpha,) = params
    return 1.0 - np.exp(-alpha * np.asarray(t, dtype=float))


def baseline_curve_jacobian(t, params):
    (alpha,) = params
    t = np.asarray(t, dtype=float)
    return (t * np.exp(-alpha * t))[:, None]


FIT_MODELS: Dict[str, FitModel] = {
    "sideband": FitModel("sideband", ("a_red", "c_red", "a_blue", "c_blue", "width"), sideband_pair, sideband_pair_jacobian),
    "ramsey": FitModel("ramsey", ("offset", "amplitude", "phase"), fringe, fringe_jacobian),
    "decay": FitModel("decay", ("a0", "epsilon"), contrast_decay, contrast_decay_jacobian),
    "exponential": FitModel("exponential", ("a0", "rate"), exponential_decay, exponential_decay_jacobian),
    "repump": FitModel("repump", ("alpha", "amplitude", "beta", "delta_q"), repump_curve, repump_curve_jacobian),
    "baseline": FitModel("baseline", ("alpha",), baseline_curve, baseline_curve_jacobian),
}
