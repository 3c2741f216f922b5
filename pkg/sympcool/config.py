import math


TWO_PI = 2 * math.pi


# ============================================
# FILE LOCATIONS
# ============================================

CONSTANTS_FILE = "constants.txt"

CONSTANTS_ENV_VAR = "SYMPCOOL_CONSTANTS"
OUTPUT_DIR_ENV_VAR = "SYMPCOOL_OUTPUT_DIR"

DEFAULT_OUTPUT_DIR = "output"
RUN_LOG_NAME = "run_log.jsonl"


# ============================================
# CRYSTAL (SINGLE SOURCE OF TRUTH)
# ============================================

DEFAULT_SPECIES = {
    "coolant": {"name": "40Ca+", "mass": 40.0, "is_coolant": True},
    "memory": {"name": "43Ca+", "mass": 43.0, "is_coolant": False},
}

DEFAULT_TRAP = {
    "omega_r": TWO_PI * 700e3,
    "omega_z": TWO_PI * 500e3,
    "b_field": 0.17e-3,
}

# Raman beams cross at 60 degrees; the difference wavevector lies on the trap axis.
RAMAN_CROSSING_ANGLE = math.radians(60.0)


# ============================================
# MOTION
# ============================================

DEFAULT_N_MAX = 30

FOCK_TAIL_TOLERANCE = 1e-9
NORMALIZATION_TOLERANCE = 1e-9

PROBE_PULSE_DURATION = 24e-6

NBAR_DOPPLER = 12.0
NBAR_CONTINUOUS_RAMAN = 0.6


# ============================================
# COOLING
# ============================================

DEFAULT_COOLING = {
    "pulse_target_n": 1,
    "repump_duration": 10e-6,
    "photons_per_repump": 3.0,
    "eta_recoil": 0.1,
    "heating_rate": 0.0,
    "cycle_wall_time": 25e-6,
    "idealized": False,
    "retune_per_cycle": False,
    "retune_schedule": [2, 1],
}


# ============================================
# QUBIT / SCATTERING
# ============================================

DEFAULT_SCATTER = {
    "delta": TWO_PI * 30e9,
    "g_factor": 1.0,
    "h_factor": 1.0,
    "elastic_fraction": 0.0,
    # clock population pumped out of the manifold per cooling cycle
    "pumping_leak": 0.0,
    "photons_per_repump": 3.0,
    "target_epsilon": 0.033,
}

# Per-cycle contrast loss observed with sideband cooling inserted in the Ramsey gap.
TARGET_EPSILON = 0.033

# Differential light shift of the clock states at the repump operating point.
DEFAULT_DELTA_Q = TWO_PI * 623.0

DEFAULT_ALPHA = 21.0

CONTROL_CONFIDENCE = 0.95

# Repump term with pure polarizations: 1e-4 for 3 photons scattered by the coolant.
PURE_POLARIZATION_REPUMP_POINT = {
    "h_factor": 0.22707,
    "photons_per_repump": 3.0,
}


# ============================================
# OPTICAL PUMPING
# ============================================

NUCLEAR_SPIN_43 = 3.5

DEFAULT_PUMPING_INTENSITY = 10.6

DEFAULT_PUMPING = {
    "intensity": DEFAULT_PUMPING_INTENSITY,
    "laser_detuning": 0.0,
    "elastic_fraction": 0.0,
}

# Fixed-step RK4: step no larger than 1 / (RK4_STEPS_PER_RATE * fastest rate).
RK4_STEPS_PER_RATE = 50


# ============================================
# DETECTION
# ============================================

DEFAULT_DETECTION = {
    "p_shelve_down": 0.90,
    "p_shelve_up": 0.002,
    "shots_per_point": 500,
    "prep_clock_fraction": 0.15,
    "coolant_p_dark": 1.0,
    "coolant_p_bright": 0.0,
}

POINTS_PER_SCAN = 20


# ============================================
# FITTING
# ============================================

FIT_TOLERANCES = {
    "ftol": 1e-10,
    "xtol": 1e-12,
    "gtol": 1e-12,
    "max_iterations": 200,
    # largest residual-column cosine accepted as a stationary point
    "gradient_cosine": 1e-3,
    # weighted residual norm below which a fit is exact
    "residual_floor": 1e-8,
}

# Zero-padding factor for FFT frequency seeds.
FFT_PAD_FACTOR = 64

# Oscillation amplitude below which a light-shift frequency is not identifiable.
DEGENERATE_AMPLITUDE = 1e-6


# ============================================
# SELF-CHECK
# ============================================

SELFCHECK_TOLERANCES = {
    "mode_ratio_decimals": 2,
    "equal_mass": 1e-10,
    "thermometry_relative": 0.05,
    "jacobian_relative": 1e-6,
    "delta_q_relative": 0.05,
    "alpha_absolute": 3.0,
}


# ============================================
# BUDGET SWEEP
# ============================================

DEFAULT_BUDGET_AXES = {
    "eta": [0.1],
    "nbar": [1.0],
    "cycles": [10],
    "eps": [TARGET_EPSILON, 1e-4],
}

BUDGET_AXES = ("eta", "nbar", "cycles", "eps", "elastic_fraction")
