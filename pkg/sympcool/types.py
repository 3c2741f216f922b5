from enum import Enum
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from sympcool.config import NORMALIZATION_TOLERANCE


class SidebandEnum(str, Enum):
    red = "red"
    blue = "blue"
    carrier = "carrier"


class ModeEnum(str, Enum):
    in_phase = "in_phase"
    out_of_phase = "out_of_phase"


# ============================================
# CRYSTAL
# ============================================

class IonSpecies(BaseModel):
    name: str = Field(..., min_length=1)
    mass: float = Field(..., gt=0.0)
    is_coolant: bool = False


class TrapConfig(BaseModel):
    omega_r: float
    omega_z: float
    b_field: float = Field(0.0, ge=0.0)

    @model_validator(mode="after")
    def linear_trap_regime(self) -> "TrapConfig":
        if not self.omega_r > self.omega_z > 0:
            raise ValueError("domain_error: require omega_r > omega_z > 0")
        return self


class ModeStructure(BaseModel):
    masses: Tuple[float, float]
    omega_z: float = Field(..., gt=0.0)
    ratios: Tuple[float, float]
    frequencies: Tuple[float, float]
    mode_vectors: List[List[float]]
    lamb_dicke: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def ordered_modes(self) -> "ModeStructure":
        if not self.frequencies[0] < self.frequencies[1]:
            raise ValueError("domain_error: in-phase frequency must be below out-of-phase")
        if self.lamb_dicke is not None and any(e <= 0 for row in self.lamb_dicke for e in row):
            raise ValueError("domain_error: Lamb-Dicke parameters must be positive")
        return self

    def frequency(self, mode: ModeEnum) -> float:
        return self.frequencies[0 if mode == ModeEnum.in_phase else 1]

    def eta(self, ion_index: int, mode: ModeEnum) -> float:
        if self.lamb_dicke is None:
            raise ValueError("domain_error: Lamb-Dicke parameters not evaluated")
        return self.lamb_dicke[ion_index - 1][0 if mode == ModeEnum.in_phase else 1]


# ============================================
# MOTION
# ============================================

class FockDistribution(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    probs: np.ndarray

    @field_validator("probs", mode="before")
    @classmethod
    def normalized_vector(cls, v) -> np.ndarray:
        probs = np.array(v, dtype=float)

        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("domain_error: probabilities must be a non-empty vector")

        if np.any(probs < -1e-12):
            raise ValueError("domain_error: negative probability")

        probs = np.clip(probs, 0.0, None)

        if abs(probs.sum() - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValueError(f"domain_error: probabilities sum to {probs.sum():.12f}")

        probs.flags.writeable = False
        return probs

    @property
    def n_max(self) -> int:
        return self.probs.size - 1


class SidebandScanModel(BaseModel):
    pulse_duration: float = Field(..., gt=0.0)
    rabi_carrier: float = Field(..., gt=0.0)
    eta: float = Field(..., gt=0.0)
    mode_freq: float = Field(..., gt=0.0)


# ============================================
# COOLING
# ============================================

class CoolingParams(BaseModel):
    eta: float = Field(..., ge=0.0)
    rabi_carrier: float = Field(..., ge=0.0)
    pulse_target_n: int = Field(1, ge=1)
    repump_duration: float = Field(10e-6, ge=0.0)
    photons_per_repump: float = Field(3.0, ge=0.0)
    eta_recoil: float = Field(0.1, ge=0.0)
    heating_rate: float = Field(0.0, ge=0.0)
    cycle_wall_time: float = Field(0.0, ge=0.0)
    idealized: bool = False
    retune_per_cycle: bool = False
    retune_schedule: List[int] = Field(default_factory=lambda: [2, 1])

    @field_validator("retune_schedule")
    @classmethod
    def positive_targets(cls, v: List[int]) -> List[int]:
        if not v or any(n < 1 for n in v):
            raise ValueError("domain_error: retune schedule needs levels >= 1")
        return v

    def target_for_cycle(self, cycle: int) -> int:
        if not self.retune_per_cycle:
            return self.pulse_target_n
        return self.retune_schedule[cycle % len(self.retune_schedule)]


# ============================================
# QUBIT
# ============================================

class ScatterParams(BaseModel):
    gamma: float = Field(..., gt=0.0)
    delta: float = Field(..., gt=0.0)
    delta_I: float = Field(..., gt=0.0)
    g_factor: float = Field(1.0, gt=0.0)
    h_factor: float = Field(1.0, gt=0.0)
    eta: float = Field(..., gt=0.0)
    elastic_fraction: float = Field(0.0, ge=0.0, le=1.0)
    photons_per_repump: float = Field(3.0, ge=0.0)


class ScatterBudget(BaseModel):
    r_rsb: float = Field(..., ge=0.0)
    r_sigma: float = Field(..., ge=0.0)
    r_total: float = Field(..., ge=0.0)
    r_decohering: float = Field(..., ge=0.0)


class QubitCoherence(BaseModel):
    contrast: float = Field(1.0, ge=0.0, le=1.0)
    phase: float = 0.0
    population_leak: float = Field(0.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def leak_bookkeeping(self) -> "QubitCoherence":
        if self.contrast > 1.0 - self.population_leak + 1e-12:
            raise ValueError("domain_error: contrast exceeds population left in the clock manifold")
        return self


class GapOp(BaseModel):
    kind: Literal["cooling", "repump", "idle"]
    duration: float = Field(0.0, ge=0.0)


class PulseErrors(BaseModel):
    first_area: float = Field(np.pi / 2, ge=0.0)
    second_area: float = Field(np.pi / 2, ge=0.0)


class RamseyFringe(BaseModel):
    offset: float
    amplitude: float = Field(..., ge=0.0)
    phase: float
    contrast: float = Field(..., ge=0.0, le=1.0)

    def probability(self, analysis_phase):
        return self.offset + self.amplitude * np.cos(np.asarray(analysis_phase) + self.phase)


class PumpingModel(BaseModel):
    intensity: float = Field(..., ge=0.0)
    gamma: float = Field(..., gt=0.0)
    rabi_sq_per_intensity: float = Field(..., gt=0.0)
    component_detunings: Dict[str, float]
    relative_strengths: Dict[str, float]
    zeeman_fill: List[float]
    nuclear_spin: float = 3.5
    laser_detuning: float = 0.0
    elastic_fraction: float = Field(0.0, ge=0.0, le=1.0)

    @field_validator("relative_strengths")
    @classmethod
    def non_negative_strengths(cls, v: Dict[str, float]) -> Dict[str, float]:
        if any(s < 0 for s in v.values()):
            raise ValueError("domain_error: line strengths must be non-negative")
        return v

    @field_validator("zeeman_fill")
    @classmethod
    def normalized_fill(cls, v: List[float]) -> List[float]:
        if any(p < 0 for p in v) or abs(sum(v) - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValueError("domain_error: Zeeman populations must be non-negative and sum to 1")
        return v


class PumpingScan(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    durations: np.ndarray
    p_f4: np.ndarray
    alpha: float
    delta_q: float
    amplitude: float
    beta: float
    max_population_error: float


# ============================================
# MEASUREMENT
# ============================================

class DetectionModel(BaseModel):
    p_shelve_down: float = Field(0.90, ge=0.0, le=1.0)
    p_shelve_up: float = Field(0.002, ge=0.0, le=1.0)
    shots_per_point: int = Field(500, ge=1)
    prep_clock_fraction: float = Field(0.15, ge=0.0, le=1.0)
    coolant_p_dark: float = Field(1.0, ge=0.0, le=1.0)
    coolant_p_bright: float = Field(0.0, ge=0.0, le=1.0)


class RecordPoint(BaseModel):
    x: float
    successes: float = Field(..., ge=0.0)
    shots: int = Field(..., ge=1)

    @model_validator(mode="after")
    def bounded_count(self) -> "RecordPoint":
        if self.successes > self.shots:
            raise ValueError("record_error: success count exceeds shots")
        return self


class ExperimentRecord(BaseModel):
    scan_variable: str
    unit: str
    points: List[RecordPoint] = Field(..., min_length=1)
    seed: int
    metadata: Dict[str, str] = Field(default_factory=dict)

    def xs(self) -> np.ndarray:
        return np.array([p.x for p in self.points])

    def fractions(self) -> np.ndarray:
        return np.array([p.successes / p.shots for p in self.points])

    def shots(self) -> np.ndarray:
        return np.array([p.shots for p in self.points], dtype=float)

    def successes(self) -> np.ndarray:
        return np.array([p.successes for p in self.points])


# ============================================
# ANALYSIS
# ============================================

class FitResult(BaseModel):
    model_name: str
    params: Dict[str, float]
    sigmas: Dict[str, float]
    covariance: List[List[float]]
    residual_norm: float = Field(..., ge=0.0)
    converged: bool
    iterations: int = Field(..., ge=0)
    gradient_norm: float = Field(0.0, ge=0.0)
    flags: List[str] = Field(default_factory=list)
    derived: Dict[str, float] = Field(default_factory=dict)
    derived_sigmas: Dict[str, float] = Field(default_factory=dict)

    @field_validator("sigmas")
    @classmethod
    def non_negative_sigmas(cls, v: Dict[str, float]) -> Dict[str, float]:
        if any(s < 0 for s in v.values()):
            raise ValueError("fit_error: negative uncertainty")
        return v


# ============================================
# ERRORS
# ============================================

class ErrorReport(BaseModel):
    error: str
    error_type: Literal[
        "domain_error",
        "config_error",
        "constants_error",
        "record_error",
        "fit_error",
        "selfcheck_failure",
        "logging_failure",
        "internal_error",
    ]


# ============================================
# EXPERIMENT CONFIG
# ============================================

class StageEnum(str, Enum):
    precool = "precool"
    sideband_cool = "sideband_cool"
    sideband_scan = "sideband_scan"
    ramsey_decay = "ramsey_decay"
    repump_control = "repump_control"
    repump_scan = "repump_scan"


class SpeciesSection(BaseModel):
    coolant: IonSpecies
    memory: IonSpecies


class CoolingSection(BaseModel):
    pulse_target_n: int = Field(1, ge=1)
    repump_duration: float = Field(10e-6, ge=0.0)
    photons_per_repump: float = Field(3.0, ge=0.0)
    eta_recoil: float = Field(0.1, ge=0.0)
    heating_rate: float = Field(0.0, ge=0.0)
    cycle_wall_time: float = Field(25e-6, ge=0.0)
    idealized: bool = False
    retune_per_cycle: bool = False
    retune_schedule: List[int] = Field(default_factory=lambda: [2, 1])
    probe_duration: float = Field(24e-6, gt=0.0)
    n_max: int = Field(30, ge=1)


class ScatterSection(BaseModel):
    delta: float = Field(..., gt=0.0)
    g_factor: float = Field(1.0, gt=0.0)
    h_factor: float = Field(1.0, gt=0.0)
    elastic_fraction: float = Field(0.0, ge=0.0, le=1.0)
    pumping_leak: float = Field(0.0, ge=0.0, le=1.0)
    photons_per_repump: float = Field(3.0, ge=0.0)
    target_epsilon: float = Field(0.033, ge=0.0, lt=1.0)


class PumpingSection(BaseModel):
    intensity: float = Field(10.6, ge=0.0)
    laser_detuning: float = 0.0
    elastic_fraction: float = Field(0.0, ge=0.0, le=1.0)


class SequenceSection(BaseModel):
    stages: List[StageEnum] = Field(..., min_length=1)
    seed: int = Field(..., ge=0)
    precool: Literal["doppler", "continuous_raman"] = "continuous_raman"
    cycles: int = Field(10, ge=0)
    cooling_modes: List[ModeEnum] = Field(default_factory=lambda: [ModeEnum.in_phase, ModeEnum.out_of_phase])
    scan_modes: List[ModeEnum] = Field(default_factory=lambda: [ModeEnum.in_phase, ModeEnum.out_of_phase])
    points: int = Field(20, ge=4)
    cycle_counts: List[int] = Field(default_factory=lambda: [0, 2, 4, 6, 8, 10])
    repeats: int = Field(1, ge=1)
    repump_pulses: int = Field(10, ge=1)
    repump_start: float = Field(0.0, ge=0.0)
    repump_stop: float = Field(5e-3, gt=0.0)
    repump_points: int = Field(41, ge=6)
    noiseless: bool = False
    readout_corrected: bool = False
    workers: int = Field(4, ge=1)

    @model_validator(mode="after")
    def coherent_sequence(self) -> "SequenceSection":
        if len(set(self.stages)) != len(self.stages):
            raise ValueError("stages must not repeat")
        if any(n < 0 for n in self.cycle_counts):
            raise ValueError("cycle_counts must be non-negative")
        if StageEnum.ramsey_decay in self.stages and len(set(self.cycle_counts)) < 3:
            raise ValueError("ramsey_decay needs at least 3 distinct cycle_counts")
        if self.repump_stop <= self.repump_start:
            raise ValueError("repump_stop must exceed repump_start")
        return self


class OutputSection(BaseModel):
    directory: str = Field("output", min_length=1)
    label: str = Field("run", min_length=1)


class ExperimentConfig(BaseModel):
    trap: TrapConfig
    species: SpeciesSection
    cooling: CoolingSection = Field(default_factory=CoolingSection)
    scatter: ScatterSection
    detection: DetectionModel = Field(default_factory=DetectionModel)
    pumping: PumpingSection = Field(default_factory=PumpingSection)
    sequence: SequenceSection
    output: OutputSection = Field(default_factory=OutputSection)
    config_hash: str = ""
