import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from sympcool.config import NBAR_DOPPLER, RAMAN_CROSSING_ANGLE
from sympcool.core.analysis import fit_batch, fit_contrast_decay, fit_repump_scan
from sympcool.core.constants import load_constants
from sympcool.core.cooling import precool, run_cooling_modes
from sympcool.core.crystal import axial_modes, raman_wavenumber, with_lamb_dicke
from sympcool.core.measurement import (
    ramsey_grid,
    sideband_grid,
    synth_ramsey_scan,
    synth_repump_scan,
    synth_sideband_scan,
)
from sympcool.core.motion import ground_state_fraction, mean_n, pi_time_rabi, thermal_state
from sympcool.core.pumping import (
    clock_decoherence_rate,
    default_pumping_model,
    differential_light_shift,
    pumping_scan,
    spectator_pumping_rate,
)
from sympcool.core.qubit import (
    calibrate_eps_raman,
    control_epsilon_bound,
    ramsey_sequence,
    repump_decoherence_bound,
    repump_scatter_rate,
    scattering_per_cycle,
)
from sympcool.core.records import fits_to_frame, write_record, write_report, write_table
from sympcool.types import (
    CoolingParams,
    ExperimentConfig,
    ExperimentRecord,
    FitResult,
    FockDistribution,
    GapOp,
    ModeEnum,
    ModeStructure,
    PumpingModel,
    QubitCoherence,
    RamseyFringe,
    ScatterParams,
    SidebandScanModel,
    StageEnum,
)


logger = logging.getLogger(__name__)


STAGE_KEYS = {stage: k for k, stage in enumerate(StageEnum)}


def stage_seed(seed: int, stage: StageEnum, *indices: int) -> int:
    """Deterministic per-record seed from the run seed, stage and record indices."""
    sequence = np.random.SeedSequence([seed, STAGE_KEYS[stage], *indices])
    return int(sequence.generate_state(1, np.uint32)[0])


# ============================================
# PARAMETER BLOCKS FROM A CONFIG
# ============================================

def build_modes(config: ExperimentConfig, constants: Dict[str, float]) -> ModeStructure:
    modes = axial_modes(config.species.coolant.mass, config.species.memory.mass, config.trap.omega_z)
    k_eff = raman_wavenumber(constants["lambda_397"], RAMAN_CROSSING_ANGLE)
    return with_lamb_dicke(modes, k_eff)


def cooling_params(config: ExperimentConfig, modes: ModeStructure, mode: ModeEnum) -> CoolingParams:
    eta = modes.eta(1, mode)
    fields = config.cooling.model_dump(exclude={"probe_duration", "n_max"})
    return CoolingParams(eta=eta, rabi_carrier=pi_time_rabi(eta, config.cooling.probe_duration), **fields)


def probe_model(config: ExperimentConfig, modes: ModeStructure, mode: ModeEnum) -> SidebandScanModel:
    eta = modes.eta(1, mode)
    return SidebandScanModel(
        pulse_duration=config.cooling.probe_duration,
        rabi_carrier=pi_time_rabi(eta, config.cooling.probe_duration),
        eta=eta,
        mode_freq=modes.frequency(mode),
    )


def scatter_params(config: ExperimentConfig, modes: ModeStructure, constants: Dict[str, float]) -> ScatterParams:
    # The gap cooling cycle drives the first listed cooling mode; the nearest
    # 43Ca+ component sets the isotope detuning of the repump light.
    gap_mode = config.sequence.cooling_modes[0] if config.sequence.cooling_modes else ModeEnum.out_of_phase
    delta_iso = min(abs(constants[f"offset_{fg}_{fe}"]) for fg in (3, 4) for fe in (3, 4))

    return ScatterParams(
        gamma=constants["gamma_p12"],
        delta=config.scatter.delta,
        delta_I=delta_iso,
        g_factor=config.scatter.g_factor,
        h_factor=config.scatter.h_factor,
        eta=modes.eta(1, gap_mode),
        elastic_fraction=config.scatter.elastic_fraction,
        photons_per_repump=config.scatter.photons_per_repump,
    )


def pumping_model(config: ExperimentConfig, constants: Dict[str, float]) -> PumpingModel:
    return default_pumping_model(
        config.pumping.intensity,
        clock_fraction=config.detection.prep_clock_fraction,
        constants_table=constants,
        laser_detuning=config.pumping.laser_detuning,
        elastic_fraction=config.pumping.elastic_fraction,
    )


# ============================================
# HELPERS
# ============================================

def _weighted_mean(values: Sequence[float], sigmas: Sequence[float]) -> Tuple[float, float]:
    w = 1.0 / np.square(np.asarray(sigmas, dtype=float))
    mean = float(np.sum(w * np.asarray(values, dtype=float)) / np.sum(w))
    return mean, float(1.0 / math.sqrt(np.sum(w)))


def _ratio(num: Tuple[float, float], den: Tuple[float, float]) -> Tuple[float, float]:
    ratio = num[0] / den[0]
    return ratio, abs(ratio) * math.hypot(num[1] / num[0], den[1] / den[0])


class RunContext:
    """Mutable state threaded through the stages of one run."""

    def __init__(self, config: ExperimentConfig, constants: Dict[str, float]):
        self.config = config
        self.constants = constants
        self.seed = config.sequence.seed
        self.out = Path(config.output.directory)
        self.header = {
            "config_hash": config.config_hash,
            "seed": str(self.seed),
            "label": config.output.label,
        }

        self.modes = build_modes(config, constants)
        self.states: Dict[ModeEnum, FockDistribution] = {}
        self.outputs: List[Path] = []
        self.fits: List[FitResult] = []
        self.fit_labels: List[str] = []
        self.summary: List[Dict[str, object]] = []

    def table(self, frame: pd.DataFrame, name: str) -> Path:
        path = write_table(frame, self.out / name, self.header)
        self.outputs.append(path)
        return path

    def record(self, record: ExperimentRecord, name: str) -> Path:
        extra = {"config_hash": self.header["config_hash"], "run_seed": self.header["seed"], "label": self.header["label"]}
        path = write_record(record, self.out / "records" / name, extra)
        self.outputs.append(path)
        return path

    def fit(self, result: FitResult, label: str) -> None:
        self.fits.append(result)
        self.fit_labels.append(label)

    def report(self, quantity: str, value: float, sigma: float = math.nan, truth: float = math.nan) -> None:
        self.summary.append({"quantity": quantity, "value": value, "sigma": sigma, "truth": truth})

    def state(self, mode: ModeEnum) -> FockDistribution:
        if mode not in self.states:
            self.states[mode] = thermal_state(NBAR_DOPPLER, self.config.cooling.n_max)
        return self.states[mode]


# ============================================
# STAGES
# ============================================

def stage_precool(ctx: RunContext) -> None:
    seq = ctx.config.sequence
    for mode in set(seq.cooling_modes) | set(seq.scan_modes):
        ctx.states[mode] = precool(seq.precool, ctx.config.cooling.n_max)


def stage_sideband_cool(ctx: RunContext) -> None:
    modes = ctx.config.sequence.cooling_modes
    params = [cooling_params(ctx.config, ctx.modes, mode) for mode in modes]
    trajectories = run_cooling_modes([ctx.state(m) for m in modes], params, ctx.config.sequence.cycles)

    rows = []
    for mode, trajectory in zip(modes, trajectories):
        ctx.states[mode] = trajectory[-1]
        rows.extend(
            {"cycle": n, "mode": mode.value, "nbar": mean_n(d), "ground_state_fraction": ground_state_fraction(d)}
            for n, d in enumerate(trajectory)
        )
        ctx.report(f"nbar_cooled_{mode.value}", mean_n(trajectory[-1]))
        ctx.report(f"ground_state_fraction_{mode.value}", ground_state_fraction(trajectory[-1]))
        logger.info("cooled %s mode: nbar %.4f after %d cycles", mode.value, mean_n(trajectory[-1]), len(trajectory) - 1)

    ctx.table(pd.DataFrame(rows), "cooling_trajectory.csv")


def stage_sideband_scan(ctx: RunContext) -> None:
    seq = ctx.config.sequence
    records = []

    for j, mode in enumerate(seq.scan_modes):
        model = probe_model(ctx.config, ctx.modes, mode)
        grid = sideband_grid(model.mode_freq / (2 * math.pi), model.pulse_duration, seq.points)
        record = synth_sideband_scan(
            ctx.state(mode), model, ctx.config.detection,
            seed=stage_seed(ctx.seed, StageEnum.sideband_scan, j),
            grid=grid, noiseless=seq.noiseless, metadata={"mode": mode.value},
        )
        ctx.record(record, f"sideband_{mode.value}.csv")
        records.append(record)

    results = fit_batch(records, "sideband", seq.workers, seq.readout_corrected)

    for mode, result in zip(seq.scan_modes, results):
        ctx.fit(result, f"sideband_{mode.value}")
        ctx.report(
            f"nbar_fit_{mode.value}",
            result.derived["nbar"],
            result.derived_sigmas["nbar"],
            mean_n(ctx.state(mode)),
        )


def _ramsey_fits(ctx: RunContext, fringes: Dict[str, RamseyFringe], stage: StageEnum, prefix: str) -> Dict[str, List[FitResult]]:
    seq = ctx.config.sequence
    keys, records = [], []

    for r in range(seq.repeats):
        for k, (key, fringe) in enumerate(fringes.items()):
            record = synth_ramsey_scan(
                fringe, ctx.config.detection,
                seed=stage_seed(ctx.seed, stage, k, r),
                grid=ramsey_grid(seq.points), noiseless=seq.noiseless,
                metadata={"gap": key, "repeat": str(r)},
            )
            ctx.record(record, f"{prefix}_{key}_r{r}.csv")
            keys.append(key)
            records.append(record)

    grouped: Dict[str, List[FitResult]] = {key: [] for key in fringes}
    for key, result in zip(keys, fit_batch(records, "ramsey", seq.workers, seq.readout_corrected)):
        grouped[key].append(result)
    return grouped


def _coherence_inputs(ctx: RunContext) -> Tuple[ScatterParams, float, float, float]:
    scatter = scatter_params(ctx.config, ctx.modes, ctx.constants)
    eps_raman = calibrate_eps_raman(scattering_per_cycle(scatter), ctx.config.scatter.target_epsilon)
    delta_q = differential_light_shift(pumping_model(ctx.config, ctx.constants))
    return scatter, eps_raman, delta_q, ctx.config.cooling.repump_duration


def stage_ramsey_decay(ctx: RunContext) -> None:
    seq = ctx.config.sequence
    scatter, eps_raman, delta_q, tau = _coherence_inputs(ctx)
    budget = scattering_per_cycle(scatter)

    ctx.report("r_rsb", budget.r_rsb)
    ctx.report("r_sigma", budget.r_sigma)
    ctx.report("eps_raman", eps_raman)

    def fringe(cycles: int) -> RamseyFringe:
        ops = [GapOp(kind="cooling", duration=ctx.config.cooling.cycle_wall_time)] * cycles
        return ramsey_sequence(
            QubitCoherence(), None, ops, 0.0, 0.0, scatter,
            eps_raman=eps_raman, delta_q=delta_q, tau_sigma=tau,
            clock_population=ctx.config.detection.prep_clock_fraction,
            pumping_leak=ctx.config.scatter.pumping_leak,
        )

    counts = sorted(set(seq.cycle_counts))
    fringes = {"control": fringe(0)}
    fringes.update({f"N{n}": fringe(n) for n in counts})
    grouped = _ramsey_fits(ctx, fringes, StageEnum.ramsey_decay, "ramsey_cycles")

    control = _weighted_mean(
        [f.params["amplitude"] for f in grouped["control"]],
        [f.sigmas["amplitude"] for f in grouped["control"]],
    )

    rows, cycles, amplitudes, sigmas = [], [], [], []
    for n in counts:
        for r, result in enumerate(grouped[f"N{n}"]):
            ctx.fit(result, f"ramsey_N{n}_r{r}")
            cycles.append(n)
            amplitudes.append(result.params["amplitude"])
            sigmas.append(result.sigmas["amplitude"])
            rows.append({
                "cycles": n,
                "repeat": r,
                "amplitude": result.params["amplitude"],
                "sigma_amplitude": result.sigmas["amplitude"],
                "normalized": result.params["amplitude"] / control[0],
                "phase": result.params["phase"],
                "sigma_phase": result.sigmas["phase"],
                "truth_contrast": fringes[f"N{n}"].contrast,
                "truth_phase": fringes[f"N{n}"].phase,
            })

    ctx.table(pd.DataFrame(rows), "contrast_vs_cycles.csv")

    decay = fit_contrast_decay(cycles, amplitudes, sigmas, control=control[0], control_sigma=control[1])
    ctx.fit(decay, "contrast_decay")
    ctx.report("epsilon", decay.params["epsilon"], decay.sigmas["epsilon"], ctx.config.scatter.target_epsilon)
    ctx.report("epsilon_from_rate", decay.derived["epsilon_from_rate"], decay.derived_sigmas["epsilon_from_rate"])
    logger.info("contrast loss per cycle: %.4f +/- %.4f", decay.params["epsilon"], decay.sigmas["epsilon"])


def stage_repump_control(ctx: RunContext) -> None:
    seq = ctx.config.sequence
    scatter, _, delta_q, tau = _coherence_inputs(ctx)
    pump = pumping_model(ctx.config, ctx.constants)

    def fringe(ops: Sequence[GapOp]) -> RamseyFringe:
        return ramsey_sequence(
            QubitCoherence(), None, ops, 0.0, 0.0, scatter,
            delta_q=delta_q, tau_sigma=tau,
            clock_population=ctx.config.detection.prep_clock_fraction,
            pumping_leak=ctx.config.scatter.pumping_leak,
        )

    pulses = seq.repump_pulses
    fringes = {"control": fringe([]), "pumped": fringe([GapOp(kind="repump", duration=tau)] * pulses)}
    grouped = _ramsey_fits(ctx, fringes, StageEnum.repump_control, "repump_control")

    def pooled(key: str) -> Tuple[float, float]:
        for r, result in enumerate(grouped[key]):
            ctx.fit(result, f"repump_{key}_r{r}")
        return _weighted_mean(
            [f.params["amplitude"] for f in grouped[key]],
            [f.sigmas["amplitude"] for f in grouped[key]],
        )

    control, pumped = pooled("control"), pooled("pumped")
    ratio, sigma = _ratio(pumped, control)
    bound = control_epsilon_bound(ratio, sigma, pulses)

    alpha, beta = spectator_pumping_rate(pump), clock_decoherence_rate(pump)
    truth_loss = 1.0 - fringes["pumped"].contrast

    ctx.table(pd.DataFrame([{
        "pulses": pulses,
        "amplitude_ratio": ratio,
        "sigma_ratio": sigma,
        "epsilon_upper_bound": bound,
        "truth_contrast_loss": truth_loss,
        "alpha": alpha,
        "scatter_per_pulse": repump_scatter_rate(alpha, tau),
        "beta": beta,
        "decoherence_per_pulse": repump_decoherence_bound(beta, tau),
    }]), "repump_control.csv")

    ctx.report("repump_amplitude_ratio", ratio, sigma, 1.0 - truth_loss)
    ctx.report("repump_epsilon_bound", bound)


def stage_repump_scan(ctx: RunContext) -> None:
    seq = ctx.config.sequence
    pump = pumping_model(ctx.config, ctx.constants)

    durations = np.linspace(seq.repump_start, seq.repump_stop, seq.repump_points)
    scan = pumping_scan(pump, durations)

    record = synth_repump_scan(
        lambda t: np.interp(t, scan.durations, scan.p_f4),
        durations, ctx.config.detection,
        seed=stage_seed(ctx.seed, StageEnum.repump_scan),
        noiseless=seq.noiseless,
        metadata={"intensity": repr(pump.intensity)},
    )
    ctx.record(record, "repump_scan.csv")

    ctx.table(pd.DataFrame({"duration": scan.durations, "p_f4": scan.p_f4}), "repump_truth.csv")

    result = fit_repump_scan(record, seq.readout_corrected)
    ctx.fit(result, "repump_scan")

    truth = {"alpha": scan.alpha, "amplitude": scan.amplitude, "beta": scan.beta, "delta_q": scan.delta_q}
    for name, value in truth.items():
        ctx.report(f"repump_{name}", result.params[name], result.sigmas[name], value)


STAGES = {
    StageEnum.precool: stage_precool,
    StageEnum.sideband_cool: stage_sideband_cool,
    StageEnum.sideband_scan: stage_sideband_scan,
    StageEnum.ramsey_decay: stage_ramsey_decay,
    StageEnum.repump_control: stage_repump_control,
    StageEnum.repump_scan: stage_repump_scan,
}


# ============================================
# RUN
# ============================================

def run(config: ExperimentConfig, constants: Optional[Dict[str, float]] = None) -> Dict:
    """
    Executes the declared stages in order and writes records, fit tables,
    a summary table and a manifest under the configured output directory.
    """

    ctx = RunContext(config, constants if constants is not None else load_constants())

    # ============================================
    # STEP 1: Stages in declared order
    # ============================================

    for stage in config.sequence.stages:
        logger.info("stage %s", stage.value)
        STAGES[stage](ctx)

    # ============================================
    # STEP 2: Fit tables and report
    # ============================================

    if ctx.fits:
        ctx.table(fits_to_frame(ctx.fits, ctx.fit_labels), "fits.csv")
        report = write_report(ctx.fits, ctx.fit_labels, ctx.out / "fits_report.txt", ctx.header)
        ctx.outputs.append(report)

    # ============================================
    # STEP 3: Summary and manifest
    # ============================================

    summary = pd.DataFrame(ctx.summary, columns=["quantity", "value", "sigma", "truth"])
    ctx.table(summary, "summary.csv")

    manifest = pd.DataFrame([
        {"file": str(p.relative_to(ctx.out)), "columns": ";".join(pd.read_csv(p, comment="#", nrows=0).columns)}
        for p in ctx.outputs
        if p.suffix == ".csv"
    ])
    ctx.table(manifest, "manifest.csv")

    return {
        "outputs": ctx.outputs,
        "summary": summary,
        "fits": dict(zip(ctx.fit_labels, ctx.fits)),
        "states": ctx.states,
        "config_hash": config.config_hash,
        "seed": ctx.seed,
    }
