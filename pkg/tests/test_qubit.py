import math

import pytest
from scipy import stats

from sympcool.config import PURE_POLARIZATION_REPUMP_POINT
from sympcool.core.qubit import (
    addressing_crosstalk,
    apply_cooling_decoherence,
    calibrate_eps_raman,
    control_epsilon_bound,
    gap_op_factor,
    gate_error_budget,
    light_shift_phase,
    ramsey_sequence,
    repump_decoherence_bound,
    repump_scatter_rate,
    scattering_per_cycle,
    sweep_order_unity,
    wrap_phase,
)
from sympcool.types import GapOp, PulseErrors, QubitCoherence


def test_scattering_terms_at_30_ghz(scatter):
    budget = scattering_per_cycle(scatter)
    assert budget.r_rsb == pytest.approx(0.01595, rel=2e-3)
    assert budget.r_sigma == pytest.approx(4.404e-4, rel=2e-3)
    assert budget.r_total == pytest.approx(budget.r_rsb + budget.r_sigma)
    assert budget.r_decohering == pytest.approx(budget.r_total)


def test_repump_term_with_pure_polarizations(scatter):
    budget = scattering_per_cycle(scatter.model_copy(update=PURE_POLARIZATION_REPUMP_POINT))
    assert budget.r_sigma == pytest.approx(1e-4, rel=1e-3)


def test_elastic_scatter_does_not_decohere(scatter):
    budget = scattering_per_cycle(scatter.model_copy(update={"elastic_fraction": 1.0}))
    assert budget.r_decohering == 0.0
    assert budget.r_total > 0


def test_order_unity_sweep_is_cartesian(scatter):
    rows = sweep_order_unity(scatter, [0.5, 1.0, 2.0], [0.5, 1.0])
    assert len(rows) == 6
    rsb = {row["g_factor"]: row["r_rsb"] for row in rows}
    assert rsb[2.0] == pytest.approx(4 * rsb[0.5])


def test_calibrated_raman_loss_hits_target(scatter):
    budget = scattering_per_cycle(scatter)
    eps_raman = calibrate_eps_raman(budget, 0.033)
    assert (1 - budget.r_decohering) * (1 - eps_raman) == pytest.approx(1 - 0.033)
    assert 0 < eps_raman < 0.033


def test_calibration_floors_at_zero_when_scattering_dominates(scatter, caplog):
    assert calibrate_eps_raman(scattering_per_cycle(scatter), 0.001) == 0.0
    assert "exceeds target" in caplog.text
    with pytest.raises(ValueError, match="domain_error"):
        calibrate_eps_raman(scattering_per_cycle(scatter), 1.0)


def test_repump_light_shift_phase_per_pulse():
    assert light_shift_phase(2 * math.pi * 623.0, 10e-6) == pytest.approx(0.0391, abs=1e-4)
    with pytest.raises(ValueError, match="domain_error"):
        light_shift_phase(1.0, -1.0)


@pytest.mark.parametrize("cycles", [0, 1, 4, 10])
def test_ramsey_contrast_after_n_cooling_cycles(scatter, cycles):
    eps_raman = calibrate_eps_raman(scattering_per_cycle(scatter), 0.033)
    fringe = ramsey_sequence(
        QubitCoherence(), None, [GapOp(kind="cooling")] * cycles, 0.0, 0.0, scatter, eps_raman=eps_raman,
    )
    assert fringe.contrast == pytest.approx(0.967**cycles)
    assert fringe.amplitude == pytest.approx(0.967**cycles / 2)
    assert fringe.offset == pytest.approx(0.5)


def test_ramsey_phase_accumulates_light_shift_and_detuning(scatter):
    fringe = ramsey_sequence(
        QubitCoherence(), None, [GapOp(kind="repump")] * 3, detuning=100.0, gap_time=1e-3,
        p=scatter, delta_q=2 * math.pi * 623.0, tau_sigma=10e-6,
    )
    expected = 3 * 2 * math.pi * 623.0 * 10e-6 + 0.1
    assert fringe.phase == pytest.approx(wrap_phase(expected))


def test_pulse_area_errors_and_partial_preparation(scatter):
    errors = PulseErrors(first_area=math.pi / 2 * 1.1, second_area=math.pi / 2 * 0.9)
    fringe = ramsey_sequence(QubitCoherence(), errors, [], 0.0, 0.0, scatter, clock_population=0.85)
    assert fringe.amplitude == pytest.approx(0.85 * math.sin(errors.first_area) * math.sin(errors.second_area) / 2)
    assert fringe.amplitude < 0.85 / 2


def test_population_leak_bounds_contrast(scatter):
    q = apply_cooling_decoherence(QubitCoherence(), scatter, 0.0, 0.0, 0.0, leak=0.2)
    assert q.population_leak == pytest.approx(0.2)
    assert q.contrast <= 0.8
    with pytest.raises(ValueError, match="domain_error"):
        QubitCoherence(contrast=0.9, population_leak=0.2)


def test_gap_op_factors(scatter):
    budget = scattering_per_cycle(scatter)
    assert gap_op_factor(GapOp(kind="idle", duration=1e-3), scatter, 0.01) == 1.0
    assert gap_op_factor(GapOp(kind="repump"), scatter, 0.01) == pytest.approx(1 - budget.r_sigma)
    assert gap_op_factor(GapOp(kind="cooling"), scatter, 0.01) == pytest.approx((1 - budget.r_total) * 0.99)


def test_repump_bounds():
    assert repump_scatter_rate(21.0, 10e-6) == pytest.approx(4.2e-4)
    assert repump_decoherence_bound(60.0, 10e-6) == pytest.approx(6e-4)
    # far below the loss the control bound admits
    assert repump_decoherence_bound(60.0, 10e-6) < 7e-3
    with pytest.raises(ValueError, match="domain_error"):
        repump_scatter_rate(-1.0, 10e-6)


def test_pumping_leak_shrinks_fringe_each_cooling_cycle(scatter):
    ops = [GapOp(kind="cooling")] * 5
    clean = ramsey_sequence(QubitCoherence(), None, ops, 0.0, 0.0, scatter, eps_raman=0.017)
    leaky = ramsey_sequence(QubitCoherence(), None, ops, 0.0, 0.0, scatter, eps_raman=0.017, pumping_leak=0.01)

    assert leaky.amplitude == pytest.approx(clean.amplitude * 0.99**5, rel=1e-9)
    assert leaky.offset == pytest.approx(clean.offset * 0.99**5, rel=1e-9)
    assert leaky.contrast == pytest.approx(clean.contrast)


def test_control_bound_from_fringe_ratio():
    bound = control_epsilon_bound(1.08, 0.09, 10)
    expected = 1 - (1.08 - stats.norm.ppf(0.95) * 0.09) ** 0.1
    assert bound == pytest.approx(expected)
    assert bound == pytest.approx(7.02e-3, abs=1e-5)


def test_fringe_amplitude_is_product_of_gap_factors(scatter):
    ops = [GapOp(kind="cooling"), GapOp(kind="idle", duration=1e-4), GapOp(kind="repump"), GapOp(kind="cooling")]
    fringe = ramsey_sequence(QubitCoherence(), None, ops, 0.0, 0.0, scatter, eps_raman=0.017)
    product = math.prod(gap_op_factor(op, scatter, 0.017) for op in ops)
    assert abs(fringe.contrast - product) < 1e-12


def test_control_bound_edges():
    assert control_epsilon_bound(0.01, 0.1, 10) == 1.0
    assert control_epsilon_bound(1.5, 0.0, 10) == 0.0
    with pytest.raises(ValueError, match="domain_error"):
        control_epsilon_bound(1.0, 0.01, 0)


def test_crosstalk_gaussian_beam():
    assert addressing_crosstalk(0.0, 5e-6) == 1.0
    assert addressing_crosstalk(8.9e-6, 5e-6) == pytest.approx(math.exp(-2 * (8.9 / 5) ** 2))
    with pytest.raises(ValueError, match="domain_error"):
        addressing_crosstalk(1e-6, 0.0)


def test_gate_error_budget():
    gamma, bound = gate_error_budget(0.1, 1.0, 10, 1e-4)
    assert gamma == pytest.approx(5.922e-4, rel=1e-3)
    assert bound == pytest.approx(gamma + 1e-3)
    with pytest.raises(ValueError, match="domain_error"):
        gate_error_budget(0.1, -1.0, 10, 1e-4)


@pytest.mark.parametrize("phase, expected", [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (7.0, 7.0 - 2 * math.pi)])
def test_wrap_phase(phase, expected):
    assert wrap_phase(phase) == pytest.approx(expected)
