import math

import numpy as np
import pytest
from scipy import constants as sc
from scipy.linalg import eigh

from sympcool.core.crystal import (
    AMU,
    axial_modes,
    ion_separation,
    lamb_dicke,
    mode_frequency_gradient,
    raman_wavenumber,
    single_ion_lamb_dicke,
)
from sympcool.types import ModeEnum


OMEGA_Z = 2 * math.pi * 500e3


def test_mixed_mass_ratios_to_two_decimals():
    modes = axial_modes(40.0, 43.0, OMEGA_Z)
    assert (round(modes.ratios[0], 2), round(modes.ratios[1], 2)) == (0.98, 1.70)
    assert modes.frequencies[0] == pytest.approx(modes.ratios[0] * OMEGA_Z)


def test_equal_masses_give_com_and_stretch():
    modes = axial_modes(40.0, 40.0, 1.0)
    assert modes.ratios[0] == pytest.approx(1.0, abs=1e-10)
    assert modes.ratios[1] == pytest.approx(math.sqrt(3.0), abs=1e-10)


@pytest.mark.parametrize("m1, m2", [(40.0, 43.0), (43.0, 40.0), (9.0, 40.0), (40.0, 138.0)])
def test_ratios_match_generalized_eigenproblem(m1, m2):
    stiffness = np.array([[2.0, -1.0], [-1.0, 2.0]])
    masses = np.diag([1.0, m2 / m1])
    expected = np.sqrt(eigh(stiffness, masses, eigvals_only=True))

    modes = axial_modes(m1, m2, 1.0)
    assert modes.ratios == pytest.approx(tuple(expected), rel=1e-12)


def test_mode_vectors_orthonormal_with_positive_coolant_component():
    modes = axial_modes(40.0, 43.0, OMEGA_Z)
    vectors = np.array(modes.mode_vectors)

    assert vectors @ vectors.T == pytest.approx(np.eye(2), abs=1e-12)
    assert vectors[0, 0] > 0 and vectors[0, 1] > 0
    # in-phase: both ions move together; out-of-phase: opposite
    assert vectors[1, 0] > 0 > vectors[1, 1]


@pytest.mark.parametrize("m1, m2, omega", [(0.0, 43.0, 1.0), (40.0, -1.0, 1.0), (40.0, 43.0, 0.0)])
def test_non_positive_inputs_rejected(m1, m2, omega):
    with pytest.raises(ValueError, match="domain_error"):
        axial_modes(m1, m2, omega)


def test_lamb_dicke_values_for_coolant(modes):
    assert modes.eta(1, ModeEnum.in_phase) == pytest.approx(0.1730, rel=2e-3)
    assert modes.eta(1, ModeEnum.out_of_phase) == pytest.approx(0.1412, rel=2e-3)
    assert modes.eta(2, ModeEnum.in_phase) == pytest.approx(0.1794, rel=2e-3)
    assert modes.eta(2, ModeEnum.out_of_phase) == pytest.approx(0.1267, rel=2e-3)


def test_lamb_dicke_sum_rule_over_modes(modes, constants):
    # sum_j eta_1j^2 omega_j equals the single-ion value at omega_z
    k_eff = raman_wavenumber(constants["lambda_397"], math.radians(60.0))
    total = sum(
        lamb_dicke(modes, 1, k_eff, which) ** 2 * modes.frequency(which)
        for which in (ModeEnum.in_phase, ModeEnum.out_of_phase)
    )
    single = single_ion_lamb_dicke(constants["mass_40"], modes.omega_z, k_eff)
    assert total == pytest.approx(single**2 * modes.omega_z, rel=1e-12)


def test_lamb_dicke_requires_valid_ion(modes):
    with pytest.raises(ValueError, match="domain_error"):
        lamb_dicke(modes, 3, 1e7, ModeEnum.in_phase)


def test_raman_wavenumber_at_sixty_degrees_equals_single_beam():
    wavelength = 396.959e-9
    assert raman_wavenumber(wavelength, math.radians(60.0)) == pytest.approx(2 * math.pi / wavelength)
    assert raman_wavenumber(wavelength, math.pi) == pytest.approx(4 * math.pi / wavelength)


def test_ion_separation_at_500_khz():
    assert ion_separation(39.96259, OMEGA_Z) == pytest.approx(8.90e-6, rel=1e-2)
    # closer together at higher trap frequency
    assert ion_separation(39.96259, 2 * OMEGA_Z) < ion_separation(39.96259, OMEGA_Z)


def test_ion_separation_balances_trap_and_coulomb_force():
    s = ion_separation(40.0, OMEGA_Z)
    coulomb = sc.e**2 / (4 * math.pi * sc.epsilon_0 * s**2)
    restoring = 40.0 * AMU * OMEGA_Z**2 * s / 2
    assert coulomb == pytest.approx(restoring, rel=1e-10)


@pytest.mark.parametrize("m2", [20.0, 43.0, 100.0])
def test_frequency_gradient_matches_central_differences(m2):
    h = 1e-5 * m2
    up = axial_modes(40.0, m2 + h, OMEGA_Z).frequencies
    down = axial_modes(40.0, m2 - h, OMEGA_Z).frequencies
    numeric = [(u - d) / (2 * h) for u, d in zip(up, down)]

    analytic = mode_frequency_gradient(40.0, m2, OMEGA_Z)
    assert analytic == pytest.approx(numeric, rel=1e-6)


def test_mode_frequencies_fall_with_memory_mass():
    gradient = mode_frequency_gradient(40.0, 43.0, OMEGA_Z)
    assert gradient[0] < 0 and gradient[1] < 0
