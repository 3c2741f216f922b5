"""
Axial normal modes of a two-ion crystal with unequal masses.

Both ions carry one elementary charge and feel the same electrostatic
spring constant k = m1 * omega_z**2. Linearizing the Coulomb repulsion at
the equilibrium separation gives the stiffness matrix k * [[2, -1], [-1, 2]];
the modes are the eigenvectors of its mass-weighted form.
"""

import math
from typing import Tuple

import numpy as np
from scipy import constants

from sympcool.types import ModeEnum, ModeStructure


AMU = constants.physical_constants["atomic mass constant"][0]


def _check_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise ValueError(f"domain_error: {name} must be positive, got {value}")


def _mass_weighted_stiffness(m1: float, m2: float) -> np.ndarray:
    # In units of omega_z**2 (single-ion frequency of mass m1).
    mu = m2 / m1
    return np.array([
        [2.0, -1.0 / math.sqrt(mu)],
        [-1.0 / math.sqrt(mu), 2.0 / mu],
    ])


def axial_modes(m1: float, m2: float, omega_z: float) -> ModeStructure:
    _check_positive(m1=m1, m2=m2, omega_z=omega_z)

    eigenvalues, vectors = np.linalg.eigh(_mass_weighted_stiffness(m1, m2))

    # Fix the sign so the coolant (ion 1) component is positive.
    for j in range(2):
        if vectors[0, j] < 0:
            vectors[:, j] *= -1.0

    ratios = np.sqrt(eigenvalues)

    return ModeStructure(
        masses=(m1, m2),
        omega_z=omega_z,
        ratios=(float(ratios[0]), float(ratios[1])),
        frequencies=(float(ratios[0] * omega_z), float(ratios[1] * omega_z)),
        mode_vectors=vectors.tolist(),
    )


def lamb_dicke(mode: ModeStructure, ion_index: int, k_eff: float, which: ModeEnum) -> float:
    """
    eta = |b| * k_eff * sqrt(hbar / (2 m omega)) for one ion and one mode,
    with b the mass-weighted eigenvector component of that ion.
    """

    if ion_index not in (1, 2):
        raise ValueError(f"domain_error: ion_index must be 1 or 2, got {ion_index}")
    _check_positive(k_eff=k_eff)

    j = 0 if which == ModeEnum.in_phase else 1
    component = abs(mode.mode_vectors[ion_index - 1][j])
    mass = mode.masses[ion_index - 1] * AMU
    omega = mode.frequencies[j]

    return component * k_eff * math.sqrt(constants.hbar / (2 * mass * omega))


def with_lamb_dicke(mode: ModeStructure, k_eff: float) -> ModeStructure:
    table = [
        [lamb_dicke(mode, ion, k_eff, which) for which in (ModeEnum.in_phase, ModeEnum.out_of_phase)]
        for ion in (1, 2)
    ]
    return mode.model_copy(update={"lamb_dicke": table})


def single_ion_lamb_dicke(mass: float, omega: float, k_eff: float) -> float:
    _check_positive(mass=mass, omega=omega, k_eff=k_eff)
    return k_eff * math.sqrt(constants.hbar / (2 * mass * AMU * omega))


def raman_wavenumber(wavelength: float, crossing_angle: float) -> float:
    _check_positive(wavelength=wavelength)
    return 2 * (2 * math.pi / wavelength) * math.sin(crossing_angle / 2)


def ion_separation(m_coolant: float, omega_z: float) -> float:
    _check_positive(m_coolant=m_coolant, omega_z=omega_z)
    coulomb = constants.e**2 / (4 * math.pi * constants.epsilon_0)
    spring = m_coolant * AMU * omega_z**2
    return (2 * coulomb / spring) ** (1.0 / 3.0)


def mode_frequency_gradient(m1: float, m2: float, omega_z: float) -> Tuple[float, float]:
    """
    d(omega_in)/dm2 and d(omega_out)/dm2 from first-order perturbation
    theory on the mass-weighted stiffness matrix.
    """

    _check_positive(m1=m1, m2=m2, omega_z=omega_z)

    eigenvalues, vectors = np.linalg.eigh(_mass_weighted_stiffness(m1, m2))

    d_matrix = np.array([
        [0.0, 0.5 * math.sqrt(m1) * m2**-1.5],
        [0.5 * math.sqrt(m1) * m2**-1.5, -2.0 * m1 / m2**2],
    ])

    gradient = []
    for j in range(2):
        v = vectors[:, j]
        d_lambda = float(v @ d_matrix @ v)
        gradient.append(omega_z * d_lambda / (2 * math.sqrt(eigenvalues[j])))

    return gradient[0], gradient[1]
