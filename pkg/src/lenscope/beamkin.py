"""Beam kinematics: design momentum and the lens-strength conversion factor.

Units used throughout the package: energies and ``p0*c`` in eV, lengths in
mm, magnetic fields in tesla.
"""

import math
from dataclasses import dataclass

from .errors import DomainError

ELECTRON_REST_ENERGY_EV = 0.51099895e6
SPEED_OF_LIGHT = 299792458.0  # m/s
HBAR_C_EV_MM = 1.973269804e-4  # eV mm (197.3269804 eV nm)
MM_PER_M = 1e3


@dataclass(frozen=True)
class BeamKinematics:
    """Monoenergetic beam.

    ``p0c`` is the design momentum times c, in eV. ``nonrelativistic`` marks
    beams built with ``p0^2 = 2 m e U``.
    """

    kinetic_energy: float
    p0c: float
    rest_mass_energy: float = ELECTRON_REST_ENERGY_EV
    charge_sign: int = -1
    hbar_c: float = HBAR_C_EV_MM
    nonrelativistic: bool = False

    @property
    def total_energy(self):
        return self.rest_mass_energy + self.kinetic_energy

    @property
    def wavenumber(self):
        """p0/hbar in 1/mm."""
        return self.p0c / self.hbar_c

    @property
    def wavelength(self):
        """de Broglie wavelength 2*pi*hbar/p0 in mm."""
        return 2.0 * math.pi * self.hbar_c / self.p0c

    @property
    def alpha_per_tesla(self):
        """q/(2 p0) in 1/(mm T): multiply by B to get alpha(z).

        This is the single place the charge sign and SI-to-mm conversion enter.
        """
        return self.charge_sign * SPEED_OF_LIGHT / (2.0 * self.p0c) / MM_PER_M

    def alpha(self, B):
        return self.alpha_per_tesla * B


def from_kinetic_energy(T, rest_mass_energy=ELECTRON_REST_ENERGY_EV, charge_sign=-1):
    """Relativistic beam with kinetic energy ``T`` (eV).

    p0 c = sqrt((mc^2 + T)^2 - (mc^2)^2), evaluated as sqrt(T (T + 2 mc^2))
    to avoid cancellation at small T.
    """
    if not (T > 0):
        raise DomainError(f"kinetic energy must be positive, got {T}")
    if not (rest_mass_energy > 0):
        raise DomainError(f"rest mass energy must be positive, got {rest_mass_energy}")
    p0c = math.sqrt(T * (T + 2.0 * rest_mass_energy))
    return BeamKinematics(T, p0c, rest_mass_energy, charge_sign)


def from_potential_nonrelativistic(U, rest_mass_energy=ELECTRON_REST_ENERGY_EV, charge_sign=-1):
    """Beam accelerated through ``U`` volts with p0^2 = 2 m e U.

    For a unit-charge particle eU in eV equals U numerically, so
    (p0 c)^2 = 2 (mc^2)(eU).
    """
    if not (U > 0):
        raise DomainError(f"accelerating potential must be positive, got {U}")
    if not (rest_mass_energy > 0):
        raise DomainError(f"rest mass energy must be positive, got {rest_mass_energy}")
    p0c = math.sqrt(2.0 * rest_mass_energy * U)
    return BeamKinematics(U, p0c, rest_mass_energy, charge_sign, nonrelativistic=True)
