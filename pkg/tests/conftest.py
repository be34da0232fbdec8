import math

import pytest
from hypothesis import settings

from lenscope.beamkin import from_kinetic_energy
from lenscope.fields import Glaser, LensStrength, PowerLaw, Uniform

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

BEAM = from_kinetic_energy(200e3)


def field_for_strength(alpha0):
    """Field in tesla that gives lens strength ``alpha0`` (1/mm) for BEAM."""
    return alpha0 / BEAM.alpha_per_tesla


def glaser(alpha0_a, a=1.0):
    """Glaser lens with dimensionless strength alpha0 * a (sign follows the electron charge)."""
    return LensStrength(Glaser(field_for_strength(-abs(alpha0_a) / a), a), BEAM)


def powerlaw(alpha0_k, n, k_n=1.0, side=1):
    """Power-law lens with |alpha0 k_n| = alpha0_k."""
    return LensStrength(PowerLaw(field_for_strength(-abs(alpha0_k) / k_n), k_n, n, side), BEAM)


def uniform(alpha0):
    return LensStrength(Uniform(field_for_strength(-abs(alpha0))), BEAM)


@pytest.fixture
def beam():
    return BEAM


@pytest.fixture
def glaser_sqrt3():
    return glaser(math.sqrt(3.0))


# one PASS/FAIL line per acceptance criterion, shown at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
