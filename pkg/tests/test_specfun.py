import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from lenscope.errors import ConvergenceError, DomainError
from lenscope.specfun import (
    ZETA_MAX,
    SeriesControl,
    bessel_j,
    bessel_series_terms,
    gamma_fn,
    pochhammer,
    rgamma,
)

# frozen from mpmath at 30 digits
GAMMA_REF = {
    0.1: 9.5135076986687318363,
    0.5: 1.7724538509055160273,
    5 / 6: 1.1287870299081259241,
    7 / 6: 0.9277193336300391779,
    2.5: 1.3293403881791370205,
    10.3: 716430.68906237524455,
}
BESSEL_REF = {
    (1 / 6, 0.5): 0.81036373032372374553,
    (1 / 6, 3.0): -0.15566184588516174236,
    (1 / 6, 12.0): -0.011966811602385172646,
    (-1 / 6, 0.5): 1.0338760453152407984,
    (-1 / 6, 3.0): -0.35026793443980079643,
    (-1 / 6, 12.0): 0.10460161237610998739,
    (1 / 4, 0.5): 0.74165657015714606282,
    (1 / 4, 3.0): -0.1006370643367312748,
    (1 / 4, 12.0): -0.041552439750366528539,
    (-1 / 4, 0.5): 1.0595995935275231736,
    (-1 / 4, 3.0): -0.38750665401061037523,
    (-1 / 4, 12.0): 0.13075993131132577344,
    (1 / 8, 0.5): 0.84403350512009848786,
    (1 / 8, 3.0): -0.18264734511665168449,
    (1 / 8, 12.0): 0.0029807620994232312079,
    (-1 / 8, 0.5): 1.0146990893648562964,
    (-1 / 8, 3.0): -0.32948982435429618238,
    (-1 / 8, 12.0): 0.090854269410005281718,
}


@pytest.mark.parametrize("x,ref", GAMMA_REF.items())
def test_gamma_frozen(x, ref):
    assert gamma_fn(x) == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("key,ref", BESSEL_REF.items())
def test_bessel_frozen(key, ref):
    nu, z = key
    # the alternating series loses ~e^zeta / 10^16 to cancellation
    assert bessel_j(nu, z) == pytest.approx(ref, rel=1e-12, abs=1e-16 * math.exp(z))


@given(st.floats(min_value=0.01, max_value=30.0))
def test_gamma_against_mpmath(x):
    assert gamma_fn(x) == pytest.approx(float(mpmath.gamma(x)), rel=1e-13)


@given(st.floats(min_value=-4.9, max_value=4.9), st.floats(min_value=0.01, max_value=15.0))
def test_bessel_against_mpmath(nu, z):
    ref = float(mpmath.besselj(nu, z))
    # cancellation in the alternating series costs ~ e^z / 10^16 absolute
    assert bessel_j(nu, z) == pytest.approx(ref, rel=1e-10, abs=1e-14 * math.exp(z))


def test_gamma_recurrence_and_domain():
    for x in (0.3, 1.7, 4.2):
        assert gamma_fn(x + 1) == pytest.approx(x * gamma_fn(x), rel=1e-14)
    with pytest.raises(DomainError):
        gamma_fn(0.0)
    with pytest.raises(DomainError):
        gamma_fn(-1.5)


def test_rgamma_poles_and_negative_values():
    for m in range(0, 5):
        assert rgamma(-float(m)) == 0.0
    assert rgamma(-0.5) == pytest.approx(1 / float(mpmath.gamma(-0.5)), rel=1e-14)
    assert rgamma(-2.5) == pytest.approx(1 / float(mpmath.gamma(-2.5)), rel=1e-13)


def test_pochhammer():
    assert pochhammer(3.0, 0) == 1.0
    assert pochhammer(1.0, 5) == 120.0
    assert pochhammer(0.5, 3) == pytest.approx(0.5 * 1.5 * 2.5)
    with pytest.raises(DomainError):
        pochhammer(1.0, -1)
    with pytest.raises(DomainError):
        pochhammer(1.0, 1.5)


def test_series_terms_sum_to_function():
    nu, z = 1 / 3, 2.2
    assert sum(bessel_series_terms(nu, z, 40)) == pytest.approx(bessel_j(nu, z), rel=1e-14)


def test_vectorised_matches_scalar():
    zs = np.linspace(0, 10, 11)
    vec = bessel_j(0.25, zs)
    assert vec.shape == zs.shape
    for z, v in zip(zs, vec):
        assert v == bessel_j(0.25, float(z))


def test_integer_orders():
    assert bessel_j(0.0, 0.0) == 1.0
    assert bessel_j(2.0, 0.0) == 0.0
    assert bessel_j(-1.0, 1.3) == pytest.approx(-bessel_j(1.0, 1.3), rel=1e-15)
    assert bessel_j(-2.0, 1.3) == pytest.approx(bessel_j(2.0, 1.3), rel=1e-15)


def test_full_output_and_convergence_error():
    val, n = bessel_j(0.5, 5.0, full_output=True)
    assert n > 5
    with pytest.raises(ConvergenceError):
        bessel_j(0.5, 20.0, SeriesControl(rel_tol=1e-16, max_terms=10))


def test_domain_errors():
    with pytest.raises(DomainError):
        bessel_j(5.0, 1.0)
    with pytest.raises(DomainError):
        bessel_j(0.5, -1.0)
    with pytest.raises(DomainError):
        bessel_j(-1 / 3, 0.0)
    with pytest.raises(ConvergenceError):
        bessel_j(0.5, ZETA_MAX + 1)
    with pytest.raises(DomainError):
        SeriesControl(rel_tol=0.0)


def test_small_argument_limit():
    # J_nu(z) ~ (z/2)^nu / Gamma(nu + 1)
    nu, z = -1 / 6, 1e-8
    assert bessel_j(nu, z) == pytest.approx((z / 2) ** nu / gamma_fn(nu + 1), rel=1e-14)


def test_gamma_integer_and_half_values():
    assert gamma_fn(1.0) == 1.0
    assert gamma_fn(2.0) == 1.0
    assert gamma_fn(6.0) == 120.0
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


def _stirling_gamma(x):
    # independent oracle: recurrence up to x >= 20, then the log-Stirling series
    log_shift = 0.0
    while x < 20:
        log_shift += math.log(x)
        x += 1
    lg = ((x - 0.5) * math.log(x) - x + 0.5 * math.log(2 * math.pi)
          + 1 / (12 * x) - 1 / (360 * x**3) + 1 / (1260 * x**5) - 1 / (1680 * x**7))
    return math.exp(lg - log_shift)


def test_gamma_three_quarters_against_stirling():
    assert gamma_fn(0.75) == pytest.approx(_stirling_gamma(0.75), rel=1e-13)
    assert gamma_fn(0.75) == pytest.approx(1.2254167024651776451, rel=1e-14)


@pytest.mark.parametrize("z", [0.5, 1.0, 2.0])
def test_half_order_closed_form(z):
    assert bessel_j(0.5, z) == pytest.approx(math.sqrt(2 / (math.pi * z)) * math.sin(z), rel=1e-12, abs=1e-12)
    assert bessel_j(-0.5, z) == pytest.approx(math.sqrt(2 / (math.pi * z)) * math.cos(z), rel=1e-12)


def test_zero_argument_values():
    assert bessel_j(0.25, 0.0) == 0.0
    assert bessel_j(0.0, 0.0) == 1.0


@pytest.mark.parametrize("z", [0.2, 0.6, 0.95])
def test_partial_sums_bracket_limit(z):
    nu = 0.25
    terms = bessel_series_terms(nu, z, 12)
    partial = np.cumsum(terms)
    limit = bessel_j(nu, z)
    for k in range(len(partial) - 1):
        lo, hi = sorted((partial[k], partial[k + 1]))
        assert lo - 1e-15 <= limit <= hi + 1e-15


@pytest.mark.parametrize("nu", [0.25, -1 / 6, 1 / 8])
def test_term_ratio(nu):
    z = 3.7
    terms = bessel_series_terms(nu, z, 22)
    for j in range(1, 21):
        expected = -((z / 2) ** 2) / ((nu + j) * j)
        assert terms[j] / terms[j - 1] == pytest.approx(expected, rel=1e-13)


def test_bessel_ode_residual():
    # fourth-order central differences keep truncation and rounding near 1e-10
    nu, h = 0.25, 2e-3
    for z in np.linspace(0.1, 5.0, 25):
        f = [bessel_j(nu, z + k * h) for k in (-2, -1, 0, 1, 2)]
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
        res = z * z * d2 + z * d1 + (z * z - nu * nu) * f[2]
        assert abs(res) < 1e-8 * max(1.0, z * z)
