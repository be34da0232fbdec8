import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from conftest import BEAM, glaser
from lenscope.errors import DomainError, RangeError, SingularityError
from lenscope.fields import Glaser, LensStrength, PowerLaw, Tabulated, Uniform, alpha_derivs, field_at

Z = sp.symbols("z", real=True)


def _sympy_derivs(expr, zs, order=3):
    out = []
    for k in range(order + 1):
        f = sp.lambdify(Z, sp.diff(expr, Z, k), "numpy")
        out.append(np.broadcast_to(f(zs), zs.shape).astype(float))
    return out


def test_glaser_derivatives_match_symbolic():
    B0, a = 1.7, 0.8
    zs = np.linspace(-5, 5, 41)
    ref = _sympy_derivs(B0 / (1 + (Z / a) ** 2), zs)
    got = Glaser(B0, a).derivatives(zs, 3)
    for r, g in zip(ref, got):
        np.testing.assert_allclose(g, r, rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_powerlaw_positive_derivatives_match_symbolic(n):
    B0, k = 0.9, 1.3
    zs = np.linspace(-2, 2, 21)
    ref = _sympy_derivs(B0 * k * Z**n, zs)
    got = PowerLaw(B0, k, n).derivatives(zs, 3)
    for r, g in zip(ref, got):
        np.testing.assert_allclose(g, r, rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("n", [-2, -3])
def test_powerlaw_negative_derivatives_match_symbolic(n):
    B0, k = 0.9, 1.3
    zs = np.linspace(0.5, 3, 11)
    ref = _sympy_derivs(B0 * k * Z**n, zs)
    got = PowerLaw(B0, k, n).derivatives(zs, 3)
    for r, g in zip(ref, got):
        np.testing.assert_allclose(g, r, rtol=1e-13)


def test_powerlaw_rejects_degenerate_exponents():
    for n in (0, -1):
        with pytest.raises(DomainError):
            PowerLaw(1.0, 1.0, n)
    with pytest.raises(DomainError):
        PowerLaw(1.0, 1.0, 1.5)


def test_powerlaw_negative_singularity_and_side():
    p = PowerLaw(1.0, 1.0, -2)
    with pytest.raises(SingularityError):
        p.derivatives(0.0)
    with pytest.raises(RangeError):
        p.derivatives(-1.0)
    q = PowerLaw(1.0, 1.0, -2, side=-1)
    assert q.domain == (-np.inf, 0.0)
    assert q.derivatives(-2.0, 0)[0] == pytest.approx(0.25)


def test_uniform_field():
    B, B1, B2 = field_at(Uniform(0.4), np.linspace(0, 1, 5))
    assert np.all(B == 0.4) and np.all(B1 == 0) and np.all(B2 == 0)


def test_glaser_rejects_nonpositive_width():
    with pytest.raises(DomainError):
        Glaser(1.0, 0.0)


def test_tabulated_interpolates_knots_and_natural_ends():
    z = np.linspace(-4, 4, 33)
    B = 1.0 / (1 + z**2)
    t = Tabulated(tuple(z), tuple(B))
    np.testing.assert_allclose(t.derivatives(z, 0)[0], B, atol=1e-15)
    B2 = t.derivatives(np.array([z[0], z[-1]]), 2)[2]
    np.testing.assert_allclose(B2, 0.0, atol=1e-12)


def test_tabulated_reproduces_linear_field_exactly():
    z = np.array([0.0, 0.5, 1.7, 2.0, 3.1])
    t = Tabulated(tuple(z), tuple(2 * z + 1))
    q = np.linspace(0, 3.1, 17)
    B, B1, B2 = t.derivatives(q, 2)
    np.testing.assert_allclose(B, 2 * q + 1, atol=1e-13)
    np.testing.assert_allclose(B1, 2.0, atol=1e-12)
    np.testing.assert_allclose(B2, 0.0, atol=1e-11)


def test_tabulated_validation_and_range(tmp_path):
    with pytest.raises(DomainError):
        Tabulated((0.0, 1.0, 2.0), (1.0, 1.0, 1.0))
    with pytest.raises(DomainError):
        Tabulated((0.0, 1.0, 1.0, 2.0), (1.0, 1.0, 1.0, 1.0))
    t = Tabulated((0.0, 1.0, 2.0, 3.0), (0.0, 1.0, 0.0, 1.0))
    with pytest.raises(RangeError):
        t.derivatives(3.5)
    path = tmp_path / "field.csv"
    path.write_text("z_mm,B_T\n0,0\n1,1\n2,0\n3,1\n")
    u = Tabulated.from_csv(path, z_scale=2.0)
    assert u.domain == (0.0, 6.0)


def test_lens_strength_scaling_and_derivatives():
    ls = glaser(1.2, a=2.0)
    assert ls.alpha0 * 2.0 == pytest.approx(-1.2)
    zs = np.linspace(-3, 3, 7)
    d = alpha_derivs(ls, zs, 3)
    B = ls.profile.derivatives(zs, 3)
    for k in range(4):
        np.testing.assert_allclose(d[k], BEAM.alpha_per_tesla * B[k], rtol=1e-15)
    np.testing.assert_allclose(ls.alpha2(zs), d[0] ** 2)
    with pytest.raises(DomainError):
        alpha_derivs(ls, 0.0, 4)


def test_check_interval():
    ls = LensStrength(PowerLaw(1.0, 1.0, -2), BEAM)
    with pytest.raises(SingularityError):
        ls.check_interval(-1.0, 1.0)
    with pytest.raises(RangeError):
        LensStrength(Tabulated((0.0, 1.0, 2.0, 3.0), (0.0,) * 4), BEAM).check_interval(0.0, 4.0)


@given(st.floats(-50, 50), st.floats(0.1, 10))
def test_glaser_peak_bound(z, a):
    assert abs(Glaser(2.0, a).derivatives(z, 0)[0]) <= 2.0
