"""Third-order geometric aberrations of a round magnetic lens.

Coefficients are integrals over [z_ob, z_im] of polynomials in alpha, alpha'',
g, g', h, h' (the fundamental pair started at the object plane). The
spherical coefficient C is also available in two forms obtained from the
first by partial integration, which makes a three-way consistency check.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, ImagePlaneError
from .fields import alpha_derivs
from .paraxial import _breakpoints, fundamental_pair, rotation
from .quadrature import integrate

COEFFICIENT_NAMES = ("C", "K", "k", "A", "a_coef", "F", "D", "d", "E")
UNITS = {
    "C": "mm", "K": "1", "k": "1", "A": "1/mm", "a_coef": "1/mm", "F": "1/mm",
    "D": "1/mm^2", "d": "1/mm^2", "E": "1/mm^3", "z_ob": "mm", "z_im": "mm",
}
DEFAULT_QUAD_TOL = 1e-9


@dataclass(frozen=True)
class AberrationSet:
    C: float
    K: float
    k: float
    A: float
    a_coef: float
    F: float
    D: float
    d: float
    E: float
    z_ob: float
    z_im: float

    def __post_init__(self):
        if not all(np.isfinite(v) for v in asdict(self).values()):
            raise DomainError("aberration coefficients must be finite")

    def to_json(self):
        """JSON object mapping each field to {"value", "unit"}."""
        return json.dumps({k: {"value": v, "unit": UNITS[k]} for k, v in asdict(self).items()},
                          indent=2)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(**{k: float(v["value"]) for k, v in data.items()})


@dataclass(frozen=True)
class AberrationDisplacement:
    """Third-order deviations (dx, dy, dpx/p0, dpy/p0).

    ``object_plane`` holds the deltas as evaluated from the object-plane
    state; the fields are those deltas carried to the image plane by the
    ideal imaging map.
    """

    dx: float
    dy: float
    dpx_over_p0: float
    dpy_over_p0: float
    object_plane: tuple = (0.0, 0.0, 0.0, 0.0)

    def as_array(self):
        return np.array([self.dx, self.dy, self.dpx_over_p0, self.dpy_over_p0])


# -- integrands --------------------------------------------------------------------

def _integrands(al, al1, al2, g, gp, h, hp):
    """The nine coefficient integrands, transcribed term by term."""
    q = al**4 - al * al2
    a2 = al * al
    gh_p = gp * h + g * hp  # (g h)'
    return {
        "C": 0.5 * (q * h**4 + 2 * a2 * h**2 * hp**2 + hp**4),
        "K": 0.5 * (q * g * h**3 + a2 * gh_p * h * hp + gp * hp**3),
        "k": (al2 / 8 - al**3 / 2) * h**2 - 0.5 * al * hp**2,
        "A": 0.5 * (q * g**2 * h**2 + 2 * a2 * g * gp * h * hp + gp**2 * hp**2 - a2),
        "a_coef": (al2 / 4 - al**3) * g * h - al * gp * hp,
        "F": 0.5 * (q * g**2 * h**2 + a2 * (g**2 * hp**2 + gp**2 * h**2) + gp**2 * hp**2 + 2 * a2),
        "D": 0.5 * (q * g**3 * h + a2 * g * gp * gh_p + gp**3 * hp),
        "d": (al2 / 8 - al**3 / 2) * g**2 - 0.5 * al * gp**2,
        "E": 0.5 * (q * g**4 + 2 * al * g**2 * gp**2 + gp**4),
    }


def scherzer_integrand(al, al1, h, hp):
    """(1/2){2 a^4 h^4 + h^2 (h a' + h' a)^2 + a^2 h^2 h'^2}: a sum of non-negative terms."""
    return 0.5 * (2 * al**4 * h**4 + h**2 * (h * al1 + hp * al) ** 2 + al**2 * h**2 * hp**2)


def hawkes_integrand(al, al1, al2, h):
    """(1/12) h^4 (16 a^4 - a a'' + 5 a'^2)."""
    return h**4 * (16 * al**4 - al * al2 + 5 * al1**2) / 12.0


def hawkes_integrand_b(b, b1, b2, h):
    """(1/48) h^4 (4 b^4 - b b'' + 5 b'^2), the same integrand with b = 2 alpha."""
    return h**4 * (4 * b**4 - b * b2 + 5 * b1**2) / 48.0


_FORMS = {
    "aberexpns": None,
    "scherzer": lambda d, p: scherzer_integrand(d[0], d[1], p.h, p.h_prime),
    "hawkes": lambda d, p: hawkes_integrand(d[0], d[1], d[2], p.h),
}


def _check_image_plane(ls, z_ob, z_im, h_tol, route):
    if not z_im > z_ob:
        raise DomainError("z_im must lie beyond z_ob")
    if h_tol is None:
        h_tol = 1e-7 * ls.length_scale
    h = fundamental_pair(ls, z_ob, z_im, route).h
    if abs(h) > h_tol:
        raise ImagePlaneError(f"|h(z_im, z_ob)| = {abs(h):.3g} exceeds {h_tol:.3g}: z_im is not an image plane")


def _evaluate(ls, z_ob, zs, route):
    pair = fundamental_pair(ls, z_ob, zs, route)
    derivs = alpha_derivs(ls, zs, 2)
    return derivs, pair


def integrand_table(ls, z_ob, zs, route="auto"):
    """All integrands (nine coefficients plus the two alternative C forms) at ``zs``."""
    zs = np.asarray(zs, dtype=float)
    d, p = _evaluate(ls, z_ob, zs, route)
    out = _integrands(d[0], d[1], d[2], p.g, p.g_prime, p.h, p.h_prime)
    out["C_scherzer"] = _FORMS["scherzer"](d, p)
    out["C_hawkes"] = _FORMS["hawkes"](d, p)
    return out


def _integrate_named(ls, z_ob, z_im, names, quad_tol, route):
    L = ls.length_scale

    def f(zs):
        table = integrand_table(ls, z_ob, zs, route)
        return np.stack([table[n] for n in names])

    init = max(4, min(64, int(4 * (z_im - z_ob) / L)))
    vals, _ = integrate(f, z_ob, z_im, abs_tol=quad_tol, rel_tol=1e-12,
                        breakpoints=_breakpoints(ls, z_ob, z_im), ncomp=len(names),
                        initial_intervals=init)
    return dict(zip(names, (float(v) for v in vals)))


def aberration_coefficients(ls, z_ob, z_im, quad_tol=DEFAULT_QUAD_TOL, route="auto", h_tol=None):
    """All nine coefficients by adaptive quadrature over [z_ob, z_im]."""
    _check_image_plane(ls, z_ob, z_im, h_tol, route)
    vals = _integrate_named(ls, z_ob, z_im, COEFFICIENT_NAMES, quad_tol, route)
    return AberrationSet(**vals, z_ob=float(z_ob), z_im=float(z_im))


def scherzer_C(ls, z_ob, z_im, quad_tol=DEFAULT_QUAD_TOL, route="auto", h_tol=None):
    """Spherical coefficient from the manifestly non-negative integrand."""
    _check_image_plane(ls, z_ob, z_im, h_tol, route)
    return _integrate_named(ls, z_ob, z_im, ("C_scherzer",), quad_tol, route)["C_scherzer"]


def hawkes_C(ls, z_ob, z_im, quad_tol=DEFAULT_QUAD_TOL, route="auto", h_tol=None):
    """Spherical coefficient from the h^4-only integrand."""
    _check_image_plane(ls, z_ob, z_im, h_tol, route)
    return _integrate_named(ls, z_ob, z_im, ("C_hawkes",), quad_tol, route)["C_hawkes"]


def sample_integrands(ls, z_ob, z_im, n=401, route="auto"):
    """``(z, {name: values})`` on a uniform grid, for plotting."""
    zs = np.linspace(z_ob, z_im, n)
    return zs, integrand_table(ls, z_ob, zs, route)


# -- displacement map ------------------------------------------------------------------

def _classical_terms(ab, x, y, px, py):
    """Object-plane deltas with every operator average replaced by its classical value.

    {A, B} -> 2AB, L_z -> x py - y px, (p.r + r.p) -> 2 r.p. Momenta are in
    units of p0, so the 1/p0^n prefactors are absorbed.
    """
    p2 = px * px + py * py
    r2 = x * x + y * y
    P = 2 * (x * px + y * py)
    Lz = x * py - y * px
    C, K, k, A, a, F, D, d, E = (ab.C, ab.K, ab.k, ab.A, ab.a_coef, ab.F, ab.D, ab.d, ab.E)
    dx = (C * px * p2
          + K / 2 * (2 * px * P + 2 * x * p2)
          + k * (2 * px * Lz - 0.5 * 2 * y * p2)
          + A / 2 * (2 * x * P)
          + a / 2 * (2 * x * Lz - 2 * y * P)
          + F / 2 * (2 * px * r2)
          + D * x * r2
          - d * y * r2)
    dy = (C * py * p2
          + K / 2 * (2 * py * P + 2 * y * p2)
          + k * (2 * py * Lz + 0.5 * 2 * x * p2)
          + A / 2 * (2 * y * P)
          + a / 2 * (2 * y * Lz - 2 * x * P)
          + F / 2 * (2 * py * r2)
          + D * y * r2
          + d * x * r2)
    dpx = (-K * px * p2
           - k * py * p2
           - A / 2 * (2 * px * P)
           - a / 2 * (2 * px * Lz + 2 * py * P)
           - F / 2 * (2 * x * p2)
           - D / 2 * (2 * px * r2 + 2 * x * P)
           - d * (2 * x * Lz + 0.5 * 2 * py * r2)
           - E * x * r2)
    dpy = (-K * py * p2
           + k * px * p2
           - A / 2 * (2 * py * P)
           - a / 2 * (2 * py * Lz + 2 * px * P)
           - F / 2 * (2 * y * p2)
           - D / 2 * (2 * py * r2 + 2 * y * P)
           - d * (2 * y * Lz - 0.5 * 2 * px * r2)
           - E * y * r2)
    return np.array([dx, dy, dpx, dpy])


def _gaussian_average(ab, mean, cov):
    """Exact average of the cubic map over a Gaussian with the given mean and covariance.

    A two-point Gauss-Hermite rule per principal axis integrates every
    polynomial of degree <= 3 exactly.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (4, 4) or not np.allclose(cov, cov.T, rtol=0, atol=1e-15 * max(1.0, np.abs(cov).max())):
        raise DomainError("covariance must be a symmetric 4x4 matrix")
    lam, V = np.linalg.eigh(cov)
    if lam.min() < -1e-12 * max(1.0, lam.max()):
        raise DomainError("covariance must be positive semidefinite")
    root = V * np.sqrt(np.clip(lam, 0.0, None))
    signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * 4, indexing="ij")).reshape(4, -1)
    pts = mean[:, None] + root @ signs
    return _classical_terms(ab, *pts).mean(axis=1)


def image_transport(M, f, theta_im):
    """The ideal imaging map [[-M R, 0], [-R/f, -R/M]]."""
    R = rotation(theta_im)
    Z = np.zeros((2, 2))
    return np.block([[-M * R, Z], [-R / f, -R / M]])


def aberration_displacement(ab, state_ob, M, f, theta_im, mode="classical", covariance=None):
    """Third-order image-plane deviations for an object-plane centroid state.

    ``mode="classical"`` factorizes every average into a product of centroid
    values. ``mode="second-moment"`` averages the same cubic map over a
    Gaussian state with the given 4x4 ``covariance`` of (x, y, px/p0, py/p0),
    which keeps the variance cross-terms that classical reduction drops.
    """
    mean = state_ob.as_array()
    if not np.all(np.isfinite(mean)):
        raise DomainError("state must be finite")
    if mode == "classical":
        delta = _classical_terms(ab, *mean)
    elif mode == "second-moment":
        if covariance is None:
            raise DomainError("second-moment mode needs a covariance matrix")
        delta = _gaussian_average(ab, mean, covariance)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    out = image_transport(M, f, theta_im) @ delta
    if not np.all(np.isfinite(out)):
        raise DomainError("non-finite aberration displacement")
    return AberrationDisplacement(*(float(v) for v in out), object_plane=tuple(float(v) for v in delta))


# -- third moments ---------------------------------------------------------------------

@dataclass(frozen=True)
class ThirdMoment:
    total: float
    mean_cubed: float
    mean_times_variance: float
    central3: float


def third_moment_decomposition(mean, variance, central3):
    """<x^3> = <x>^3 + 3 <x> <(dx)^2> + <(dx)^3>."""
    if variance < 0:
        raise DomainError(f"variance must be non-negative, got {variance}")
    parts = (mean**3, 3.0 * mean * variance, central3)
    return ThirdMoment(float(sum(parts)), *(float(p) for p in parts))
