"""Paraxial fundamental solutions, Larmor rotation, transfer maps and imaging.

The rotating-frame equation is R'' + alpha(z)^2 R = 0. Its fundamental
solutions g(z, zi), h(z, zi) start from (g, g', h, h') = (1, 0, 0, 1) and are
available through four independent routes:

``closed``      Glaser closed form (z = a cot(phi) substitution)
``bessel``      power-law Bessel series (n > 0 from zi = 0, n < -1 cross-check)
``peano_baker`` truncated iterated-integral series, optionally composed
``ode``         adaptive Dormand-Prince 5(4) integration
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from . import _pykernels
from ._backend import kernels
from .errors import (
    ConvergenceError,
    DomainError,
    ImagePlaneError,
    IntegrationError,
    NotFoundError,
    SingularityError,
)
from .fields import Glaser, LensStrength, PowerLaw, Tabulated, alpha_derivs
from .quadrature import integrate
from .specfun import DEFAULT_CONTROL, ZETA_MAX, bessel_j, gamma_fn

ODE_REL_TOL = 1e-10
PB_AUTO_STRENGTH = 1.5  # max alpha * segment length in automatic segmentation
PB_AUTO_LENGTHS = 2.0  # max segment length in profile length scales


@dataclass(frozen=True)
class FundamentalPair:
    """(g, g', h, h') at ``z`` for start plane ``zi``.

    Fields are floats, or arrays of one common shape when evaluated at many
    planes. ``truncation`` is the Peano-Baker last-term estimate (0 for
    other routes).
    """

    zi: float
    z: object
    g: object
    g_prime: object
    h: object
    h_prime: object
    route: str = ""
    truncation: float = 0.0

    @property
    def wronskian(self):
        return self.g * self.h_prime - self.g_prime * self.h

    def matrix(self):
        """2x2 rotating-frame transfer matrix, shape ``(..., 2, 2)``."""
        return np.stack(
            [np.stack([self.g, self.h], -1), np.stack([self.g_prime, self.h_prime], -1)], -2
        )

    def __getitem__(self, k):
        return FundamentalPair(
            self.zi,
            float(np.asarray(self.z)[k]),
            float(np.asarray(self.g)[k]),
            float(np.asarray(self.g_prime)[k]),
            float(np.asarray(self.h)[k]),
            float(np.asarray(self.h_prime)[k]),
            self.route,
            self.truncation,
        )

    def __len__(self):
        return int(np.size(self.z))


def _make_pair(zi, z, g, gp, h, hp, route, trunc=0.0):
    if np.ndim(z) == 0:
        return FundamentalPair(float(zi), float(z), float(g), float(gp), float(h), float(hp), route, trunc)
    return FundamentalPair(float(zi), np.asarray(z, float), np.asarray(g, float), np.asarray(gp, float),
                           np.asarray(h, float), np.asarray(hp, float), route, trunc)


def rotation(theta):
    """Larmor rotation matrix [[cos, sin], [-sin, cos]] (lab = R . rotating)."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


@dataclass(frozen=True)
class TransferMap:
    pair: FundamentalPair
    theta: float
    matrix: np.ndarray

    def apply(self, state):
        return CentroidState.from_array(self.matrix @ state.as_array())


def transfer_map(pair, theta):
    """Assemble the 4x4 lab-frame map [[g R, h R], [g' R, h' R]]."""
    R = rotation(theta)
    M = np.block([[pair.g * R, pair.h * R], [pair.g_prime * R, pair.h_prime * R]])
    return TransferMap(pair, float(theta), M)


@dataclass(frozen=True)
class CentroidState:
    x: float
    y: float
    px_over_p0: float
    py_over_p0: float

    def as_array(self):
        return np.array([self.x, self.y, self.px_over_p0, self.py_over_p0], dtype=float)

    @classmethod
    def from_array(cls, v):
        v = np.asarray(v, dtype=float)
        if not np.all(np.isfinite(v)):
            raise DomainError("centroid state must be finite")
        return cls(*(float(c) for c in v))


# -- Larmor angle -------------------------------------------------------------

def _breakpoints(ls, zi, z):
    p = ls.profile
    if isinstance(p, Tabulated):
        return tuple(p.knots)
    if isinstance(p, Glaser):
        return tuple(p.a * np.array([-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0]))
    return ()


def larmor_angle(ls, zi, z, tol=1e-12):
    """theta(z, zi) = integral of alpha from zi to z."""
    if zi == z:
        return 0.0
    ls.check_interval(zi, z)
    L = ls.length_scale
    span = abs(z - zi)
    init = max(1, min(64, int(span / L)))
    val, _ = integrate(ls.alpha, zi, z, abs_tol=tol, rel_tol=tol, breakpoints=_breakpoints(ls, zi, z),
                       initial_intervals=init)
    return float(val[0])


# -- Glaser closed form ---------------------------------------------------------

def glaser_pair(ls, zi, z):
    """Closed-form fundamental pair for the Glaser lens.

    phi = arccot(z/a) is taken on (0, pi) via atan2(a, z); z from -inf to +inf
    maps continuously onto phi from pi to 0.
    """
    p = ls.profile
    if not isinstance(p, Glaser):
        raise TypeError("glaser_pair needs a Glaser profile")
    a = p.a
    omega = math.sqrt(1.0 + (ls.alpha0 * a) ** 2)
    zz = np.asarray(z, dtype=float)
    phi = np.arctan2(a, zz)
    phi_i = math.atan2(a, zi)
    si, ci = math.sin(phi_i), math.cos(phi_i)
    s, c = np.sin(phi), np.cos(phi)
    w = omega * (phi - phi_i)
    S, C = np.sin(w), np.cos(w)

    N = omega * si * C + ci * S
    dN = -omega**2 * si * S + omega * ci * C
    g = N / (omega * s)
    # dphi/dz = -sin(phi)^2 / a
    gp = -(dN * s - N * c) / (omega * a)
    h = -a * S / (omega * si * s)
    hp = (omega * C * s - S * c) / (omega * si)
    return _make_pair(zi, z, g, gp, h, hp, "closed")


def glaser_image_planes(ls, z_ob, count=1):
    """Analytic zeros of h(z, z_ob) for the Glaser lens, nearest first.

    h vanishes where omega (phi - phi_ob) = -m pi, m = 1, 2, ...
    """
    p = ls.profile
    omega = math.sqrt(1.0 + (ls.alpha0 * p.a) ** 2)
    phi_ob = math.atan2(p.a, z_ob)
    out = []
    for m in range(1, count + 1):
        phi = phi_ob - m * math.pi / omega
        if phi <= 0:
            break
        out.append(p.a / math.tan(phi))
    return out


# -- power law, Bessel route ------------------------------------------------------

def _powerlaw_consts(ls):
    p = ls.profile
    if not isinstance(p, PowerLaw):
        raise TypeError("power-law route needs a PowerLaw profile")
    return p, abs(ls.alpha0 * p.k_n)


def powerlaw_pair_pos(ls, z, ctl=DEFAULT_CONTROL):
    """Fundamental pair g_n(z, 0), h_n(z, 0) for B ~ z^n, n >= 1, z >= 0.

    Values come from the Gamma-prefactored Bessel functions of order
    -+1/(2(n+1)); derivatives from the term-wise differentiated series.
    """
    p, ak = _powerlaw_consts(ls)
    n = p.n
    if n < 1:
        raise DomainError("powerlaw_pair_pos needs n >= 1")
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(zz < 0):
        raise DomainError("powerlaw_pair_pos is defined for z >= 0")
    if ak == 0.0:
        one = np.ones_like(zz)
        return _make_pair(0.0, z, one, 0 * one, zz.copy(), one, "bessel") if np.ndim(z) else \
            _make_pair(0.0, z, 1.0, 0.0, float(z), 1.0, "bessel")
    nu = 1.0 / (2 * (n + 1))
    c = ak / (2 * (n + 1))
    X = c * zz ** (n + 1)  # zeta / 2
    pos = zz > 0

    g = np.ones_like(zz)
    h = np.zeros_like(zz)
    if np.any(pos):
        zp = zz[pos]
        zeta = 2.0 * X[pos]
        g[pos] = gamma_fn(1.0 - nu) * c**nu * np.sqrt(zp) * bessel_j(-nu, zeta, ctl)
        h[pos] = gamma_fn(1.0 + nu) * c**-nu * np.sqrt(zp) * bessel_j(nu, zeta, ctl)
    x = X * X
    _, S1g, _ = kernels.series_0f1(1.0 - nu, x, ctl.rel_tol, ctl.max_terms)
    Sh, S1h, _ = kernels.series_0f1(1.0 + nu, x, ctl.rel_tol, ctl.max_terms)
    gp = np.zeros_like(zz)
    gp[pos] = 2 * (n + 1) * S1g[pos] / zz[pos]
    hp = Sh + 2 * (n + 1) * S1h
    if np.ndim(z) == 0:
        return _make_pair(0.0, z, g[0], gp[0], h[0], hp[0], "bessel")
    return _make_pair(0.0, zz, g, gp, h, hp, "bessel")


def _neg_basis(ls, z, ctl):
    """Solutions u1 -> 1, u2 -> z at the far end of the half-line, with derivatives."""
    p, ak = _powerlaw_consts(ls)
    m = -p.n
    nu = 1.0 / (2 * (m - 1))
    c = ak / (2 * (m - 1))
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(zz == 0):
        raise SingularityError("z = 0 is singular for negative n")
    X = c / np.abs(zz) ** (m - 1)  # zeta / 2
    if np.any(2 * X > ZETA_MAX):
        raise ConvergenceError(f"zeta = {2 * float(X.max()):.3g} too close to the singularity for the series")
    # u1 = Gamma(1+nu) X^-nu J_nu(2X), u2 = z Gamma(1-nu) X^nu J_-nu(2X), both
    # summed as their 0F1 series
    x = X * X
    S1, S11, n1 = kernels.series_0f1(1.0 + nu, x, ctl.rel_tol, ctl.max_terms)
    S2, S12, n2 = kernels.series_0f1(1.0 - nu, x, ctl.rel_tol, ctl.max_terms)
    if n1 < 0 or n2 < 0:
        raise ConvergenceError("negative-n basis series did not converge")
    u1p = -2 * (m - 1) * S11 / zz
    u2p = S2 - 2 * (m - 1) * S12
    return S1, u1p, zz * S2, u2p


def powerlaw_neg_limit(ls, z, ctl=DEFAULT_CONTROL):
    """The z_start -> far-field limit forms g_-n(z, -inf) and the u2 = z-branch.

    Returns ``(g, g', u2, u2')``; h(z, z_start) -> u2(z) - z_start g(z).
    """
    u1, u1p, u2, u2p = _neg_basis(ls, z, ctl)
    if np.ndim(z) == 0:
        return float(u1[0]), float(u1p[0]), float(u2[0]), float(u2p[0])
    return u1, u1p, u2, u2p


def powerlaw_neg_analytic(ls, z, z_start, ctl=DEFAULT_CONTROL):
    """Bessel-series pair from a finite start plane ``z_start`` (n <= -2)."""
    if np.any(np.sign(np.atleast_1d(z)) != np.sign(z_start)):
        raise SingularityError("z and z_start must share a half-line")
    a1, a1p, a2, a2p = _neg_basis(ls, z, ctl)
    b1, b1p, b2, b2p = (float(v[0]) for v in _neg_basis(ls, z_start, ctl))
    W = b1 * b2p - b1p * b2
    g = (a1 * b2p - a2 * b1p) / W
    gp = (a1p * b2p - a2p * b1p) / W
    h = (a2 * b1 - a1 * b2) / W
    hp = (a2p * b1 - a1p * b2) / W
    if np.ndim(z) == 0:
        return _make_pair(z_start, z, g[0], gp[0], h[0], hp[0], "bessel")
    return _make_pair(z_start, z, g, gp, h, hp, "bessel")


def default_z_start(ls):
    """Far start plane for negative-n power laws: 1e4 characteristic lengths out."""
    p = ls.profile
    return p.side * 1e4 * p.length_scale


def powerlaw_pair_neg(ls, z, z_start=None, rel_tol=ODE_REL_TOL):
    """Pair for B ~ z^n, n <= -2, started at a finite far plane.

    The ODE route is the ground truth here; see :func:`powerlaw_crosscheck_neg`
    for the comparison with the Bessel forms.
    """
    p, _ = _powerlaw_consts(ls)
    if p.n > -2:
        raise DomainError("powerlaw_pair_neg needs n <= -2")
    if z_start is None:
        z_start = default_z_start(ls)
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(np.sign(zz) != np.sign(z_start)) or np.any(zz == 0):
        raise SingularityError("z and z_start must lie on the same side of z = 0")
    return ode_pair(ls, z_start, z, rel_tol)


def powerlaw_crosscheck_neg(ls, z, z_start=None, rel_tol=ODE_REL_TOL):
    """Discrepancies between the numeric pair and the Bessel forms (n <= -2).

    Reports the maximum absolute difference of g against the far-field limit
    form, and of (g, h) against the exact finite-start combination.
    """
    if z_start is None:
        z_start = default_z_start(ls)
    num = powerlaw_pair_neg(ls, z, z_start, rel_tol)
    lim_g = powerlaw_neg_limit(ls, z)[0]
    exact = powerlaw_neg_analytic(ls, z, z_start)
    return {
        "g_vs_limit": float(np.max(np.abs(num.g - lim_g))),
        "g_vs_finite_start": float(np.max(np.abs(num.g - exact.g))),
        "h_vs_finite_start": float(np.max(np.abs(num.h - exact.h) / np.maximum(1.0, np.abs(exact.h)))),
        "wronskian": float(np.max(np.abs(num.wronskian - 1.0))),
    }


# -- ODE route -------------------------------------------------------------------

def ode_pair(ls, zi, z, rel_tol=ODE_REL_TOL, abs_tol=None):
    """Reference pair by Dormand-Prince 5(4) integration of the 2x2 system.

    ``z`` may be an array; planes on either side of ``zi`` are handled by two
    sweeps. Absolute tolerances default to 1e-3 * rel_tol scaled per
    component by the profile length scale.
    """
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    lo, hi = min(zi, zz.min()), max(zi, zz.max())
    ls.check_interval(lo, hi)
    L = ls.length_scale
    base = 1e-3 * rel_tol if abs_tol is None else abs_tol
    atol = (base, base / L, base * L, base)
    out = np.empty((zz.size, 4))
    model = ls.kernel_model()
    for mask in (zz >= zi, zz < zi):
        if not np.any(mask):
            continue
        idx = np.nonzero(mask)[0]
        order = idx[np.argsort(np.abs(zz[idx] - zi), kind="stable")]
        targets = zz[order]
        if model is not None:
            res, nsteps, status, zlast = kernels.dopri_model(model[0], model[1], zi, targets, rel_tol, atol)
        else:
            res, nsteps, status, zlast = _pykernels.dopri_paraxial(ls.alpha2, zi, targets, rel_tol, atol)
        if status != 0:
            what = "step size underflow" if status == 1 else "step budget exhausted"
            raise IntegrationError(f"paraxial integration failed ({what}) at z = {zlast:.6g}", z_last=zlast)
        out[order] = res
    if np.ndim(z) == 0:
        return _make_pair(zi, z, *out[0], "ode")
    return _make_pair(zi, zz.reshape(np.shape(z)), *(out[:, k].reshape(np.shape(z)) for k in range(4)), "ode")


# -- Peano-Baker route ------------------------------------------------------------

def _pb_segment(ls, s0, s1, order, n_steps):
    """Truncated Peano-Baker series on one segment; returns (M, last-term size)."""
    u = np.linspace(s0, s1, n_steps + 1)
    step = (s1 - s0) / n_steps
    a2 = ls.alpha2(u)
    cum = kernels.cumulative_integral
    G = np.ones_like(u)
    H = u - s0
    g, gp, h, hp = 1.0, 0.0, s1 - s0, 1.0
    last = 0.0
    L = max(abs(s1 - s0), 1e-300)
    for k in range(1, order + 1):
        sign = -1.0 if k % 2 else 1.0
        inner_g = cum(a2 * G, step)
        G = cum(inner_g, step)
        inner_h = cum(a2 * H, step)
        H = cum(inner_h, step)
        g += sign * G[-1]
        gp += sign * inner_g[-1]
        h += sign * H[-1]
        hp += sign * inner_h[-1]
        last = max(np.max(np.abs(G)), np.max(np.abs(H)) / L)
    return np.array([[g, h], [gp, hp]]), float(last)


def _pb_segment_count(ls, zi, z, segment_length):
    span = abs(z - zi)
    if segment_length is None:
        return 1
    if segment_length == "auto":
        grid = np.linspace(zi, z, 257)
        amax = float(np.max(np.abs(ls.alpha(grid))))
        # short enough for the truncated series, and for the panel rule to
        # resolve the profile shape
        segment_length = PB_AUTO_LENGTHS * ls.length_scale
        if amax > 0.0:
            segment_length = min(segment_length, PB_AUTO_STRENGTH / amax)
    return max(1, int(math.ceil(span / float(segment_length))))


def peano_baker_pair(ls, zi, z, order=8, n_steps=256, segment_length=None):
    """Fundamental pair from the truncated Peano-Baker series.

    The iterated integrals g = 1 - int int a^2 + ..., h = (z - zi) - ... are
    accumulated on a uniform grid of ``n_steps`` panels with a fourth-order
    cumulative rule, so each extra order costs two cumulative passes.

    With ``segment_length`` set (a length, or ``"auto"`` for alpha*length <= 1.5
    and at most two profile length scales)
    [zi, z] is cut into equal segments whose truncated-series matrices are
    multiplied; ``None`` evaluates the single series literally. ``truncation``
    on the result is the largest last-included-term magnitude seen.
    """
    if order < 1:
        raise DomainError("Peano-Baker order must be >= 1")
    if n_steps < 3:
        raise DomainError("n_steps must be >= 3")
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    ls.check_interval(min(zi, zz.min()), max(zi, zz.max()))
    out = np.empty((zz.size, 4))
    out[zz == zi] = (1.0, 0.0, 0.0, 1.0)
    trunc = 0.0
    for side in (zz > zi, zz < zi):
        if not np.any(side):
            continue
        idx = np.nonzero(side)[0]
        dist = np.abs(zz[idx] - zi)
        zfar = float(zz[idx[np.argmax(dist)]])
        # full segments are shared by every target; each target adds one
        # partial segment from the last edge it passed
        nseg = _pb_segment_count(ls, zi, zfar, segment_length)
        edges = np.linspace(zi, zfar, nseg + 1)
        seg = np.minimum(np.floor(dist / abs(zfar - zi) * nseg).astype(int), nseg - 1)
        prefix = [np.eye(2)]
        for j in range(int(seg.max())):
            Ms, last = _pb_segment(ls, edges[j], edges[j + 1], order, n_steps)
            prefix.append(Ms @ prefix[-1])
            trunc = max(trunc, last)
        for k, j in zip(idx, seg):
            if zz[k] == edges[j]:
                M = prefix[j]
            else:
                Ms, last = _pb_segment(ls, edges[j], zz[k], order, n_steps)
                M = Ms @ prefix[j]
                trunc = max(trunc, last)
            out[k] = (M[0, 0], M[1, 0], M[0, 1], M[1, 1])
    if np.ndim(z) == 0:
        return _make_pair(zi, z, *out[0], "peano_baker", trunc)
    return _make_pair(zi, zz.reshape(np.shape(z)), *(out[:, k].reshape(np.shape(z)) for k in range(4)),
                      "peano_baker", trunc)


# -- dispatch ------------------------------------------------------------------------

ROUTES = ("closed", "bessel", "peano_baker", "ode")


def best_route(ls, zi, z=None):
    p = ls.profile
    if isinstance(p, Glaser):
        return "closed"
    if isinstance(p, PowerLaw) and p.n > 0 and zi == 0.0 and (z is None or np.all(np.asarray(z) >= 0)):
        if z is None or _powerlaw_zeta(ls, np.max(z)) <= ZETA_MAX:
            return "bessel"
    return "ode"


def _powerlaw_zeta(ls, z):
    """Bessel argument 2 |alpha0 k_n| z^(n+1) / (2 (n+1)) reached at ``z``."""
    n = ls.profile.n
    return abs(ls.alpha0 * ls.profile.k_n) * abs(z) ** (n + 1) / (n + 1)


def available_routes(ls, zi, z=None):
    routes = [best_route(ls, zi, z)]
    routes = [r for r in routes if r != "ode"]
    return routes + ["peano_baker", "ode"]


def fundamental_pair(ls, zi, z, route="auto", **kw):
    """Evaluate (g, g', h, h') by the named route ("auto" picks the most exact)."""
    if route == "auto":
        route = best_route(ls, zi, z)
    if route == "closed":
        return glaser_pair(ls, zi, z)
    if route == "bessel":
        p = ls.profile
        if isinstance(p, PowerLaw) and p.n > 0:
            if zi != 0.0:
                raise DomainError("the positive-n Bessel route starts at zi = 0")
            return powerlaw_pair_pos(ls, z)
        return powerlaw_neg_analytic(ls, z, zi)
    if route == "peano_baker":
        return peano_baker_pair(ls, zi, z, **kw)
    if route == "ode":
        return ode_pair(ls, zi, z, **kw)
    raise DomainError(f"unknown route {route!r}; expected one of {ROUTES}")


# -- trajectories and imaging ----------------------------------------------------------

def trace_centroid(ls, initial, zi, z_samples, route="auto", with_theta=False):
    """Centroid trajectory: the lab-frame transfer map applied at each sample."""
    zs = np.asarray(z_samples, dtype=float)
    if zs.size > 1 and not (np.all(np.diff(zs) >= 0) or np.all(np.diff(zs) <= 0)):
        raise DomainError("z_samples must be ordered")
    pairs = fundamental_pair(ls, zi, zs, route)
    v0 = initial.as_array()
    out = []
    for k, zk in enumerate(zs):
        theta = larmor_angle(ls, zi, float(zk))
        st = transfer_map(pairs[k], theta).apply(CentroidState.from_array(v0))
        out.append((float(zk), st, theta) if with_theta else (float(zk), st))
    return out


def find_image_plane(ls, z_ob, search, tol=1e-13, z_min_gap=None, route="auto", n_scan=400):
    """Smallest z in ``search`` beyond ``z_ob + z_min_gap`` where h(z, z_ob) = 0.

    The bracket is scanned for the first sign change of h, then refined with
    Brent's bisection/secant iteration to ``tol``.
    """
    lo, hi = map(float, search)
    if z_min_gap is None:
        z_min_gap = 1e-6 * ls.length_scale
    lo = max(lo, z_ob + z_min_gap)
    if hi <= lo:
        raise NotFoundError("empty search bracket beyond the object plane")
    zs = np.linspace(lo, hi, n_scan + 1)
    h = fundamental_pair(ls, z_ob, zs, route).h
    zero = np.nonzero(h == 0.0)[0]
    change = np.nonzero(np.signbit(h[:-1]) != np.signbit(h[1:]))[0]
    cands = sorted(set(zero.tolist()) | set(change.tolist()))
    if not cands:
        raise NotFoundError(f"h(z, {z_ob}) has no sign change in [{lo}, {hi}]")
    k = cands[0]
    if h[k] == 0.0:
        return float(zs[k])

    def hfun(zv):
        return fundamental_pair(ls, z_ob, zv, route).h

    return float(brentq(hfun, zs[k], zs[k + 1], xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200))


class CardinalElements(NamedTuple):
    M: float
    f: float
    theta_im: float


def cardinal_elements(ls, z_ob, z_im, h_tol=None, route="auto"):
    """Magnification M = -g, focal length f = -1/g', image rotation theta."""
    if h_tol is None:
        h_tol = 1e-8 * ls.length_scale
    pair = fundamental_pair(ls, z_ob, z_im, route)
    if abs(pair.h) > h_tol:
        raise ImagePlaneError(f"|h(z_im, z_ob)| = {abs(pair.h):.3g} exceeds {h_tol:.3g}: not an image plane")
    if abs(pair.g_prime) < 1e-14 / ls.length_scale:
        raise ImagePlaneError("g'(z_im, z_ob) vanishes: afocal system")
    return CardinalElements(-pair.g, -1.0 / pair.g_prime, larmor_angle(ls, z_ob, z_im))


def write_trajectory_csv(path, trace):
    """Write ``trace_centroid(..., with_theta=True)`` output as CSV."""
    with open(path, "w") as fh:
        fh.write("z,x,y,px/p0,py/p0,theta\n")
        for zk, st, th in trace:
            fh.write(",".join(f"{v:.17g}" for v in (zk, st.x, st.y, st.px_over_p0, st.py_over_p0, th)) + "\n")


__all__ = [
    "FundamentalPair", "TransferMap", "CentroidState", "CardinalElements", "LensStrength",
    "rotation", "transfer_map", "larmor_angle", "glaser_pair", "glaser_image_planes",
    "powerlaw_pair_pos", "powerlaw_pair_neg", "powerlaw_neg_analytic", "powerlaw_neg_limit",
    "powerlaw_crosscheck_neg", "peano_baker_pair", "ode_pair", "fundamental_pair", "best_route",
    "available_routes", "trace_centroid", "find_image_plane", "cardinal_elements",
    "write_trajectory_csv", "alpha_derivs",
]
