"""Exact paraxial propagation of 2-D transverse wavefunctions through a round lens.

Grid convention: cell (i, j) of a field sits at grid coordinates
X_i = x0 + (i - nx/2) dx, Y_j = y0 + (j - ny/2) dy, and the lab position of
that cell is r = rotation(angle) . (X, Y). The full wavefunction is

    psi(X, Y) = values[i, j] * exp(i k0 curvature (X^2 + Y^2) / 2) * exp(i phase)

Keeping the grid orientation, the quadratic phase and the global phase as
metadata makes every propagation step an exact, unitary discrete transform:
a Larmor rotation changes ``angle`` instead of resampling the samples.
"""

import math
import os
import struct
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import AliasingError, BranchError, DomainError, GridError
from .paraxial import FundamentalPair, fundamental_pair, larmor_angle, rotation

MIN_PROPAGATION_SIZE = 64
SUPPORT_LEVEL = 1e-10  # amplitude, relative to the peak, below which cells count as empty
NORM_CONTRACT_TOL = 1e-6


def _workers():
    env = os.environ.get("LENSCOPE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"LENSCOPE_THREADS must be an integer, got {env!r}")
    return 1


def _is_pow2(n):
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    dx: float
    dy: float
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if not (_is_pow2(self.nx) and _is_pow2(self.ny)):
            raise GridError(f"grid sizes must be powers of two, got {self.nx} x {self.ny}")
        if not (self.dx > 0 and self.dy > 0):
            raise GridError("grid pitches must be positive")

    def coords(self):
        X = self.x0 + (np.arange(self.nx) - self.nx // 2) * self.dx
        Y = self.y0 + (np.arange(self.ny) - self.ny // 2) * self.dy
        return X, Y


@dataclass(frozen=True)
class WaveField:
    values: np.ndarray
    dx: float
    dy: float
    x0: float
    y0: float
    z: float
    p0c: float
    hbar_c: float
    angle: float = 0.0
    curvature: float = 0.0
    phase: float = 0.0

    @property
    def nx(self):
        return self.values.shape[0]

    @property
    def ny(self):
        return self.values.shape[1]

    @property
    def grid(self):
        return GridSpec(self.nx, self.ny, self.dx, self.dy, self.x0, self.y0)

    @property
    def wavenumber(self):
        return self.p0c / self.hbar_c

    @property
    def wavelength(self):
        return 2.0 * math.pi * self.hbar_c / self.p0c

    def coords(self):
        return self.grid.coords()

    def norm2(self):
        return float(np.sum(np.abs(self.values) ** 2) * self.dx * self.dy)

    def intensity(self):
        return np.abs(self.values) ** 2

    def lab_coords(self):
        """Lab-frame (x, y) of every cell, each of shape (nx, ny)."""
        X, Y = np.meshgrid(*self.coords(), indexing="ij")
        R = rotation(self.angle)
        return R[0, 0] * X + R[0, 1] * Y, R[1, 0] * X + R[1, 1] * Y

    def full_values(self):
        """Samples with the stored quadratic and global phases multiplied in."""
        X, Y = self.coords()
        k0 = self.wavenumber
        cx = np.exp(0.5j * k0 * self.curvature * X**2)
        cy = np.exp(0.5j * k0 * self.curvature * Y**2)
        return self.values * cx[:, None] * cy[None, :] * np.exp(1j * self.phase)


def make_gaussian(grid, beam, center=(0.0, 0.0), sigma=None, tilt=(0.0, 0.0), z=0.0):
    """Normalized Gaussian psi ~ exp(-|r - c|^2 / (4 sigma^2) + i k0 tilt . r).

    ``sigma`` is the rms width of |psi|^2; ``tilt`` is p_perp / p0. ``beam``
    is anything with ``p0c`` and ``hbar_c`` (a BeamKinematics).
    """
    if not isinstance(grid, GridSpec):
        grid = GridSpec(*grid)
    if sigma is None or sigma < 4 * max(grid.dx, grid.dy):
        raise GridError(f"sigma = {sigma} must be at least 4 cells ({4 * max(grid.dx, grid.dy):.3g})")
    k0 = beam.p0c / beam.hbar_c
    for t, d, name in ((tilt[0], grid.dx, "x"), (tilt[1], grid.dy, "y")):
        if abs(k0 * t * d) >= math.pi:
            raise AliasingError(f"tilt phase step |k0 tilt_{name} d{name}| = {abs(k0 * t * d):.3g} >= pi")
    X, Y = grid.coords()
    fx = np.exp(-((X - center[0]) ** 2) / (4 * sigma**2) + 1j * k0 * tilt[0] * X)
    fy = np.exp(-((Y - center[1]) ** 2) / (4 * sigma**2) + 1j * k0 * tilt[1] * Y)
    vals = fx[:, None] * fy[None, :]
    vals /= math.sqrt(np.sum(np.abs(vals) ** 2) * grid.dx * grid.dy)
    return WaveField(vals, grid.dx, grid.dy, grid.x0, grid.y0, float(z), beam.p0c, beam.hbar_c)


# -- plans -------------------------------------------------------------------------

@dataclass(frozen=True)
class PropagationPlan:
    pair: FundamentalPair
    theta: float
    zi: float
    z: float
    branch: str
    h_threshold: float


def default_h_threshold(psi):
    """|h| below which the h -> 0 imaging law is used.

    The image-plane law neglects the transverse shift h p / p0; for a field
    resolved on cells of size d its momentum spread is at most ~1/(k0 d), so
    |h| < 1e-3 k0 d^2 keeps the neglected shift below a millicell.
    """
    d = min(psi.dx, psi.dy)
    return 1e-3 * psi.wavenumber * d * d


def make_plan(ls, zi, z, h_threshold, route="auto", theta=None):
    """Plan propagation from ``zi`` to ``z`` through ``ls``."""
    pair = fundamental_pair(ls, zi, z, route)
    if theta is None:
        theta = larmor_angle(ls, zi, z)
    branch = "image-plane" if abs(pair.h) < h_threshold else "general"
    return PropagationPlan(pair, float(theta), float(zi), float(z), branch, float(h_threshold))


def free_space_plan(zi, z, h_threshold=0.0):
    """Field-free drift: g = 1, g' = 0, h = z - zi, h' = 1, no rotation."""
    pair = FundamentalPair(float(zi), float(z), 1.0, 0.0, float(z - zi), 1.0, "closed")
    branch = "image-plane" if abs(z - zi) < h_threshold else "general"
    return PropagationPlan(pair, 0.0, float(zi), float(z), branch, float(h_threshold))


def _check_start(psi, plan):
    if not math.isclose(psi.z, plan.zi, rel_tol=1e-12, abs_tol=1e-12):
        raise DomainError(f"field is at z = {psi.z}, plan starts at {plan.zi}")


def _wrap(phase):
    return math.remainder(phase, 2 * math.pi)


def _support_extent(psi, X, Y):
    amp = np.abs(psi.values)
    mask = amp > SUPPORT_LEVEL * amp.max()
    rows = np.nonzero(mask.any(axis=1))[0]
    cols = np.nonzero(mask.any(axis=0))[0]
    return np.abs(X[rows]).max(), np.abs(Y[cols]).max()


def nyquist_factors(psi, plan):
    """Per-axis phase step |k0 (g/h + curvature)| r_max d of the input chirp.

    r_max is the largest |coordinate| over occupied cells (amplitude above
    1e-10 of the peak). Sampling is faithful while both factors stay below pi.
    """
    p = plan.pair
    q = p.g / p.h + psi.curvature
    X, Y = psi.coords()
    rx, ry = _support_extent(psi, X, Y)
    k0 = psi.wavenumber
    return abs(k0 * q) * rx * psi.dx, abs(k0 * q) * ry * psi.dy


def _chirped_input(psi, plan):
    if psi.nx < MIN_PROPAGATION_SIZE or psi.ny < MIN_PROPAGATION_SIZE:
        raise GridError(f"propagation needs at least {MIN_PROPAGATION_SIZE} cells per axis")
    fx_, fy_ = nyquist_factors(psi, plan)
    for fac, name in ((fx_, "x"), (fy_, "y")):
        if fac >= math.pi:
            raise AliasingError(
                f"input quadratic phase |k0 (g/h + curvature)| {name}_max d{name} = {fac:.4g} >= pi: "
                "refine the grid or shorten the step"
            )
    p = plan.pair
    q = p.g / p.h + psi.curvature
    k0 = psi.wavenumber
    X, Y = psi.coords()
    cx = np.exp(0.5j * k0 * q * X**2)
    cy = np.exp(0.5j * k0 * q * Y**2)
    return psi.values * cx[:, None] * cy[None, :], X, Y


def _general_meta(psi, plan):
    p = plan.pair
    k0 = psi.wavenumber
    pref = k0 / (2 * math.pi * abs(p.h)) * psi.dx * psi.dy
    # 1/(i h) contributes -pi/2 for h > 0 and +pi/2 for h < 0
    phase = psi.phase + k0 * (plan.z - plan.zi) - math.copysign(0.5 * math.pi, p.h)
    angle = psi.angle + plan.theta + (math.pi if p.h < 0 else 0.0)
    return pref, _wrap(phase), _wrap(angle), p.h_prime / p.h


def propagate(psi, plan, output_grid=None, output_angle=None):
    """General-branch propagation (h != 0) by chirp, DFT, chirp.

    Without ``output_grid`` a single FFT is used and the output pitch is
    lambda |h| / (N d); the step is exactly unitary. With ``output_grid`` (a
    GridSpec) the same quadratic-phase sum is evaluated by matrix DFTs at that
    grid, whose orientation is ``output_angle`` (default: the natural one); the
    requested orientation must differ from the natural one by 0 or pi.
    """
    if plan.branch != "general":
        raise BranchError("plan is on the image-plane branch: use propagate_to_image")
    _check_start(psi, plan)
    f, X, Y = _chirped_input(psi, plan)
    pref, phase, angle, curv = _general_meta(psi, plan)
    k0 = psi.wavenumber
    h = plan.pair.h
    if output_grid is None:
        nx, ny = psi.nx, psi.ny
        kx = np.arange(nx) - nx // 2
        ky = np.arange(ny) - ny // 2
        sx = kx * 2 * math.pi / (nx * psi.dx)
        sy = ky * 2 * math.pi / (ny * psi.dy)
        sgnx = np.where(kx % 2 == 0, 1.0, -1.0)
        sgny = np.where(ky % 2 == 0, 1.0, -1.0)
        # (-1)^m on input and (-1)^k on output centre the DFT on index N/2
        pre = f * ((-1.0) ** np.arange(nx))[:, None] * ((-1.0) ** np.arange(ny))[None, :]
        F = scipy.fft.fft2(pre, workers=_workers())
        F *= (sgnx * np.exp(-1j * sx * psi.x0))[:, None] * (sgny * np.exp(-1j * sy * psi.y0))[None, :]
        out = WaveField(pref * F, psi.wavelength * abs(h) / (nx * psi.dx),
                        psi.wavelength * abs(h) / (ny * psi.dy), 0.0, 0.0, plan.z, psi.p0c, psi.hbar_c,
                        angle, curv, phase)
        return out

    if output_angle is None:
        output_angle = angle
    flip = _wrap(output_angle - angle)
    if abs(flip) < 1e-12:
        sign = 1.0
    elif abs(abs(flip) - math.pi) < 1e-12:
        sign = -1.0
    else:
        raise GridError("output orientation must match the natural one up to a half turn")
    ux, uy = output_grid.coords()
    # natural-frame coordinate U = sign * u; the kernel frequency is k0 U / |h|
    # because the natural frame already absorbed the sign of h
    Ux, Uy = sign * ux, sign * uy
    win_x = psi.wavelength * abs(h) / (2 * psi.dx)
    win_y = psi.wavelength * abs(h) / (2 * psi.dy)
    if np.abs(Ux).max() > win_x or np.abs(Uy).max() > win_y:
        raise AliasingError("requested output grid extends beyond the alias-free window lambda |h| / (2 d)")
    Ex = np.exp(-1j * k0 / abs(h) * np.outer(Ux, X))
    Ey = np.exp(-1j * k0 / abs(h) * np.outer(Uy, Y))
    F = Ex @ f @ Ey.T
    return WaveField(pref * F, output_grid.dx, output_grid.dy, output_grid.x0, output_grid.y0, plan.z,
                     psi.p0c, psi.hbar_c, _wrap(output_angle), curv, phase)


def propagate_to_image(psi, plan, min_g=1e-6):
    """Image-plane law (h = 0): a rotated, magnified replica with a quadratic phase.

    psi_out(r) = (1/g) exp(i k0 g' r^2 / (2 g)) psi_in(R(theta)^T r / g). The
    output keeps the input samples, with pitch |g| d, orientation advanced by
    theta (plus a half turn when g < 0) and amplitudes divided by |g|.
    """
    if plan.branch != "image-plane":
        raise BranchError("plan is on the general branch: use propagate")
    _check_start(psi, plan)
    p = plan.pair
    g = p.g
    if abs(g) < min_g:
        raise DomainError(f"|g| = {abs(g):.3g} below {min_g}: degenerate magnification")
    k0 = psi.wavenumber
    ag = abs(g)
    angle = psi.angle + plan.theta + (math.pi if g < 0 else 0.0)
    phase = psi.phase + k0 * (plan.z - plan.zi)
    return WaveField(psi.values / ag, ag * psi.dx, ag * psi.dy, ag * psi.x0, ag * psi.y0, plan.z,
                     psi.p0c, psi.hbar_c, _wrap(angle), p.g_prime / g + psi.curvature / g**2,
                     _wrap(phase))


def apply_plan(psi, plan):
    """Dispatch to the branch the plan selected."""
    return propagate(psi, plan) if plan.branch == "general" else propagate_to_image(psi, plan)


# -- observables ---------------------------------------------------------------------

@dataclass(frozen=True)
class Moments:
    centroid: tuple
    momentum_centroid: tuple
    covariance: np.ndarray
    third_central_x: float
    third_raw_x: float


def _circular_mean_frequency(power, n, d, axis):
    marg = power.sum(axis=1 - axis)
    k = np.arange(n) - n // 2
    w = np.exp(2j * math.pi * k / n)
    return float(np.angle(np.sum(marg * w))) / d


def spectral_norm2(psi):
    """Norm computed on the DFT side (Parseval partner of ``norm2``)."""
    F = scipy.fft.fft2(psi.values, workers=_workers())
    return float(np.sum(np.abs(F) ** 2) * psi.dx * psi.dy / (psi.nx * psi.ny))


def moments(psi, check_norm=True):
    """Lab-frame centroid, momentum centroid over p0, 2x2 covariance and x third moments."""
    n2 = psi.norm2()
    if check_norm and abs(n2 - 1.0) > NORM_CONTRACT_TOL:
        raise DomainError(f"moments expects a normalized field, norm^2 = {n2:.12g}")
    I = psi.intensity() * psi.dx * psi.dy / n2
    X, Y = psi.coords()
    mX = float(np.sum(I.sum(axis=1) * X))
    mY = float(np.sum(I.sum(axis=0) * Y))
    R = rotation(psi.angle)
    c = R @ np.array([mX, mY])

    xl, yl = psi.lab_coords()
    dxl, dyl = xl - c[0], yl - c[1]
    cov = np.array([[np.sum(I * dxl * dxl), np.sum(I * dxl * dyl)],
                    [np.sum(I * dxl * dyl), np.sum(I * dyl * dyl)]])
    third_c = float(np.sum(I * dxl**3))
    third_raw = float(np.sum(I * xl**3))

    # momentum: curvature term plus the spectral centroid of the stored samples
    F = scipy.fft.fftshift(scipy.fft.fft2(psi.values, workers=_workers()))
    power = np.abs(F) ** 2
    power /= power.sum()
    # fftshifted index k corresponds to frequency (k - N/2) 2 pi / (N d); the
    # circular mean is insensitive to where the spectrum straddles the band edge
    kx = _circular_mean_frequency(power, psi.nx, psi.dx, 0)
    ky = _circular_mean_frequency(power, psi.ny, psi.dy, 1)
    k0 = psi.wavenumber
    pU = np.array([psi.curvature * mX + kx / k0, psi.curvature * mY + ky / k0])
    p = R @ pU
    return Moments((float(c[0]), float(c[1])), (float(p[0]), float(p[1])), cov, third_c, third_raw)


def resample(psi, grid):
    """Bilinear interpolation of |psi|^2 onto a lab-frame grid (zero outside)."""
    if not isinstance(grid, GridSpec):
        grid = GridSpec(*grid)
    xl, yl = np.meshgrid(*grid.coords(), indexing="ij")
    R = rotation(psi.angle)
    # grid coords X = R^T r
    Xq = R[0, 0] * xl + R[1, 0] * yl
    Yq = R[0, 1] * xl + R[1, 1] * yl
    fi = (Xq - psi.x0) / psi.dx + psi.nx // 2
    fj = (Yq - psi.y0) / psi.dy + psi.ny // 2
    i0 = np.floor(fi).astype(int)
    j0 = np.floor(fj).astype(int)
    ti, tj = fi - i0, fj - j0
    I = psi.intensity()
    out = np.zeros(xl.shape)
    inside = (i0 >= 0) & (i0 < psi.nx - 1) & (j0 >= 0) & (j0 < psi.ny - 1)
    a, b, u, v = i0[inside], j0[inside], ti[inside], tj[inside]
    out[inside] = ((1 - u) * (1 - v) * I[a, b] + u * (1 - v) * I[a + 1, b]
                   + (1 - u) * v * I[a, b + 1] + u * v * I[a + 1, b + 1])
    return out


# -- I/O --------------------------------------------------------------------------------

MAGIC = b"WFLD"
_HEADER_V1 = struct.Struct("<4sIII5d")
_EXTRA_V2 = struct.Struct("<5d")


def write_wfld(path, psi, version=2):
    """Write the little-endian binary wavefield format.

    Header: magic "WFLD", u32 version, u32 nx, u32 ny, f64 dx, dy, x0, y0, z.
    Version 2 follows with f64 p0c, hbar_c, angle, curvature, phase and stores
    the samples untouched. Version 1 stops there, so the quadratic and global
    phases are multiplied into the samples and the grid must be unrotated.
    Samples follow as nx*ny (re, im) f64 pairs, row-major over (i, j).
    """
    if version == 1:
        if abs(_wrap(psi.angle)) > 1e-15:
            raise GridError("version 1 files cannot carry a rotated grid; resample or use version 2")
        vals = psi.full_values()
    elif version == 2:
        vals = psi.values
    else:
        raise DomainError(f"unknown WFLD version {version}")
    with open(path, "wb") as fh:
        fh.write(_HEADER_V1.pack(MAGIC, version, psi.nx, psi.ny, psi.dx, psi.dy, psi.x0, psi.y0, psi.z))
        if version == 2:
            fh.write(_EXTRA_V2.pack(psi.p0c, psi.hbar_c, psi.angle, psi.curvature, psi.phase))
        fh.write(np.ascontiguousarray(vals, dtype="<c16").tobytes())


def read_wfld(path, p0c=None, hbar_c=None):
    """Read a WFLD file; version 1 files need ``p0c`` and ``hbar_c`` supplied."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER_V1.size:
        raise DomainError("file too short for a WFLD header")
    magic, version, nx, ny, dx, dy, x0, y0, z = _HEADER_V1.unpack_from(data, 0)
    if magic != MAGIC:
        raise DomainError(f"bad magic {magic!r}")
    off = _HEADER_V1.size
    angle = curvature = phase = 0.0
    if version == 2:
        p0c, hbar_c, angle, curvature, phase = _EXTRA_V2.unpack_from(data, off)
        off += _EXTRA_V2.size
    elif version == 1:
        if p0c is None or hbar_c is None:
            raise DomainError("version 1 files do not store p0c and hbar_c; pass them explicitly")
    else:
        raise DomainError(f"unknown WFLD version {version}")
    count = nx * ny
    if len(data) - off != 16 * count:
        raise DomainError(f"expected {count} samples, file holds {(len(data) - off) // 16}")
    vals = np.frombuffer(data, dtype="<c16", count=count, offset=off).reshape(nx, ny).astype(complex)
    return WaveField(vals, dx, dy, x0, y0, z, p0c, hbar_c, angle, curvature, phase)


def write_intensity_csv(path, psi):
    """CSV of lab-frame x, y and |psi|^2 for every cell."""
    xl, yl = psi.lab_coords()
    I = psi.intensity()
    arr = np.column_stack([xl.ravel(), yl.ravel(), I.ravel()])
    np.savetxt(path, arr, delimiter=",", header="x,y,intensity", comments="", fmt="%.17g")


__all__ = [
    "GridSpec", "WaveField", "PropagationPlan", "Moments", "make_gaussian", "make_plan",
    "free_space_plan", "default_h_threshold", "nyquist_factors", "propagate", "propagate_to_image",
    "apply_plan", "moments", "spectral_norm2", "resample", "write_wfld", "read_wfld",
    "write_intensity_csv",
]
