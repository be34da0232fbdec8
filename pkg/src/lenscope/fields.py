"""Axial field models B(z) and the lens strength alpha(z) = q B(z) / (2 p0)."""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import _backend
from .beamkin import BeamKinematics
from .errors import DomainError, RangeError, SingularityError

MAX_ORDER = 3


def _check_scalar_or_array(z):
    return np.asarray(z, dtype=float)


@dataclass(frozen=True)
class Glaser:
    """Bell-shaped field B0 / (1 + (z/a)^2); ``a`` is the half-width."""

    B0: float
    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"Glaser half-width must be positive, got {self.a}")

    @property
    def domain(self):
        return (-math.inf, math.inf)

    @property
    def length_scale(self):
        return self.a

    def derivatives(self, z, order=2):
        u = _check_scalar_or_array(z) / self.a
        d = 1.0 + u * u
        a = self.a
        out = [self.B0 / d]
        if order >= 1:
            out.append(-2.0 * self.B0 * u / (a * d**2))
        if order >= 2:
            out.append(self.B0 * (6.0 * u * u - 2.0) / (a**2 * d**3))
        if order >= 3:
            out.append(24.0 * self.B0 * u * (1.0 - u * u) / (a**3 * d**4))
        return out


@dataclass(frozen=True)
class PowerLaw:
    """B0 k_n z^n with integer n > 0 or n < -1.

    ``k_n`` carries units of length^-n so that k_n z^n is dimensionless.
    For negative n the field is only defined on one half-line; ``side`` is +1
    for z > 0 and -1 for z < 0.
    """

    B0: float
    k_n: float
    n: int
    side: int = 1

    def __post_init__(self):
        if int(self.n) != self.n:
            raise DomainError(f"power-law exponent must be an integer, got {self.n}")
        if self.n in (0, -1):
            raise DomainError("n = 0 and n = -1 fields cannot focus a beam")
        if self.side not in (1, -1):
            raise DomainError("side must be +1 or -1")

    @property
    def domain(self):
        if self.n > 0:
            return (-math.inf, math.inf)
        return (0.0, math.inf) if self.side > 0 else (-math.inf, 0.0)

    @property
    def length_scale(self):
        return abs(self.k_n) ** (-1.0 / self.n)

    def derivatives(self, z, order=2):
        z = _check_scalar_or_array(z)
        n = self.n
        if n < 0:
            if np.any(z == 0):
                raise SingularityError(f"B ~ z^{n} diverges at z = 0")
            if np.any(np.sign(z) != self.side):
                raise RangeError(f"z on the wrong half-line for side={self.side}")
        c = self.B0 * self.k_n
        out = []
        coef = c
        for k in range(order + 1):
            p = n - k
            out.append(coef * z**p if (p >= 0 or n < 0) else np.zeros_like(z) * coef)
            coef *= p
        return out


@dataclass(frozen=True)
class Uniform:
    """Constant axial field B0."""

    B0: float

    @property
    def domain(self):
        return (-math.inf, math.inf)

    @property
    def length_scale(self):
        return 1.0

    def derivatives(self, z, order=2):
        z = _check_scalar_or_array(z)
        out = [self.B0 + 0.0 * z]
        out += [0.0 * z for _ in range(order)]
        return out


@dataclass(frozen=True)
class Tabulated:
    """Sampled B(z) with a natural cubic spline through the samples."""

    z: tuple
    B: tuple
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if z.ndim != 1 or z.shape != B.shape:
            raise DomainError("tabulated z and B must be 1-D and of equal length")
        if z.size < 4:
            raise DomainError("tabulated profile needs at least 4 samples")
        if np.any(np.diff(z) <= 0):
            raise DomainError("tabulated z samples must be strictly increasing")
        object.__setattr__(self, "z", tuple(z))
        object.__setattr__(self, "B", tuple(B))
        object.__setattr__(self, "_spline", CubicSpline(z, B, bc_type="natural"))

    @classmethod
    def from_csv(cls, path, z_scale=1.0, B_scale=1.0):
        """Load a two-column (z, B) CSV with a header row."""
        zs, Bs = [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            for row in reader:
                if not row or not row[0].strip():
                    continue
                zs.append(float(row[0]) * z_scale)
                Bs.append(float(row[1]) * B_scale)
        return cls(tuple(zs), tuple(Bs))

    @property
    def domain(self):
        return (self.z[0], self.z[-1])

    @property
    def length_scale(self):
        return (self.z[-1] - self.z[0]) / 10.0

    @property
    def knots(self):
        return np.asarray(self.z)

    def derivatives(self, z, order=2):
        z = _check_scalar_or_array(z)
        lo, hi = self.domain
        if np.any(z < lo) or np.any(z > hi):
            raise RangeError(f"z outside tabulated range [{lo}, {hi}]")
        return [self._spline(z, k) for k in range(order + 1)]


FieldProfile = Glaser | PowerLaw | Uniform | Tabulated


def field_at(profile, z):
    """Return ``(B, B', B'')`` at ``z`` (scalar or array)."""
    B, B1, B2 = profile.derivatives(z, 2)
    if np.ndim(B) == 0:
        return float(B), float(B1), float(B2)
    return B, B1, B2


@dataclass(frozen=True)
class LensStrength:
    """A field profile paired with a beam: alpha(z) = q B(z) / (2 p0)."""

    profile: object
    beam: BeamKinematics

    @property
    def alpha0(self):
        return self.beam.alpha(self.profile.B0) if hasattr(self.profile, "B0") else None

    @property
    def length_scale(self):
        if isinstance(self.profile, Uniform) and self.alpha0:
            return 1.0 / abs(self.alpha0)
        return self.profile.length_scale

    @property
    def domain(self):
        return self.profile.domain

    def alpha(self, z):
        return self.beam.alpha_per_tesla * self.profile.derivatives(z, 0)[0]

    def alpha2(self, z):
        a = self.alpha(z)
        return a * a

    def kernel_model(self):
        """``(code, params)`` for the compiled paraxial kernel, or None."""
        p = self.profile
        if isinstance(p, Glaser):
            return _backend.GLASER, (self.alpha0, p.a)
        if isinstance(p, PowerLaw):
            return _backend.POWERLAW, (self.alpha0 * p.k_n, p.n)
        if isinstance(p, Uniform):
            return _backend.UNIFORM, (self.alpha0,)
        return None

    def check_interval(self, zi, z):
        """Raise if [zi, z] leaves the domain or straddles a singularity."""
        lo, hi = self.domain
        a, b = min(zi, z), max(zi, z)
        p = self.profile
        if isinstance(p, PowerLaw) and p.n < 0 and a <= 0.0 <= b:
            raise SingularityError(f"interval [{a}, {b}] touches the z = 0 singularity")
        if a < lo or b > hi:
            if isinstance(p, Tabulated):
                raise RangeError(f"interval [{a}, {b}] outside tabulated range [{lo}, {hi}]")
            raise RangeError(f"interval [{a}, {b}] outside profile domain [{lo}, {hi}]")


def alpha_derivs(ls, z, order=0):
    """Return ``[alpha, alpha', ...]`` up to ``order`` (at most 3)."""
    if not 0 <= order <= MAX_ORDER:
        raise DomainError(f"derivative order must be in 0..{MAX_ORDER}, got {order}")
    k = ls.beam.alpha_per_tesla
    out = [k * d for d in ls.profile.derivatives(z, order)]
    if np.ndim(out[0]) == 0:
        return [float(v) for v in out]
    return out
