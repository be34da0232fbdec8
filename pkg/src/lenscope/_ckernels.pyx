# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: paraxial ODE stepping, 0F1 series, cumulative quadrature.

Mirrors ``lenscope._pykernels`` call for call.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, isfinite

cnp.import_array()

UNIFORM = 0
GLASER = 1
POWERLAW = 2

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAX_STEPS = 2

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192, A75 = -2187.0 / 6784, A76 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40


cdef inline double _alpha2(int model, double p0, double p1, double z) nogil:
    cdef double u, d
    if model == 0:
        return p0 * p0
    elif model == 1:
        u = z / p1
        d = 1.0 + u * u
        return p0 * p0 / (d * d)
    else:
        return p0 * p0 * pow(z, 2.0 * p1)


def alpha2_model(int model, params, double z):
    if model not in (0, 1, 2):
        raise ValueError(f"unknown model code {model}")
    p = [float(v) for v in params] + [0.0, 0.0]
    return _alpha2(model, p[0], p[1], z)


cdef inline void _rhs(double a2, double* y, double* k) nogil:
    k[0] = y[1]
    k[1] = -a2 * y[0]
    k[2] = y[3]
    k[3] = -a2 * y[2]


def dopri_model(int model, params, double zi, zs, double rtol, atol,
                double h_init=0.0, long max_steps=1000000):
    """Dormand-Prince 5(4) integration of the paraxial pair for an analytic model.

    Returns ``(out, nsteps, status, z_last)``; ``out`` has shape ``(len(zs), 4)``
    holding ``(g, g', h, h')``.
    """
    if model not in (0, 1, 2):
        raise ValueError(f"unknown model code {model}")
    p = [float(v) for v in params] + [0.0, 0.0]
    cdef double p0 = p[0], p1 = p[1]
    if model == 2:
        p1 = <double> (<int> p1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] zz = np.ascontiguousarray(zs, dtype=np.float64)
    cdef Py_ssize_t n_out = zz.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n_out, 4))
    cdef double at[4]
    cdef int i
    for i in range(4):
        at[i] = float(atol[i])

    cdef double y[4]
    cdef double yt[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double k5[4]
    cdef double k6[4]
    cdef double k7[4]
    y[0] = 1.0; y[1] = 0.0; y[2] = 0.0; y[3] = 1.0
    cdef double z = zi
    if n_out == 0:
        return out, 0, STATUS_OK, z

    cdef double span = fabs(zz[n_out - 1] - z)
    cdef double direction = 1.0 if zz[n_out - 1] >= z else -1.0
    cdef double h = fabs(h_init) if h_init != 0.0 else max(span * 1e-3, 1e-12)
    cdef double target, remaining, step, dz, err, e, sc, fac, a2
    cdef bint hit
    cdef long nsteps = 0
    cdef Py_ssize_t k = 0
    cdef int status = 0

    _rhs(_alpha2(model, p0, p1, z), y, k1)
    while k < n_out and zz[k] == z:
        for i in range(4):
            out[k, i] = y[i]
        k += 1

    with nogil:
        while k < n_out:
            if nsteps >= max_steps:
                status = 2
                break
            target = zz[k]
            remaining = fabs(target - z)
            hit = h >= remaining
            step = remaining if hit else h
            if step < 1e-14 * max(1.0, fabs(z)):
                status = 1
                break
            dz = direction * step

            for i in range(4):
                yt[i] = y[i] + dz * A21 * k1[i]
            _rhs(_alpha2(model, p0, p1, z + C2 * dz), yt, k2)
            for i in range(4):
                yt[i] = y[i] + dz * (A31 * k1[i] + A32 * k2[i])
            _rhs(_alpha2(model, p0, p1, z + C3 * dz), yt, k3)
            for i in range(4):
                yt[i] = y[i] + dz * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            _rhs(_alpha2(model, p0, p1, z + C4 * dz), yt, k4)
            for i in range(4):
                yt[i] = y[i] + dz * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            _rhs(_alpha2(model, p0, p1, z + C5 * dz), yt, k5)
            for i in range(4):
                yt[i] = y[i] + dz * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
            _rhs(_alpha2(model, p0, p1, z + dz), yt, k6)
            for i in range(4):
                yt[i] = y[i] + dz * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
            _rhs(_alpha2(model, p0, p1, z + dz), yt, k7)

            err = 0.0
            for i in range(4):
                e = dz * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
                sc = at[i] + rtol * max(fabs(y[i]), fabs(yt[i]))
                err = max(err, fabs(e) / sc)
            nsteps += 1
            if not isfinite(err):
                h = step * 0.2
                continue
            if err <= 1.0:
                if hit:
                    z = target
                else:
                    z = z + dz
                for i in range(4):
                    y[i] = yt[i]
                    k1[i] = k7[i]
                while hit and k < n_out and zz[k] == target:
                    for i in range(4):
                        out[k, i] = y[i]
                    k += 1
                if err == 0.0:
                    fac = 5.0
                else:
                    fac = min(5.0, max(0.2, 0.9 * pow(err, -0.2)))
                if hit:
                    if fac > 1.0:
                        h = max(h, step * fac)
                else:
                    h = step * fac
            else:
                h = step * max(0.2, 0.9 * pow(err, -0.2))
    return out, nsteps, status, z


def series_0f1(double b, x, double rel_tol=1e-14, int max_terms=200):
    """``S = sum_j (-x)^j / ((b)_j j!)`` and ``S1 = sum_j j t_j`` over an array ``x``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    cdef Py_ssize_t n = xx.shape[0], idx
    cdef cnp.ndarray[cnp.float64_t, ndim=1] S = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] S1 = np.empty(n)
    cdef double xv, t, s, s1, ref
    cdef int j, worst = 0
    cdef bint converged
    with nogil:
        for idx in range(n):
            xv = xx[idx]
            t = 1.0
            s = 1.0
            s1 = 0.0
            converged = False
            j = 0
            for j in range(1, max_terms + 1):
                t *= -xv / (j * (b + j - 1))
                s += t
                s1 += j * t
                ref = max(max(fabs(s), fabs(s1)), 1e-300)
                if j * (b + j - 1) > xv and fabs(t) * j <= rel_tol * ref:
                    converged = True
                    break
                if t == 0.0:
                    converged = True
                    break
            if not converged:
                worst = -1
            elif worst >= 0:
                worst = max(worst, j)
            S[idx] = s
            S1[idx] = s1
    return S, S1, worst


def cumulative_integral(f, double step):
    """Fourth-order cumulative integral on a uniform grid (cubic per panel)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ff = np.ascontiguousarray(f, dtype=np.float64)
    cdef Py_ssize_t n = ff.shape[0], i
    if n < 4:
        raise ValueError("cumulative_integral needs at least 4 samples")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double acc = 0.0, panel
    out[0] = 0.0
    with nogil:
        for i in range(n - 1):
            if i == 0:
                panel = 9.0 * ff[0] + 19.0 * ff[1] - 5.0 * ff[2] + ff[3]
            elif i == n - 2:
                panel = 9.0 * ff[n - 1] + 19.0 * ff[n - 2] - 5.0 * ff[n - 3] + ff[n - 4]
            else:
                panel = -ff[i - 1] + 13.0 * ff[i] + 13.0 * ff[i + 1] - ff[i + 2]
            acc += panel * step / 24.0
            out[i + 1] = acc
    return out
