"""Pure-Python versions of the hot kernels.

Same call signatures as the compiled ``_ckernels`` module. Selected by
``lenscope._backend`` when the extension is missing or when
``LENSCOPE_PURE_PYTHON=1`` is set.
"""

import math

import numpy as np

# axial model codes shared with the compiled kernels
UNIFORM = 0
GLASER = 1
POWERLAW = 2

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAX_STEPS = 2


def alpha2_model(model, params, z):
    """Squared lens strength for the built-in analytic models."""
    p0 = params[0]
    if model == UNIFORM:
        return p0 * p0
    if model == GLASER:
        u = z / params[1]
        d = 1.0 + u * u
        return p0 * p0 / (d * d)
    if model == POWERLAW:
        return p0 * p0 * z ** (2.0 * params[1])
    raise ValueError(f"unknown model code {model}")


def dopri_paraxial(alpha2, zi, zs, rtol, atol, h_init=0.0, max_steps=1_000_000):
    """Integrate g'' = -alpha2 g, h'' = -alpha2 h from the identity at ``zi``.

    ``alpha2`` is a scalar callable. ``zs`` must be monotone in the
    direction of integration. ``atol`` is a length-4 sequence for the state
    ``(g, g', h, h')``.

    Returns ``(out, nsteps, status, z_last)`` where ``out`` has shape
    ``(len(zs), 4)``.
    """
    zs = np.asarray(zs, dtype=float)
    n_out = zs.shape[0]
    out = np.empty((n_out, 4))
    y = [1.0, 0.0, 0.0, 1.0]
    z = float(zi)
    atol = [float(a) for a in atol]
    if n_out == 0:
        return out, 0, STATUS_OK, z

    span = abs(zs[-1] - z)
    direction = 1.0 if zs[-1] >= z else -1.0
    h = abs(h_init) if h_init else max(span * 1e-3, 1e-12)
    a2 = alpha2(z)
    k1 = [y[1], -a2 * y[0], y[3], -a2 * y[2]]
    nsteps = 0
    k = 0
    while k < n_out and zs[k] == z:
        out[k] = y
        k += 1

    while k < n_out:
        if nsteps >= max_steps:
            return out, nsteps, STATUS_MAX_STEPS, z
        target = zs[k]
        remaining = abs(target - z)
        hit = h >= remaining
        step = remaining if hit else h
        if step < 1e-14 * max(1.0, abs(z)):
            return out, nsteps, STATUS_UNDERFLOW, z
        dz = direction * step

        ks = [k1]
        for s in range(1, 7):
            row = _A[s]
            yt = [y[i] + dz * sum(row[j] * ks[j][i] for j in range(s)) for i in range(4)]
            a2 = alpha2(z + _C[s] * dz)
            ks.append([yt[1], -a2 * yt[0], yt[3], -a2 * yt[2]])
        # FSAL: stage 7 is evaluated at the 5th-order solution
        y_new = yt
        err = 0.0
        for i in range(4):
            e = dz * sum(_E[j] * ks[j][i] for j in range(7))
            sc = atol[i] + rtol * max(abs(y[i]), abs(y_new[i]))
            err = max(err, abs(e) / sc)
        nsteps += 1
        if not math.isfinite(err):
            h = step * 0.2
            continue
        if err <= 1.0:
            z = target if hit else z + dz
            y = y_new
            k1 = ks[6]
            while k < n_out and zs[k] == target and hit:
                out[k] = y
                k += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            if hit:
                # do not let a short landing step shrink the controller
                h = max(h, step * fac) if fac > 1.0 else h
            else:
                h = step * fac
        else:
            h = step * max(0.2, 0.9 * err ** -0.2)
    return out, nsteps, STATUS_OK, z


def dopri_model(model, params, zi, zs, rtol, atol, h_init=0.0, max_steps=1_000_000):
    """``dopri_paraxial`` with one of the built-in analytic models."""
    params = tuple(float(p) for p in params)
    return dopri_paraxial(
        lambda z: alpha2_model(model, params, z), zi, zs, rtol, atol, h_init, max_steps
    )


def series_0f1(b, x, rel_tol=1e-14, max_terms=200):
    """Sum ``S = sum_j (-x)^j / ((b)_j j!)`` and ``S1 = sum_j j t_j``.

    ``x`` is an array of non-negative reals. ``S1`` gives the term-wise
    derivative ``x dS/dx``. Returns ``(S, S1, nterms)`` where ``nterms`` is the
    largest number of terms used, or -1 if any entry failed to converge.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    S = np.empty_like(x)
    S1 = np.empty_like(x)
    worst = 0
    for idx in range(x.shape[0]):
        xv = x[idx]
        t = 1.0
        s = 1.0
        s1 = 0.0
        converged = False
        j = 0
        for j in range(1, max_terms + 1):
            t *= -xv / (j * (b + j - 1))
            s += t
            s1 += j * t
            if j * (b + j - 1) > xv and abs(t) * j <= rel_tol * max(abs(s), abs(s1), 1e-300):
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


def cumulative_integral(f, step):
    """Fourth-order cumulative integral of uniformly sampled ``f``.

    Each panel ``[x_i, x_{i+1}]`` is integrated with the cubic through the
    four nearest samples. Needs at least four samples.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    if n < 4:
        raise ValueError("cumulative_integral needs at least 4 samples")
    panel = np.empty(n - 1)
    panel[1:-1] = (-f[:-3] + 13.0 * f[1:-2] + 13.0 * f[2:-1] - f[3:]) / 24.0
    panel[0] = (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) / 24.0
    panel[-1] = (9.0 * f[-1] + 19.0 * f[-2] - 5.0 * f[-3] + f[-4]) / 24.0
    out = np.empty(n)
    out[0] = 0.0
    np.cumsum(panel * step, out=out[1:])
    return out
