"""Hot numeric kernels, each with a numba and a numpy implementation.

``trig_eval``
    Direct evaluation of a real trigonometric interpolant at arbitrary points,
    from its ``rfft`` coefficients.
``dopri_seeds``
    Adaptive Dormand-Prince 5(4) integration of the closed per-characteristic
    system ``m' = k/2 g^2 - m^2/2 + a``, ``g' = -g m``, ``L' = m`` for a batch
    of seeds, sampled at prescribed output times.

The public names dispatch on :data:`hs2._accel.USE_NUMBA`; the ``*_numba`` and
``*_numpy`` variants stay importable for benchmarks and cross-checks.
"""

import numpy as np

from ._accel import USE_NUMBA, jit

# dopri_seeds status codes
REACHED = 0
BLOWUP = 1
TOL_FAIL = 2

_TWO_PI = 2.0 * np.pi

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# difference between the 5th- and 4th-order weights
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


# ----------------------------------------------------------------------------
# trigonometric interpolation

def _trig_eval_loops(coef, n, points):
    # coef may be truncated after its last nonzero entry
    half = n // 2
    top = min(half, coef.shape[0])
    out = np.empty(points.shape[0])
    inv_n = 1.0 / n
    for p in range(points.shape[0]):
        x = points[p] - np.floor(points[p])
        z = np.exp(1j * _TWO_PI * x)
        w = 1.0 + 0.0j
        acc = coef[0].real
        for m in range(1, top):
            # re-anchor the recurrence to keep roundoff from accumulating
            if m % 64 == 0:
                w = np.exp(1j * _TWO_PI * x * m)
            else:
                w = w * z
            acc += 2.0 * (coef[m].real * w.real - coef[m].imag * w.imag)
        if coef.shape[0] > half:
            acc += coef[half].real * np.cos(np.pi * n * x)
        out[p] = acc * inv_n
    return out


def trig_eval_numpy(coef, n, points):
    """Evaluate ``irfft(coef, n)``'s trigonometric interpolant at ``points``."""
    points = np.asarray(points, dtype=float)
    x = points - np.floor(points)
    half = n // 2
    top = min(half, coef.shape[0])
    nyq = coef[half].real if coef.shape[0] > half else 0.0
    modes = np.arange(1, top)
    out = np.empty(x.shape[0])
    chunk = max(1, 4_000_000 // max(1, top))
    for s in range(0, x.shape[0], chunk):
        xs = x[s:s + chunk]
        phase = np.exp(1j * _TWO_PI * np.outer(xs, modes))
        body = 2.0 * (phase @ coef[1:top]).real
        out[s:s + chunk] = (coef[0].real + body + nyq * np.cos(np.pi * n * xs)) / n
    return out


_trig_eval_jit = jit(_trig_eval_loops)


def trig_eval_numba(coef, n, points):
    if _trig_eval_jit is None:  # pragma: no cover
        raise RuntimeError("numba is not installed")
    return _trig_eval_jit(np.ascontiguousarray(coef, dtype=np.complex128), int(n),
                          np.ascontiguousarray(points, dtype=np.float64))


# ----------------------------------------------------------------------------
# characteristic (Riccati) integration

def _rhs_py(m, g, k, a):
    return 0.5 * k * g * g - 0.5 * m * m + a, -g * m, m


# compiled first: the compiled integrator below resolves it as a global
_rhs_loops = jit(_rhs_py) or _rhs_py


def _dopri_seeds_loops(y0, k, a, t_out, rtol, atol, m_blow, out, t_blow, status):
    n_seeds = y0.shape[0]
    n_out = t_out.shape[0]
    span = t_out[n_out - 1] - t_out[0]
    for s in range(n_seeds):
        m = y0[s, 0]
        g = y0[s, 1]
        lq = y0[s, 2]
        t = t_out[0]
        out[0, s, 0] = m
        out[0, s, 1] = g
        out[0, s, 2] = lq
        status[s] = REACHED
        t_blow[s] = np.nan
        scale = max(1.0, abs(m), abs(g))
        h = min(1e-2 / scale, span) if span > 0 else 0.0
        j = 1
        while j < n_out:
            target = t_out[j]
            if t >= target:
                out[j, s, 0] = m
                out[j, s, 1] = g
                out[j, s, 2] = lq
                j += 1
                continue
            hh = min(h, target - t)
            if hh < 1e-15 * max(1.0, abs(t)):
                status[s] = TOL_FAIL
                break
            k1m, k1g, k1l = _rhs_loops(m, g, k, a)
            k2m, k2g, k2l = _rhs_loops(m + hh * _A21 * k1m, g + hh * _A21 * k1g, k, a)
            k3m, k3g, k3l = _rhs_loops(m + hh * (_A31 * k1m + _A32 * k2m),
                                       g + hh * (_A31 * k1g + _A32 * k2g), k, a)
            k4m, k4g, k4l = _rhs_loops(m + hh * (_A41 * k1m + _A42 * k2m + _A43 * k3m),
                                       g + hh * (_A41 * k1g + _A42 * k2g + _A43 * k3g), k, a)
            k5m, k5g, k5l = _rhs_loops(
                m + hh * (_A51 * k1m + _A52 * k2m + _A53 * k3m + _A54 * k4m),
                g + hh * (_A51 * k1g + _A52 * k2g + _A53 * k3g + _A54 * k4g), k, a)
            k6m, k6g, k6l = _rhs_loops(
                m + hh * (_A61 * k1m + _A62 * k2m + _A63 * k3m + _A64 * k4m + _A65 * k5m),
                g + hh * (_A61 * k1g + _A62 * k2g + _A63 * k3g + _A64 * k4g + _A65 * k5g), k, a)
            mn = m + hh * (_B1 * k1m + _B3 * k3m + _B4 * k4m + _B5 * k5m + _B6 * k6m)
            gn = g + hh * (_B1 * k1g + _B3 * k3g + _B4 * k4g + _B5 * k5g + _B6 * k6g)
            ln = lq + hh * (_B1 * k1l + _B3 * k3l + _B4 * k4l + _B5 * k5l + _B6 * k6l)
            k7m, k7g, k7l = _rhs_loops(mn, gn, k, a)
            em = hh * (_E1 * k1m + _E3 * k3m + _E4 * k4m + _E5 * k5m + _E6 * k6m + _E7 * k7m)
            eg = hh * (_E1 * k1g + _E3 * k3g + _E4 * k4g + _E5 * k5g + _E6 * k6g + _E7 * k7g)
            el = hh * (_E1 * k1l + _E3 * k3l + _E4 * k4l + _E5 * k5l + _E6 * k6l + _E7 * k7l)
            err = max(abs(em) / (atol + rtol * max(abs(m), abs(mn))),
                      abs(eg) / (atol + rtol * max(abs(g), abs(gn))),
                      abs(el) / (atol + rtol * max(abs(lq), abs(ln))))
            if not np.isfinite(err):
                h = 0.2 * hh
                continue
            if err <= 1.0:
                t = t + hh
                m = mn
                g = gn
                lq = ln
                if m < m_blow:
                    # extrapolate 1/m linearly to its zero crossing
                    t_blow[s] = t + m / k7m
                    status[s] = BLOWUP
                    break
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            if err > 1.0:
                fac = min(fac, 1.0)
            h = hh * fac
        for jj in range(j, n_out):
            if status[s] == REACHED:
                out[jj, s, 0] = m
                out[jj, s, 1] = g
                out[jj, s, 2] = lq
            else:
                out[jj, s, 0] = np.nan
                out[jj, s, 1] = np.nan
                out[jj, s, 2] = np.nan


_dopri_jit = jit(_dopri_seeds_loops)


def _check_inputs(y0, t_out):
    y0 = np.ascontiguousarray(np.atleast_2d(np.asarray(y0, dtype=np.float64)))
    t_out = np.ascontiguousarray(np.asarray(t_out, dtype=np.float64))
    if y0.shape[1] != 3:
        raise ValueError("seed states must be rows of (m, gamma, log_qx)")
    if t_out.ndim != 1 or t_out.size < 1 or np.any(np.diff(t_out) < 0):
        raise ValueError("t_out must be a non-decreasing 1-d array")
    return y0, t_out


def dopri_seeds_numba(y0, k, a, t_out, rtol=1e-10, atol=1e-10, m_blow=-1e6):
    if _dopri_jit is None:  # pragma: no cover
        raise RuntimeError("numba is not installed")
    y0, t_out = _check_inputs(y0, t_out)
    n_seeds = y0.shape[0]
    out = np.empty((t_out.size, n_seeds, 3))
    t_blow = np.empty(n_seeds)
    status = np.empty(n_seeds, dtype=np.int64)
    _dopri_jit(y0, float(k), float(a), t_out, float(rtol), float(atol), float(m_blow),
               out, t_blow, status)
    return out, t_blow, status


def _rhs_vec(y, k, a):
    m, g = y[:, 0], y[:, 1]
    return np.stack((0.5 * k * g * g - 0.5 * m * m + a, -g * m, m), axis=1)


def dopri_seeds_numpy(y0, k, a, t_out, rtol=1e-10, atol=1e-10, m_blow=-1e6):
    """Vectorised variant: all live seeds share one adaptive step."""
    y0, t_out = _check_inputs(y0, t_out)
    n_seeds = y0.shape[0]
    out = np.full((t_out.size, n_seeds, 3), np.nan)
    t_blow = np.full(n_seeds, np.nan)
    status = np.zeros(n_seeds, dtype=np.int64)
    out[0] = y0
    live = np.arange(n_seeds)
    y = y0.copy()
    t = t_out[0]
    span = t_out[-1] - t_out[0]
    h = min(1e-2 / max(1.0, np.abs(y0[:, :2]).max()), span) if span > 0 else 0.0
    j = 1
    while j < t_out.size and live.size:
        target = t_out[j]
        if t >= target:
            out[j, live] = y
            j += 1
            continue
        hh = min(h, target - t)
        if hh < 1e-15 * max(1.0, abs(t)):
            status[live] = TOL_FAIL
            break
        k1 = _rhs_vec(y, k, a)
        k2 = _rhs_vec(y + hh * _A21 * k1, k, a)
        k3 = _rhs_vec(y + hh * (_A31 * k1 + _A32 * k2), k, a)
        k4 = _rhs_vec(y + hh * (_A41 * k1 + _A42 * k2 + _A43 * k3), k, a)
        k5 = _rhs_vec(y + hh * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4), k, a)
        k6 = _rhs_vec(y + hh * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5), k, a)
        yn = y + hh * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = _rhs_vec(yn, k, a)
        e = hh * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        with np.errstate(over="ignore", invalid="ignore"):
            err = np.max(np.abs(e) / (atol + rtol * np.maximum(np.abs(y), np.abs(yn))))
        if not np.isfinite(err):
            h = 0.2 * hh
            continue
        if err <= 1.0:
            t += hh
            y = yn
            blown = y[:, 0] < m_blow
            if blown.any():
                idx = live[blown]
                t_blow[idx] = t + y[blown, 0] / k7[blown, 0]
                status[idx] = BLOWUP
                live = live[~blown]
                y = y[~blown]
        fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        if err > 1.0:
            fac = min(fac, 1.0)
        h = hh * fac
    if live.size and status[live[0]] == REACHED:
        out[j:, live] = y
    return out, t_blow, status


_trig_eval_impl = trig_eval_numba if USE_NUMBA else trig_eval_numpy
dopri_seeds = dopri_seeds_numba if USE_NUMBA else dopri_seeds_numpy


def trig_eval(coef, n, points):
    """Trigonometric interpolant at ``points``, skipping trailing zero modes."""
    nz = np.flatnonzero(coef)
    top = int(nz[-1]) + 1 if nz.size else 1
    return _trig_eval_impl(coef[:top], n, points)
