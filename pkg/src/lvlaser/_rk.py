"""Adaptive Dormand-Prince 5(4) stepper specialized to the four-variable laser system.

One embedded explicit pair with PI step-size control drives everything; the
state vector is y = (n, x, rho11, rho00) with rho22 eliminated through the
population trace, so the trace is conserved identically and only the
reconstruction rounding can drift.

The kernel is plain array code, JIT-compiled with numba when available and
executed as-is otherwise.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a normal dependency
    HAVE_NUMBA = False

    def _njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


# Step outcome codes shared with dynamics.py.
OK = 0
STEP_UNDERFLOW = 1
NON_FINITE = 2

_EPS = 2.220446049250313e-16

# Dormand-Prince 5(4) tableau.
_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# Error weights: difference between the 5th and embedded 4th order solutions.
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)
# Dense-output weights of the 4th-order continuous extension.
_D1 = -12715105075.0 / 11282082432.0
_D3 = 87487479700.0 / 32700410799.0
_D4 = -10690763975.0 / 1880347072.0
_D5 = 701980252875.0 / 199316789632.0
_D6 = -1453857185.0 / 822651844.0
_D7 = 69997945.0 / 29380423.0


@_njit(cache=True)
def _rhs(y, out, n_atoms, g, kappa, g10, g21, g02, gcol):
    n = y[0]
    x = y[1]
    r11 = y[2]
    r00 = y[3]
    r22 = 1.0 - r00 - r11
    gperp = 0.5 * (g10 + g02 + gcol)
    out[0] = -2.0 * kappa * n + n_atoms * g * x
    out[1] = -gperp * x + 2.0 * g * ((n + 1.0) * r11 - n * r00)
    out[2] = -g10 * r11 + g21 * r22 - g * x
    out[3] = -g02 * r00 + g10 * r11 + g * x


@_njit(cache=True)
def _initial_step(y, f0, t_span, rtol, atol, n_atoms, g, kappa, g10, g21, g02, gcol):
    d0 = 0.0
    d1 = 0.0
    for i in range(4):
        sc = atol + rtol * abs(y[i])
        d0 = max(d0, abs(y[i]) / sc)
        d1 = max(d1, abs(f0[i]) / sc)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, t_span)
    y1 = np.empty(4)
    f1 = np.empty(4)
    for i in range(4):
        y1[i] = y[i] + h0 * f0[i]
    _rhs(y1, f1, n_atoms, g, kappa, g10, g21, g02, gcol)
    d2 = 0.0
    for i in range(4):
        sc = atol + rtol * abs(y[i])
        d2 = max(d2, abs(f1[i] - f0[i]) / sc)
    d2 /= h0
    dm = max(d1, d2)
    if dm <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / dm) ** 0.2
    return min(100.0 * h0, h1, t_span)


@_njit(cache=True)
def advance(y, t0, t1, n_atoms, g, kappa, g10, g21, g02, gcol,
            rtol, atol, max_step, h_start, ts_out, ys_out):
    """Integrate y in place from t0 to t1.

    ts_out (sorted, within [t0, t1]) requests dense-output samples written to
    ys_out.  Returns (status, t_reached, h_next, n_accepted, n_rejected).
    """
    t = t0
    span = t1 - t0
    n_samples = ts_out.shape[0]
    j = 0
    while j < n_samples and ts_out[j] <= t:
        for i in range(4):
            ys_out[j, i] = y[i]
        j += 1
    if span <= 0.0:
        while j < n_samples:
            for i in range(4):
                ys_out[j, i] = y[i]
            j += 1
        return OK, t, 0.0, 0, 0

    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    k5 = np.empty(4)
    k6 = np.empty(4)
    k7 = np.empty(4)
    yt = np.empty(4)
    y_new = np.empty(4)

    _rhs(y, k1, n_atoms, g, kappa, g10, g21, g02, gcol)
    for i in range(4):
        if not np.isfinite(k1[i]):
            return NON_FINITE, t, 0.0, 0, 0

    if h_start > 0.0:
        h = min(h_start, span, max_step)
    else:
        h = min(_initial_step(y, k1, span, rtol, atol,
                              n_atoms, g, kappa, g10, g21, g02, gcol), max_step)

    err_old = 1e-4
    n_accepted = 0
    n_rejected = 0
    just_rejected = False

    while t < t1:
        if h > max_step:
            h = max_step
        if t + h > t1:
            h = t1 - t
        if h <= 4.0 * _EPS * max(abs(t), 1.0):
            return STEP_UNDERFLOW, t, h, n_accepted, n_rejected

        for i in range(4):
            yt[i] = y[i] + h * _A21 * k1[i]
        _rhs(yt, k2, n_atoms, g, kappa, g10, g21, g02, gcol)
        for i in range(4):
            yt[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
        _rhs(yt, k3, n_atoms, g, kappa, g10, g21, g02, gcol)
        for i in range(4):
            yt[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        _rhs(yt, k4, n_atoms, g, kappa, g10, g21, g02, gcol)
        for i in range(4):
            yt[i] = y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
        _rhs(yt, k5, n_atoms, g, kappa, g10, g21, g02, gcol)
        for i in range(4):
            yt[i] = y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i]
                                + _A64 * k4[i] + _A65 * k5[i])
        _rhs(yt, k6, n_atoms, g, kappa, g10, g21, g02, gcol)
        for i in range(4):
            y_new[i] = y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i]
                                   + _B5 * k5[i] + _B6 * k6[i])
        _rhs(y_new, k7, n_atoms, g, kappa, g10, g21, g02, gcol)

        err = 0.0
        finite = True
        for i in range(4):
            if not np.isfinite(y_new[i]):
                finite = False
                break
            e = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i]
                     + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
            sc = atol + rtol * max(abs(y[i]), abs(y_new[i]))
            err += (e / sc) ** 2
        if not finite or not np.isfinite(err):
            h *= 0.2
            n_rejected += 1
            just_rejected = True
            if h <= 4.0 * _EPS * max(abs(t), 1.0):
                return NON_FINITE, t, h, n_accepted, n_rejected
            continue
        err = np.sqrt(err / 4.0)

        if err <= 1.0:
            t_new = t + h
            if j < n_samples and ts_out[j] <= t_new:
                # Shampine's continuous extension for the samples inside the step.
                r1 = np.empty(4)
                r2 = np.empty(4)
                r3 = np.empty(4)
                r4 = np.empty(4)
                r5 = np.empty(4)
                for i in range(4):
                    dy = y_new[i] - y[i]
                    bspl = h * k1[i] - dy
                    r1[i] = y[i]
                    r2[i] = dy
                    r3[i] = bspl
                    r4[i] = dy - h * k7[i] - bspl
                    r5[i] = h * (_D1 * k1[i] + _D3 * k3[i] + _D4 * k4[i]
                                 + _D5 * k5[i] + _D6 * k6[i] + _D7 * k7[i])
                while j < n_samples and ts_out[j] <= t_new:
                    th = (ts_out[j] - t) / h
                    th1 = 1.0 - th
                    for i in range(4):
                        ys_out[j, i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])))
                    j += 1
            for i in range(4):
                y[i] = y_new[i]
                k1[i] = k7[i]
            t = t_new
            n_accepted += 1
            fac = 0.9 * err ** -0.17 * err_old ** 0.04
            if just_rejected:
                fac = min(fac, 1.0)
            h *= min(10.0, max(0.2, fac))
            err_old = max(err, 1e-10)
            just_rejected = False
        else:
            n_rejected += 1
            just_rejected = True
            h *= max(0.2, 0.9 * err ** -0.2)

    while j < n_samples:
        for i in range(4):
            ys_out[j, i] = y[i]
        j += 1
    return OK, t, h, n_accepted, n_rejected


_EMPTY_TS = np.empty(0, dtype=np.float64)
_EMPTY_YS = np.empty((0, 4), dtype=np.float64)


def advance_plain(y, t0, t1, rates, rtol, atol, max_step, h_start=0.0):
    """advance() without dense output; rates = (N, g, kappa, g10, g21, g02, gcol)."""
    return advance(y, t0, t1, *rates, rtol, atol, max_step, h_start,
                   _EMPTY_TS, _EMPTY_YS)
