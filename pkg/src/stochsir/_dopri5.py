"""Dormand-Prince 5(4) with Hairer's 4th-order continuous extension, compiled with numba.

The integrator takes the right-hand side as a jitted function
``rhs(t, y, args, out)`` so the whole solve runs without returning to the
interpreter.
"""

import numpy as np
from numba import njit

OK = 0
STEP_UNDERFLOW = 1
NON_FINITE = 2
TOO_MANY_STEPS = 3

STATUS_MESSAGES = {
    OK: "ok",
    STEP_UNDERFLOW: "step size underflow",
    NON_FINITE: "non-finite state",
    TOO_MANY_STEPS: "maximum number of steps exceeded",
}

C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
A71, A73, A74, A75, A76 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                          -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)
D1, D3, D4 = -12715105075.0 / 11282082432.0, 87487479700.0 / 32700410799.0, -10690763975.0 / 1880347072.0
D5, D6, D7 = 701980252875.0 / 199316789632.0, -1453857185.0 / 822651844.0, 69997945.0 / 29380423.0


@njit(cache=True)
def _norm(e, y0, y1, rtol, atol):
    acc = 0.0
    for i in range(e.shape[0]):
        sc = atol + rtol * max(abs(y0[i]), abs(y1[i]))
        acc += (e[i] / sc) ** 2
    return np.sqrt(acc / e.shape[0])


@njit(cache=True)
def _initial_step(rhs, t0, y0, f0, args, rtol, atol, t_end):
    n = y0.shape[0]
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y0[i])
        d0 += (y0[i] / sc) ** 2
        d1 += (f0[i] / sc) ** 2
    d0 = np.sqrt(d0 / n)
    d1 = np.sqrt(d1 / n)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t_end - t0)
    y1 = y0 + h0 * f0
    f1 = np.empty(n)
    rhs(t0 + h0, y1, args, f1)
    d2 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y0[i])
        d2 += ((f1[i] - f0[i]) / sc) ** 2
    d2 = np.sqrt(d2 / n) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, t_end - t0)


@njit(cache=True)
def dopri5(rhs, t0, y0, t_out, args, rtol, atol, max_steps):
    """Integrate from ``t0`` and return ``(values at t_out, status, n_steps)``."""
    n = y0.shape[0]
    m = t_out.shape[0]
    out = np.full((m, n), np.nan)
    j = 0
    while j < m and t_out[j] == t0:
        out[j, :] = y0
        j += 1
    if j == m:
        return out, OK, 0
    t_end = t_out[m - 1]
    y = y0.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    k7 = np.empty(n)
    tmp = np.empty(n)
    ynew = np.empty(n)
    err = np.empty(n)
    rhs(t0, y, args, k1)
    t = t0
    h = _initial_step(rhs, t0, y, k1, args, rtol, atol, t_end)
    steps = 0
    while True:
        if steps >= max_steps:
            return out, TOO_MANY_STEPS, steps
        min_h = 16.0 * np.spacing(abs(t) + 1.0)
        if h < min_h:
            return out, STEP_UNDERFLOW, steps
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        for i in range(n):
            tmp[i] = y[i] + h * A21 * k1[i]
        rhs(t + C2 * h, tmp, args, k2)
        for i in range(n):
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        rhs(t + C3 * h, tmp, args, k3)
        for i in range(n):
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        rhs(t + C4 * h, tmp, args, k4)
        for i in range(n):
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        rhs(t + C5 * h, tmp, args, k5)
        for i in range(n):
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
        rhs(t + h, tmp, args, k6)
        for i in range(n):
            ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
        rhs(t + h, ynew, args, k7)
        for i in range(n):
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        en = _norm(err, y, ynew, rtol, atol)
        steps += 1
        if not np.isfinite(en):
            if h <= min_h:
                return out, NON_FINITE, steps
            h *= 0.2
            continue
        if en > 1.0:
            h *= max(0.2, 0.9 * en ** -0.2)
            continue
        t_new = t_end if last else t + h
        while j < m and t_out[j] <= t_new:
            if t_out[j] == t_new:
                out[j, :] = ynew
            else:
                s = (t_out[j] - t) / h
                s1 = 1.0 - s
                for i in range(n):
                    dy = ynew[i] - y[i]
                    bspl = h * k1[i] - dy
                    r4 = dy - h * k7[i] - bspl
                    r5 = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                    out[j, i] = y[i] + s * (dy + s1 * (bspl + s * (r4 + s1 * r5)))
            j += 1
        for i in range(n):
            if not np.isfinite(ynew[i]):
                return out, NON_FINITE, steps
            y[i] = ynew[i]
            k1[i] = k7[i]
        t = t_new
        if last or j == m:
            return out, OK, steps
        fac = 10.0 if en == 0.0 else min(10.0, max(0.2, 0.9 * en ** -0.2))
        h *= fac
