"""Compiled inner loops for the chain vector field and the RK steppers.

These mirror :func:`qgaudin.systems.flat_field` and the Python steppers in
:mod:`qgaudin.integrate`; the test-suite checks that both routes agree.
Status codes returned by the solvers: 0 ok, 1 step-size underflow or step
budget exhausted, 2 non-finite state.
"""
import math

import numpy as np
from numba import njit

TAG_GAUDIN = 0
TAG_QRS = 1

_SMALL_Z = 1e-12


@njit(cache=True)
def _sinhc(x):
    if abs(x) < 1e-4:
        x2 = x * x
        return 1.0 + x2 / 6.0 + x2 * x2 / 120.0
    return math.sinh(x) / x


@njit(cache=True)
def _expm1_ratio(x):
    if x == 0.0:
        return 1.0
    return -math.expm1(-x) / x


@njit(cache=True)
def field_into(y, tag, z, kappa, w, out):
    n = y.size // 3
    big = n > 1000
    P = 0.0
    comp = 0.0
    Sp = 0.0
    Sm = 0.0
    for i in range(n):
        w[i] = math.exp(-z * (P + comp))
        v = y[3 * i]
        if big:
            t = P + v
            if abs(P) >= abs(v):
                comp += (P - t) + v
            else:
                comp += (v - t) + P
            P = t
        else:
            P += v
        Sp += w[i] * y[3 * i + 1]
        Sm += w[i] * y[3 * i + 2]
    S3 = P + comp
    if tag == TAG_QRS:
        e = math.exp(0.5 * z * S3)
        g3 = 0.5 * z * (Sp + Sm) * e
        gp = e
        gm = e
    else:
        e = math.exp(z * S3)
        g3 = kappa * 0.5 * S3 * _sinhc(z * S3) + z * Sp * Sm * e
        gp = Sm * e
        gm = Sp * e
    tp = 0.0
    tm = 0.0
    small = abs(z) < _SMALL_Z
    for i in range(n - 1, -1, -1):
        s3 = y[3 * i]
        sp = y[3 * i + 1]
        sm = y[3 * i + 2]
        d3 = g3 - z * (gp * tp + gm * tm)
        dp = gp * w[i]
        dm = gm * w[i]
        if small:
            j23 = kappa * s3
        else:
            j23 = kappa * s3 * _expm1_ratio(2.0 * z * s3) + 2.0 * z * sp * sm
        out[3 * i] = 2.0 * (sp * dp - sm * dm)
        out[3 * i + 1] = -2.0 * sp * d3 + j23 * dm
        out[3 * i + 2] = 2.0 * sm * d3 - j23 * dp
        tp += w[i] * sp
        tm += w[i] * sm


@njit(cache=True)
def field(y, tag, z, kappa):
    out = np.empty_like(y)
    w = np.empty(y.size // 3)
    field_into(y, tag, z, kappa, w, out)
    return out


@njit(cache=True)
def _all_finite(y):
    for v in y:
        if not math.isfinite(v):
            return False
    return True


@njit(cache=True)
def rk4_solve(y0, sample_t, dt, tag, z, kappa):
    n = y0.size
    out = np.empty((sample_t.size, n))
    w = np.empty(n // 3)
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    y = y0.copy()
    out[0] = y
    t = sample_t[0]
    for j in range(1, sample_t.size):
        span = sample_t[j] - t
        m = max(1, int(math.ceil(span / dt * (1.0 - 1e-12))))
        h = span / m
        for _ in range(m):
            field_into(y, tag, z, kappa, w, k1)
            field_into(y + 0.5 * h * k1, tag, z, kappa, w, k2)
            field_into(y + 0.5 * h * k2, tag, z, kappa, w, k3)
            field_into(y + h * k3, tag, z, kappa, w, k4)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not _all_finite(y):
            return out, 2, sample_t[j], h
        t = sample_t[j]
        out[j] = y
    return out, 0, t, dt


@njit(cache=True)
def dopri_solve(y0, t0, t1, sample_t, rtol, atol, h0, max_steps, tag, z, kappa, C, A, B, E, P):
    n = y0.size
    out = np.empty((sample_t.size, n))
    w = np.empty(n // 3)
    K = np.empty((7, n))
    ytmp = np.empty(n)
    y = y0.copy()
    j = 0
    while j < sample_t.size and sample_t[j] <= t0:
        out[j] = y
        j += 1
    field_into(y, tag, z, kappa, w, K[0])
    t = t0
    h = h0
    steps = 0
    eps = np.finfo(np.float64).eps
    while t < t1:
        if steps >= max_steps:
            return out, 1, t, h
        if h > t1 - t:
            h = t1 - t
        if h < 16.0 * eps * max(1.0, abs(t)):
            return out, 1, t, h
        for s in range(1, 6):
            for q in range(n):
                acc = 0.0
                for r in range(s):
                    acc += A[s, r] * K[r, q]
                ytmp[q] = y[q] + h * acc
            field_into(ytmp, tag, z, kappa, w, K[s])
        for q in range(n):
            acc = 0.0
            for r in range(6):
                acc += B[r] * K[r, q]
            ytmp[q] = y[q] + h * acc
        if not _all_finite(ytmp):
            h *= 0.2
            if h < 1e-14 * max(1.0, abs(t)):
                return out, 2, t, h
            continue
        field_into(ytmp, tag, z, kappa, w, K[6])
        err = 0.0
        for q in range(n):
            acc = 0.0
            for r in range(7):
                acc += E[r] * K[r, q]
            sc = atol + rtol * max(abs(y[q]), abs(ytmp[q]))
            e = h * acc / sc
            err += e * e
        err = math.sqrt(err / n)
        steps += 1
        if err <= 1.0:
            t_new = t + h
            while j < sample_t.size and sample_t[j] <= t_new:
                if sample_t[j] == t_new:
                    out[j] = ytmp
                else:
                    th = (sample_t[j] - t) / h
                    th2 = th * th
                    for q in range(n):
                        acc = 0.0
                        for r in range(7):
                            acc += K[r, q] * (P[r, 0] * th + P[r, 1] * th2 + P[r, 2] * th2 * th + P[r, 3] * th2 * th2)
                        out[j, q] = y[q] + h * acc
                j += 1
            t = t_new
            y[:] = ytmp
            K[0] = K[6]
            if err == 0.0:
                h *= 5.0
            else:
                h *= min(5.0, 0.9 * err ** -0.2)
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
    return out, 0, t, h
