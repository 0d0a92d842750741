"""Explicit cluster solutions.

All solvers take the cluster state at ``t0`` and fit the integration
constants from it; ``t`` may be a scalar or an array, in which case the
returned :class:`ClusterVars` carries arrays.

Conventions fixed by checking against the chain integrator:

* qCG: the change of variables S~+- = S+-^(m) d-+, S~3 = exp(-2 z S3^(m)) gives
  S~+-' = -+ a S~+-^2 +- b S~+- +- c (1 - S~3) with a = 2 z e^{z d3},
  b = 2 z d+ d- e^{z d3} - kappa sinh(z d3)/z and c = kappa d+ d- e^{z d3}/(2 z).
  With W+- = Z+ +- Z- the Riccati equations W+-' = -+ (Omega/2)(W+-^2 - 1/Omega)
  are advanced with the tanh addition law, continued to tan when Omega < 0.
* q-Poincare kinks: S~+- = (b/a) expit(2 theta+-) with theta+- = +-(b/2) t - phi+-.
* qRS kinks: Y+-(t) = S+-^(m) exp(z S3^(N)(t) / 2) with S3^(N) linear in t.
"""
from __future__ import annotations

import cmath
import math
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm
from scipy.special import expit

from .algebra import DeformParams, casimir, expm1_ratio, sinhc
from .chain import ClusterVars, Deltas
from .errors import DegenerateError, DomainError, FitRangeError
from .systems import linear_matrix_cg


class QCGConstants(NamedTuple):
    a: float
    b: float
    c: float
    km: float
    omega: float


class KinkParams(NamedTuple):
    phi_plus: float
    phi_minus: float
    t_plus: float
    t_minus: float
    beta: float


class Frequency(NamedTuple):
    value: float
    branch: str  # "hyperbolic", "periodic" or "boundary"

    @property
    def period(self) -> float:
        if self.branch != "periodic":
            return math.inf
        return math.pi / self.value


def _require_z(p: DeformParams, what: str):
    if p.undeformed:
        raise DomainError(f"{what} needs z != 0; use cg_solution for the undeformed flow")


def _require_deltas(d: Deltas):
    if d.dp == 0 or d.dm == 0:
        raise DegenerateError(f"closed form needs delta+ != 0 and delta- != 0, got ({d.dp}, {d.dm})")


def _lncosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


def _half_logit(r: float, what: str) -> float:
    if not 0.0 < r < 1.0:
        raise FitRangeError(
            f"{what}: initial value is {r:.6g} of the kink plateau, outside (0, 1); "
            "the orbit is not on the tanh branch"
        )
    return 0.5 * math.log(r / (1.0 - r))


def _pack(m, s3, sp, sm):
    if np.ndim(s3) == 0:
        return ClusterVars(m, float(s3), float(sp), float(sm))
    return ClusterVars(m, np.asarray(s3), np.asarray(sp), np.asarray(sm))


# -- qCG ---------------------------------------------------------------------

def _cluster_k(p: DeformParams, d: Deltas, cm: float, cnm: float) -> float:
    """K = C^(m) - e^{-z d3} C^(N-m) + kappa (1 - e^{-z d3}) / (2 z^2) = e^{z S3^(m)} Y+."""
    z = p.z
    return cm - math.exp(-z * d.d3) * cnm + p.kappa * d.d3 * float(expm1_ratio(z * d.d3)) / (2.0 * z)


def qcg_constants(p: DeformParams, d: Deltas, cm: float, cnm: float) -> QCGConstants:
    _require_z(p, "qcg_constants")
    z, kappa = p.z, p.kappa
    e = math.exp(z * d.d3)
    a = 2.0 * z * e
    b = 2.0 * z * d.dp * d.dm * e - kappa * d.d3 * float(sinhc(z * d.d3))
    c = kappa * d.dp * d.dm * e / (2.0 * z)
    K = _cluster_k(p, d, cm, cnm)
    if K == 0:
        raise DegenerateError("1/k_m = 0: cluster Casimir combination vanishes")
    return QCGConstants(a, b, c, 1.0 / (K * K), b * b + 4.0 * a * c)


def _tanh_law(w0, omega: float, tau):
    """Solution of W' = -(Omega/2) W^2 + 1/2 with W(0) = w0, at times ``tau``.

    (w0 + T1) / (1 + T2 w0) with T1 = tanh(s tau/2)/s, T2 = s tanh(s tau/2),
    s = sqrt(Omega); for Omega < 0 both are continued to tan and written with
    sin/cos so that passing through a pole of tan is harmless.
    """
    tau = np.asarray(tau, dtype=float)
    if omega > 0:
        s = math.sqrt(omega)
        th = np.tanh(0.5 * s * tau)
        return (w0 + th / s) / (1.0 + s * th * w0)
    sig = math.sqrt(-omega)
    ang = 0.5 * sig * tau
    cs, sn = np.cos(ang), np.sin(ang)
    return (w0 * cs + sn / sig) / (cs - sig * w0 * sn)


def qcg_solution(p: DeformParams, d: Deltas, init: ClusterVars, cm: float, cnm: float,
                 t, t0: float = 0.0) -> ClusterVars:
    """Closed-form qCG (kappa-Gaudin, z != 0) evolution of the m-th cluster."""
    _require_z(p, "qcg_solution")
    _require_deltas(d)
    z = p.z
    k = qcg_constants(p, d, cm, cnm)
    if k.omega == 0:
        raise DegenerateError("Omega = b^2 + 4ac vanishes")
    mu2 = 1.0 + 4.0 * k.c * k.km / k.a
    if mu2 == 0:
        raise DegenerateError("1 + 4 c k_m / a vanishes; Z+ carries no information")
    mu = cmath.sqrt(mu2)
    ba = k.b / k.a
    sp_t = init.splus * d.dm
    sm_t = init.sminus * d.dp
    y_plus = sp_t + sm_t - ba
    y_minus = sp_t - sm_t
    K = _cluster_k(p, d, cm, cnm)
    scale = k.a / k.omega
    w_plus = scale * (mu * y_plus + y_minus)
    w_minus = scale * (mu * y_plus - y_minus)
    tau = np.asarray(t, dtype=float) - t0
    wp = _tanh_law(w_plus, k.omega, tau)
    wm = -_tanh_law(-w_minus, k.omega, tau)
    yp = np.real((wp + wm) / (2.0 * scale * mu))
    ym = np.real((wp - wm) / (2.0 * scale))
    sp_new = 0.5 * (yp + ba + ym)
    sm_new = 0.5 * (yp + ba - ym)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = K / yp
    if np.any(~np.isfinite(ratio) | (ratio <= 0)):
        raise DomainError("exp(z S3^(m)) = K / Y+ became non-positive; orbit left the solution chart")
    s3 = np.log(ratio) / z
    return _pack(init.m, s3, sp_new / d.dm, sm_new / d.dp)


# -- CG ----------------------------------------------------------------------

def cg_solution(d: Deltas, init: ClusterVars, t, t0: float = 0.0) -> ClusterVars:
    """exp((t - t0) M) S(t0) for the undeformed linear cluster flow."""
    M = linear_matrix_cg(d)
    x0 = init.as_array()
    tau = np.asarray(t, dtype=float) - t0
    if tau.ndim == 0:
        x = expm(float(tau) * M) @ x0
        return _pack(init.m, *x)
    xs = np.array([expm(ti * M) @ x0 for ti in tau])
    return _pack(init.m, xs[:, 0], xs[:, 1], xs[:, 2])


# -- q-Poincare Gaudin -----------------------------------------------------------

def _qpg_setup(p: DeformParams, d: Deltas):
    if p.kappa != 0:
        raise DomainError(f"qpg_solution is the kappa = 0 system, got kappa={p.kappa}")
    _require_z(p, "qpg_solution")
    _require_deltas(d)
    a = 2.0 * p.z * math.exp(p.z * d.d3)
    b = a * d.dp * d.dm
    if b == 0:
        raise DegenerateError("b = 2 z C^(N) vanishes (zero Casimir)")
    return a, b


def fit_qpg_kink(p: DeformParams, d: Deltas, init: ClusterVars, t0: float = 0.0) -> KinkParams:
    """Phases phi+- of S~+- = (b/2a)[1 + tanh(+-(b/2) t - phi+-)] matching ``init`` at t0."""
    a, b = _qpg_setup(p, d)
    th_p = _half_logit(a * init.splus * d.dm / b, "S~+")
    th_m = _half_logit(a * init.sminus * d.dp / b, "S~-")
    phi_p = 0.5 * b * t0 - th_p
    phi_m = -0.5 * b * t0 - th_m
    return KinkParams(phi_p, phi_m, t0 - th_p / (0.5 * b), t0 + th_m / (0.5 * b), init.s3)


def qpg_solution(p: DeformParams, d: Deltas, init: ClusterVars, t, t0: float = 0.0) -> ClusterVars:
    a, b = _qpg_setup(p, d)
    kp = fit_qpg_kink(p, d, init, t0)
    t = np.asarray(t, dtype=float)
    th_p = 0.5 * b * t - kp.phi_plus
    th_m = -0.5 * b * t - kp.phi_minus
    sp = (b / a) * expit(2.0 * th_p) / d.dm
    sm = (b / a) * expit(2.0 * th_m) / d.dp
    cm = init.splus * init.sminus * math.exp(p.z * init.s3)
    prod = sp * sm
    if cm != 0 and np.all(cm / prod > 0):
        s3 = np.log(cm / prod) / p.z
    else:
        s3 = qpg_s3_logcosh(p, b, kp, init.s3, t, t0)
    return _pack(init.m, s3, sp, sm)


def qpg_s3_logcosh(p: DeformParams, b: float, kp: KinkParams, s3_0: float, t, t0: float = 0.0):
    """S3^(m)(t) by exact quadrature of dS3/dt along the kinks.

    S3(t) = S3(t0) + (1/z) log[cosh(x) cosh(y) / (cosh(x0) cosh(y0))] with
    x = (b/2) t - phi+ and y = (b/2) t + phi-; equivalently
    cosh(x) cosh(y) = [cosh(b t - phi+ + phi-) + cosh(phi+ + phi-)] / 2.
    """
    t = np.asarray(t, dtype=float)

    def lc(tt):
        return _lncosh(0.5 * b * tt - kp.phi_plus) + _lncosh(0.5 * b * tt + kp.phi_minus)

    return s3_0 + (lc(t) - lc(t0)) / p.z


def qpg_s3_uncorrected(p: DeformParams, b: float, kp: KinkParams, t):
    """An uncorrected closed-form S3 profile, kept as a negative control.

    -(1/z) log[(cosh(b t + phi+ - phi-) + cosh(phi+ + phi-))/2 - cosh(phi+) cosh(phi-)]

    Kept only so the report can show how it compares with quadrature: the
    logarithm's argument vanishes at t = 0 and is negative on one side of it.
    """
    t = np.asarray(t, dtype=float)
    fp, fm = kp.phi_plus, kp.phi_minus
    arg = 0.5 * (np.cosh(b * t + fp - fm) + math.cosh(fp + fm)) - math.cosh(fp) * math.cosh(fm)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.log(arg) / p.z


# -- qRS -------------------------------------------------------------------------

def qrs_s3n(d: Deltas, s3N0: float, t, t0: float = 0.0):
    """S3^(N)(t) = 2 (d+ - d-)(t - t0) + beta, beta = S3^(N)(t0)."""
    return 2.0 * (d.dp - d.dm) * (np.asarray(t, dtype=float) - t0) + s3N0


def fit_qrs_kink(p: DeformParams, d: Deltas, init: ClusterVars, s3N0: float, t0: float = 0.0) -> KinkParams:
    """Shifts t+- of Y+- = (d+-/2)[1 + tanh(+-z d+- (t - t+-))], Y+- = S+- e^{z S3^(N)/2}."""
    if p.kappa != 0:
        raise DomainError(f"qRS lives on the kappa = 0 bracket, got kappa={p.kappa}")
    _require_z(p, "qrs_solution")
    _require_deltas(d)
    z = p.z
    e0 = math.exp(0.5 * z * s3N0)
    th_p = _half_logit(init.splus * e0 / d.dp, "Y+")
    th_m = _half_logit(init.sminus * e0 / d.dm, "Y-")
    t_p = t0 - th_p / (z * d.dp)
    t_m = t0 + th_m / (z * d.dm)
    return KinkParams(z * d.dp * t_p, -z * d.dm * t_m, t_p, t_m, s3N0)


def qrs_solution(p: DeformParams, d: Deltas, init: ClusterVars, s3N0: float, t,
                 t0: float = 0.0) -> ClusterVars:
    """Closed-form qRS evolution of the m-th cluster.

    ``d`` holds the conserved X-basis integrals (see :func:`qrs_deltas`).
    """
    kp = fit_qrs_kink(p, d, init, s3N0, t0)
    z = p.z
    t = np.asarray(t, dtype=float)
    th_p = z * d.dp * (t - kp.t_plus)
    th_m = -z * d.dm * (t - kp.t_minus)
    e = np.exp(0.5 * z * qrs_s3n(d, s3N0, t, t0))
    sp = d.dp * expit(2.0 * th_p) / e
    sm = d.dm * expit(2.0 * th_m) / e
    cm = init.splus * init.sminus * math.exp(z * init.s3)
    prod = sp * sm
    if cm != 0 and np.all(cm / prod > 0):
        s3 = np.log(cm / prod) / z
    else:
        th_p0 = z * d.dp * (t0 - kp.t_plus)
        th_m0 = -z * d.dm * (t0 - kp.t_minus)
        s3 = (init.s3 + (d.dp - d.dm) * (t - t0)
              + (_lncosh(th_p) - _lncosh(th_p0) + _lncosh(th_m) - _lncosh(th_m0)) / z)
    return _pack(init.m, s3, sp, sm)


def qrs_y_linear_exponent(p: DeformParams, d: Deltas, splus, sminus, s3N0: float, t, t0: float = 0.0):
    """Y+- with the linear exponent z((d+ - d-) t + beta); for comparison only."""
    t = np.asarray(t, dtype=float)
    f = np.exp(p.z * ((d.dp - d.dm) * (t - t0) + s3N0))
    return splus * f, sminus * f


# -- frequencies -------------------------------------------------------------

def deformed_frequency(p: DeformParams, cN: float) -> Frequency:
    """sqrt(Omega)/2 = sqrt(C + z^2 C^2) as a magnitude plus branch label.

    On the periodic branch the common period of the m-cluster orbits is
    pi / value = 2 pi / sqrt(-Omega).
    """
    q = cN + p.z * p.z * cN * cN
    if q > 0:
        return Frequency(math.sqrt(q), "hyperbolic")
    if q < 0:
        return Frequency(math.sqrt(-q), "periodic")
    return Frequency(0.0, "boundary")


def cluster_casimirs(p: DeformParams, d: Deltas, init: ClusterVars) -> tuple[float, float]:
    """(C^(m), C^(N-m)) from the cluster state and the N-site integrals."""
    z = p.z
    s3c = d.d3 - init.s3
    f = math.exp(z * init.s3)
    comp = (s3c, f * (d.dp - init.splus), f * (d.dm - init.sminus))
    return float(casimir(p, init[1:])), float(casimir(p, comp))
