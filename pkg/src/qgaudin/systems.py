"""Hamiltonians, gradients and the chain vector field.

Two Hamiltonian families live on the product Poisson manifold:

* ``GAUDIN_KAPPA``: H = C_z^kappa evaluated on the N-site cluster variables
  (CG at z=0, kappa=1; qCG at kappa=1; q-Poincare Gaudin at kappa=0).
* ``QRS``: H = (S+^(N) + S-^(N)) exp(z S3^(N) / 2) on the kappa = 0 bracket.

The integrated dynamics is always the site-wise field J(x_i) grad_i H. The
hand-derived cluster equations (:func:`cluster_rhs_gaudin`, :func:`cluster_rhs_qrs`,
:func:`linear_matrix_cg`) are kept separately and serve as cross-checks.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .algebra import Z_EPS, DeformParams, expm1_ratio, sinhc
from .chain import ChainState, ClusterVars, Deltas, cluster, cluster_jacobian, exclusive_prefix
from .errors import ConfigurationError


class Tag(str, enum.Enum):
    GAUDIN_KAPPA = "GAUDIN_KAPPA"
    QRS = "QRS"


@dataclass(frozen=True)
class SystemKind:
    tag: Tag
    params: DeformParams

    def __post_init__(self):
        object.__setattr__(self, "tag", Tag(self.tag))
        if self.tag is Tag.QRS and self.params.kappa != 0:
            raise ConfigurationError(
                f"QRS is defined on the kappa = 0 bracket, got kappa={self.params.kappa}"
            )

    @classmethod
    def cg(cls) -> "SystemKind":
        return cls(Tag.GAUDIN_KAPPA, DeformParams(0.0, 1.0))

    @classmethod
    def qcg(cls, z: float) -> "SystemKind":
        return cls(Tag.GAUDIN_KAPPA, DeformParams(z, 1.0))

    @classmethod
    def qpg(cls, z: float) -> "SystemKind":
        return cls(Tag.GAUDIN_KAPPA, DeformParams(z, 0.0))

    @classmethod
    def gaudin(cls, z: float, kappa: float) -> "SystemKind":
        return cls(Tag.GAUDIN_KAPPA, DeformParams(z, kappa))

    @classmethod
    def qrs(cls, z: float) -> "SystemKind":
        return cls(Tag.QRS, DeformParams(z, 0.0))


def _check(k: SystemKind, c: ChainState):
    if k.params != c.params:
        raise ConfigurationError(
            f"system parameters {k.params} do not match chain parameters {c.params}"
        )


# -- flat-array kernels (used by the integrator) ---------------------------

def _energy_partials(tag: Tag, z: float, kappa: float, S3: float, Sp: float, Sm: float):
    """H and dH/d(S3^(N), S+^(N), S-^(N))."""
    if tag is Tag.QRS:
        e = math.exp(0.5 * z * S3)
        h = (Sp + Sm) * e
        return h, 0.5 * z * h, e, e
    e = math.exp(z * S3)
    sc_half = float(sinhc(0.5 * z * S3))
    h = kappa * 0.25 * S3 * S3 * sc_half * sc_half + Sp * Sm * e
    g3 = kappa * 0.5 * S3 * float(sinhc(z * S3)) + z * Sp * Sm * e
    return h, g3, Sm * e, Sp * e


def flat_gradient(tag: Tag, z: float, kappa: float, y: np.ndarray) -> np.ndarray:
    s3 = y[0::3]
    sp = y[1::3]
    sm = y[2::3]
    w = np.exp(-z * exclusive_prefix(s3))
    wp = w * sp
    wm = w * sm
    _, g3, gp, gm = _energy_partials(tag, z, kappa, float(s3.sum()), float(wp.sum()), float(wm.sum()))
    tail_p = np.cumsum(wp[::-1])[::-1] - wp
    tail_m = np.cumsum(wm[::-1])[::-1] - wm
    grad = np.empty_like(y)
    grad[0::3] = g3 - z * (gp * tail_p + gm * tail_m)
    grad[1::3] = gp * w
    grad[2::3] = gm * w
    return grad


def flat_field(tag: Tag, z: float, kappa: float, y: np.ndarray) -> np.ndarray:
    """Site-wise J(x_i) grad_i H for a flat state vector."""
    grad = flat_gradient(tag, z, kappa, y)
    s3 = y[0::3]
    sp = y[1::3]
    sm = y[2::3]
    if abs(z) < Z_EPS:
        j23 = kappa * s3
    else:
        j23 = kappa * s3 * expm1_ratio(2.0 * z * s3) + 2.0 * z * sp * sm
    d3 = grad[0::3]
    dp = grad[1::3]
    dm = grad[2::3]
    out = np.empty_like(y)
    out[0::3] = 2.0 * (sp * dp - sm * dm)
    out[1::3] = -2.0 * sp * d3 + j23 * dm
    out[2::3] = 2.0 * sm * d3 - j23 * dp
    return out


# -- public operations -------------------------------------------------------

def hamiltonian(k: SystemKind, c: ChainState) -> float:
    _check(k, c)
    v = cluster(c, c.n)
    h, *_ = _energy_partials(k.tag, k.params.z, k.params.kappa, v.s3, v.splus, v.sminus)
    return float(h)


def grad_hamiltonian(k: SystemKind, c: ChainState) -> np.ndarray:
    """Analytic gradient of H with respect to all 3N site coordinates."""
    _check(k, c)
    return flat_gradient(k.tag, k.params.z, k.params.kappa, c.flat())


def vector_field(k: SystemKind, c: ChainState) -> np.ndarray:
    _check(k, c)
    return flat_field(k.tag, k.params.z, k.params.kappa, c.flat())


def qrs_deltas(c: ChainState) -> Deltas:
    """The qRS integrals: X-basis N-site generators.

    ``dp``/``dm`` are exp(z S3^(N)/2) S+-^(N), which Poisson-commute with the
    qRS Hamiltonian; ``d3`` is S3^(N), which does not.
    """
    v = cluster(c, c.n)
    e = math.exp(0.5 * c.params.z * v.s3)
    return Deltas(v.s3, e * v.splus, e * v.sminus)


def cluster_rhs_gaudin(p: DeformParams, v: ClusterVars, d: Deltas) -> np.ndarray:
    """Closed cluster equations of the kappa-Gaudin family.

    With E = exp(z d3):

        dS3/dt = 2 (S+ d- - S- d+) E
        dS+/dt = +2 z d- E S+ (d+ - S+) - kappa sinh(z d3)/z S+ + kappa d+ E (1 - e^{-2 z S3})/(2 z)
        dS-/dt = -2 z d+ E S- (d- - S-) + kappa sinh(z d3)/z S- - kappa d- E (1 - e^{-2 z S3})/(2 z)

    The kappa-free terms are the q-Poincare equations; at z = 0 the system
    is the linear CG flow.
    """
    z, kappa = p.z, p.kappa
    d3, dpl, dmi = d
    s3, sp, sm = v.s3, v.splus, v.sminus
    e = math.exp(z * d3)
    sh = d3 * float(sinhc(z * d3))          # sinh(z d3) / z
    lin = s3 * float(expm1_ratio(2.0 * z * s3))  # (1 - e^{-2 z s3}) / (2 z)
    ds3 = 2.0 * (sp * dmi - sm * dpl) * e
    dsp = 2.0 * z * dmi * e * sp * (dpl - sp) - kappa * sh * sp + kappa * dpl * e * lin
    dsm = -2.0 * z * dpl * e * sm * (dmi - sm) + kappa * sh * sm - kappa * dmi * e * lin
    return np.array([ds3, dsp, dsm])


def cluster_rhs_qrs(p: DeformParams, v: ClusterVars, s3N: float, d: Deltas) -> np.ndarray:
    """Cluster equations of the qRS system; ``d`` holds the X-basis integrals."""
    if p.kappa != 0:
        raise ConfigurationError(f"qRS cluster equations need kappa = 0, got kappa={p.kappa}")
    z = p.z
    e = math.exp(0.5 * z * s3N)
    tot = d.dp + d.dm
    sp, sm = v.splus, v.sminus
    return np.array([
        2.0 * (sp - sm) * e,
        z * sp * (tot - 2.0 * sp * e),
        -z * sm * (tot - 2.0 * sm * e),
    ])


def linear_matrix_cg(d: Deltas) -> np.ndarray:
    """Matrix M of the undeformed cluster flow dS/dt = M S."""
    d3, dpl, dmi = d
    return np.array([
        [0.0, 2.0 * dmi, -2.0 * dpl],
        [dpl, -d3, 0.0],
        [-dmi, 0.0, d3],
    ])


def induced_cluster_rate(k: SystemKind, c: ChainState, m: int) -> np.ndarray:
    """d/dt of cluster(c, m) along the chain vector field (chain rule)."""
    return cluster_jacobian(c, m) @ vector_field(k, c)
