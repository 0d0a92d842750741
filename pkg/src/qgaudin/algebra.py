"""The one-copy Poisson algebra sl_q^kappa(2) in the S-basis.

Coordinates are always ordered ``(S3, S+, S-)``. The brackets are

    {S3, S+} = 2 S+,   {S3, S-} = -2 S-,
    {S+, S-} = kappa (1 - exp(-2 z S3)) / (2 z) + 2 z S+ S-,

which is sl(2) at (z, kappa) = (0, 1), sl_q(2) at kappa = 1 and the
q-Poincare algebra at kappa = 0.  The X-basis (X3, X+, X-) only appears
through :func:`basis_from_x` / :func:`basis_to_x`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError

#: below this |z| every deformed expression switches to its exact z = 0 limit
Z_EPS = 1e-12


@dataclass(frozen=True)
class DeformParams:
    z: float = 0.0
    kappa: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.z) and math.isfinite(self.kappa)):
            raise DomainError(f"non-finite deformation parameters z={self.z}, kappa={self.kappa}")
        if self.kappa < 0:
            raise DomainError(f"kappa must be >= 0, got {self.kappa}")

    @property
    def undeformed(self) -> bool:
        return abs(self.z) < Z_EPS


class SiteState(NamedTuple):
    s3: float
    splus: float
    sminus: float


def expm1_ratio(x):
    """(1 - exp(-x)) / x, equal to 1 at x = 0. Works on scalars and arrays."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0.0, 1.0, x)
    out = np.where(x == 0.0, 1.0, -np.expm1(-safe) / safe)
    return out[()] if out.ndim == 0 else out


def sinhc(x):
    """sinh(x) / x, equal to 1 at x = 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    x2 = x * x
    out = np.where(small, 1.0 + x2 / 6.0 + x2 * x2 / 120.0, np.sinh(safe) / safe)
    return out[()] if out.ndim == 0 else out


def pm_bracket(p: DeformParams, s3, splus, sminus):
    """The structure function {S+, S-}."""
    if p.undeformed:
        return p.kappa * s3
    z = p.z
    return p.kappa * s3 * expm1_ratio(2.0 * z * s3) + 2.0 * z * splus * sminus


def structure_matrix(p: DeformParams, s) -> np.ndarray:
    """Antisymmetric 3x3 Poisson tensor J with J[i, j] = {x_i, x_j}."""
    s3, sp, sm = s
    j23 = float(pm_bracket(p, s3, sp, sm))
    j12 = 2.0 * sp
    j13 = -2.0 * sm
    return np.array(
        [[0.0, j12, j13],
         [-j12, 0.0, j23],
         [-j13, -j23, 0.0]]
    )


def structure_derivatives(p: DeformParams, s) -> np.ndarray:
    """dJ[i, j] / dx_l as an array indexed ``[i, j, l]``."""
    s3, sp, sm = s
    z, kappa = p.z, p.kappa
    d = np.zeros((3, 3, 3))
    d[0, 1, 1] = 2.0
    d[0, 2, 2] = -2.0
    d[1, 2, 0] = kappa * math.exp(-2.0 * z * s3)
    d[1, 2, 1] = 2.0 * z * sm
    d[1, 2, 2] = 2.0 * z * sp
    return d - d.transpose(1, 0, 2)


def casimir(p: DeformParams, s) -> float:
    """kappa/4 (sinh(z S3/2) / (z/2))^2 + S+ S- exp(z S3)."""
    s3, sp, sm = s
    half = 0.5 * s3
    return p.kappa * half * half * sinhc(0.5 * p.z * s3) ** 2 + sp * sm * np.exp(p.z * s3)


def casimir_gradient(p: DeformParams, s) -> np.ndarray:
    s3, sp, sm = s
    e = math.exp(p.z * s3)
    d3 = p.kappa * 0.5 * s3 * float(sinhc(p.z * s3)) + p.z * sp * sm * e
    return np.array([d3, sm * e, sp * e])


def basis_from_x(p: DeformParams, x3: float, xplus: float, xminus: float) -> SiteState:
    """X-basis -> S-basis: S3 = X3, S+- = exp(-z X3 / 2) X+-."""
    f = math.exp(-0.5 * p.z * x3)
    return SiteState(x3, f * xplus, f * xminus)


def basis_to_x(p: DeformParams, s) -> tuple[float, float, float]:
    s3, sp, sm = s
    f = math.exp(0.5 * p.z * s3)
    return (s3, f * sp, f * sm)


def jacobi_residual(p: DeformParams, s) -> float:
    """Largest cyclic Jacobi sum over generator triples at ``s``.

    Uses the analytic derivatives of the structure functions, so the result
    is pure rounding error whenever the bracket family is Poisson.
    """
    J = structure_matrix(p, s)
    dJ = structure_derivatives(p, s)
    # T[i,j,k] = sum_l J[i,l] dJ[j,k,l]
    T = np.einsum("il,jkl->ijk", J, dJ)
    cyc = T + T.transpose(1, 2, 0) + T.transpose(2, 0, 1)
    return float(np.max(np.abs(cyc)))
