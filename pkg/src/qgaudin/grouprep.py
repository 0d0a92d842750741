"""The solvable group G_z and its Poisson-Lie structures.

An element with parameters (A, B, C) is represented by

    [[e^{-zA}, 0,       C],
     [0,       e^{-zA}, B],
     [0,       0,       1]]

and matrix multiplication reproduces the deformed coproduct under
A = S3, B = S+, C = S-.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .algebra import DeformParams, structure_matrix
from .errors import DomainError


class GroupElement(NamedTuple):
    a: float
    b: float
    c: float
    z: float

    @classmethod
    def identity(cls, z: float) -> "GroupElement":
        return cls(0.0, 0.0, 0.0, z)

    @classmethod
    def from_site(cls, site, z: float) -> "GroupElement":
        s3, sp, sm = site
        return cls(float(s3), float(sp), float(sm), z)


def matrix_of(g: GroupElement) -> np.ndarray:
    e = math.exp(-g.z * g.a)
    return np.array([[e, 0.0, g.c], [0.0, e, g.b], [0.0, 0.0, 1.0]])


def params_of_matrix(M: np.ndarray, z: float) -> GroupElement:
    if z == 0:
        return GroupElement(float("nan"), M[1, 2], M[0, 2], z)
    return GroupElement(-math.log(M[0, 0]) / z, M[1, 2], M[0, 2], z)


def group_product(g1: GroupElement, g2: GroupElement) -> GroupElement:
    if g1.z != g2.z:
        raise DomainError(f"cannot multiply elements of G_z with different z ({g1.z} vs {g2.z})")
    f = math.exp(-g1.z * g1.a)
    return GroupElement(g1.a + g2.a, f * g2.b + g1.b, f * g2.c + g1.c, g1.z)


def product_of(elements: Sequence[GroupElement]) -> GroupElement:
    out = elements[0]
    for g in elements[1:]:
        out = group_product(out, g)
    return out


def lie_generators(z: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(D, P1, P2): the dilation and the two translations."""
    D = np.diag([-z, -z, 0.0])
    P1 = np.zeros((3, 3))
    P1[1, 2] = 1.0
    P2 = np.zeros((3, 3))
    P2[0, 2] = 1.0
    return D, P1, P2


def commutator(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


def product_jacobian(g1: GroupElement, g2: GroupElement) -> np.ndarray:
    """d(A, B, C of g1 g2) / d(A1, B1, C1, A2, B2, C2)."""
    z = g1.z
    f = math.exp(-z * g1.a)
    return np.array([
        [1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        [-z * f * g2.b, 1.0, 0.0, 0.0, f, 0.0],
        [-z * f * g2.c, 0.0, 1.0, 0.0, 0.0, f],
    ])


def multiplication_residual(p: DeformParams, g1: GroupElement, g2: GroupElement) -> float:
    """max |{Delta f, Delta g}_(G x G) - Delta {f, g}| over (A,B), (A,C), (B,C)."""
    J1 = structure_matrix(p, g1[:3])
    J2 = structure_matrix(p, g2[:3])
    block = np.zeros((6, 6))
    block[:3, :3] = J1
    block[3:, 3:] = J2
    jac = product_jacobian(g1, g2)
    lhs = jac @ block @ jac.T
    rhs = structure_matrix(p, group_product(g1, g2)[:3])
    return float(max(abs(lhs[i, j] - rhs[i, j]) for i, j in ((0, 1), (0, 2), (1, 2))))


def poisson_lie_check(p: DeformParams, sample_count: int, seed: int, scale: float = 1.0) -> float:
    """Largest residual of the Poisson-map property of the group multiplication.

    Pairs of elements are drawn uniformly from [-scale, scale]^3.
    """
    if sample_count < 1:
        raise DomainError(f"sample_count must be >= 1, got {sample_count}")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(sample_count):
        u = rng.uniform(-scale, scale, 6)
        g1 = GroupElement(*u[:3], p.z)
        g2 = GroupElement(*u[3:], p.z)
        worst = max(worst, multiplication_residual(p, g1, g2))
    return worst


#: the three named bracket families on Fun(G_z)
def bracket_family(name: str, z: float, kappa: float = 1.0) -> DeformParams:
    if name == "p0":
        return DeformParams(z, 1.0)
    if name == "p1":
        return DeformParams(z, 0.0)
    if name == "p2":
        return DeformParams(z, kappa)
    raise DomainError(f"unknown bracket family {name!r}; expected p0, p1 or p2")
