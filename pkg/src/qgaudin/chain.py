"""N-fold tensor-product states and their cluster variables.

A chain of N sites is stored as an ``(N, 3)`` array of S-basis coordinates.
The m-site cluster variables are the iterated deformed coproduct evaluated
on the first m sites,

    S3^(m) = sum_{i<=m} s3_i,
    S+-^(m) = sum_{i<=m} exp(-z P_i) s+-_i,   P_i = sum_{j<i} s3_j,

and the complementary variables S^(N-m) apply the same formula to the last
N - m sites with the prefix sum restarted at site m + 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .algebra import DeformParams, casimir
from .errors import DomainError

#: chains longer than this use compensated prefix sums
COMPENSATED_THRESHOLD = 1000


class ClusterVars(NamedTuple):
    m: int
    s3: float
    splus: float
    sminus: float

    def as_array(self) -> np.ndarray:
        return np.array([self.s3, self.splus, self.sminus], dtype=float)


class Deltas(NamedTuple):
    d3: float
    dp: float
    dm: float


@dataclass(frozen=True, eq=False)
class ChainState:
    sites: np.ndarray
    params: DeformParams

    def __post_init__(self):
        arr = np.array(self.sites, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 1:
            raise DomainError(f"sites must have shape (N, 3) with N >= 1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("chain contains non-finite site coordinates")
        arr.flags.writeable = False
        object.__setattr__(self, "sites", arr)

    @classmethod
    def from_flat(cls, y, params: DeformParams) -> "ChainState":
        return cls(np.asarray(y, dtype=float).reshape(-1, 3), params)

    @property
    def n(self) -> int:
        return self.sites.shape[0]

    def flat(self) -> np.ndarray:
        return self.sites.reshape(-1).copy()

    def __eq__(self, other):
        if not isinstance(other, ChainState):
            return NotImplemented
        return self.params == other.params and np.array_equal(self.sites, other.sites)

    def __hash__(self):
        return hash((self.params, self.sites.tobytes()))


def exclusive_prefix(s3: np.ndarray) -> np.ndarray:
    """P_i = sum_{j<i} s3_j, compensated (Neumaier) for long chains."""
    n = len(s3)
    if n <= COMPENSATED_THRESHOLD:
        out = np.empty(n)
        out[0] = 0.0
        np.cumsum(s3[:-1], out=out[1:])
        return out
    out = np.empty(n)
    total = 0.0
    comp = 0.0
    for i, v in enumerate(s3):
        out[i] = total + comp
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return out


def _collect(sites: np.ndarray, z: float) -> tuple[float, float, float]:
    s3 = sites[:, 0]
    w = np.exp(-z * exclusive_prefix(s3))
    if len(s3) > COMPENSATED_THRESHOLD:
        return (math.fsum(s3), math.fsum(w * sites[:, 1]), math.fsum(w * sites[:, 2]))
    return (float(s3.sum()), float(w @ sites[:, 1]), float(w @ sites[:, 2]))


def _check_m(m: int, lo: int, hi: int):
    if not (lo <= m <= hi):
        raise DomainError(f"cluster size m={m} outside valid range [{lo}, {hi}]")


def cluster(c: ChainState, m: int) -> ClusterVars:
    _check_m(m, 1, c.n)
    return ClusterVars(m, *_collect(c.sites[:m], c.params.z))


def complementary_cluster(c: ChainState, m: int) -> ClusterVars:
    """Cluster variables S^(N-m) of sites m+1..N, labelled N - m."""
    _check_m(m, 1, c.n - 1)
    return ClusterVars(c.n - m, *_collect(c.sites[m:], c.params.z))


def deltas(c: ChainState) -> Deltas:
    v = cluster(c, c.n)
    return Deltas(v.s3, v.splus, v.sminus)


def compose(left: ClusterVars, right: ClusterVars, z: float) -> ClusterVars:
    """Coproduct composition of a left block with the block to its right."""
    f = math.exp(-z * left.s3)
    return ClusterVars(
        left.m + right.m,
        left.s3 + right.s3,
        f * right.splus + left.splus,
        f * right.sminus + left.sminus,
    )


def cluster_jacobian(c: ChainState, m: int) -> np.ndarray:
    """Partials d(S3^(m), S+^(m), S-^(m)) / d(site coordinates), shape (3, 3N).

    Columns are site-major: (s3_1, s+_1, s-_1, s3_2, ...). Sites beyond m
    have zero columns.
    """
    _check_m(m, 1, c.n)
    z = c.params.z
    head = c.sites[:m]
    w = np.exp(-z * exclusive_prefix(head[:, 0]))
    wp = w * head[:, 1]
    wm = w * head[:, 2]
    # strict suffix sums: sum over i > k (within the first m sites)
    tail_p = np.cumsum(wp[::-1])[::-1] - wp
    tail_m = np.cumsum(wm[::-1])[::-1] - wm
    jac = np.zeros((3, 3 * c.n))
    jac[0, 0:3 * m:3] = 1.0
    jac[1, 0:3 * m:3] = -z * tail_p
    jac[2, 0:3 * m:3] = -z * tail_m
    jac[1, 1:3 * m:3] = w
    jac[2, 2:3 * m:3] = w
    return jac


def _running_sum(x: np.ndarray) -> np.ndarray:
    """Inclusive cumulative sum, compensated (Neumaier) for long inputs."""
    if len(x) <= COMPENSATED_THRESHOLD:
        return np.cumsum(x)
    out = np.empty(len(x))
    total = 0.0
    comp = 0.0
    for i, v in enumerate(x):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[i] = total + comp
    return out


def cluster_table(c: ChainState) -> np.ndarray:
    """Row m - 1 holds (S3^(m), S+^(m), S-^(m)) for m = 1..N."""
    s = c.sites
    w = np.exp(-c.params.z * exclusive_prefix(s[:, 0]))
    return np.column_stack([_running_sum(s[:, 0]), _running_sum(w * s[:, 1]), _running_sum(w * s[:, 2])])


def complementary_table(c: ChainState) -> np.ndarray:
    """Row m - 1 holds complementary_cluster(c, m) coordinates for m = 1..N-1."""
    s = c.sites
    P = exclusive_prefix(s[:, 0])
    w = np.exp(-c.params.z * P)
    # the restarted prefix of site i in the block m+1..N is P_i - P_{m+1}
    rescale = np.exp(c.params.z * P[1:])

    def suffix(x):
        return _running_sum(x[::-1])[::-1][1:]

    return np.column_stack([
        suffix(s[:, 0]), rescale * suffix(w * s[:, 1]), rescale * suffix(w * s[:, 2]),
    ])


def casimir_tower(c: ChainState) -> np.ndarray:
    """[C^(1), ..., C^(N), C^(N-1), ..., C^(1)] -- cluster then complementary.

    The complementary entries are ordered by split point m = 1..N-1, i.e.
    the Casimir of sites m+1..N.
    """
    p = c.params
    left = np.atleast_1d(casimir(p, cluster_table(c).T))
    if c.n == 1:
        return left.astype(float)
    right = np.atleast_1d(casimir(p, complementary_table(c).T))
    return np.concatenate([left, right]).astype(float)


def chain_from(sites: Iterable, z: float = 0.0, kappa: float = 1.0) -> ChainState:
    return ChainState(np.asarray(list(sites), dtype=float), DeformParams(z, kappa))


#: default uniform ranges for random sites, ordered (s3, s+, s-)
DEFAULT_RANGES = ((-1.0, 1.0), (0.1, 1.0), (0.1, 1.0))


def random_sites(rng: np.random.Generator, n: int, ranges=DEFAULT_RANGES) -> np.ndarray:
    """(n, 3) sites drawn column by column, each uniform on its range."""
    if n < 1:
        raise DomainError(f"n_sites must be >= 1, got {n}")
    return np.column_stack([rng.uniform(lo, hi, n) for lo, hi in ranges])
