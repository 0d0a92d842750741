"""Cluster variables as an ordered product in the solvable matrix group G_z.

Each site (s3, s+, s-) becomes a 3x3 matrix; multiplying them left to right
reproduces the deformed N-site cluster exactly, and the multiplication is a
Poisson map for each bracket family. Run with ``python3 demos/group_product.py``.
"""
import numpy as np

from qgaudin import DeformParams, cluster
from qgaudin.chain import ChainState, random_sites
from qgaudin.grouprep import (
    GroupElement, bracket_family, commutator, lie_generators, matrix_of, poisson_lie_check, product_of,
)


def main():
    z = 0.7
    sites = random_sites(np.random.default_rng(0), 6, ((-1, 1), (-1, 1), (-1, 1)))
    M = np.eye(3)
    for s in sites:
        M = M @ matrix_of(GroupElement.from_site(s, z))
    g = product_of([GroupElement.from_site(s, z) for s in sites])
    v = cluster(ChainState(sites, DeformParams(z, 1.0)), 6)
    print("ordered matrix product:\n", np.array2string(M, precision=6))
    print("group parameters (A, B, C):", np.round(g[:3], 12))
    print("cluster (S3, S+, S-):      ", np.round(v[1:], 12))

    D, P1, P2 = lie_generators(z)
    print("[D, P1] + z P1 =", np.max(np.abs(commutator(D, P1) + z * P1)))
    for name in ("p0", "p1", "p2"):
        res = poisson_lie_check(bracket_family(name, z, 0.37), 200, seed=1)
        print(f"Poisson-Lie residual {name}: {res:.1e}")


if __name__ == "__main__":
    main()
