"""Kink solutions of the kappa = 0 systems.

For the q-Poincare Gaudin chain the scaled raising and lowering clusters
switch between two plateaus along tanh profiles; the qRS chain does the same
while its centre S3^(N) drifts linearly. Run with ``python3 demos/kinks.py``.
"""
import math

import numpy as np

from qgaudin import (
    IntegratorConfig, SystemKind, cluster, deltas, fit_qpg_kink, integrate, qpg_s3_logcosh, qpg_solution,
    qrs_deltas, qrs_solution,
)
from qgaudin.acceptance import KINK_RANGES
from qgaudin.chain import ChainState, random_sites
from qgaudin.closedform import qpg_s3_uncorrected


def qpg():
    k = SystemKind.qpg(0.3)
    p = k.params
    c = ChainState(random_sites(np.random.default_rng(0), 5, KINK_RANGES), p)
    tr = integrate(k, c, IntegratorConfig(t_span=(0.0, 20.0), sample_every=0.5, clusters=(2,)))
    d = deltas(c)
    init = cluster(c, 2)
    a = 2 * p.z * math.exp(p.z * d.d3)
    b = a * d.dp * d.dm
    kp = fit_qpg_kink(p, d, init)
    sol = qpg_solution(p, d, init, tr.times)
    lc = qpg_s3_logcosh(p, b, kp, init.s3, tr.times)
    bad = qpg_s3_uncorrected(p, b, kp, tr.times)
    print(f"q-Poincare kinks: plateau b/a = {b / a:.6f}, kink centres t+ = {kp.t_plus:.4f}, t- = {kp.t_minus:.4f}")
    print("   t      S~+ numeric  S~+ kink     S3 numeric   S3 log-cosh   uncorrected")
    for i in range(0, len(tr.times), 8):
        v = tr.cluster_track[2][i]
        print(f"{tr.times[i]:6.2f}  {v[1] * d.dm:11.8f}  {sol.splus[i] * d.dm:11.8f}  "
              f"{v[0]:11.6f}  {lc[i]:11.6f}  {bad[i]:11.4g}")


def qrs():
    k = SystemKind.qrs(0.3)
    p = k.params
    c = ChainState(random_sites(np.random.default_rng(1), 5, KINK_RANGES), p)
    tr = integrate(k, c, IntegratorConfig(t_span=(0.0, 10.0), sample_every=0.5, clusters=(1, 2)))
    d = qrs_deltas(c)
    print(f"\nqRS: S3^(N) slope {2 * (d.dp - d.dm):.6f} (= 2(delta+ - delta-))")
    for m in (1, 2):
        sol = qrs_solution(p, d, cluster(c, m), d.d3, tr.times)
        dev = np.max(np.abs(np.column_stack(sol[1:]) - tr.cluster_track[m]))
        print(f"  cluster m={m}: closed form vs integration {dev:.2e}")


if __name__ == "__main__":
    qpg()
    qrs()
