"""Integrate a deformed Gaudin chain, audit its integrals, compare with the closed form.

Run with ``python3 demos/conservation_and_closed_form.py``.
"""
import numpy as np

from qgaudin import (
    IntegratorConfig, SystemKind, cluster, cluster_casimirs, deformed_frequency, deltas, integrate,
    invariant_drift, measure_period, qcg_solution,
)
from qgaudin.acceptance import BOUNDED_RANGES, surface_chain
from qgaudin.chain import ChainState, random_sites


def main():
    k = SystemKind.qcg(0.2)
    p = k.params
    c = ChainState(random_sites(np.random.default_rng(1), 5, BOUNDED_RANGES), p)
    cfg = IntegratorConfig(t_span=(0.0, 20.0), sample_every=0.05, clusters=(1, 2, 3))
    tr = integrate(k, c, cfg)

    print("largest relative drift of each integral over t in [0, 20]:")
    for name, v in sorted(invariant_drift(tr).items(), key=lambda kv: -kv[1])[:5]:
        print(f"  {name:7s} {v:.2e}")

    d = deltas(c)
    for m in cfg.clusters:
        init = cluster(c, m)
        cm, cnm = cluster_casimirs(p, d, init)
        sol = qcg_solution(p, d, init, cm, cnm, tr.times)
        dev = np.max(np.abs(np.column_stack(sol[1:]) - tr.cluster_track[m]))
        print(f"cluster m={m}: closed form vs integration {dev:.2e}")

    # every cluster on the surface C^(N) = -1 shares one period
    z = 0.5
    kz = SystemKind.qcg(z)
    chain = surface_chain(np.random.default_rng(3), kz.params, 4, -1.0, ((-0.5, 0.5), (0.1, 1.0), (-1.0, 1.0)))
    f = deformed_frequency(kz.params, -1.0)
    tr = integrate(kz, chain, IntegratorConfig(t_span=(0.0, 2.5 * f.period), sample_every=0.01, clusters=(1, 2, 3)))
    print(f"predicted period {f.period:.10f}")
    for m in (1, 2, 3):
        print(f"  m={m}: measured {measure_period(tr, m):.10f}")


if __name__ == "__main__":
    main()
