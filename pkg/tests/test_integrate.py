import math

import numpy as np
import pytest

from qgaudin.chain import ChainState, casimir_tower, chain_from, cluster, deltas, random_sites
from qgaudin.closedform import cg_solution
from qgaudin.errors import AperiodicError, ConfigurationError, StiffnessError
from qgaudin.integrate import (
    RK4_FIXED, IntegratorConfig, Trajectory, integrate, integrate_many, invariant_drift, invariant_names,
    measure_period, rk4_step, solve_dopri, solve_rk4,
)
from qgaudin.systems import SystemKind, flat_field

BOUNDED = ((-1, 1), (0.1, 1), (-1, -0.1))


def chain(k, seed, n=4, ranges=BOUNDED):
    return ChainState(random_sites(np.random.default_rng(seed), n, ranges), k.params)


@pytest.mark.parametrize("kwargs, match", [
    ({"method": "EULER"}, "method"),
    ({"t_span": (1.0, 1.0)}, "t_span"),
    ({"t_span": (0.0, math.inf)}, "t_span"),
    ({"sample_every": 0.0}, "sample_every"),
    ({"method": RK4_FIXED, "dt": -1.0}, "dt"),
    ({"rtol": 0.5}, "rtol"),
    ({"atol": 0.0}, "atol"),
])
def test_config_validation(kwargs, match):
    with pytest.raises(ConfigurationError, match=match):
        IntegratorConfig(**kwargs)


def test_integrate_rejects_bad_inputs():
    k = SystemKind.qcg(0.2)
    c = chain(k, 0)
    with pytest.raises(ConfigurationError, match="cluster"):
        integrate(k, c, IntegratorConfig(clusters=(5,)))
    with pytest.raises(ConfigurationError, match="match"):
        integrate(SystemKind.qcg(0.3), c, IntegratorConfig())


def test_sample_grid_endpoints():
    k = SystemKind.cg()
    tr = integrate(k, chain(k, 1), IntegratorConfig(t_span=(0.5, 1.75), sample_every=0.3))
    assert tr.times[0] == 0.5 and tr.times[-1] == 1.75
    assert np.allclose(np.diff(tr.times[:-1]), 0.3)
    assert len(tr) == len(tr.times) == tr.states.shape[0]


def test_equilibrium_stays_put():
    k = SystemKind.qpg(0.4)
    c = chain_from([(0.3, 0.0, 0.0), (-0.2, 0.0, 0.0)], z=0.4, kappa=0.0)
    for method in ("RK45_ADAPTIVE", RK4_FIXED):
        tr = integrate(k, c, IntegratorConfig(method=method, t_span=(0, 3), sample_every=0.5))
        assert np.all(tr.states == c.sites)
        assert all(v == 0.0 for v in invariant_drift(tr).values())


def test_rk4_step_scalar():
    y = rk4_step(lambda t, y: -y, 0.0, np.array([1.0]), 0.1)
    assert y[0] == pytest.approx(0.9048375, abs=1e-7)
    assert abs(y[0] - math.exp(-0.1)) <= 1e-7


def test_python_steppers_on_scalar_problem():
    ts = np.linspace(0, 2, 5)
    exact = np.exp(-ts)
    d = solve_dopri(lambda t, y: -y, (0, 2), [1.0], ts, rtol=1e-12, atol=1e-14)
    r = solve_rk4(lambda t, y: -y, (0, 2), [1.0], ts, dt=0.01)
    assert np.allclose(d[:, 0], exact, rtol=1e-11)
    assert np.allclose(r[:, 0], exact, rtol=1e-9)


def test_dense_output_between_steps():
    # the sample grid is far finer than the accepted steps, so most samples come from interpolation
    ts = np.linspace(0, 10, 1001)
    ys = solve_dopri(lambda t, y: np.array([y[1], -y[0]]), (0, 10), [0.0, 1.0], ts, rtol=1e-10, atol=1e-12)
    assert np.max(np.abs(ys[:, 0] - np.sin(ts))) <= 1e-8


def test_stiffness_error_on_step_budget():
    k = SystemKind.qcg(0.2)
    with pytest.raises(StiffnessError, match="t="):
        integrate(k, chain(k, 2), IntegratorConfig(t_span=(0, 20), max_steps=10))
    with pytest.raises(StiffnessError):
        solve_dopri(lambda t, y: -y, (0, 1), [1.0], np.array([0.0, 1.0]), max_steps=1)


@pytest.mark.parametrize("name, kind", [
    ("qcg", SystemKind.qcg(0.3)), ("qrs", SystemKind.qrs(0.3)), ("kappa", SystemKind.gaudin(-0.2, 0.4)),
])
def test_compiled_solvers_match_python_reference(name, kind):
    c = chain(kind, 3, ranges=((-1, 1), (0.1, 1), (0.1, 1)) if name == "qrs" else BOUNDED)
    cfg = IntegratorConfig(t_span=(0, 4), sample_every=0.25)
    tr = integrate(kind, c, cfg)
    p = kind.params
    ref = solve_dopri(lambda t, y: flat_field(kind.tag, p.z, p.kappa, y), cfg.t_span, c.flat(), tr.times)
    assert np.max(np.abs(tr.states.reshape(len(tr), -1) - ref)) <= 1e-8
    cfg4 = IntegratorConfig(method=RK4_FIXED, t_span=(0, 4), sample_every=0.25, dt=0.01)
    tr4 = integrate(kind, c, cfg4)
    ref4 = solve_rk4(lambda t, y: flat_field(kind.tag, p.z, p.kappa, y), cfg4.t_span, c.flat(), tr4.times, 0.01)
    assert np.max(np.abs(tr4.states.reshape(len(tr4), -1) - ref4)) <= 1e-12


def test_cg_trajectory_matches_exponential():
    k = SystemKind.cg()
    c = chain(k, 4)
    tr = integrate(k, c, IntegratorConfig(t_span=(0, 10), sample_every=0.1, clusters=(1, 2)))
    for m in (1, 2):
        exact = np.column_stack(cg_solution(deltas(c), cluster(c, m), tr.times)[1:])
        assert np.max(np.abs(exact - tr.cluster_track[m])) <= 1e-8


def test_invariants_recorded_and_conserved():
    k = SystemKind.qcg(0.25)
    c = chain(k, 5, n=3)
    tr = integrate(k, c, IntegratorConfig(t_span=(0, 10), sample_every=0.5, clusters=(1,)))
    assert list(tr.invariant_track) == invariant_names(3)
    assert invariant_names(3) == ["C1", "C2", "C3", "Cr1", "Cr2", "delta3", "deltap", "deltam", "H"]
    assert np.allclose([tr.invariant_track[f"C{m}"][0] for m in (1, 2, 3)], casimir_tower(c)[:3])
    assert max(invariant_drift(tr).values()) <= 1e-8


def test_measure_period_undeformed():
    k = SystemKind.cg()
    # N-site generator (0, 1, -1) rotates every cluster with period pi
    c = chain_from([(0.3, 0.6, -0.4), (-0.3, 0.4, -0.6)], z=0.0, kappa=1.0)
    tr = integrate(k, c, IntegratorConfig(t_span=(0, 5), sample_every=0.05, clusters=(1,)))
    assert measure_period(tr, 1) == pytest.approx(math.pi, rel=1e-7)


def test_measure_period_errors():
    k = SystemKind.cg()
    still = chain_from([(0.3, 0.0, 0.0), (0.1, 0.0, 0.0)], z=0.0, kappa=1.0)
    tr = integrate(k, still, IntegratorConfig(t_span=(0, 5), sample_every=0.1, clusters=(1,)))
    with pytest.raises(AperiodicError, match="does not move"):
        measure_period(tr, 1)
    c = chain_from([(0.3, 0.6, -0.4), (-0.3, 0.4, -0.6)], z=0.0, kappa=1.0)
    short = integrate(k, c, IntegratorConfig(t_span=(0, 2), sample_every=0.05))
    with pytest.raises(AperiodicError, match="no recurrence"):
        measure_period(short, 1)


def test_qrs_center_moves_linearly():
    k = SystemKind.qrs(0.3)
    c = chain(k, 6, ranges=((-1, 1), (0.1, 1), (0.1, 1)))
    tr = integrate(k, c, IntegratorConfig(t_span=(0, 5), sample_every=0.5))
    s3n = tr.invariant_track["delta3"]
    dp, dm = tr.invariant_track["deltap"][0], tr.invariant_track["deltam"][0]
    assert np.allclose(s3n, s3n[0] + 2 * (dp - dm) * tr.times, atol=1e-9)


def test_integrate_many_parallel_matches_serial():
    k = SystemKind.qcg(0.2)
    chains = [chain(k, s) for s in range(3)]
    cfg = IntegratorConfig(t_span=(0, 2), sample_every=0.5, clusters=(1,))
    serial = integrate_many(k, chains, cfg)
    parallel = integrate_many(k, chains, cfg, workers=2)
    assert all(isinstance(t, Trajectory) for t in parallel)
    assert serial == parallel
