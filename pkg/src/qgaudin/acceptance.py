"""The acceptance suite: ten numbered checks, each returning a CriterionResult.

Every check pairs an implementation route with an independent one
(closed form against integration, analytic derivative against finite
differences, group product against the coproduct, and so on).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .algebra import DeformParams, casimir
from .chain import ChainState, ClusterVars, cluster, cluster_jacobian, deltas, random_sites
from .closedform import (
    cluster_casimirs, deformed_frequency, fit_qpg_kink, qcg_solution, qpg_s3_logcosh,
    qpg_s3_uncorrected, qpg_solution, qrs_solution, qrs_y_linear_exponent,
)
from .errors import NumericalError
from .grouprep import GroupElement, bracket_family, poisson_lie_check, product_of
from .integrate import (
    RK4_FIXED, IntegratorConfig, integrate, invariant_drift, measure_period,
)
from .systems import (
    SystemKind, cluster_rhs_gaudin, grad_hamiltonian, hamiltonian, induced_cluster_rate,
    linear_matrix_cg, qrs_deltas,
)

#: s- drawn negative keeps kappa = 1 orbits inside the periodic window
BOUNDED_RANGES = ((-1.0, 1.0), (0.1, 1.0), (-1.0, -0.1))
#: all-positive s+- keeps every kink fit on its tanh branch
KINK_RANGES = ((-1.0, 1.0), (0.1, 1.0), (0.1, 1.0))
SEEDS = tuple(range(10))


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f} s)"


def _chain(seed: int, n: int, p: DeformParams, ranges) -> ChainState:
    return ChainState(random_sites(np.random.default_rng(seed), n, ranges), p)


def warm_up():
    """Triggers (or loads) the compiled kernels so timings exclude compilation."""
    k = SystemKind.qcg(0.2)
    c = _chain(0, 2, k.params, BOUNDED_RANGES)
    integrate(k, c, IntegratorConfig(t_span=(0.0, 0.1), sample_every=0.05))
    integrate(k, c, IntegratorConfig(method=RK4_FIXED, t_span=(0.0, 0.1), sample_every=0.05))


# 1 -------------------------------------------------------------------------

def conservation(seeds=SEEDS) -> CriterionResult:
    warm_up()
    cfg = IntegratorConfig(t_span=(0.0, 20.0), sample_every=0.1, rtol=1e-10, atol=1e-12)
    worst, worst_at = 0.0, ""
    start = time.perf_counter()
    for kappa in (0.0, 1.0):
        k = SystemKind.gaudin(0.2, kappa)
        for seed in seeds:
            tr = integrate(k, _chain(seed, 5, k.params, BOUNDED_RANGES), cfg)
            for name, v in invariant_drift(tr).items():
                if v > worst:
                    worst, worst_at = v, f"{name} kappa={kappa} seed={seed}"
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-7 and elapsed <= 5.0
    return CriterionResult(1, "conservation suite", ok,
                           f"max drift {worst:.2e} ({worst_at}) <= 1e-7; integration time {elapsed:.2f} s <= 5 s")


# 2 -------------------------------------------------------------------------

def qcg_closed_form(seeds=SEEDS) -> CriterionResult:
    k = SystemKind.qcg(0.2)
    p = k.params
    cfg = IntegratorConfig(t_span=(0.0, 20.0), sample_every=0.05, clusters=(1, 2, 3))
    worst = 0.0
    for seed in seeds:
        c = _chain(seed, 5, p, BOUNDED_RANGES)
        tr = integrate(k, c, cfg)
        d = deltas(c)
        for m in cfg.clusters:
            init = cluster(c, m)
            cm, cnm = cluster_casimirs(p, d, init)
            sol = qcg_solution(p, d, init, cm, cnm, tr.times)
            worst = max(worst, float(np.max(np.abs(np.column_stack(sol[1:]) - tr.cluster_track[m]))))
    return CriterionResult(2, "qCG closed form vs integration", worst <= 1e-6,
                           f"max |closed form - numeric| {worst:.2e} <= 1e-6 over m=1,2,3, {len(seeds)} seeds")


# 3 -------------------------------------------------------------------------

def surface_chain(rng: np.random.Generator, p: DeformParams, n: int, energy: float, ranges) -> ChainState:
    """Random chain moved onto C^(N) = energy by solving for the last s-."""
    z = p.z
    s = random_sites(rng, n, ranges)
    left = cluster(ChainState(s, p), n - 1) if n > 1 else None
    l3, lp, lm = (left.s3, left.splus, left.sminus) if left else (0.0, 0.0, 0.0)
    S3 = l3 + s[-1, 0]
    Sp = lp + math.exp(-z * l3) * s[-1, 1]
    sm_total = (energy - casimir(p, (S3, 0.0, 0.0))) / (Sp * math.exp(z * S3))
    s[-1, 2] = (sm_total - lm) * math.exp(z * l3)
    return ChainState(s, p)


def equal_periods(n_states: int = 5, z: float = 0.5, energy: float = -1.0) -> CriterionResult:
    k = SystemKind.qcg(z)
    p = k.params
    freq = deformed_frequency(p, energy)
    predicted = freq.period
    cfg = IntegratorConfig(t_span=(0.0, 2.5 * predicted), sample_every=0.01, clusters=(1, 2))
    rng = np.random.default_rng(2024)
    rel, used, rejected = [], 0, 0
    while used < n_states and rejected < 200:
        c = surface_chain(rng, p, 4, energy, ((-0.5, 0.5), (0.1, 1.0), (-1.0, 1.0)))
        try:
            tr = integrate(k, c, cfg)
            periods = [measure_period(tr, m) for m in cfg.clusters]
        except NumericalError:
            # orbit reaches a singularity of the chart (S3 -> infinity) rather than closing
            rejected += 1
            continue
        rel += [abs(T - predicted) / predicted for T in periods]
        used += 1
    worst = max(rel) if rel else math.inf
    ok = used == n_states and worst <= 1e-4
    return CriterionResult(3, "equal-period window", ok,
                           f"C=-1, z={z}: predicted 2pi/sqrt(-Omega)={predicted:.10f}, "
                           f"max rel. deviation {worst:.2e} <= 1e-4 over {used} states x m=1,2 "
                           f"({rejected} singular orbits skipped)")


# 4 -------------------------------------------------------------------------

def cg_eigenstructure(samples: int = 100) -> CriterionResult:
    rng = np.random.default_rng(7)
    worst_eig = 0.0
    for _ in range(samples):
        d3, dp, dm = rng.uniform(-1, 1, 3)
        C = 0.25 * d3 * d3 + dp * dm
        w = 2.0 * np.sqrt(complex(C))
        got = np.linalg.eigvals(linear_matrix_cg((d3, dp, dm)))
        want = np.array([0.0, w, -w])
        # greedy matching of each expected eigenvalue to the closest computed one
        left = list(got)
        for v in want:
            j = int(np.argmin([abs(v - g) for g in left]))
            worst_eig = max(worst_eig, abs(v - left.pop(j)))
    k = SystemKind.cg()
    worst_T, used, seed = 0.0, 0, 0
    while used < 3:
        c = _chain(100 + seed, 4, k.params, BOUNDED_RANGES)
        seed += 1
        C = casimir(k.params, deltas(c))
        if C >= -1e-3:
            continue
        predicted = 2 * math.pi / (2 * math.sqrt(-C))
        tr = integrate(k, c, IntegratorConfig(t_span=(0.0, 2.5 * predicted), sample_every=0.01, clusters=(1, 2)))
        for m in (1, 2):
            worst_T = max(worst_T, abs(measure_period(tr, m) - predicted) / predicted)
        used += 1
    ok = worst_eig <= 1e-10 and worst_T <= 1e-4
    return CriterionResult(4, "CG eigenstructure", ok,
                           f"eigenvalue error {worst_eig:.2e} <= 1e-10 over {samples} deltas; "
                           f"period rel. error {worst_T:.2e} <= 1e-4 (C<0)")


# 5 -------------------------------------------------------------------------

def pgq_rhs(z: float, v, d) -> np.ndarray:
    """q-Poincare cluster equations written out term by term."""
    s3, sp, sm = v
    d3, dp, dm = d
    e = math.exp(z * d3)
    return np.array([
        2.0 * (sp * dm - sm * dp) * e,
        2.0 * z * dm * e * sp * (dp - sp),
        -2.0 * z * dp * e * sm * (dm - sm),
    ])


def kappa_contraction(points: int = 1000) -> CriterionResult:
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(points):
        z = rng.uniform(-1, 1)
        v = (1, *rng.uniform(-1, 1, 3))
        d = tuple(rng.uniform(-1, 1, 3))
        got = cluster_rhs_gaudin(DeformParams(z, 0.0), ClusterVars(*v), d)
        worst = max(worst, float(np.max(np.abs(got - pgq_rhs(z, v[1:], d)))))
    kappas = np.linspace(1.0, 0.0, 101)
    worst_curv, worst_ind = 0.0, 0.0
    for i in range(20):
        s = random_sites(rng, 4, ((-1, 1), (-1, 1), (-1, 1)))
        z = rng.uniform(0.05, 1.0)
        fields = []
        for kappa in kappas:
            k = SystemKind.gaudin(z, kappa)
            c = ChainState(s, k.params)
            m = 1 + i % 3
            rhs = cluster_rhs_gaudin(k.params, cluster(c, m), deltas(c))
            worst_ind = max(worst_ind, float(np.max(np.abs(rhs - induced_cluster_rate(k, c, m)))))
            fields.append(rhs)
        f = np.array(fields)
        scale = max(1.0, float(np.max(np.abs(f))))
        # the field is affine in kappa: a jump would show up as a non-zero second difference
        worst_curv = max(worst_curv, float(np.max(np.abs(np.diff(f, 2, axis=0)))) / scale)
    ok = worst <= 1e-12 and worst_curv <= 1e-12 and worst_ind <= 1e-11
    return CriterionResult(5, "kappa contraction", ok,
                           f"kappa=0 vs q-Poincare equations {worst:.2e} <= 1e-12; kappa scan 1->0: "
                           f"second difference {worst_curv:.2e}, vs chain-rule rate {worst_ind:.2e}")


# 6 -------------------------------------------------------------------------

def qrs_structure(seeds=tuple(range(5)), z: float = 0.3) -> CriterionResult:
    k = SystemKind.qrs(z)
    p = k.params
    cfg = IntegratorConfig(t_span=(0.0, 10.0), sample_every=0.05, clusters=(1, 2, 3))
    drift = lin = slope_err = sol_err = linear_exp_err = 0.0
    for seed in seeds:
        c = _chain(seed, 5, p, KINK_RANGES)
        tr = integrate(k, c, cfg)
        d = qrs_deltas(c)
        dr = invariant_drift(tr)
        drift = max(drift, dr["deltap"], dr["deltam"])
        t, s3N = tr.times, tr.invariant_track["delta3"]
        A = np.column_stack([t, np.ones_like(t)])
        coef, *_ = np.linalg.lstsq(A, s3N, rcond=None)
        lin = max(lin, float(np.max(np.abs(A @ coef - s3N))))
        slope_err = max(slope_err, abs(coef[0] - 2.0 * (d.dp - d.dm)))
        for m in cfg.clusters:
            init = cluster(c, m)
            sol = qrs_solution(p, d, init, d.d3, t)
            sol_err = max(sol_err, float(np.max(np.abs(np.column_stack(sol[1:]) - tr.cluster_track[m]))))
            track = tr.cluster_track[m]
            yp, _ = qrs_y_linear_exponent(p, d, track[:, 1], track[:, 2], d.d3, t)
            yp_res = track[:, 1] * np.exp(0.5 * z * s3N)
            linear_exp_err = max(linear_exp_err, float(np.max(np.abs(yp - yp_res))))
    ok = drift <= 1e-8 and lin <= 1e-8 and slope_err <= 1e-8 and sol_err <= 1e-6
    return CriterionResult(6, "qRS structure", ok,
                           f"delta+- drift {drift:.2e} <= 1e-8; S3^(N) linear fit residual {lin:.2e} <= 1e-8, "
                           f"slope error {slope_err:.2e}; closed form vs numeric {sol_err:.2e} <= 1e-6 "
                           f"using exponent z S3^(N)/2 (the z((d+-d-)t+beta) exponent differs by up to {linear_exp_err:.2e})")


# 7 -------------------------------------------------------------------------

def qpg_kinks(seeds=tuple(range(5)), z: float = 0.3) -> CriterionResult:
    k = SystemKind.qpg(z)
    p = k.params
    cfg = IntegratorConfig(t_span=(0.0, 20.0), sample_every=0.05, clusters=(1, 2, 3))
    tilde_err = s3_num = s3_quad = 0.0
    uncorrected_bad = 0
    uncorrected_total = 0
    for seed in seeds:
        c = _chain(seed, 5, p, KINK_RANGES)
        tr = integrate(k, c, cfg)
        d = deltas(c)
        a = 2.0 * z * math.exp(z * d.d3)
        b = a * d.dp * d.dm
        for m in cfg.clusters:
            init = cluster(c, m)
            sol = qpg_solution(p, d, init, tr.times)
            track = tr.cluster_track[m]
            tilde_num = np.column_stack([track[:, 1] * d.dm, track[:, 2] * d.dp])
            tilde_cf = np.column_stack([sol.splus * d.dm, sol.sminus * d.dp])
            tilde_err = max(tilde_err, float(np.max(np.abs(tilde_num - tilde_cf))))
            s3_num = max(s3_num, float(np.max(np.abs(sol.s3 - track[:, 0]))))
            kp = fit_qpg_kink(p, d, init)
            lc = qpg_s3_logcosh(p, b, kp, init.s3, tr.times)

            def rate(t):
                v = qpg_solution(p, d, init, t)
                return 2.0 * (v.splus * d.dm - v.sminus * d.dp) * math.exp(z * d.d3)

            for i in range(20, len(tr.times), 40):
                q, _ = quad(rate, 0.0, tr.times[i], epsabs=1e-12, epsrel=1e-13, limit=200)
                s3_quad = max(s3_quad, abs(init.s3 + q - lc[i]))
            pr = qpg_s3_uncorrected(p, b, kp, tr.times)
            uncorrected_total += len(pr)
            uncorrected_bad += int(np.sum(~np.isfinite(pr) | (np.abs(pr - lc) > 1e-6)))
    flagged = uncorrected_bad > 0
    ok = tilde_err <= 1e-6 and s3_quad <= 1e-6 and s3_num <= 1e-6 and flagged
    verdict = ("uncorrected log-cosh S3 profile flagged erroneous "
               f"({uncorrected_bad}/{uncorrected_total} samples off or undefined)" if flagged
               else "uncorrected log-cosh S3 profile agrees")
    return CriterionResult(7, "q-Poincare kinks", ok,
                           f"S~+- vs kink {tilde_err:.2e} <= 1e-6; corrected log-cosh S3 vs quadrature "
                           f"{s3_quad:.2e}, vs numeric {s3_num:.2e} <= 1e-6; {verdict}")


# 8 -------------------------------------------------------------------------

def group_identification(max_n: int = 64, samples: int = 100) -> CriterionResult:
    rng = np.random.default_rng(5)
    worst = 0.0
    for n in range(1, max_n + 1):
        z = rng.uniform(-1, 1)
        s = random_sites(rng, n, ((-1, 1), (-1, 1), (-1, 1)))
        c = ChainState(s, DeformParams(z, 1.0))
        g = product_of([GroupElement.from_site(x, z) for x in s])
        v = cluster(c, n)
        diff = np.abs(np.array(g[:3]) - np.array(v[1:])) / np.maximum(1.0, np.abs(np.array(v[1:])))
        worst = max(worst, float(diff.max()))
    z = 0.7
    pl = {name: poisson_lie_check(bracket_family(name, z, 0.37), samples, seed=i)
          for i, name in enumerate(("p0", "p1", "p2"))}
    ok = worst <= 1e-13 and max(pl.values()) <= 1e-12
    pl_txt = ", ".join(f"{k} {v:.1e}" for k, v in pl.items())
    return CriterionResult(8, "coproduct = group product", ok,
                           f"product vs cluster (N<=64) rel. {worst:.2e} <= 1e-13; Poisson-map residual {pl_txt} <= 1e-12")


# 9 -------------------------------------------------------------------------

def _central(f, x, h):
    x = np.array(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h))
    return np.array(cols).T


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def derivative_checks(points: int = 100, n: int = 4) -> CriterionResult:
    systems = {
        "cg": SystemKind.cg(), "qcg": SystemKind.qcg(0.3), "qpg": SystemKind.qpg(0.3),
        "qrs": SystemKind.qrs(0.3), "kappa": SystemKind.gaudin(0.3, 0.5),
    }
    rng = np.random.default_rng(13)
    h = 1e-6
    worst_g, worst_j = 0.0, 0.0
    for k in systems.values():
        p = k.params
        for _ in range(points):
            y = random_sites(rng, n, ((-1, 1), (-1, 1), (-1, 1))).reshape(-1)
            c = ChainState.from_flat(y, p)
            fd = _central(lambda x: hamiltonian(k, ChainState.from_flat(x, p)), y, h)
            worst_g = max(worst_g, _rel(grad_hamiltonian(k, c), fd))
            m = int(rng.integers(1, n + 1))
            fdj = _central(lambda x: cluster(ChainState.from_flat(x, p), m)[1:], y, h)
            worst_j = max(worst_j, _rel(cluster_jacobian(c, m), fdj))
    ok = worst_g <= 1e-6 and worst_j <= 1e-6
    return CriterionResult(9, "gradient and Jacobian", ok,
                           f"grad H vs central differences {worst_g:.2e}, cluster Jacobian {worst_j:.2e} "
                           f"<= 1e-6 ({points} points x {len(systems)} systems)")


# 10 ------------------------------------------------------------------------

def rk4_order(dt: float = 0.025) -> CriterionResult:
    k = SystemKind.qcg(0.2)
    c = _chain(0, 5, k.params, BOUNDED_RANGES)
    T = 2.0
    ref = integrate(k, c, IntegratorConfig(t_span=(0.0, T), sample_every=T, rtol=1e-13, atol=1e-15)).states[-1]
    errs = []
    for h in (dt, dt / 2):
        cfg = IntegratorConfig(method=RK4_FIXED, t_span=(0.0, T), sample_every=T, dt=h)
        errs.append(float(np.max(np.abs(integrate(k, c, cfg).states[-1] - ref))))
    ratio = errs[0] / errs[1]
    return CriterionResult(10, "RK4 order", 14.0 <= ratio <= 18.0,
                           f"endpoint error {errs[0]:.3e} -> {errs[1]:.3e}, ratio {ratio:.2f} in [14, 18]")


CRITERIA: tuple[Callable[[], CriterionResult], ...] = (
    conservation, qcg_closed_form, equal_periods, cg_eigenstructure, kappa_contraction,
    qrs_structure, qpg_kinks, group_identification, derivative_checks, rk4_order,
)


def run_criterion(fn: Callable[[], CriterionResult]) -> CriterionResult:
    start = time.perf_counter()
    try:
        res = fn()
    except Exception as exc:  # a crash is reported as a failure of that criterion
        number = CRITERIA.index(fn) + 1 if fn in CRITERIA else 0
        res = CriterionResult(number, fn.__name__, False, f"raised {type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - start
    return res


def run_all(report: Callable[[CriterionResult], None] | None = None) -> list[CriterionResult]:
    out = []
    for fn in CRITERIA:
        res = run_criterion(fn)
        if report is not None:
            report(res)
        out.append(res)
    return out
