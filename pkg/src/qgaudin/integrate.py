"""Explicit Runge-Kutta propagation of the chain dynamics.

Two methods are offered: classical fixed-step RK4 and the adaptive
Dormand-Prince 5(4) pair with its fourth-order continuous extension, which
provides samples on a uniform time grid independent of the accepted steps.
Every sample carries the Casimir tower, the N-site integrals and H so that
conservation can be audited afterwards.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import DeformParams
from .chain import ChainState, casimir_tower, cluster, cluster_table, deltas
from .errors import AperiodicError, ConfigurationError, DivergenceError, StiffnessError
from . import _kernels
from .systems import SystemKind, Tag, hamiltonian, qrs_deltas

RK4_FIXED = "RK4_FIXED"
RK45_ADAPTIVE = "RK45_ADAPTIVE"


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = RK45_ADAPTIVE
    t_span: tuple[float, float] = (0.0, 1.0)
    sample_every: float = 0.1
    dt: float = 1e-2
    rtol: float = 1e-10
    atol: float = 1e-12
    clusters: tuple[int, ...] = ()
    max_steps: int = 2_000_000

    def __post_init__(self):
        object.__setattr__(self, "t_span", tuple(float(t) for t in self.t_span))
        object.__setattr__(self, "clusters", tuple(int(m) for m in self.clusters))
        t0, t1 = self.t_span
        if self.method not in (RK4_FIXED, RK45_ADAPTIVE):
            raise ConfigurationError(f"method must be {RK4_FIXED} or {RK45_ADAPTIVE}, got {self.method!r}")
        if not (math.isfinite(t0) and math.isfinite(t1) and t1 > t0):
            raise ConfigurationError(f"t_span must satisfy t1 > t0, got {self.t_span}")
        if not self.sample_every > 0:
            raise ConfigurationError(f"sample_every must be > 0, got {self.sample_every}")
        if self.method == RK4_FIXED and not self.dt > 0:
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")
        if self.method == RK45_ADAPTIVE:
            for name in ("rtol", "atol"):
                v = getattr(self, name)
                if not (0 < v <= 1e-2):
                    raise ConfigurationError(f"{name} must lie in (0, 1e-2], got {v}")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (samples, N, 3)
    params: DeformParams
    cluster_track: dict[int, np.ndarray] = field(default_factory=dict)  # m -> (samples, 3)
    invariant_track: dict[str, np.ndarray] = field(default_factory=dict)

    def chain(self, i: int) -> ChainState:
        return ChainState(self.states[i], self.params)

    def __len__(self):
        return len(self.times)

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.params == other.params
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.states, other.states)
            and self.cluster_track.keys() == other.cluster_track.keys()
            and all(np.array_equal(v, other.cluster_track[k]) for k, v in self.cluster_track.items())
            and self.invariant_track.keys() == other.invariant_track.keys()
            and all(np.array_equal(v, other.invariant_track[k]) for k, v in self.invariant_track.items())
        )


def invariant_names(n: int) -> list[str]:
    """Column names of the invariant track for an N-site chain.

    ``C{m}`` is the Casimir of the first m sites, ``Cr{m}`` the Casimir of
    the N - m sites to the right of the split point m.
    """
    names = [f"C{m}" for m in range(1, n + 1)]
    names += [f"Cr{m}" for m in range(1, n)]
    return names + ["delta3", "deltap", "deltam", "H"]


def invariants_of(k: SystemKind, c: ChainState) -> np.ndarray:
    d = qrs_deltas(c) if k.tag is Tag.QRS else deltas(c)
    return np.concatenate([casimir_tower(c), d, [hamiltonian(k, c)]])


# -- steppers -----------------------------------------------------------------

def rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# Dormand-Prince 5(4)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
_A_DENSE = np.zeros((6, 6))
for _i, _row in enumerate(_A):
    _A_DENSE[_i, :len(_row)] = _row
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# continuous extension: y(t + th h) = y + h K^T (P @ [th, th^2, th^3, th^4])
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


def _sample_times(t0: float, t1: float, every: float) -> np.ndarray:
    n = int(math.floor((t1 - t0) / every * (1 + 1e-12)))
    ts = t0 + every * np.arange(n + 1)
    if t1 - ts[-1] > 1e-9 * max(1.0, abs(t1)):
        ts = np.append(ts, t1)
    else:
        ts[-1] = t1
    return ts


def _initial_step(f, t0, y0, f0, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = f(t0 + h0, y0 + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def solve_dopri(f, t_span, y0, sample_t, rtol=1e-10, atol=1e-12, max_steps=2_000_000):
    """Adaptive Dormand-Prince integration returning states at ``sample_t``.

    Raises :class:`StiffnessError` on step-size underflow and
    :class:`DivergenceError` on a non-finite state.
    """
    t0, t1 = t_span
    y = np.array(y0, dtype=float)
    out = np.empty((len(sample_t), y.size))
    j = 0
    while j < len(sample_t) and sample_t[j] <= t0:
        out[j] = y
        j += 1
    K = np.empty((7, y.size))
    K[0] = f(t0, y)
    h = _initial_step(f, t0, y, K[0], rtol, atol)
    t = t0
    steps = 0
    while t < t1:
        if steps >= max_steps:
            raise StiffnessError(t, h)
        h = min(h, t1 - t)
        if h < 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise StiffnessError(t, h)
        for s in range(1, 6):
            K[s] = f(t + _C[s] * h, y + h * (np.dot(_A[s], K[:s])))
        y_new = y + h * (_B[:6] @ K[:6])
        if not np.all(np.isfinite(y_new)):
            # a blow-up inside the step may still be resolvable with a smaller step
            h *= 0.2
            if h < 1e-14 * max(1.0, abs(t)):
                raise DivergenceError(t)
            continue
        K[6] = f(t + h, y_new)
        err_vec = h * (_E @ K)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        steps += 1
        if err <= 1.0:
            t_new = t + h
            if j < len(sample_t) and sample_t[j] <= t_new:
                Q = K.T @ _P
                while j < len(sample_t) and sample_t[j] <= t_new:
                    th = (sample_t[j] - t) / h
                    out[j] = y + h * (Q @ np.array([th, th * th, th ** 3, th ** 4]))
                    j += 1
                if sample_t[j - 1] == t_new:
                    out[j - 1] = y_new
            t, y = t_new, y_new
            K[0] = K[6]
            fac = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
            h *= fac
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
    if not np.all(np.isfinite(out)):
        raise DivergenceError(t)
    return out


def solve_rk4(f, t_span, y0, sample_t, dt):
    """Fixed-step RK4; each sampling interval is split into equal substeps of size <= dt."""
    y = np.array(y0, dtype=float)
    out = np.empty((len(sample_t), y.size))
    out[0] = y
    t = sample_t[0]
    for j in range(1, len(sample_t)):
        span = sample_t[j] - t
        n = max(1, int(math.ceil(span / dt * (1 - 1e-12))))
        h = span / n
        for i in range(n):
            y = rk4_step(f, t + i * h, y, h)
        if not np.all(np.isfinite(y)):
            raise DivergenceError(sample_t[j])
        t = sample_t[j]
        out[j] = y
    return out


# -- public operations -----------------------------------------------------

def integrate(k: SystemKind, c0: ChainState, cfg: IntegratorConfig) -> Trajectory:
    if k.params != c0.params:
        raise ConfigurationError(f"system parameters {k.params} do not match chain parameters {c0.params}")
    for m in cfg.clusters:
        if not 1 <= m <= c0.n:
            raise ConfigurationError(f"tracked cluster m={m} outside [1, {c0.n}]")
    tag = _kernels.TAG_QRS if k.tag is Tag.QRS else _kernels.TAG_GAUDIN
    z, kappa = float(k.params.z), float(k.params.kappa)
    ts = _sample_times(*cfg.t_span, cfg.sample_every)
    y0 = c0.flat()
    if cfg.method == RK4_FIXED:
        ys, status, t_fail, h = _kernels.rk4_solve(y0, ts, cfg.dt, tag, z, kappa)
    else:
        f0 = _kernels.field(y0, tag, z, kappa)
        h0 = _initial_step(lambda t, y: _kernels.field(y, tag, z, kappa), ts[0], y0, f0, cfg.rtol, cfg.atol)
        ys, status, t_fail, h = _kernels.dopri_solve(
            y0, ts[0], ts[-1], ts, cfg.rtol, cfg.atol, h0, cfg.max_steps,
            tag, z, kappa, _C, _A_DENSE, _B, _E, _P,
        )
    if status == 1:
        raise StiffnessError(t_fail, h)
    if status == 2 or not np.all(np.isfinite(ys)):
        raise DivergenceError(t_fail)
    states = ys.reshape(len(ts), c0.n, 3)
    return _annotate(k, ts, states, cfg.clusters)


def _annotate(k: SystemKind, ts, states, clusters) -> Trajectory:
    p = k.params
    chains = [ChainState(s, p) for s in states]
    tables = [cluster_table(c) for c in chains] if clusters else []
    track = {m: np.array([tb[m - 1] for tb in tables]) for m in clusters}
    inv = np.array([invariants_of(k, c) for c in chains])
    names = invariant_names(states.shape[1])
    return Trajectory(
        times=np.asarray(ts, dtype=float),
        states=np.asarray(states, dtype=float),
        params=p,
        cluster_track=track,
        invariant_track={name: inv[:, i] for i, name in enumerate(names)},
    )


def invariant_drift(tr: Trajectory) -> dict[str, float]:
    """max_t |I(t) - I(t0)| / max(1, |I(t0)|) for every tracked invariant."""
    out = {}
    for name, vals in tr.invariant_track.items():
        v0 = vals[0]
        out[name] = float(np.max(np.abs(vals - v0)) / max(1.0, abs(v0)))
    return out


def measure_period(tr: Trajectory, m: int, rel_tol: float = 0.05) -> float:
    """First-recurrence time of the m-th cluster variables.

    The squared distance to the initial cluster point is scanned for local
    minima (a sign change of its forward difference from - to +); the first
    minimum that comes back within ``rel_tol`` of the largest excursion so
    far is refined by interpolating each coordinate with a quartic through
    the five nearest samples and minimising the interpolated distance.
    """
    if m in tr.cluster_track:
        xs = tr.cluster_track[m]
    else:
        xs = np.array([cluster(tr.chain(i), m)[1:] for i in range(len(tr))])
    ts = tr.times
    dx = xs - xs[0]
    d2 = np.sum(dx ** 2, axis=1)
    if not np.any(d2 > 0):
        raise AperiodicError(f"cluster m={m} does not move; distance to the initial point is identically zero")
    diff = np.diff(d2)
    reach = np.maximum.accumulate(d2)
    for i in range(1, len(diff)):
        if diff[i - 1] < 0 <= diff[i] and d2[i] <= (rel_tol ** 2) * reach[i]:
            lo = max(0, min(i - 2, len(ts) - 5))
            sl = slice(lo, lo + 5)
            tc = ts[i]
            polys = [np.polynomial.Polynomial.fit(ts[sl] - tc, dx[sl, j], 4) for j in range(3)]
            dist = sum(q * q for q in polys)
            crit = dist.deriv().roots()
            crit = crit[np.abs(crit.imag) < 1e-12].real
            crit = crit[(crit >= ts[i - 1] - tc) & (crit <= ts[i + 1] - tc)]
            if crit.size == 0:
                return float(tc - ts[0])
            best = crit[np.argmin(dist(crit))]
            return float(tc + best - ts[0])
    raise AperiodicError(f"no recurrence of cluster m={m} within t in [{ts[0]}, {ts[-1]}]")


def integrate_many(k: SystemKind, chains: Sequence[ChainState], cfg: IntegratorConfig, workers: int = 1):
    """Independent integrations; results are returned in input order."""
    if workers <= 1:
        return [integrate(k, c, cfg) for c in chains]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(integrate, [k] * len(chains), chains, [cfg] * len(chains)))
