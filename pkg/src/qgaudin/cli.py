"""Command-line front end.

    qgaudin [global flags] {simulate,compare,scan,group-check,bench,verify} [flags]

Configuration comes from an optional TOML file (``--config``), then
``--set key=value`` overrides (dotted keys address tables, e.g.
``integrator.t1=20``), then the dedicated ``--seed``/``--out``/``--format``
flags. The merged configuration is validated as a whole before any work
starts. Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 failed verification.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np
import tomli
from scipy.linalg import expm

from . import __version__
from .acceptance import run_all, surface_chain, warm_up
from .algebra import DeformParams
from .chain import ChainState, cluster, deltas, random_sites
from .closedform import (
    cg_solution, cluster_casimirs, deformed_frequency, qcg_solution, qpg_solution, qrs_solution,
)
from .errors import ConfigurationError, DomainError, NumericalError
from .grouprep import (
    GroupElement, bracket_family, commutator, group_product, lie_generators, matrix_of, poisson_lie_check,
    product_of,
)
from .integrate import (
    RK45_ADAPTIVE, IntegratorConfig, integrate, invariant_drift, measure_period,
)
from .serialize import write_cluster_svgs, write_csv, write_json
from .systems import SystemKind, cluster_rhs_gaudin, induced_cluster_rate, qrs_deltas, vector_field

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4

SYSTEMS = ("cg", "qcg", "qpg", "qrs", "kappa")
FORMATS = ("csv", "json", "svg")
#: s3, s+, s- ranges for random initial sites; s- < 0 keeps the default runs bounded
DEFAULT_RANGES = {"s3": (-1.0, 1.0), "splus": (0.1, 1.0), "sminus": (-1.0, -0.1)}
#: (z, kappa) each system pins; None means free
_PINNED = {"cg": (0.0, 1.0), "qcg": (None, 1.0), "qpg": (None, 0.0), "qrs": (None, 0.0), "kappa": (None, None)}
_DEFAULT_Z = 0.2

_KEYS = {
    "system", "n_sites", "z", "kappa", "seed", "clusters", "out", "formats", "workers",
    "init.sites", "init.ranges.s3", "init.ranges.splus", "init.ranges.sminus",
    "integrator.method", "integrator.t0", "integrator.t1", "integrator.sample_every", "integrator.dt",
    "integrator.rtol", "integrator.atol", "integrator.max_steps",
    "report.drift_tol", "report.compare_tol",
    "scan.axis", "scan.values", "bench.n_values", "group.samples",
}


@dataclass(frozen=True)
class RunConfig:
    system: str
    n_sites: int
    z: float
    kappa: float
    seed: int
    sites: tuple | None
    ranges: tuple
    integrator: IntegratorConfig
    clusters: tuple
    formats: tuple
    out: str
    workers: int = 1
    drift_tol: float = 1e-7
    compare_tol: float = 1e-6
    scan_axis: str = "z"
    scan_values: tuple = ()
    bench_n_values: tuple = (2, 4, 8, 16)
    group_samples: int = 100

    @property
    def params(self) -> DeformParams:
        return DeformParams(self.z, self.kappa)

    @property
    def kind(self) -> SystemKind:
        if self.system == "qrs":
            return SystemKind.qrs(self.z)
        return SystemKind.gaudin(self.z, self.kappa)

    def echo(self) -> dict:
        """Canonical, JSON-friendly form of the configuration."""
        d = asdict(self)
        d["integrator"] = asdict(self.integrator)
        d["ranges"] = {name: list(r) for name, r in zip(("s3", "splus", "sminus"), self.ranges)}
        return json.loads(json.dumps(d))

    def initial_chain(self, seed: int | None = None, n: int | None = None) -> ChainState:
        if self.sites is not None and n is None:
            return ChainState(np.array(self.sites, dtype=float), self.params)
        rng = np.random.default_rng(self.seed if seed is None else seed)
        return ChainState(random_sites(rng, n or self.n_sites, self.ranges), self.params)


# -- configuration ---------------------------------------------------------

def _flatten(d: Mapping, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, Mapping):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def parse_value(text: str) -> Any:
    """A TOML value if ``text`` parses as one, else the raw string."""
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def parse_set(item: str) -> tuple[str, Any]:
    if "=" not in item:
        raise ConfigurationError(f"--set expects KEY=VALUE, got {item!r}")
    key, value = item.split("=", 1)
    return key.strip(), parse_value(value.strip())


def load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return _flatten(tomli.load(fh))
    except FileNotFoundError:
        raise ConfigurationError(f"config: file not found: {path}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigurationError(f"config: {path} is not valid TOML: {exc}") from None


def _num(raw: Mapping, key: str, default, kind=float):
    v = raw.get(key, default)
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigurationError(f"{key}: expected an integer, got {v!r}")
        return v
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigurationError(f"{key}: expected a finite number, got {v!r}")
    return float(v)


def _num_list(raw: Mapping, key: str, default, kind=float) -> tuple:
    v = raw.get(key, default)
    if not isinstance(v, (list, tuple)):
        raise ConfigurationError(f"{key}: expected a list, got {v!r}")
    return tuple(_num({key: x}, key, None, kind) for x in v)


def build_config(raw: Mapping) -> RunConfig:
    """Validate a flat (dotted-key) mapping into a RunConfig, all or nothing."""
    unknown = sorted(set(raw) - _KEYS)
    if unknown:
        raise ConfigurationError(f"{unknown[0]}: unknown configuration key")
    system = raw.get("system", "qcg")
    if system not in SYSTEMS:
        raise ConfigurationError(f"system: expected one of {', '.join(SYSTEMS)}, got {system!r}")
    z_pin, k_pin = _PINNED[system]
    z = _num(raw, "z", _DEFAULT_Z if z_pin is None else z_pin)
    kappa = _num(raw, "kappa", 1.0 if k_pin is None else k_pin)
    if z_pin is not None and z != z_pin:
        raise ConfigurationError(f"z: system {system!r} requires z = {z_pin}, got {z}")
    if k_pin is not None and kappa != k_pin:
        raise ConfigurationError(f"kappa: system {system!r} requires kappa = {k_pin}, got {kappa}")
    if kappa < 0:
        raise ConfigurationError(f"kappa: must be >= 0, got {kappa}")

    sites = raw.get("init.sites")
    if sites is not None:
        try:
            arr = np.array(sites, dtype=float)
        except (TypeError, ValueError):
            raise ConfigurationError("init.sites: expected a list of [s3, s+, s-] triples") from None
        if arr.ndim != 2 or arr.shape[1] != 3 or len(arr) < 1 or not np.all(np.isfinite(arr)):
            raise ConfigurationError("init.sites: expected a non-empty list of finite [s3, s+, s-] triples")
        sites = tuple(tuple(float(v) for v in row) for row in arr)
        if "n_sites" in raw and raw["n_sites"] != len(sites):
            raise ConfigurationError(f"n_sites: {raw['n_sites']} disagrees with {len(sites)} init.sites rows")
        n_sites = len(sites)
    else:
        n_sites = _num(raw, "n_sites", 5, int)
    if n_sites < 1:
        raise ConfigurationError(f"n_sites: must be >= 1, got {n_sites}")

    ranges = []
    for name in ("s3", "splus", "sminus"):
        key = f"init.ranges.{name}"
        r = _num_list(raw, key, DEFAULT_RANGES[name])
        if len(r) != 2 or r[0] > r[1]:
            raise ConfigurationError(f"{key}: expected [low, high] with low <= high, got {list(r)}")
        ranges.append(r)

    default_clusters = list(range(1, min(3, n_sites - 1) + 1)) or [1]
    clusters = _num_list(raw, "clusters", default_clusters, int)
    bad = [m for m in clusters if not 1 <= m <= n_sites]
    if bad:
        raise ConfigurationError(f"clusters: m={bad[0]} outside [1, {n_sites}]")

    formats = raw.get("formats", ["csv", "json"])
    if isinstance(formats, str):
        formats = [formats]
    bad_f = [f for f in formats if f not in FORMATS]
    if bad_f:
        raise ConfigurationError(f"formats: unknown format {bad_f[0]!r}; expected csv, json or svg")

    method = raw.get("integrator.method", RK45_ADAPTIVE)
    try:
        integ = IntegratorConfig(
            method=method,
            t_span=(_num(raw, "integrator.t0", 0.0), _num(raw, "integrator.t1", 20.0)),
            sample_every=_num(raw, "integrator.sample_every", 0.1),
            dt=_num(raw, "integrator.dt", 1e-2),
            rtol=_num(raw, "integrator.rtol", 1e-10),
            atol=_num(raw, "integrator.atol", 1e-12),
            clusters=tuple(dict.fromkeys(clusters)),
            max_steps=_num(raw, "integrator.max_steps", 2_000_000, int),
        )
    except ConfigurationError as exc:
        raise ConfigurationError(f"integrator: {exc}") from None

    axis = raw.get("scan.axis", "z")
    if axis not in ("z", "kappa", "energy"):
        raise ConfigurationError(f"scan.axis: expected z, kappa or energy, got {axis!r}")
    workers = _num(raw, "workers", 1, int)
    if workers < 1:
        raise ConfigurationError(f"workers: must be >= 1, got {workers}")
    bench_n = _num_list(raw, "bench.n_values", [2, 4, 8, 16], int)
    if any(n < 2 for n in bench_n):
        raise ConfigurationError("bench.n_values: every N must be >= 2")
    samples = _num(raw, "group.samples", 100, int)
    if samples < 1:
        raise ConfigurationError(f"group.samples: must be >= 1, got {samples}")
    tols = {k: _num(raw, f"report.{k}", d) for k, d in (("drift_tol", 1e-7), ("compare_tol", 1e-6))}
    for k, v in tols.items():
        if v <= 0:
            raise ConfigurationError(f"report.{k}: must be > 0, got {v}")
    seed = _num(raw, "seed", 0, int)
    if seed < 0:
        raise ConfigurationError(f"seed: must be >= 0, got {seed}")
    out = raw.get("out", "qgaudin-out")
    if not isinstance(out, str):
        raise ConfigurationError(f"out: expected a path string, got {out!r}")
    return RunConfig(
        system=system, n_sites=n_sites, z=z, kappa=kappa, seed=seed, sites=sites, ranges=tuple(ranges),
        integrator=integ, clusters=tuple(clusters), formats=tuple(dict.fromkeys(formats)), out=out,
        workers=workers, drift_tol=tols["drift_tol"], compare_tol=tols["compare_tol"], scan_axis=axis,
        scan_values=_num_list(raw, "scan.values", []), bench_n_values=bench_n, group_samples=samples,
    )


# -- reports ------------------------------------------------------------------

@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    note: str = ""


@dataclass
class Report:
    command: str
    config: dict
    tables: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    tool: str = "qgaudin"
    version: str = __version__

    def check(self, name: str, value: float, tolerance: float, note: str = "", passed: bool | None = None) -> bool:
        ok = bool(value <= tolerance) if passed is None else bool(passed)
        self.checks.append(Check(name, float(value), float(tolerance), ok, note))
        return ok

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "tool": self.tool, "version": self.version, "command": self.command, "config": self.config,
            "tables": self.tables, "checks": [asdict(c) for c in self.checks], "notes": self.notes,
            "passed": self.passed,
        }

    def to_text(self) -> str:
        lines = [f"{self.tool} {self.version} {self.command}", ""]
        for name, rows in self.tables.items():
            lines.append(f"{name}:")
            for row in rows:
                lines.append("  " + "  ".join(f"{k}={_fmt(v)}" for k, v in row.items()))
            lines.append("")
        lines.append("checks:")
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            extra = f"  ({c.note})" if c.note else ""
            lines.append(f"  [{flag}] {c.name}: {_fmt(c.value)} <= {_fmt(c.tolerance)}{extra}")
        for n in self.notes:
            lines.append(f"note: {n}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def write(self, out_dir: Path, stem: str = "report") -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{stem}.json").write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n",
                                              encoding="utf-8")
        (out_dir / f"{stem}.txt").write_text(self.to_text(), encoding="utf-8")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _clean(v):
    """JSON-safe float (non-finite values become strings)."""
    v = float(v)
    return v if math.isfinite(v) else str(v)


# -- commands -------------------------------------------------------------------

def _conserved(cfg: RunConfig, name: str) -> bool:
    # S3^(N) moves linearly under qRS
    return not (cfg.system == "qrs" and name == "delta3")


def run_simulate(cfg: RunConfig) -> Report:
    c0 = cfg.initial_chain()
    tr = integrate(cfg.kind, c0, cfg.integrator)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in cfg.formats:
        write_csv(out / "trajectory.csv", tr)
    if "json" in cfg.formats:
        write_json(out / "trajectory.json", tr, cfg.echo())
    if "svg" in cfg.formats:
        write_cluster_svgs(out, tr)
    rep = Report("simulate", cfg.echo())
    drift = invariant_drift(tr)
    rep.tables["invariant_drift"] = [{"invariant": k, "drift": _clean(v)} for k, v in drift.items()]
    for k, v in drift.items():
        if _conserved(cfg, k):
            rep.check(f"drift {k}", v, cfg.drift_tol)
    if cfg.system == "qrs":
        rep.notes.append("delta3 = S3^(N) is not an integral of the qRS flow; it grows linearly in t")
    return rep


def _closed_form(cfg: RunConfig, c0: ChainState, m: int, times: np.ndarray):
    p = cfg.params
    if cfg.system == "qrs":
        d = qrs_deltas(c0)
        return qrs_solution(p, d, cluster(c0, m), d.d3, times, times[0])
    d = deltas(c0)
    init = cluster(c0, m)
    if p.undeformed:
        if p.kappa != 1.0:
            raise DomainError(f"no closed form for z = 0 with kappa = {p.kappa}")
        return cg_solution(d, init, times, times[0])
    if p.kappa == 0:
        return qpg_solution(p, d, init, times, times[0])
    cm, cnm = cluster_casimirs(p, d, init)
    return qcg_solution(p, d, init, cm, cnm, times, times[0])


def run_compare(cfg: RunConfig) -> Report:
    c0 = cfg.initial_chain()
    tr = integrate(cfg.kind, c0, cfg.integrator)
    rep = Report("compare", cfg.echo())
    rows = []
    for m in cfg.clusters:
        if m >= c0.n:
            rows.append({"m": m, "max_abs_deviation": "n/a", "status": "m = N is constant; no cluster dynamics"})
            rep.check(f"closed form m={m}", math.inf, cfg.compare_tol, "m must be < N", passed=False)
            continue
        try:
            sol = _closed_form(cfg, c0, m, tr.times)
        except DomainError as exc:
            rows.append({"m": m, "max_abs_deviation": "n/a", "status": str(exc)})
            rep.check(f"closed form m={m}", math.inf, cfg.compare_tol, str(exc), passed=False)
            continue
        dev = float(np.max(np.abs(np.column_stack(sol[1:]) - tr.cluster_track[m])))
        rows.append({"m": m, "max_abs_deviation": _clean(dev), "status": "ok"})
        rep.check(f"closed form m={m}", dev, cfg.compare_tol)
    rep.tables["closed_form_vs_numeric"] = rows
    return rep


# scan ---------------------------------------------------------------------------

def _scan_point(cfg: RunConfig, axis: str, value: float) -> dict:
    """One scan point; failures are returned as a row, never raised."""
    row: dict = {"value": value}
    try:
        if axis == "z":
            row.update(_scan_z(cfg, value))
        elif axis == "kappa":
            row.update(_scan_kappa(cfg, value))
        else:
            row.update(_scan_energy(cfg, value))
        row.setdefault("status", "ok")
    except (DomainError, NumericalError, ConfigurationError) as exc:
        row["status"] = f"{type(exc).__name__}: {exc}"
    return row


def _scan_z(cfg: RunConfig, z: float) -> dict:
    system = "qcg" if cfg.system == "cg" else cfg.system
    point = replace(cfg, system=system, z=z)
    c0 = point.initial_chain()
    tr = integrate(point.kind, c0, point.integrator)
    row = {"drift": _clean(max(v for k, v in invariant_drift(tr).items() if _conserved(point, k)))}
    if system == "qcg":
        ref_cfg = replace(cfg, system="cg", z=0.0, kappa=1.0)
        ref = integrate(ref_cfg.kind, ref_cfg.initial_chain(), ref_cfg.integrator)
        dev = max(float(np.max(np.abs(tr.cluster_track[m] - ref.cluster_track[m]))) for m in cfg.clusters)
        row["deviation_from_cg"] = _clean(dev)
    return row


def _scan_kappa(cfg: RunConfig, kappa: float) -> dict:
    point = replace(cfg, system="kappa", kappa=kappa)
    c0 = point.initial_chain()
    k = point.kind
    f = vector_field(k, c0)
    row = {"field_norm": _clean(np.max(np.abs(f)))}
    d = deltas(c0)
    row["cluster_rhs_residual"] = _clean(max(
        float(np.max(np.abs(cluster_rhs_gaudin(k.params, cluster(c0, m), d) - induced_cluster_rate(k, c0, m))))
        for m in range(1, c0.n + 1)))
    endpoint = {1.0: SystemKind.qcg(point.z), 0.0: SystemKind.qpg(point.z)}.get(kappa)
    if endpoint is not None:
        ref = vector_field(endpoint, ChainState(c0.sites, endpoint.params))
        row["endpoint_residual"] = _clean(np.max(np.abs(f - ref)))
    tr = integrate(k, c0, point.integrator)
    row["drift"] = _clean(max(invariant_drift(tr).values()))
    return row


def _scan_energy(cfg: RunConfig, energy: float) -> dict:
    z = cfg.z
    p = DeformParams(z, 1.0)
    freq = deformed_frequency(p, energy)
    if freq.branch != "periodic" or energy >= 0:
        raise DomainError(f"C = {energy} lies outside the periodic window 0 > C > -1/z^2 = {-1 / (z * z):.6g}")
    predicted = freq.period
    k = SystemKind.qcg(z)
    integ = IntegratorConfig(method=cfg.integrator.method, t_span=(0.0, 2.5 * predicted), sample_every=0.01,
                             dt=cfg.integrator.dt, rtol=cfg.integrator.rtol, atol=cfg.integrator.atol,
                             clusters=tuple(m for m in cfg.clusters if m < cfg.n_sites) or (1,))
    rng = np.random.default_rng(cfg.seed)
    n = max(cfg.n_sites, 2)
    for _ in range(200):
        c0 = surface_chain(rng, p, n, energy, cfg.ranges)
        try:
            tr = integrate(k, c0, integ)
            periods = {m: measure_period(tr, m) for m in integ.clusters}
        except NumericalError:
            continue  # singular orbit: draw another point on the surface
        worst = max(abs(T - predicted) / predicted for T in periods.values())
        row = {"predicted_period": predicted, "max_rel_error": _clean(worst)}
        row.update({f"period_m{m}": T for m, T in periods.items()})
        return row
    raise NumericalError(f"no regular orbit found on C = {energy}")


def run_scan(cfg: RunConfig, axis: str, values: Sequence[float]) -> tuple[Report, list[dict]]:
    if not values:
        raise ConfigurationError("scan.values: at least one value is required")
    if axis == "energy" and cfg.system != "qcg":
        raise ConfigurationError(f"system: energy scans use the qcg system, got {cfg.system!r}")
    if axis == "kappa" and cfg.system not in ("kappa", "qcg", "qpg"):
        raise ConfigurationError(f"system: kappa scans need a Gaudin-family system, got {cfg.system!r}")
    if axis == "z" and any(v == 0 for v in values) and cfg.system in ("qcg", "cg"):
        raise ConfigurationError("scan.values: the z axis compares against z = 0; use non-zero values")
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_scan_point, [cfg] * len(values), [axis] * len(values), values))
    else:
        rows = [_scan_point(cfg, axis, v) for v in values]
    rep = Report("scan", cfg.echo())
    rep.tables[f"scan_{axis}"] = rows
    for row in rows:
        if row["status"] != "ok":
            rep.check(f"{axis}={row['value']}", math.inf, 0.0, row["status"], passed=False)
    good = [r for r in rows if r["status"] == "ok"]
    if axis == "z" and good and "deviation_from_cg" in good[0]:
        ordered = sorted(good, key=lambda r: -abs(r["value"]))
        devs = [r["deviation_from_cg"] for r in ordered]
        mono = all(b <= a for a, b in zip(devs, devs[1:]))
        rep.check("deviation from CG decreases as |z| -> 0", 0.0, 0.0,
                  ", ".join(f"z={r['value']:g}: {r['deviation_from_cg']:.3g}" for r in ordered), passed=mono)
    elif axis == "kappa":
        for r in good:
            if "endpoint_residual" in r:
                rep.check(f"kappa={r['value']:g} field equals its named endpoint", r["endpoint_residual"], 1e-12)
            rep.check(f"kappa={r['value']:g} cluster equations vs chain rule", r["cluster_rhs_residual"], 1e-11)
    elif axis == "energy":
        for r in good:
            rep.check(f"C={r['value']:g} period vs 2pi/sqrt(-Omega)", r["max_rel_error"], 1e-4)
    return rep, rows


def write_scan_csv(path: Path, rows: list[dict]) -> None:
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for r in rows:
            cells = []
            for k in cols:
                v = r.get(k, "")
                if isinstance(v, float):
                    cells.append("%.17g" % v)
                else:
                    s = str(v)
                    cells.append('"' + s.replace('"', '""') + '"' if ("," in s or '"' in s) else s)
            fh.write(",".join(cells) + "\n")


# group-check --------------------------------------------------------------------

def run_group_check(z: float, kappa: float, seed: int, samples: int = 100) -> Report:
    rep = Report("group-check", {"z": z, "kappa": kappa, "seed": seed, "samples": samples})
    rng = np.random.default_rng(seed)
    assoc = 0.0
    for _ in range(samples):
        g = [GroupElement(*rng.uniform(-1, 1, 3), z) for _ in range(3)]
        lhs = group_product(g[0], group_product(g[1], g[2]))
        rhs = group_product(group_product(g[0], g[1]), g[2])
        assoc = max(assoc, max(abs(a - b) for a, b in zip(lhs[:3], rhs[:3])))
    rep.check("associativity", assoc, 1e-14)
    ident = 0.0
    for n in range(1, 65):
        s = rng.uniform(-1, 1, (n, 3))
        v = cluster(ChainState(s, DeformParams(z, kappa)), n)
        g = product_of([GroupElement.from_site(x, z) for x in s])
        ident = max(ident, max(abs(a - b) / max(1.0, abs(b)) for a, b in zip(g[:3], v[1:])))
    rep.check("group product = cluster variables (N <= 64)", ident, 1e-13)
    D, P1, P2 = lie_generators(z)
    comm = max(
        float(np.max(np.abs(commutator(D, P1) + z * P1))),
        float(np.max(np.abs(commutator(D, P2) + z * P2))),
        float(np.max(np.abs(commutator(P1, P2)))),
    )
    rep.check("[D,P1] = -z P1, [D,P2] = -z P2, [P1,P2] = 0", comm, 0.0)
    a = float(rng.uniform(-1, 1))
    rep.check("exp(A D) = g(A, 0, 0)", float(np.max(np.abs(expm(a * D) - matrix_of(GroupElement(a, 0.0, 0.0, z))))),
              1e-14)
    for name, k in (("p0", 1.0), ("p1", 0.0), ("p2", kappa)):
        res = poisson_lie_check(bracket_family(name, z, k), samples, seed)
        rep.check(f"Poisson-Lie multiplication {name} (kappa={k:g})", res, 1e-12)
    return rep


# bench ----------------------------------------------------------------------------

def run_bench(cfg: RunConfig, n_values: Sequence[int]) -> tuple[Report, list[dict]]:
    """Full integration against closed-form cluster evaluation for each N.

    Random sites are divided by N so the N-site integrals stay O(1) and the
    orbits keep the same character as N grows.
    """
    if cfg.system == "qrs":
        raise ConfigurationError("system: bench runs Gaudin-family systems only (cg, qcg, qpg, kappa)")
    warm_up()
    rows = []
    rep = Report("bench", cfg.echo())
    for n in n_values:
        ms = tuple(m for m in cfg.clusters if m < n) or (1,)
        point = replace(cfg, n_sites=n, sites=None, integrator=replace(cfg.integrator, clusters=ms))
        sites = random_sites(np.random.default_rng(cfg.seed), n, cfg.ranges) / n
        c0 = ChainState(sites, point.params)
        row: dict = {"n_sites": n}
        try:
            t = time.perf_counter()
            tr = integrate(point.kind, c0, point.integrator)
            t_num = time.perf_counter() - t
            t = time.perf_counter()
            sols = {m: _closed_form(point, c0, m, tr.times) for m in ms}
            t_cf = time.perf_counter() - t
        except (DomainError, NumericalError) as exc:
            row.update({"gate_passed": 0, "status": f"{type(exc).__name__}: {exc}"})
            rows.append(row)
            rep.check(f"N={n} closed form vs numeric (correctness gate)", math.inf, cfg.compare_tol,
                      row["status"], passed=False)
            continue
        dev = max(float(np.max(np.abs(np.column_stack(s[1:]) - tr.cluster_track[m]))) for m, s in sols.items())
        drift = max(invariant_drift(tr).values())
        gate = dev <= cfg.compare_tol
        row.update({"numeric_seconds": t_num, "closed_form_seconds": t_cf, "max_drift": _clean(drift),
                    "max_deviation": _clean(dev), "gate_passed": int(gate), "status": "ok"})
        rows.append(row)
        rep.check(f"N={n} closed form vs numeric (correctness gate)", dev, cfg.compare_tol)
    rep.tables["bench"] = rows
    return rep, rows


# verify ---------------------------------------------------------------------------

def run_verify(out: Path | None, budget: float = 60.0, echo: Callable[[str], None] = print) -> bool:
    start = time.perf_counter()
    results = run_all(lambda r: echo(r.line()))
    elapsed = time.perf_counter() - start
    in_budget = elapsed < budget
    echo(f"[{'PASS' if in_budget else 'FAIL'}] 11 verify wall-clock: {elapsed:.2f} s < {budget:g} s")
    ok = in_budget and all(r.passed for r in results)
    echo(f"overall: {'PASS' if ok else 'FAIL'}")
    if out is not None:
        rep = Report("verify", {})
        for r in results:
            rep.check(f"{r.number} {r.name}", 0.0, 0.0, r.detail, passed=r.passed)
        rep.check("11 verify wall-clock seconds", elapsed, budget, passed=in_budget)
        rep.write(out, "verify")
    return ok


# -- entry point --------------------------------------------------------------------

def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--config", metavar="PATH", help="TOML configuration file", **d)
    p.add_argument("--set", metavar="KEY=VALUE", action="append", dest="sets",
                   help="override one configuration key (repeatable)", **d)
    p.add_argument("--out", metavar="DIR", help="output directory", **d)
    p.add_argument("--seed", type=int, metavar="INT", help="seed for random initial states", **d)
    p.add_argument("--format", choices=FORMATS, action="append", dest="formats",
                   help="trajectory output format (repeatable)", **d)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgaudin", description="Integrate and verify coalgebra-symmetric chains.")
    parser.add_argument("--version", action="version", version=f"qgaudin {__version__}")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    cmds = {
        "simulate": "integrate one chain and write trajectory files plus a drift report",
        "compare": "closed-form cluster solutions against numerical integration",
        "scan": "repeat an experiment over z, kappa or the energy C^(N)",
        "group-check": "group-product, commutator and Poisson-Lie checks",
        "bench": "wall-clock of full integration vs closed-form cluster evaluation",
        "verify": "run the full acceptance suite",
    }
    subs = {}
    for name, help_text in cmds.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        _add_globals(sp, suppress=True)
        subs[name] = sp
    subs["scan"].add_argument("--axis", choices=("z", "kappa", "energy"))
    subs["scan"].add_argument("--values", help="comma-separated axis values")
    subs["bench"].add_argument("--n-values", help="comma-separated chain lengths")
    return parser


def _csv_numbers(text: str, key: str, kind=float) -> list:
    try:
        return [kind(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"{key}: expected comma-separated numbers, got {text!r}") from None


def config_from_args(args: argparse.Namespace) -> RunConfig:
    raw: dict = load_config_file(args.config) if args.config else {}
    for item in args.sets or []:
        k, v = parse_set(item)
        raw[k] = v
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["out"] = args.out
    if args.formats:
        raw["formats"] = list(args.formats)
    if getattr(args, "axis", None):
        raw["scan.axis"] = args.axis
    if getattr(args, "values", None):
        raw["scan.values"] = _csv_numbers(args.values, "--values")
    if getattr(args, "n_values", None):
        raw["bench.n_values"] = _csv_numbers(args.n_values, "--n-values", int)
    return build_config(raw)


def main(argv: Sequence[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "verify":
            out = Path(args.out) if args.out else None
            return EXIT_OK if run_verify(out) else EXIT_VERIFY
        cfg = config_from_args(args)
        out = Path(cfg.out)
        if args.command == "simulate":
            rep = run_simulate(cfg)
        elif args.command == "compare":
            rep = run_compare(cfg)
        elif args.command == "scan":
            rep, rows = run_scan(cfg, cfg.scan_axis, cfg.scan_values)
            out.mkdir(parents=True, exist_ok=True)
            write_scan_csv(out / "scan.csv", rows)
        elif args.command == "group-check":
            rep = run_group_check(cfg.z, cfg.kappa, cfg.seed, cfg.group_samples)
        else:
            rep, rows = run_bench(cfg, cfg.bench_n_values)
            out.mkdir(parents=True, exist_ok=True)
            write_scan_csv(out / "bench.csv", rows)
        rep.write(out)
        sys.stdout.write(rep.to_text())
        return EXIT_OK if rep.passed else EXIT_VERIFY
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DomainError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
