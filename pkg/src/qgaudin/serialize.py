"""Trajectory files: CSV, JSON (lossless, re-loadable) and SVG line charts."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Mapping

import numpy as np

from .algebra import DeformParams
from .integrate import Trajectory

_FLOAT = "%.17g"


def csv_header(tr: Trajectory) -> list[str]:
    ms = sorted(tr.cluster_track)
    cols = ["t"]
    for m in ms:
        cols += [f"s3m_{m}", f"sp_{m}", f"sm_{m}"]
    cols += [f"C_{m}" for m in ms]
    return cols + ["delta3", "deltap", "deltam", "H"]


def write_csv(path: Path, tr: Trajectory) -> None:
    ms = sorted(tr.cluster_track)
    cols = [tr.times]
    for m in ms:
        cols += [tr.cluster_track[m][:, j] for j in range(3)]
    cols += [tr.invariant_track[f"C{m}"] for m in ms]
    cols += [tr.invariant_track[name] for name in ("delta3", "deltap", "deltam", "H")]
    rows = np.column_stack(cols)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(csv_header(tr))
        for row in rows:
            w.writerow([_FLOAT % v for v in row])


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = np.array([[float(v) for v in row] for row in r])
    return header, data


def trajectory_to_dict(tr: Trajectory, config: Mapping) -> dict:
    return {
        "config": dict(config),
        "times": tr.times.tolist(),
        "sites": tr.states.tolist(),
        "clusters": {str(m): tr.cluster_track[m].tolist() for m in sorted(tr.cluster_track)},
        "invariants": {k: v.tolist() for k, v in tr.invariant_track.items()},
    }


def write_json(path: Path, tr: Trajectory, config: Mapping) -> None:
    # json emits the shortest repr of each float, which round-trips exactly
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(trajectory_to_dict(tr, config), fh, indent=1)
        fh.write("\n")


def trajectory_from_dict(doc: Mapping) -> Trajectory:
    cfg = doc["config"]
    params = DeformParams(float(cfg["z"]), float(cfg["kappa"]))
    n_samples = len(doc["times"])
    states = np.array(doc["sites"], dtype=float).reshape(n_samples, -1, 3)
    return Trajectory(
        times=np.array(doc["times"], dtype=float),
        states=states,
        params=params,
        cluster_track={int(m): np.array(v, dtype=float).reshape(n_samples, 3) for m, v in doc["clusters"].items()},
        invariant_track={k: np.array(v, dtype=float) for k, v in doc["invariants"].items()},
    )


def load_json(path: Path) -> Trajectory:
    with open(path, encoding="utf-8") as fh:
        return trajectory_from_dict(json.load(fh))


# -- SVG ------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _num(v: float) -> str:
    return f"{v:.6g}"


def svg_line_chart(x: np.ndarray, series: Mapping[str, np.ndarray], title: str,
                   width: int = 720, height: int = 420) -> str:
    """A standalone SVG chart of several series against a common x axis."""
    ml, mr, mt, mb = 70, 130, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    x = np.asarray(x, dtype=float)
    finite = [np.asarray(v, dtype=float)[np.isfinite(v)] for v in series.values()]
    ys = np.concatenate(finite) if finite else np.array([0.0])
    y_lo, y_hi = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    x_lo, x_hi = float(x[0]), float(x[-1])
    if x_hi == x_lo:
        x_hi = x_lo + 1.0

    def px(v):
        return ml + (v - x_lo) / (x_hi - x_lo) * pw

    def py(v):
        return mt + (y_hi - v) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{ml + pw / 2}" y="22" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    for i in range(5):
        fy = y_lo + (y_hi - y_lo) * i / 4
        fx = x_lo + (x_hi - x_lo) * i / 4
        out.append(f'<line x1="{ml}" y1="{_num(py(fy))}" x2="{ml + pw}" y2="{_num(py(fy))}" stroke="#ddd"/>')
        out.append(f'<text x="{ml - 6}" y="{_num(py(fy) + 4)}" text-anchor="end">{_num(fy)}</text>')
        out.append(f'<text x="{_num(px(fx))}" y="{mt + ph + 18}" text-anchor="middle">{_num(fx)}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">t</text>')
    for j, (name, vals) in enumerate(series.items()):
        color = _COLORS[j % len(_COLORS)]
        vals = np.asarray(vals, dtype=float)
        # non-finite samples break the polyline into separate segments
        segments, cur = [], []
        for xv, yv in zip(x, vals):
            if math.isfinite(yv):
                cur.append(f"{_num(px(xv))},{_num(py(yv))}")
            elif cur:
                segments.append(cur)
                cur = []
        if cur:
            segments.append(cur)
        for seg in segments:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(seg)}"/>')
        ly = mt + 16 + 18 * j
        out.append(f'<line x1="{ml + pw + 12}" y1="{ly}" x2="{ml + pw + 32}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw + 38}" y="{ly + 4}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_cluster_svgs(out_dir: Path, tr: Trajectory, prefix: str = "cluster") -> list[Path]:
    paths = []
    for m in sorted(tr.cluster_track):
        v = tr.cluster_track[m]
        svg = svg_line_chart(tr.times, {f"S3^({m})": v[:, 0], f"S+^({m})": v[:, 1], f"S-^({m})": v[:, 2]},
                             f"cluster m={m}")
        path = out_dir / f"{prefix}_m{m}.svg"
        path.write_text(svg, encoding="utf-8")
        paths.append(path)
    return paths
