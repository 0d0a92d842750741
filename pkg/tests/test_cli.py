import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from qgaudin.cli import (
    EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_VERIFY, build_config, main, parse_set, parse_value,
)
from qgaudin.errors import ConfigurationError
from qgaudin.integrate import invariant_names
from qgaudin.serialize import csv_header, load_json, read_csv

SHORT = ["--set", "integrator.t1=2.0", "--set", "integrator.sample_every=0.25"]


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def report(out):
    return json.loads((out / "report.json").read_text())


# -- configuration --------------------------------------------------------------

def test_parse_values():
    assert parse_value("0.5") == 0.5
    assert parse_value("[1, 2]") == [1, 2]
    assert parse_value("qcg") == "qcg"
    assert parse_set("integrator.t1 = 3") == ("integrator.t1", 3)
    with pytest.raises(ConfigurationError, match="KEY=VALUE"):
        parse_set("z")


def test_defaults():
    cfg = build_config({})
    assert (cfg.system, cfg.n_sites, cfg.z, cfg.kappa, cfg.seed) == ("qcg", 5, 0.2, 1.0, 0)
    assert cfg.clusters == (1, 2, 3) and cfg.formats == ("csv", "json")
    assert build_config({"n_sites": 2}).clusters == (1,)


@pytest.mark.parametrize("raw, field", [
    ({"system": "cg", "z": 0.1}, "z"),
    ({"system": "qcg", "kappa": 0.5}, "kappa"),
    ({"system": "qpg", "kappa": 1.0}, "kappa"),
    ({"system": "qrs", "kappa": 1.0}, "kappa"),
    ({"system": "kappa", "kappa": -0.1}, "kappa"),
    ({"system": "heisenberg"}, "system"),
    ({"colour": "red"}, "colour"),
    ({"clusters": [0]}, "clusters"),
    ({"n_sites": 3, "clusters": [4]}, "clusters"),
    ({"n_sites": 0}, "n_sites"),
    ({"z": "big"}, "z"),
    ({"formats": ["png"]}, "formats"),
    ({"init.ranges.s3": [1.0, -1.0]}, "init.ranges.s3"),
    ({"init.sites": [[1, 2]]}, "init.sites"),
    ({"integrator.t1": -1.0}, "integrator"),
    ({"workers": 0}, "workers"),
    ({"seed": -3}, "seed"),
])
def test_config_errors_name_the_field(raw, field):
    with pytest.raises(ConfigurationError) as exc:
        build_config(raw)
    assert str(exc.value).startswith(field)


def test_config_error_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "simulate", "--set", "system=qrs", "--set", "kappa=1.0")
    assert code == EXIT_CONFIG
    assert "kappa" in capsys.readouterr().err


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('system = "qpg"\nz = 0.3\n[integrator]\nt1 = 1.0\nsample_every = 0.5\n')
    code, out = run(tmp_path, "simulate", "--config", str(path), "--set", "n_sites=3")
    assert code == EXIT_OK
    cfg = report(out)["config"]
    assert (cfg["system"], cfg["z"], cfg["kappa"], cfg["n_sites"]) == ("qpg", 0.3, 0.0, 3)
    assert cfg["integrator"]["t_span"] == [0.0, 1.0]
    bad = tmp_path / "bad.toml"
    bad.write_text("z = = 1\n")
    assert main(["simulate", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["simulate", "--config", str(tmp_path / "missing.toml")]) == EXIT_CONFIG


# -- simulate ---------------------------------------------------------------------

def test_simulate_equilibrium_is_constant(tmp_path):
    code, out = run(tmp_path, "simulate", "--set", "system=cg",
                    "--set", "init.sites=[[0.5, 0.0, 0.0], [-0.2, 0.0, 0.0], [0.1, 0.0, 0.0]]", *SHORT)
    assert code == EXIT_OK
    header, data = read_csv(out / "trajectory.csv")
    assert np.all(data[:, 1:] == data[0, 1:])
    drifts = report(out)["tables"]["invariant_drift"]
    assert all(row["drift"] == 0.0 for row in drifts)


def test_simulate_default_qcg_passes(tmp_path):
    code, out = run(tmp_path, "simulate", "--seed", "42", "--format", "csv", "--format", "json", "--format", "svg")
    assert code == EXIT_OK
    rep = report(out)
    assert rep["command"] == "simulate" and all(c["passed"] for c in rep["checks"])
    assert (out / "report.txt").read_text().strip()
    for m in (1, 2, 3):
        ET.parse(out / f"cluster_m{m}.svg")


def test_outputs_are_byte_identical_across_runs(tmp_path):
    args = ["simulate", "--seed", "7", *SHORT]
    _, a = run(tmp_path, *args, name="a")
    _, b = run(tmp_path, *args, name="b")
    for f in ("trajectory.csv", "trajectory.json"):
        ta = (a / f).read_bytes()
        tb = (b / f).read_bytes()
        assert ta.replace(str(a).encode(), b"") == tb.replace(str(b).encode(), b"")


def test_json_round_trip(tmp_path):
    from qgaudin.integrate import IntegratorConfig, integrate

    _, out = run(tmp_path, "simulate", "--seed", "3", *SHORT)
    tr = load_json(out / "trajectory.json")
    cfg = build_config({"seed": 3, "integrator.t1": 2.0, "integrator.sample_every": 0.25})
    again = integrate(cfg.kind, cfg.initial_chain(), IntegratorConfig(
        t_span=(0.0, 2.0), sample_every=0.25, clusters=(1, 2, 3)))
    assert tr == again


def test_csv_layout_and_precision(tmp_path):
    _, out = run(tmp_path, "simulate", "--seed", "5", *SHORT)
    header, data = read_csv(out / "trajectory.csv")
    assert header[:4] == ["t", "s3m_1", "sp_1", "sm_1"]
    assert header[-7:] == ["C_1", "C_2", "C_3", "delta3", "deltap", "deltam", "H"]
    tr = load_json(out / "trajectory.json")
    assert header == csv_header(tr)
    assert np.array_equal(data[:, 0], tr.times)
    assert np.array_equal(data[:, 1:4], tr.cluster_track[1])
    assert np.array_equal(data[:, -1], tr.invariant_track["H"])
    assert list(tr.invariant_track) == invariant_names(5)


def test_numeric_failure_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "simulate", "--set", "integrator.max_steps=10")
    assert code == EXIT_NUMERIC
    assert "step size" in capsys.readouterr().err


def test_qrs_report_skips_center(tmp_path):
    code, out = run(tmp_path, "simulate", "--set", "system=qrs", "--set", "z=0.3",
                    "--set", "init.ranges.sminus=[0.1, 1.0]", *SHORT)
    assert code == EXIT_OK
    rep = report(out)
    assert not any(c["name"] == "drift delta3" for c in rep["checks"])
    assert rep["notes"]


# -- compare / scan / group-check / bench ----------------------------------------------------

@pytest.mark.parametrize("system, extra", [
    ("cg", []), ("qcg", []), ("kappa", ["--set", "kappa=0.5", "--set", "z=-0.2"]),
    ("qpg", ["--set", "init.ranges.sminus=[0.1, 1.0]"]), ("qrs", ["--set", "init.ranges.sminus=[0.1, 1.0]"]),
])
def test_compare(tmp_path, system, extra):
    code, out = run(tmp_path, "compare", "--set", f"system={system}", *extra, *SHORT)
    assert code == EXIT_OK
    rows = report(out)["tables"]["closed_form_vs_numeric"]
    assert [r["m"] for r in rows] == [1, 2, 3]
    assert all(r["status"] == "ok" for r in rows)


def test_scan_kappa(tmp_path):
    code, out = run(tmp_path, "scan", "--axis", "kappa", "--values", "1,0.5,0", *SHORT)
    assert code == EXIT_OK
    rows = report(out)["tables"]["scan_kappa"]
    assert [r["value"] for r in rows] == [1.0, 0.5, 0.0]
    assert rows[0]["endpoint_residual"] <= 1e-12 and rows[2]["endpoint_residual"] <= 1e-12
    assert (out / "scan.csv").read_text().splitlines()[0].startswith("value,")


def test_scan_z_is_monotone(tmp_path):
    code, out = run(tmp_path, "scan", "--axis", "z", "--values", "0.4,0.1,0.01", *SHORT)
    assert code == EXIT_OK
    devs = [r["deviation_from_cg"] for r in report(out)["tables"]["scan_z"]]
    assert devs[0] > devs[1] > devs[2]


def test_scan_energy(tmp_path):
    code, out = run(tmp_path, "scan", "--set", "z=0.5", "--axis", "energy", "--values=-1,-0.5,2")
    rows = report(out)["tables"]["scan_energy"]
    assert code == EXIT_VERIFY  # the out-of-window point is reported as a failing row
    assert rows[0]["max_rel_error"] <= 1e-4 and rows[1]["max_rel_error"] <= 1e-4
    assert rows[2]["status"].startswith("DomainError")


def test_group_check(tmp_path):
    code, out = run(tmp_path, "group-check", "--set", "z=0.7", "--set", "system=kappa", "--set", "kappa=0.37")
    assert code == EXIT_OK
    assert len(report(out)["checks"]) == 7


def test_bench(tmp_path):
    code, out = run(tmp_path, "bench", "--n-values", "2,4", *SHORT)
    assert code == EXIT_OK
    lines = (out / "bench.csv").read_text().splitlines()
    assert lines[0].split(",")[:3] == ["n_sites", "numeric_seconds", "closed_form_seconds"]
    assert len(lines) == 3
