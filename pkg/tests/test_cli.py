import csv
import json

import numpy as np
import pytest

from jetstress.cli import export_fields, main
from jetstress.jetfield.jets import prolong
from jetstress.jetfield.maps import map_from_json
from jetstress.stresscore import VariationalStress, var_pair


def write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def test_verify_pass(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", {"suites": ["duality", "kernel"]})
    assert main(["verify", "--config", cfg, "--seed", "4", "--no-timestamp"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["pass"] is True
    assert report["environment"]["seed"] == 4
    assert {"name", "anchor", "max_abs_residual", "tolerance", "pass"} <= set(report["checks"][0])


def test_verify_failure_exit_code(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", {"inject_fault": "collapse_factor", "suites": ["duality"]})
    assert main(["verify", "--config", cfg]) == 1
    assert "holonomic-restriction-duality" in capsys.readouterr().err


def test_verify_parse_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", "--config", str(bad)]) == 2
    assert main(["verify", "--config", write(tmp_path / "b.json", {"m": 7})]) == 2
    assert main(["verify", "--suite", "unknown"]) == 2
    assert main(["frobnicate"]) == 2


def test_verify_out_file(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "symmetry-example", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["report_version"] == "1"


def test_example_symmetry(capsys):
    assert main(["example-symmetry"]) == 0
    text = capsys.readouterr().out
    assert "tau^{il}" in text
    assert main(["example-symmetry", "--json"]) == 0
    ex = json.loads(capsys.readouterr().out)
    assert ex["k4"]["il_asymmetry"] > 1e-3


def test_dims(capsys):
    assert main(["dims", "--n", "4", "--l", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert "  4   3          20           20" in lines


def test_export_grid_and_determinism(tmp_path):
    cfg = write(tmp_path / "e.json", {"n": 2, "m": 1, "k": 2, "seed": 9, "grid": {"shape": [2, 2]}})
    assert main(["export", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["export", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "samples.csv").read_bytes()
    assert a == (tmp_path / "b" / "samples.csv").read_bytes()
    assert (tmp_path / "a" / "manifest.json").read_bytes() == (tmp_path / "b" / "manifest.json").read_bytes()
    rows = list(csv.DictReader((tmp_path / "a" / "samples.csv").open()))
    assert len(rows) == 4


def test_exported_power_matches_library(tmp_path):
    data = {"n": 2, "m": 1, "k": 2, "seed": 2, "grid": {"shape": [3, 2], "lo": [-1, 0], "hi": [1, 1]}}
    cfg = write(tmp_path / "e.json", data)
    assert main(["export", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    w = map_from_json(manifest["fields"]["w"], 2)
    rows = list(csv.DictReader((tmp_path / "o" / "samples.csv").open()))
    assert len(rows) == 6
    s_cols = [c for c in manifest["columns"] if c.startswith("S[")]
    for row in rows:
        x = np.array([float(row["x1"]), float(row["x2"])])
        S = VariationalStress(2, 1, 2, np.array([[float(row[c]) for c in s_cols]]))
        assert float(row["power"]) == pytest.approx(var_pair(S, prolong(w, x, 2)), rel=1e-12, abs=1e-12)


def test_export_rejects_unknown_keys():
    from jetstress.verify import ConfigError

    with pytest.raises(ConfigError):
        export_fields({"n": 2, "colour": "red"})
