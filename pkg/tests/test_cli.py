import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from fracks.cli import EXIT_BLOWUP, EXIT_CONFIG, EXIT_CONTRACT, EXIT_OK, SCHEMAS, main, resolve
from fracks.errors import ConfigError
from fracks.meanfield import GridDensity


def _cfg(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_resolve_strict():
    with pytest.raises(ConfigError):
        resolve({"bogus": 1}, SCHEMAS["simulate"])
    with pytest.raises(ConfigError):
        resolve({"N": "64"}, SCHEMAS["simulate"])
    with pytest.raises(ConfigError):
        resolve({"initial": {"shape": 1}}, SCHEMAS["simulate"])
    out = resolve({"N": 8, "dt": 1}, SCHEMAS["simulate"])
    assert out["N"] == 8 and isinstance(out["dt"], float)


def test_thresholds(tmp_path):
    out = tmp_path / "th"
    assert main(["thresholds", "--config", _cfg(tmp_path, {"n_a": 4}), "--out", str(out)]) == EXIT_OK
    rows = _rows(out / "thresholds.csv")
    assert len(rows) == 4
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "thresholds" and man["git_describe"]


def test_fraclap_check(tmp_path):
    cfg = _cfg(tmp_path, {"cases": [[1.5, 0.5, 1.0]]})
    assert main(["fraclap-check", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    (row,) = _rows(tmp_path / "fraclap_check.csv")
    assert float(row["rel_error"]) < 1e-3


def test_simulate_outputs_and_seed(tmp_path):
    cfg = _cfg(tmp_path, {"N": 16, "T": 0.03})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "3"]) == EXIT_OK
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "3"]) == EXIT_OK
    ta = (tmp_path / "a" / "trajectory.csv").read_text()
    assert ta == (tmp_path / "b" / "trajectory.csv").read_text()
    assert len(_rows(tmp_path / "a" / "trajectory.csv")) == 16 * 4
    metrics = {r["metric"] for r in _rows(tmp_path / "a" / "diagnostics.csv")}
    assert any(m.startswith("moment") for m in metrics)


def test_pde_outputs(tmp_path):
    cfg = _cfg(tmp_path, {"M": 32, "T": 0.02, "chi": 0.0})
    assert main(["pde", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    g = GridDensity.load(tmp_path / "density_0001.f64")
    assert g.mass() == pytest.approx(1.0, abs=1e-12)
    assert _rows(tmp_path / "radial_profile.csv")


def test_noise_selftest(tmp_path):
    cfg = _cfg(tmp_path, {"a_values": [1.5], "n_samples": 20000})
    assert main(["noise-selftest", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK


def test_config_errors(tmp_path):
    assert main(["simulate", "--config", _cfg(tmp_path, {"bogus": 1}), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["simulate", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["thresholds", "--seed", "1", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["simulate", "--config", _cfg(tmp_path, {"N": 1}), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_contract_violation_exit(tmp_path):
    cfg = _cfg(tmp_path, {"M": 32, "T": 0.5, "dt": 0.5, "chi": 500.0, "alpha": 1.9, "initial": {"sigma": 0.4}})
    assert main(["pde", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONTRACT


def test_entry_point_help():
    r = subprocess.run([sys.executable, "-m", "fracks.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "simulate" in r.stdout
