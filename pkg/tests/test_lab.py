import json
import math
import os

import pytest

from kinlab.errors import ConfigError, MissingArtifact
from kinlab.kinetic import ExtReal
from kinlab.lab.artifacts import format_value, read_csv
from kinlab.lab.cli import main
from kinlab.lab.config import resolve
from kinlab.lab.experiments import EXPERIMENTS
from kinlab.lab.parallel import pmap, thread_count
from kinlab.lab.report import emit_report

SMALL_BOLTZMANN = {"gain_speeds": [0.0, 4.0, 8.0], "slope_window": [4.0, 8.0], "monotone_max_speed": 8.0,
                   "mc_samples": 4000, "particles": 2000, "steps": 20, "equilibrium_steps": 10,
                   "record_every": 2, "envelope": False}


def _config(tmp_path, name, **body):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(body))
    return str(path)


def _csv_bytes(folder):
    out = {}
    for name in sorted(os.listdir(folder)):
        if name.endswith(".csv"):
            with open(os.path.join(folder, name), "rb") as fh:
                out[name] = fh.read()
    return out


def test_list_and_usage(capsys):
    assert main(["list"]) == 0
    assert "tail-asymptotics" in capsys.readouterr().out
    assert main([]) == 2
    assert main(["frobnicate"]) == 2


def test_tail_run_passes_and_report(tmp_path, capsys):
    cfg = _config(tmp_path, "tails", experiment="tail-asymptotics")
    out = str(tmp_path / "tails")
    assert main(["run", cfg, "--out", out]) == 0
    cols, rows = read_csv(os.path.join(out, "criteria.csv"))
    assert cols == ["id", "description", "observed", "threshold", "verdict"]
    assert all(r[-1] == "PASS" for r in rows)
    with open(os.path.join(out, "manifest.json"), encoding="utf-8") as fh:
        manifest = json.load(fh)
    assert set(manifest["versions"]) >= {"numpy", "scipy", "python", "kinlab"}
    assert all(len(h) == 64 for h in manifest["files"].values() if h)
    capsys.readouterr()
    assert main(["report", out]) == 0
    assert "overall: PASS" in capsys.readouterr().out


@pytest.mark.parametrize("body", [
    {"experiment": "no-such-experiment"},
    {"experiment": "tail-asymptotics", "params": {"bogus": 1}},
    {"experiment": "tail-asymptotics", "params": {"alpha": "one"}},
    {"experiment": "tail-asymptotics", "extra": 1},
    {"experiment": "tail-asymptotics", "seed": -1},
    {"experiment": "tail-asymptotics", "quadrature": {"nonsense": 3}},
])
def test_config_errors_exit_2(tmp_path, body):
    assert main(["run", _config(tmp_path, "bad", **body), "--out", str(tmp_path / "o")]) == 2


def test_unparseable_and_missing_config(tmp_path):
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 2
    assert main(["run", str(tmp_path / "absent.json")]) == 2


def test_unknown_experiment_lists_valid_names():
    with pytest.raises(ConfigError) as exc:
        resolve({"experiment": "nope"})
    for name in EXPERIMENTS:
        assert name in str(exc.value)


def test_report_missing_artifact(tmp_path):
    with pytest.raises(MissingArtifact):
        emit_report(str(tmp_path))
    assert main(["report", str(tmp_path / "nowhere")]) == 2


def test_kinlab_error_exits_1(tmp_path):
    cfg = _config(tmp_path, "bz", experiment="boltzmann-contrast", params={**SMALL_BOLTZMANN, "dt": 5.0})
    assert main(["run", cfg, "--out", str(tmp_path / "bz")]) == 1


def test_determinism_byte_identical(tmp_path):
    cfg = _config(tmp_path, "bz", experiment="boltzmann-contrast", params=SMALL_BOLTZMANN, seed=5)
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    main(["run", cfg, "--out", a])
    main(["run", cfg, "--out", b])
    first, second = _csv_bytes(a), _csv_bytes(b)
    assert first and first == second
    c = str(tmp_path / "c")
    main(["run", cfg, "--out", c, "--seed", "6"])
    assert _csv_bytes(c)["gain.csv"] != first["gain.csv"]


def test_inf_token_and_values():
    assert format_value(ExtReal.infinity("β > 2")) == "inf"
    assert format_value(math.inf) == "inf"
    assert format_value(True) == "true"
    assert format_value(0.1) == repr(0.1)


def test_scan_csv_writes_inf_token(tmp_path):
    cfg = _config(tmp_path, "gt2", experiment="homogeneous-blowup",
                  params={"scenario": "beta_gt2", "n_grid": [2.0, 3.0]})
    out = str(tmp_path / "gt2")
    assert main(["run", cfg, "--out", out]) == 0
    cols, rows = read_csv(os.path.join(out, "scan.csv"))
    k = cols.index("log_value_or_bound")
    assert all(r[k] == "inf" for r in rows)
    assert os.path.exists(os.path.join(out, "scan.svg"))


def test_threads(monkeypatch):
    monkeypatch.setenv("LAB_THREADS", "3")
    assert thread_count() == 3
    assert pmap(lambda x: x * x, [1, 2, 3, 4]) == [1, 4, 9, 16]
