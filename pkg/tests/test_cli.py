import csv
import json
import os
import subprocess
import sys

import pytest

from rrmc import experiment
from rrmc.cli import main
from rrmc.errors import ConfigError

SMALL = {"product": {"max_call": {"d": 2}}, "N": 2000, "N_test": 2000}


def write(tmp_path, name, doc):
    f = tmp_path / name
    f.write_text(json.dumps(doc))
    return str(f)


def test_normalize_fills_defaults_and_rejects_unknown():
    cfg = experiment.normalize_config({"product": {"swap": {}}})
    assert cfg["basis"] == "swap-order-stats" and cfg["inner"] == 1000
    assert cfg["product"]["swap"]["d"] == 20 and cfg["ordered"] is False
    assert experiment.normalize_config(SMALL)["ordered"] is True
    for bad in ({"product": {"max_call": {}}, "paths": 3},
                {"product": {"max_call": {"vol": 0.2}}},
                {"product": {"max_call": {}, "swap": {}}},
                {"product": {"barrier": {}}},
                {"product": {"max_call": {}}, "method": "reinforced-pi"},
                {"product": {"max_call": {}}, "N": -1},
                {"product": {"max_call": {}}, "outputs": {"pdf": "x"}},
                {"product": {"max_call": {}}, "N_test": 5, "outer": 10}):
        with pytest.raises(ConfigError):
            experiment.normalize_config(bad)


def test_reinforced_payoff_basis_rejected():
    cfg = dict(SMALL, basis="1, X_i, g(X)", method="reinforced-tvr")
    with pytest.raises(ConfigError, match="already enters"):
        experiment.build_problem(cfg)
    experiment.build_problem(dict(cfg, method="standard-tvr"))


def test_config_hash_stable():
    a = experiment.config_hash(SMALL)
    assert a == experiment.config_hash(json.loads(json.dumps(SMALL)))
    assert a != experiment.config_hash(dict(SMALL, seed=2))


def test_run_experiment_report_and_outputs(tmp_path):
    cfg = dict(SMALL, outer=20, inner=10,
               outputs={"report": str(tmp_path / "r.json"), "csv": str(tmp_path / "r.csv"),
                        "model": str(tmp_path / "m.json")})
    report = experiment.run_experiment(cfg)
    assert report["lower"]["num_paths"] == 2000 and report["upper"]["inner_paths"] == 10
    assert report["costs"]["K_r"] == 3 and report["costs"]["training_ratio"] > 0
    saved = json.load(open(tmp_path / "r.json"))
    assert saved["config_hash"] == report["config_hash"]
    rows = list(csv.DictReader(open(tmp_path / "r.csv")))
    assert [r["kind"] for r in rows] == ["lower", "upper"]
    again = experiment.run_experiment(cfg)
    strip = lambda r: {k: v for k, v in r.items() if k != "timings"}
    assert json.dumps(strip(again), sort_keys=True) == json.dumps(strip(report), sort_keys=True)


def test_training_only_pipeline():
    report = experiment.run_experiment(dict(SMALL, N_test=0))
    assert report["lower"] is None and report["upper"] is None


def test_run_table_with_failure_row(tmp_path):
    out = tmp_path / "t.csv"
    sweep = [{"method": "standard-tvr"}, {"basis": "1, X_i, g(X)"},
             {"method": "reinforced-ls", "product": {"max_call": {"d": 3}}}]
    rows = experiment.run_table(SMALL, sweep, out)
    assert len(rows) == 3 and "already enters" in rows[1]["error"]
    back = list(csv.DictReader(open(out)))
    assert back[2]["d"] == "3" and back[2]["method"] == "reinforced-ls"


def test_empty_sweep_header_only(tmp_path):
    out = tmp_path / "t.csv"
    assert experiment.run_table(SMALL, experiment.expand_sweep({"grid": {}}), out) == []
    assert open(out).read().strip() == ",".join(experiment.TABLE_COLUMNS)


def test_table_layouts_shape():
    layouts = experiment.table_sweeps()
    assert len(layouts["max_call"]) == 4 * 3 * 2 - 4
    assert len(layouts["swap"]) == 16
    grid = experiment.expand_sweep({"grid": {"product.swap.rho": [0, 0.5], "method": ["a", "b"]}})
    assert grid[3] == {"product": {"swap": {"rho": 0.5}}, "method": "b"}


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    bad = write(tmp_path, "bad.json", {"product": {"max_call": {"dd": 2}}})
    assert main(["run", bad]) == 2
    singular = write(tmp_path, "s.json", {"product": {"max_call": {"d": 2, "rho": 1.5}}})
    assert main(["run", singular, "--paths", "100", "--test-paths", "0"]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_cli_train_bound_simulate_cost(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", dict(SMALL, outputs={"csv": str(tmp_path / "b.csv")}))
    model = str(tmp_path / "m.json")
    assert main(["train", cfg, "--out", model]) == 0
    assert main(["bound", cfg, "--model", model, "--kind", "both", "--outer", "10",
                 "--inner", "5", "--out", str(tmp_path / "b.json")]) == 0
    doc = json.load(open(tmp_path / "b.json"))
    assert set(doc) == {"lower", "upper"}
    assert main(["simulate", cfg, "--which", "test", "--out", str(tmp_path / "p.bin")]) == 0
    assert os.path.getsize(tmp_path / "p.bin") == 32 + 8 * 2000 * 9 * 2
    capsys.readouterr()
    assert main(["cost", "--N", "1", "--J", "2", "--K", "2", "--K-r", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["reinforced_training"] == 8.0
    assert main(["cost", "--J", "9", "--K", "66", "--K-r", "11", "--max-call-d", "10"]) == 0
    assert json.loads(capsys.readouterr().out)["max_call_ratio"] == pytest.approx(29 / 110)


def test_cli_table_and_flags(tmp_path, capsys):
    sweep = write(tmp_path, "sw.json", {"grid": {"method": ["standard-tvr", "reinforced-tvr"]}})
    cfg = write(tmp_path, "c.json", SMALL)
    out = str(tmp_path / "t.csv")
    assert main(["--threads", "1", "table", cfg, "--sweep", sweep, "--out", out,
                 "--seed", "4", "--paths", "500", "--test-paths", "500"]) == 0
    rows = list(csv.DictReader(open(out)))
    assert [r["seed"] for r in rows] == ["4", "4"] and rows[0]["N"] == "500"


def test_log_json_lines(tmp_path):
    cfg = write(tmp_path, "c.json", dict(SMALL, N_test=0))
    proc = subprocess.run([sys.executable, "-m", "rrmc", "--log-json", "run", cfg,
                           "--out", str(tmp_path / "r.json")],
                          capture_output=True, text=True, check=True)
    lines = [json.loads(l) for l in proc.stderr.splitlines() if l.startswith("{")]
    dates = [l["date"] for l in lines if "date" in l]
    assert sorted(dates) == list(range(8)) and all("condition" in l for l in lines if "date" in l)
