import csv
import json
import math
import subprocess
import sys

import pytest

from squeezeconc.cli import ConfigError, RunConfig, build_parser, config_from_args, main
from squeezeconc.gauss_core import GaussianState
from squeezeconc.metrics import sigma_pm


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def load(capsys, argv):
    code, out, err = run(argv, capsys)
    assert code == 0, err
    return json.loads(out)


def strip_metadata(text):
    data = json.loads(text)
    data.pop("metadata", None)
    return json.dumps(data, sort_keys=True)


def test_prepare_epr(capsys):
    state = GaussianState.from_dict(load(capsys, ["prepare", "--epr", "--r1", "0.5", "--r2", "0.5", "--x0", "1.0"]))
    assert state.n_modes == 2
    assert sigma_pm(state)[0] == pytest.approx(math.e, rel=1e-14)
    assert state.mean[0] == 1.0


def test_prepare_single_vacuum(capsys):
    d = load(capsys, ["prepare", "--single", "--r", "0", "--x0", "2.5"])
    assert d["mean"] == [2.5, 0.0]
    assert d["cov"] == [[0.5, 0.0], [0.0, 0.5]]
    assert d["schema_version"] == 1


def test_prepare_round_trip(tmp_path):
    path = tmp_path / "s.json"
    assert main(["prepare", "--epr", "--r1", "0.7", "--r2", "0.2", "--x0", "-1.3", "-o", str(path)]) == 0
    first = path.read_text()
    GaussianState.from_json(path).to_json(path)
    assert path.read_text() == first


def test_concentrate_single_ratio(capsys):
    d = load(capsys, ["concentrate", "--single", "--r", "0.5", "--x0", "1.7", "--seed", "3"])
    assert d["var_ratio"] == pytest.approx(0.5, abs=1e-12)
    assert d["passed"] and d["checks"]["mean_preserved"]
    assert d["state"]["mean"][0] == pytest.approx(1.7, abs=1e-12)


def test_concentrate_binary_tree(capsys):
    d = load(capsys, ["concentrate", "--single", "--copies", "8", "--pairing", "binary_tree", "--x0", "0.4"])
    assert d["var_ratio"] == pytest.approx(0.125, abs=1e-12)
    assert d["report"]["copies_used"] == 8


def test_concentrate_epr_and_momentum(capsys):
    d = load(capsys, ["concentrate", "--epr", "--r1", "0.5", "--r2", "0.5", "--x0", "1", "--forced", "0.3", "-1"])
    assert d["var_ratio"] == pytest.approx([0.5, 0.5], abs=1e-12)
    d = load(capsys, ["concentrate", "--single", "--r", "0.2", "--quadrature", "p", "--copies", "3"])
    assert d["var_ratio"] == pytest.approx(1 / 3, abs=1e-12)


def test_concentrate_reproducible(tmp_path):
    argv = ["concentrate", "--single", "--r", "0.3", "--x0", "random:-5,5", "--seed", "7"]
    path = tmp_path / "report.json"
    assert main(argv + ["-o", str(path)]) == 0
    first = path.read_text()
    assert main(argv + ["-o", str(path)]) == 0
    assert strip_metadata(path.read_text()) == strip_metadata(first)
    assert "metadata" in json.loads(first)
    x0 = json.loads(first)["x0"]
    assert -5 <= x0 <= 5
    assert main(argv[:-1] + ["8", "-o", str(path)]) == 0
    assert json.loads(path.read_text())["x0"] != x0


def test_other_gain_shifts_mean(capsys):
    # the covariance does not depend on the correction gain; the mean does
    d = load(capsys, ["concentrate", "--single", "--gain", "0.6", "--x0", "2", "--forced", "1.0"])
    assert d["var_ratio"] == pytest.approx(0.5, abs=1e-12)
    assert d["report"]["mean_preservation_error"] > 0.05
    assert "mean_preserved" not in d["checks"]


def test_sweep_csv(tmp_path):
    path = tmp_path / "sweep.csv"
    assert main(["sweep", "--start", "0", "--stop", "1", "--step", "0.1", "-o", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "# schema_version: 1"
    rows = list(csv.DictReader(lines[1:]))
    assert len(rows) == 11
    for row in rows:
        assert float(row["purity_P"]) == pytest.approx(float(row["purity_P_in"]), abs=1e-10)
        assert float(row["logneg"]) == pytest.approx(float(row["logneg_in"]), abs=1e-9)
    assert float(rows[5]["logneg"]) == pytest.approx(1.4426950408889634, abs=1e-9)


def test_sweep_single_json(capsys):
    d = load(capsys, ["sweep", "--single", "--format", "json", "--stop", "0.5", "--step", "0.25"])
    assert [r["r"] for r in d["rows"]] == [0.0, 0.25, 0.5]


def test_oracle_check_default(capsys):
    code, out, _ = run(["oracle-check"], capsys)
    d = json.loads(out)
    assert code == 0 and d["passed"]
    assert d["max_discrepancy"] < 1e-3
    var = d["single_mode"]["var_x"]
    assert set(var) == {"engine", "oracle", "abs_diff"}


def test_oracle_check_coarse_grid_fails(capsys):
    code, out, err = run(["oracle-check", "--points", "64"], capsys)
    assert code == 2
    d = json.loads(out)
    assert not d["passed"]
    assert any("too coarse" in line for line in d["diagnostics"])
    assert "too coarse" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["concentrate", "--x0", "random:5,1"],
        ["concentrate", "--x0", "abc"],
        ["concentrate", "--copies", "1"],
        ["concentrate", "--copies", "3", "--pairing", "binary_tree"],
        ["concentrate", "--epr", "--copies", "4"],
        ["sweep", "--step", "0"],
        ["oracle-check", "--n-sigma", "3"],
        ["prepare", "--format", "csv"],
        ["concentrate", "--bogus"],
    ],
)
def test_validation_exit_code(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1
    assert err


def test_unwritable_output(capsys, tmp_path):
    code, _, _ = run(["prepare", "-o", str(tmp_path / "missing" / "x.json")], capsys)
    assert code == 1


def test_montecarlo_small(capsys):
    d = load(capsys, ["montecarlo", "--single", "--r", "0.5", "--trials", "2000", "--x0", "random:-5,5", "--seed", "1"])
    assert d["checks"]["deterministic_output_cov"]
    assert d["stats"]["analytic_var"] == pytest.approx(0.09196986029286058, abs=1e-15)


def test_run_config_round_trip(tmp_path):
    cfg = RunConfig(subcommand="sweep", kind="epr", r1=0.3, forced=[1.0, 2.0], x0="random:-1,1")
    assert RunConfig.from_json(cfg.to_json()) == cfg
    path = tmp_path / "c.json"
    path.write_text(cfg.to_json())
    assert RunConfig.from_json(path.read_text()).to_json() == cfg.to_json()
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"nope": 1})


def test_precedence(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"r": 0.7, "x0": "2.0", "seed": 11}))
    parse = build_parser().parse_args
    env = {"SQUEEZECONC_SEED": "5"}
    cfg = config_from_args(parse(["concentrate"]), env)
    assert cfg.seed == 5 and cfg.r == 0.0
    cfg = config_from_args(parse(["concentrate", "--config", str(path)]), env)
    assert (cfg.seed, cfg.r, cfg.x0) == (11, 0.7, "2.0")
    cfg = config_from_args(parse(["concentrate", "--config", str(path), "--r", "0.1", "--seed", "2"]), env)
    assert (cfg.seed, cfg.r, cfg.x0) == (2, 0.1, "2.0")
    with pytest.raises(ConfigError):
        config_from_args(parse(["concentrate"]), {"SQUEEZECONC_SEED": "x"})


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "squeezeconc", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "0.1.0"
