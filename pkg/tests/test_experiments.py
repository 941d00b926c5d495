import json

import numpy as np
import pytest

from dopocim.experiments import (
    ConfigError,
    ExperimentSpec,
    FIGURES,
    ResultTable,
    parse_config,
    parse_j_file,
    read_csv,
    run_experiment,
    write_csv,
)
from dopocim import cli


def test_all_figures_have_presets():
    assert set(FIGURES) == {f"fig{k}" for k in range(4, 15)}


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    table = ResultTable(
        {"x": rng.standard_normal(17), "y": np.exp(rng.standard_normal(17) * 40)},
        {"figure": "test", "nested": {"a": 1, "b": [1.5, "s"]}, "seed": 7},
    )
    path = write_csv(table, tmp_path / "t.csv")
    back = read_csv(path)
    assert back == table


def test_result_table_validation():
    with pytest.raises(ValueError):
        ResultTable({"a": np.zeros(3), "b": np.zeros(4)}, {})


def test_experiment_spec_validation(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentSpec("fig99", tmp_path)
    with pytest.raises(ConfigError):
        ExperimentSpec("fig4", tmp_path, {"p_grid": (1.0,)})  # not a fig4 knob


def test_tiny_fig4_run_and_worker_independence(tmp_path):
    spec = lambda d: ExperimentSpec("fig4", d, {"trajectories": 60, "dt": 2e-3, "xi_values": (0.6,)})
    paths1 = run_experiment(spec(tmp_path / "a"), workers=1)
    paths2 = run_experiment(spec(tmp_path / "b"), workers=2)
    csvs1 = sorted(p for p in paths1 if p.suffix == ".csv")
    csvs2 = sorted(p for p in paths2 if p.suffix == ".csv")
    assert [p.name for p in csvs1] == [
        "fig4_positive_p_xi0.6.csv",
        "fig4_wigner_xi0.6.csv",
    ]
    for p1, p2 in zip(csvs1, csvs2):
        assert p1.read_bytes() == p2.read_bytes()  # bytes identical across worker counts
    table = read_csv(csvs1[1])
    assert {"tau", "epr_sum", "epr_sum_se", "photon"} <= set(table.columns)
    meta = json.loads((tmp_path / "a" / "fig4.meta.json").read_text())
    assert meta["figure"] == "fig4"


def test_parse_config_defaults_and_overrides():
    cfg = parse_config({})
    assert cfg.model.kind == "wigner_two"
    assert cfg.n_trajectories == 1000
    cfg = parse_config({"n_trajectories": 100})
    assert cfg.n_trajectories == 100
    assert cfg.master_seed == 0


def test_parse_config_rejections():
    with pytest.raises(ConfigError, match="unknown keys"):
        parse_config({"trajectories": 5})
    with pytest.raises(ConfigError, match="model"):
        parse_config({"model": {"kind": "wigner_two", "xi": 1.5}})
    with pytest.raises(ConfigError, match="pump"):
        parse_config({"model": {"kind": "wigner_two", "pump": {"kind": "exp"}}})
    with pytest.raises(ConfigError):
        parse_config({"observables": ["nope"]})


def test_parse_discrete_config():
    cfg = parse_config(
        {
            "model": {"kind": "discrete", "n_pulses": 8, "pump_e": 0.05, "rounds": 100, "sample_every": 50},
            "n_trajectories": 10,
            "master_seed": 3,
            "observables": ["photon"],
        }
    )
    assert cfg.model.kind == "discrete"
    assert cfg.model.sample_rounds == (0, 50, 100)


def test_parse_j_file(tmp_path):
    path = tmp_path / "j.txt"
    path.write_text("0 1 1.0\n1 2 -0.5\n# comment\n\n2 0 2.0\n")
    j = parse_j_file(path, 3)
    assert j[0, 1] == j[1, 0] == 1.0
    assert j[1, 2] == -0.5
    assert j[0, 2] == 2.0
    bad = tmp_path / "bad.txt"
    bad.write_text("0 0 1.0\n")
    with pytest.raises(ConfigError):
        parse_j_file(bad, 3)


def test_cli_oracle_and_errors(tmp_path, capsys):
    jfile = tmp_path / "ring.jmat"
    jfile.write_text("0 1 1\n1 2 1\n2 3 1\n3 0 1\n")
    assert cli.main(["oracle", "4", str(jfile)]) == 0
    out = capsys.readouterr().out
    assert "+-+-" in out and "-+-+" in out
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"model": {"kind": "wigner_two", "xi": 2.0}}))
    assert cli.main(["ensemble", str(cfg), "--out", str(tmp_path)]) == 2


def test_cli_ensemble_runs(tmp_path):
    cfg = tmp_path / "ens.json"
    cfg.write_text(
        json.dumps(
            {
                "model": {
                    "kind": "wigner_two",
                    "integrator": {"dt": 1e-3, "total_time": 2.0, "sample_every": 1.0},
                },
                "n_trajectories": 50,
                "master_seed": 2,
                "observables": ["epr_pair"],
            }
        )
    )
    assert cli.main(["ensemble", str(cfg), "--out", str(tmp_path / "out"), "--workers", "1"]) == 0
    table = read_csv(tmp_path / "out" / "ensemble.csv")
    assert "epr_sum" in table.columns
