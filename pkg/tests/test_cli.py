import json

import pytest

from weakrel.cli import main


def test_sweep_writes_report_and_exits_zero(tmp_path, capsys):
    out = tmp_path / "sweep.json"
    code = main(["sweep", "--dims", "2,3", "--trials", "2", "--seed", "11",
                 "--out", str(out)])
    assert code == 0
    assert out.exists()
    data = json.loads(out.read_text())
    assert data["aggregates"]["failure_count"] == 0
    assert "sweep" in capsys.readouterr().out


def test_sweep_dims_range_syntax(tmp_path):
    out = tmp_path / "sweep.json"
    code = main(["sweep", "--dims", "2-4", "--trials", "1", "--seed", "1",
                 "--relations", "robertson", "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["config"]["dims"] == [2, 3, 4]


def test_fixtures_exit_zero(capsys):
    assert main(["fixtures"]) == 0
    assert "fixtures" in capsys.readouterr().out


def test_unknown_relation_exits_two(capsys):
    code = main(["sweep", "--relations", "nonsense", "--trials", "1"])
    assert code == 2
    assert "relations" in capsys.readouterr().err


def test_config_file_preloads_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dims": [2], "trials": 3, "seed": 21,
                               "relations": ["robertson"],
                               "out": str(tmp_path / "from_config.json")}))
    code = main(["sweep", "--config", str(cfg)])
    assert code == 0
    data = json.loads((tmp_path / "from_config.json").read_text())
    assert data["config"]["trials"] == 3
    assert data["config"]["seed"] == 21


def test_cli_flags_override_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dims": [2], "trials": 3, "seed": 21,
                               "relations": ["robertson"]}))
    out = tmp_path / "o.json"
    code = main(["sweep", "--config", str(cfg), "--trials", "5", "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["config"]["trials"] == 5


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"not_a_flag": 1}))
    assert main(["sweep", "--config", str(cfg)]) == 2


def test_csv_format(tmp_path):
    out = tmp_path / "r.csv"
    code = main(["sweep", "--dims", "2", "--trials", "1", "--seed", "3",
                 "--format", "csv", "--out", str(out)])
    assert code == 0
    assert out.read_text().startswith("relation_id")


def test_cv_study_subcommand(tmp_path):
    out = tmp_path / "cv.json"
    code = main(["cv-study", "--grid-points", "128", "--widths", "2,1e6",
                 "--state", "gaussian:0.8", "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["kind"] == "cv-study"


def test_pointer_subcommand(tmp_path):
    out = tmp_path / "p.json"
    code = main(["pointer", "--g-ladder", "1e-2,1e-3", "--meter-points", "64",
                 "--fixture", "anomalous", "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["kind"] == "pointer"
    names = [r["extras"]["name"] for r in data["reports"]]
    assert "pointer_first_order_slope" in names


def test_sweep_output_deterministic_modulo_timestamp(tmp_path):
    out = tmp_path / "d.json"
    args = ["sweep", "--dims", "2", "--trials", "2", "--seed", "5", "--out", str(out)]
    assert main(args) == 0
    first = json.loads(out.read_text())
    assert main(args) == 0
    second = json.loads(out.read_text())
    for payload in (first, second):
        payload.pop("timestamp")
        payload.pop("wall_clock_seconds")
    assert first == second


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
