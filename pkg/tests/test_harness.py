import json

import numpy as np
import pytest

from weakrel import (
    ConfigError,
    ReportSet,
    SweepConfig,
    eigenstate_dominance_study,
    emit_report,
    load_report_set,
    run_cv_study,
    run_fixtures,
    run_pointer_study,
    run_sweep,
)
from weakrel.harness import FIXTURES, aggregate_reports, dumps_report

SMALL = SweepConfig(dims=(2, 3), trials=4, seed=17)


def normalized_payload(path):
    with open(path) as fh:
        data = json.load(fh)
    data.pop("timestamp", None)
    data.pop("wall_clock_seconds", None)
    return data


# --------------------------------------------------------------------------
# configuration


@pytest.mark.parametrize("kwargs, field", [
    ({"relations": ("nope",)}, "relations"),
    ({"relations": ()}, "relations"),
    ({"dims": ()}, "dims"),
    ({"dims": (1,)}, "dims"),
    ({"trials": 0}, "trials"),
    ({"seed": -3}, "seed"),
    ({"tolerance": -1e-9}, "tolerance"),
    ({"psibar_mode": "sometimes"}, "psibar_mode"),
    ({"hbar": 0.0}, "hbar"),
    ({"cv_points": 100}, "cv_points"),
    ({"cv_x_half": -1.0}, "cv_x_half"),
    ({"pointer_g_ladder": (0.0,)}, "pointer_g_ladder"),
    ({"fmt": "xml"}, "fmt"),
])
def test_config_validation_names_field(kwargs, field):
    with pytest.raises(ConfigError, match=field):
        SweepConfig(**kwargs).validate()


def test_config_dim1_allowed_without_two_observable_relations():
    SweepConfig(relations=("complementarity",), dims=(1, 2), trials=1).validate()


def test_config_round_trip():
    cfg = SweepConfig(dims=(2, 5), trials=9, seed=4, tolerance=1e-8, fmt="csv")
    assert SweepConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError):
        SweepConfig.from_dict({"bogus_field": 1})


# --------------------------------------------------------------------------
# sweeps


def test_sweep_is_deterministic():
    a = run_sweep(SMALL)
    b = run_sweep(SMALL)
    assert a.reports == b.reports
    assert a.aggregates == b.aggregates


def test_sweep_default_relations_pass():
    rs = run_sweep(SMALL)
    assert rs.failure_count == 0
    assert rs.aggregates["min_slack"] >= -1e-9
    assert rs.aggregates["max_parallelogram_residual"] <= 1e-10
    ids = {r.relation_id for r in rs.reports}
    assert ids == {"ur1", "ur2", "complementarity"}


def test_sweep_all_relations():
    cfg = SweepConfig(relations=("ur1", "ur2", "mp1", "mp2", "robertson",
                                 "complementarity", "conjugate_pair"),
                      dims=(2,), trials=2, seed=5)
    rs = run_sweep(cfg)
    assert rs.failure_count == 0
    ids = {r.relation_id for r in rs.reports}
    assert "conjugate_pair" in ids and "robertson" in ids


def test_sweep_report_counts_by_mode():
    base = dict(relations=("ur1", "complementarity"), dims=(2, 3), trials=5, seed=6)
    single = run_sweep(SweepConfig(psibar_mode="random", **base))
    # one row per (relation, dim, trial) in single-mode configs
    assert len(single.reports) == 2 * 2 * 5
    both = run_sweep(SweepConfig(psibar_mode="both", **base))
    # ur relations double up, complementarity does not
    assert len(both.reports) == (2 + 1) * 2 * 5


def test_sweep_trial_reconstructible_metadata():
    rs = run_sweep(SMALL)
    for rep in rs.reports:
        assert rep.extras["dim"] in SMALL.dims
        assert 0 <= rep.extras["trial"] < SMALL.trials
        assert rep.fingerprints


def test_zero_tolerance_exposes_roundoff():
    cfg = SweepConfig(relations=("ur1", "ur2"), dims=(2, 3, 4), trials=25,
                      seed=8, tolerance=0.0, psibar_mode="optimal")
    rs = run_sweep(cfg)
    # saturated reports straddle zero slack at machine precision
    assert rs.failure_count > 0
    assert rs.aggregates["min_slack"] > -1e-10


def test_aggregates_recomputable_from_rows():
    rs = run_sweep(SMALL)
    again = aggregate_reports(list(rs.reports), SMALL.tolerance,
                              rs.aggregates["rejections"])
    assert again == rs.aggregates


# --------------------------------------------------------------------------
# fixtures and studies


def test_fixture_names_unique():
    names = [name for name, _ in FIXTURES]
    assert len(names) == len(set(names))


def test_run_fixtures_all_pass():
    rs = run_fixtures()
    assert rs.failure_count == 0
    assert all(r.slack >= 0.0 for r in rs.reports)
    assert len(rs.reports) == len(FIXTURES)


def test_eigenstate_dominance_study():
    study = eigenstate_dominance_study(trials=200, seed=13)
    assert study["hits"] >= 1
    assert study["fraction"] >= 0.05
    assert study["max_robertson_rhs"] <= 1e-12
    assert study["min_ur1_rhs_over_hits"] > 1e-6


def test_run_cv_study():
    rs = run_cv_study(grid_points=128, widths=(2.0, 1e6))
    assert rs.failure_count == 0
    products = [r for r in rs.reports if r.relation_id == "cv_product"]
    assert len(products) == 4
    asserted = [r for r in rs.reports if r.relation_id == "fixture"]
    assert len(asserted) == 1  # only the full/full pair is pinned to 1


def test_run_pointer_study():
    rs = run_pointer_study(g_ladder=(1e-2, 1e-3), meter_points=64)
    assert rs.failure_count == 0
    names = [r.extras["name"] for r in rs.reports]
    assert "pointer_first_order_slope" in names
    with pytest.raises(ConfigError):
        run_pointer_study(fixture="unknown")


# --------------------------------------------------------------------------
# serialization


def test_json_round_trip_equality(tmp_path):
    rs = run_sweep(SMALL)
    path = emit_report(rs, "json", str(tmp_path / "r.json"))
    assert load_report_set(path) == rs


def test_json_emission_is_byte_stable(tmp_path):
    p1 = emit_report(run_sweep(SMALL), "json", str(tmp_path / "a.json"))
    p2 = emit_report(run_sweep(SMALL), "json", str(tmp_path / "b.json"))
    assert normalized_payload(p1) == normalized_payload(p2)
    assert dumps_report(normalized_payload(p1)) == dumps_report(normalized_payload(p2))


def test_json_floats_have_17_significant_digits(tmp_path):
    cfg = SweepConfig(dims=(2,), trials=1, seed=1, tolerance=1.0 / 3.0)
    path = emit_report(run_sweep(cfg), "json", str(tmp_path / "t.json"))
    text = open(path).read()
    assert "0.33333333333333331" in text


def test_csv_row_count_single_mode(tmp_path):
    cfg = SweepConfig(relations=("ur1", "ur2", "complementarity"), dims=(2, 4),
                      trials=3, seed=2, psibar_mode="random")
    rs = run_sweep(cfg)
    path = emit_report(rs, "csv", str(tmp_path / "r.csv"))
    lines = [ln for ln in open(path) if ln.strip() and not ln.startswith("#")]
    # header + trials x relations x dims
    assert len(lines) == 1 + 3 * 3 * 2
    header = lines[0].strip().split(",")
    assert header[0] == "relation_id" and "slack" in header


def test_empty_report_set_emits_valid_files(tmp_path):
    empty = ReportSet(kind="sweep", config=SMALL, reports=(),
                      aggregates=aggregate_reports([], 1e-9), version="0.1.0",
                      wall_clock_seconds=0.0)
    jpath = emit_report(empty, "json", str(tmp_path / "e.json"))
    assert load_report_set(jpath) == empty
    cpath = emit_report(empty, "csv", str(tmp_path / "e.csv"))
    content = open(cpath).read()
    assert content.startswith("relation_id")
    assert "# aggregate failure_count = 0" in content


def test_emit_report_io_error_names_path():
    rs = run_fixtures()
    with pytest.raises(OSError, match="no/such/dir"):
        emit_report(rs, "json", "/no/such/dir/report.json")


def test_emit_report_rejects_bad_format(tmp_path):
    rs = run_fixtures()
    with pytest.raises(ValueError):
        emit_report(rs, "yaml", str(tmp_path / "r.yaml"))


def test_dumps_report_rejects_non_finite():
    with pytest.raises(ValueError):
        dumps_report({"x": float("nan")})
