import csv
import io
import math

import pytest
from pytest import approx

from telefid.bayes import TruncationPolicy
from telefid.detectors import DetectorParams, Readout
from telefid.errors import ConfigError
from telefid.fidelity import average_fidelity
from telefid.source import PumpParameter
from telefid.sweep import (
    CSV_COLUMNS,
    PRESETS,
    SweepConfig,
    compare_experiment,
    evaluate_point,
    gnuplot_script,
    parse_config,
    parse_grid,
    preset,
    rows_to_csv,
    run_sweeps,
)

BASIC = """
# simple chi sweep
swept = chi
grid = 0.05, 0.1, 0.2
eta = 0.1
zeta_dc = 1e-5
series = demo
"""


def test_parse_grid_forms():
    assert parse_grid("0.1, 0.2 ,0.3") == (0.1, 0.2, 0.3)
    assert parse_grid("linear 0 1 5") == (0.0, 0.25, 0.5, 0.75, 1.0)
    g = parse_grid("log 0.01 1 3")
    assert g == approx((0.01, 0.1, 1.0))
    with pytest.raises(ValueError):
        parse_grid("log 0 1 3")
    with pytest.raises(ValueError):
        parse_grid("linear 0 1")


def test_parse_config_basic():
    cfg = parse_config(BASIC)
    assert cfg.swept_parameter == "chi"
    assert cfg.grid == (0.05, 0.1, 0.2)
    assert cfg.eta == 0.1 and cfg.zeta_dc == 1e-5
    assert cfg.series == "demo"
    assert cfg.accepted == (Readout.from_string("1001"), Readout.from_string("0110"))


def test_parse_config_truncation_and_inputs():
    cfg = parse_config(BASIC + "max_photons = 30\ninputs = H, plus\naccepted = 1001\n")
    assert cfg.trunc == TruncationPolicy(30)
    assert cfg.inputs == ("H", "plus")
    assert cfg.accepted == (Readout.from_string("1001"),)


@pytest.mark.parametrize(
    "text, line, field",
    [
        (BASIC + "colour = red\n", 8, "colour"),
        (BASIC + "eta = 0.2\n", 8, "eta"),
        (BASIC + "zeta_dc = abc\n", 8, "zeta_dc"),
        (BASIC + "just words\n", 8, None),
        (BASIC.replace("grid = 0.05, 0.1, 0.2", "grid = 0.2, 0.1"), 4, "grid"),
        (BASIC.replace("eta = 0.1", "eta = 1.5"), 5, "eta"),
    ],
)
def test_config_errors_name_line_and_field(text, line, field):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    if field is not None:
        assert info.value.field == field
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_chi_zero_rejected_before_work():
    with pytest.raises(ConfigError) as info:
        parse_config(BASIC.replace("grid = 0.05", "grid = 0.0"))
    assert info.value.field == "chi"
    assert info.value.line == 4
    with pytest.raises(ConfigError):
        SweepConfig("eta", (0.1,), chi=0.0)


def test_missing_keys():
    with pytest.raises(ConfigError) as info:
        parse_config("swept = chi\neta = 0.1\n")
    assert info.value.field == "grid"


def test_channel_config_point():
    cfg = parse_config(
        "swept = distance\ngrid = 0, 100\nchi = 0.316\nbase_efficiency = 0.236\n"
        "dark_count_rate = 200\ncoincidence_window = 5e-9\n"
    )
    pump, dets = cfg.point(100.0)
    assert pump.chi == 0.316
    assert dets.eta == approx(7.463e-6, rel=1e-4)
    assert dets.zeta_dc == approx(1e-6)


def test_csv_matches_library_calls():
    cfg = parse_config(BASIC)
    rows = run_sweeps([cfg])
    reader = list(csv.DictReader(io.StringIO(rows_to_csv(rows))))
    assert tuple(reader[0]) == CSV_COLUMNS
    for rec, chi in zip(reader, cfg.grid):
        report = average_fidelity(PumpParameter(chi), DetectorParams(0.1, 1e-5))
        assert float(rec["value"]) == chi
        assert float(rec["f_avg"]) == approx(report.average_fidelity, rel=1e-11)
        assert float(rec["f_H"]) == approx(report.per_input["H"], rel=1e-11)
        assert rec["status"] == "ok" and rec["series"] == "demo"
        assert 0 <= float(rec["trunc_residual"]) < 1e-12


def test_zero_evidence_sentinel():
    cfg = SweepConfig("zeta_dc", (0.0, 1e-3), chi=0.2, eta=0.0)
    rows = run_sweeps([cfg])
    assert rows[0].status == "zero_evidence"
    assert math.isnan(rows[0].f_avg)
    assert rows[1].status == "ok"
    text = rows_to_csv(rows)
    assert ",nan," in text.splitlines()[1]


def test_not_converged_sentinel():
    cfg = SweepConfig("chi", (0.6,), eta=0.3, zeta_dc=0.0, accepted=(Readout.from_string("1111"),),
                      trunc=TruncationPolicy(6))
    row = evaluate_point(cfg, 0.6)
    assert row.status == "not_converged"
    assert row.trunc_residual > 1e-12


def test_parallel_matches_serial():
    configs = preset("fig3")[:2]
    configs = [SweepConfig("chi", c.grid[::8], eta=c.eta, zeta_dc=c.zeta_dc, series=c.series)
               for c in configs]
    assert rows_to_csv(run_sweeps(configs, jobs=2)) == rows_to_csv(run_sweeps(configs, jobs=1))


def test_gnuplot_script_mentions_each_series():
    rows = run_sweeps([SweepConfig("chi", (0.1, 0.2), eta=0.1, zeta_dc=1e-5, series="a"),
                       SweepConfig("chi", (0.1,), eta=0.2, zeta_dc=1e-5, series="b")])
    script = gnuplot_script("out.csv", rows)
    assert "'a'" in script and "'b'" in script
    assert "set logscale x" in script


def test_presets_build():
    for name in PRESETS:
        configs = preset(name)
        assert configs
    with pytest.raises(KeyError) as info:
        preset("fig9")
    assert "fig4" in str(info.value)
    fig4 = preset("fig4")[0]
    assert 0.316 in fig4.grid
    assert fig4.eta == 7.463e-6 and fig4.zeta_dc == 1e-6


def test_compare_experiment_reports_model_value():
    result = compare_experiment()
    direct = average_fidelity(PumpParameter(0.316), preset("experiment")[0].point(100.0)[1])
    assert result.model == approx(direct.average_fidelity, rel=1e-12)
    assert result.deviation == approx(result.model - 0.8135)
    assert "model average fidelity" in result.summary()


def test_compare_experiment_distance_override():
    near = compare_experiment(distance=0.0)
    far = compare_experiment()
    assert near.distance == 0.0
    assert near.model > far.model
