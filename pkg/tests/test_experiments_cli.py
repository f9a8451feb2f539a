import csv
import json

import pytest

import mmframe.cli as cli
from mmframe.experiments import SweepError, SweepSpec, parse_values, run_experiment
from mmframe.scenario import ScenarioError, dump_scenario, load_template


def _csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# scenario=") and " hash=" in lines[0] and " seed=" in lines[0]
    return list(csv.DictReader(lines[1:]))


# ---------------------------------------------------------------- sweep parsing

@pytest.mark.parametrize("text, want", [("1:4", (1, 2, 3, 4)), ("4:12:4", (4, 8, 12)),
                                        ("4,30,100", (4, 30, 100)), ("0.5,1", (0.5, 1))])
def test_parse_values(text, want):
    assert parse_values(text) == want


@pytest.mark.parametrize("text", ["5:1", "1:2:0", "a,b", "1:2:3:4"])
def test_parse_values_rejects(text):
    with pytest.raises(SweepError):
        parse_values(text)


def test_sweep_spec_parse():
    s = SweepSpec.parse("overhead", "n_ue=1:3")
    assert (s.parameter, s.values) == ("n_ue", (1, 2, 3))
    with pytest.raises(SweepError):
        SweepSpec.parse("overhead", "n_ue")
    with pytest.raises(SweepError):
        SweepSpec("plot")


def test_sweep_unknown_parameter_is_scenario_error(tmp_path):
    with pytest.raises(ScenarioError):
        run_experiment(load_template("table2"), SweepSpec("overhead", "no_such", (1,)), tmp_path)


def test_utilization_default_sweep():
    s = SweepSpec("utilization").resolved()
    assert s.parameter == "t_tti_max_symbols" and s.values[0] == 4 and s.values[-1] == 100


# ---------------------------------------------------------------- experiments

def test_overhead_n_ue_sweep_writes_fig4(tmp_path):
    files = run_experiment(load_template("table2"), SweepSpec("overhead", "n_ue", (4, 16)), tmp_path)
    names = {f.name for f in files}
    assert {"fig4.csv", "fig4.json"} <= names
    rows = _csv(tmp_path / "fig4.csv")
    assert {r["arch"] for r in rows} == {"analog", "hybrid", "digital"}
    # AUTO resolves to one SR layout per point
    assert len(rows) == 2 * 3
    assert {r["sr_mode"] for r in rows} <= {"tdma", "fdma"}
    doc = json.loads((tmp_path / "fig4.json").read_text())
    assert doc["scenario_hash"] == load_template("table2").hash


def test_table2_files(tmp_path):
    files = run_experiment(load_template("table2"), SweepSpec("table2"), tmp_path)
    assert {f.name for f in files} == {"table2.txt", "table2.csv", "table2.json"}
    txt = (tmp_path / "table2.txt").read_text()
    assert "0.1168" in txt and "0.0338" in txt and "0.0088" in txt


def test_utilization_sweep_columns(tmp_path):
    sc = load_template("tcp-fullbuffer")
    run_experiment(sc, SweepSpec("utilization", "t_tti_max_symbols", (4, 30)), tmp_path,
                   n_samples=2000)
    rows = _csv(tmp_path / "fig3a.csv")
    assert list(rows[0]) == ["mode", "traffic", "t_tti_max_symbols", "eta", "ci95"]
    assert {r["mode"] for r in rows} == {"fixed", "flexible"}
    fixed = [float(r["eta"]) for r in rows if r["mode"] == "fixed"]
    assert fixed[0] == pytest.approx(fixed[1])


def test_snr_cdf(tmp_path):
    run_experiment(load_template("table2"), SweepSpec("snr"), tmp_path, n_samples=2000)
    rows = _csv(tmp_path / "fig2.csv")
    for d in ("dl", "ul"):
        curve = [r for r in rows if r["direction"] == d and not r["marker"]]
        cdf = [float(r["cdf"]) for r in curve]
        snr = [float(r["snr_db"]) for r in curve]
        assert snr == sorted(snr)
        assert cdf == sorted(cdf) and cdf[-1] == pytest.approx(1.0)
    assert {r["marker"] for r in rows} >= {"p5", "median"}


def test_simulate_with_trace(tmp_path):
    files = run_experiment(load_template("small-packets"), SweepSpec("simulate"), tmp_path,
                           duration=0.005, trace=True)
    names = {f.name for f in files}
    assert {"trace.csv", "simulate.json", "simulate.csv"} <= names
    rows = _csv(tmp_path / "trace.csv")
    assert list(rows[0]) == ["t_symbol_index", "direction", "channel", "ue_id", "freq_share"]
    js = json.loads((tmp_path / "simulate.json").read_text())
    assert "overhead" in js and "utilization" in js


def test_rrc_fig5(tmp_path):
    run_experiment(load_template("rrc"), SweepSpec("rrc", "rrc_rate", (0, 500)), tmp_path,
                   duration=0.01)
    rows = _csv(tmp_path / "fig5.csv")
    assert len(rows) == 4
    assert {r["mode"] for r in rows} == {"fixed", "flexible"}


# ---------------------------------------------------------------- command line

def test_cli_validate_template(capsys):
    assert cli.main(["validate", "table2"]) == 0
    out = capsys.readouterr().out
    assert "table2" in out and load_template("table2").hash in out


def test_cli_validate_file(tmp_path, capsys):
    p = tmp_path / "s.scenario"
    p.write_text(dump_scenario(load_template("latency")))
    assert cli.main(["validate", str(p), "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["n_ue"] == load_template("latency").n_ue


def test_cli_overhead_prints_table(tmp_path, capsys):
    assert cli.main(["overhead", "table2", "--out", str(tmp_path)]) == 0
    assert "0.1168" in capsys.readouterr().out


def test_cli_invalid_scenario_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.scenario"
    p.write_text("frame:\n  t_tti_max_us: 126\n")
    assert cli.main(["validate", str(p)]) == 2
    assert "invalid scenario" in capsys.readouterr().err


def test_cli_bad_sweep_exit_2(tmp_path):
    assert cli.main(["overhead", "table2", "--sweep", "n_ue", "--out", str(tmp_path)]) == 2
    assert cli.main(["overhead", "table2", "--sweep", "nope=1:2", "--out", str(tmp_path)]) == 2


def test_cli_unknown_verb_exit_2():
    assert cli.main(["plot", "table2"]) == 2


def test_cli_runtime_error_exit_1(tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise RuntimeError("model failed")
    monkeypatch.setattr(cli, "run_experiment", boom)
    assert cli.main(["overhead", "table2", "--out", str(tmp_path)]) == 1
    assert "model failed" in capsys.readouterr().err


def test_cli_seed_override_recorded(tmp_path):
    assert cli.main(["snr", "table2", "--samples", "500", "--seed", "42", "--out", str(tmp_path)]) == 0
    assert "seed=42" in (tmp_path / "fig2.csv").read_text().splitlines()[0]


def test_cli_list_templates(capsys):
    assert cli.main(["--list-templates"]) == 0
    out = capsys.readouterr().out.split()
    assert {"table2", "tcp-fullbuffer", "large-packets", "small-packets", "latency", "rrc"} <= set(out)
