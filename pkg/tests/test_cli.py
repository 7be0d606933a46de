import json
import os

import pandas as pd
import pytest

import main
from scripts.cli import main as cli_main
from scripts.runlog import LOGFILE_NAME

SMALL = """
seed: 2
community:
  homes: {homes}
plans:
  - name: CDP
    mode: CDP
    terms:
      CD: {{max_delay_minutes: 60}}
      DW: {{max_delay_minutes: 60}}
      AC: {{max_duration_minutes: 60, max_deviation_F: 2, reference_temp_F: 80}}
      WH: {{max_duration_minutes: 60, max_deviation_F: 4, reference_temp_F: 96}}
{extra}
"""


def small(homes=8, extra=""):
    return SMALL.format(homes=homes, extra=extra)


def run(*args):
    return cli_main(list(args))


def test_run_writes_every_output(tmp_path, scenario_path):
    out = tmp_path / "table1"
    assert run("run", "--config", scenario_path("table1_plans.yaml"), "--out-dir", str(out)) == 0
    for name in ("summary.json", LOGFILE_NAME, "profiles_CDP.csv", "schedule_CDP.csv", "trace_CDP.jsonl",
                 "profiles_PDP.csv", "schedule_PDP.csv", "trace_PDP.jsonl"):
        assert (out / name).is_file(), name

    summary = json.loads((out / "summary.json").read_text())
    assert summary["homes"] == 2 and summary["slots_per_day"] == 288
    by_plan = {entry["plan"]: entry for entry in summary["plans"]}
    cdp = {(s["customer_id"], s["device"]): s["severity_F"] for s in by_plan["CDP"]["severities"]}
    pdp = {(s["customer_id"], s["device"]): s["severity_F"] for s in by_plan["PDP"]["severities"]}
    assert cdp == {(1, "AC"): 4.0, (1, "WH"): 6.0, (2, "AC"): 4.0, (2, "WH"): 0.0}
    assert pdp == {(1, "AC"): 6.0, (1, "WH"): 4.8, (2, "AC"): 2.4, (2, "WH"): 0.0}
    assert by_plan["CDP"]["eligible_counts"] == {"AC": 2, "WH": 1}

    profiles = pd.read_csv(out / "profiles_CDP.csv")
    assert list(profiles.columns) == ["slot", "minutes", "x", "x_hat", "x_tilde"]
    assert len(profiles) == 288
    assert profiles["minutes"].iloc[-1] == 1435
    assert (profiles["x_tilde"].max() <= profiles["x"].max() * (1 + 1e-5))

    trace = [json.loads(line) for line in (out / "trace_CDP.jsonl").read_text().splitlines()]
    assert len(trace) == 2 * 2 * 2
    assert (out / LOGFILE_NAME).read_text().startswith("Command: run\n")


def test_reruns_are_byte_identical(tmp_path, write_scenario):
    config = write_scenario(small())
    out = tmp_path / "out"
    assert run("run", "--config", config, "--out-dir", str(out)) == 0
    first = {name: (out / name).read_bytes() for name in sorted(os.listdir(out))}
    assert run("run", "--config", config, "--out-dir", str(out)) == 0
    second = {name: (out / name).read_bytes() for name in sorted(os.listdir(out))}
    assert first == second
    assert b"\r\n" not in first["summary.json"]


def test_seed_override(tmp_path, write_scenario):
    config = write_scenario(small())
    assert run("run", "--config", config, "--out-dir", str(tmp_path / "a"), "--seed", "5") == 0
    assert run("run", "--config", config, "--out-dir", str(tmp_path / "b")) == 0
    assert json.loads((tmp_path / "a" / "summary.json").read_text())["seed"] == 5
    assert json.loads((tmp_path / "b" / "summary.json").read_text())["seed"] == 2


def test_empty_community(tmp_path, write_scenario):
    out = tmp_path / "empty"
    assert run("run", "--config", write_scenario(small(homes=0)), "--out-dir", str(out)) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["plans"][0]["percent_peak_reduction"] == 0.0
    assert summary["plans"][0]["severities"] == []
    profiles = pd.read_csv(out / "profiles_CDP.csv")
    assert len(profiles) == 288
    assert (profiles[["x", "x_hat", "x_tilde"]] == 0).all().all()


def test_plan_without_eligible_thermostats_is_flagged(tmp_path, write_scenario):
    text = small().replace("reference_temp_F: 80", "reference_temp_F: 60").replace("reference_temp_F: 96",
                                                                                 "reference_temp_F: 130")
    out = tmp_path / "cold"
    assert run("run", "--config", write_scenario(text), "--out-dir", str(out)) == 0
    log = (out / LOGFILE_NAME).read_text()
    assert "Warning: CDP: no thermostat is eligible" in log
    assert json.loads((out / "summary.json").read_text())["plans"][0]["eligible_counts"] == {"AC": 0, "WH": 0}


def test_run_logs_no_warning_when_thermostats_take_part(tmp_path, write_scenario):
    out = tmp_path / "warm"
    assert run("run", "--config", write_scenario(small()), "--out-dir", str(out)) == 0
    assert "Warning:" not in (out / LOGFILE_NAME).read_text()


def test_invalid_config_exits_one_and_still_logs(tmp_path, write_scenario):
    out = tmp_path / "bad"
    config = write_scenario(small().replace("seed: 2", "seed: 2\ntemperature_unit: C"))
    assert run("run", "--config", config, "--out-dir", str(out)) == 1
    log = (out / LOGFILE_NAME).read_text()
    assert "temperature_unit" in log
    assert not (out / "summary.json").exists()


def test_validate_prints_ok(tmp_path, scenario_path, capsys):
    assert run("validate", "--config", scenario_path("community_cdp.yaml"), "--out-dir", str(tmp_path)) == 0
    assert "ok" in capsys.readouterr().out
    assert (tmp_path / LOGFILE_NAME).read_text().splitlines()[-1] == "ok"


def test_validate_lists_every_problem(tmp_path, write_scenario, capsys):
    text = small().replace("  homes: 8", "  homes: 8\n  appliances:\n    CD: {start_hours: [[17.0, 22.0]]}")
    text = text.replace("reference_temp_F: 96", "reference_temp_F: 96, beta: 0.5")
    assert run("validate", "--config", write_scenario(text), "--out-dir", str(tmp_path)) == 1
    out = capsys.readouterr().out
    assert "community.appliances.CD" in out
    assert "plans.CDP.terms.WH.beta" in out
    assert "ok" not in out.split()


def test_sweep_has_one_row_per_point(tmp_path, write_scenario):
    extra = "sweep:\n  axes:\n    num_states: [2, 5]\n    plan.AC.max_deviation_F: [1, 2, 3]\n"
    out = tmp_path / "sweep"
    assert run("sweep", "--config", write_scenario(small(extra=extra)), "--out-dir", str(out)) == 0
    frame = pd.read_csv(out / "sweep.csv")
    assert len(frame) == 6
    assert list(frame["num_states"]) == [2, 2, 2, 5, 5, 5]
    assert list(frame["plan.AC.max_deviation_F"]) == [1, 2, 3, 1, 2, 3]
    for column in ("peak_reduction_pct", "n_eligible_AC", "n_eligible_WH", "theta_ave_AC", "severity_ave_WH"):
        assert column in frame.columns
    assert frame["peak_reduction_pct"].between(0, 100).all()


def test_single_point_sweep_matches_run(tmp_path, write_scenario):
    extra = "sweep:\n  plan: CDP\n  axes:\n    num_states: [5]\n"
    config = write_scenario(small(extra=extra))
    assert run("run", "--config", config, "--out-dir", str(tmp_path / "run")) == 0
    assert run("sweep", "--config", config, "--out-dir", str(tmp_path / "sweep")) == 0
    summary = json.loads((tmp_path / "run" / "summary.json").read_text())["plans"][0]
    row = pd.read_csv(tmp_path / "sweep" / "sweep.csv").iloc[0]
    assert row["peak_reduction_pct"] == pytest.approx(summary["percent_peak_reduction"], rel=1e-5)
    assert row["n_eligible_AC"] == summary["eligible_counts"]["AC"]
    assert row["severity_ave_AC"] == pytest.approx(summary["avg_severity_F"]["AC"], rel=1e-5)
    assert row["theta_ave_WH"] == pytest.approx(summary["avg_realized_deviation_F"]["WH"], rel=1e-5, abs=1e-9)


def test_sweep_without_axes_fails(tmp_path, write_scenario):
    assert run("sweep", "--config", write_scenario(small()), "--out-dir", str(tmp_path)) == 1
    assert "sweep" in (tmp_path / LOGFILE_NAME).read_text()


def test_main_forwards_arguments(tmp_path, scenario_path):
    assert main.main(["validate", "--config", scenario_path("table1_plans.yaml"), "--out-dir", str(tmp_path)]) == 0


def test_main_menu_rejects_unknown_choice(monkeypatch, capsys):
    monkeypatch.setattr("builtins.input", lambda prompt="": "9")
    assert main.main([]) == 1
    assert "Invalid choice" in capsys.readouterr().out
