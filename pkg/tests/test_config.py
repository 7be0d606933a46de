import pytest

from scripts.community import generate_community
from scripts.config import (
    CommunityConfig,
    apply_point,
    build_community,
    build_plans,
    load_scenario,
    parse_scenario,
    scenario_violations,
    sweep_points,
    validate_scenario,
)
from scripts.errors import ConfigurationError
from scripts.plan import AC, CD, WH, LoadKind, PlanMode

BUNDLED = [
    "table1_plans.yaml", "community_cdp.yaml", "table3_sweep.yaml", "figure3_sweep.yaml",
    "pdp_beta_sweep.yaml", "delay_sweep.yaml", "pdp_reference_sweep.yaml",
]

SMALL = """
seed: 1
community:
  homes: 4
plans:
  - name: CDP
    mode: CDP
    terms:
      CD: {max_delay_minutes: 60}
      DW: {max_delay_minutes: 60}
      AC: {max_duration_minutes: 60, max_deviation_F: 2, reference_temp_F: 80}
      WH: {max_duration_minutes: 60, max_deviation_F: 4, reference_temp_F: 96}
"""


def small(**plan_terms):
    data = {
        "seed": 1,
        "community": {"homes": 4},
        "plans": [{"name": "CDP", "mode": "CDP", "terms": {
            "CD": {"max_delay_minutes": 60},
            "DW": {"max_delay_minutes": 60},
            "AC": {"max_duration_minutes": 60, "max_deviation_F": 2, "reference_temp_F": 80},
            "WH": {"max_duration_minutes": 60, "max_deviation_F": 4, "reference_temp_F": 96},
        }}],
    }
    data["plans"][0]["terms"].update(plan_terms)
    return data


def paths_of(data):
    with pytest.raises(ConfigurationError) as info:
        parse_scenario(data)
    return [path for path, _ in info.value.violations]


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_scenarios_are_valid(scenario_path, name):
    assert validate_scenario(scenario_path(name)) == []


def test_small_scenario_builds(write_scenario):
    config = load_scenario(write_scenario(SMALL))
    assert config.temperature_unit == "F"
    assert config.phase_order == ["shiftable", "thermostat"]
    assert config.order.policy == "generation"
    plans = build_plans(config)
    assert [plan.name for plan in plans] == ["CDP"]
    assert plans[0].mode is PlanMode.CDP
    assert plans[0].term(AC).reference_temp_F == 80.0
    community = build_community(config)
    assert len(community.customers) == 4
    assert community.grid.T == 288


def test_celsius_is_rejected():
    data = small()
    data["temperature_unit"] = "C"
    assert paths_of(data) == ["temperature_unit"]


def test_unknown_fields_are_rejected():
    data = small()
    data["community"]["homez"] = 4
    assert "community.homez" in paths_of(data)


def test_negative_home_count():
    data = small()
    data["community"]["homes"] = -1
    assert "community.homes" in paths_of(data)


def test_eer_below_floor():
    data = small()
    data["community"]["appliances"] = {"AC": {"eer": 7.0}}
    assert "community.appliances.AC.eer" in paths_of(data)


def test_pdp_beta_must_be_positive():
    data = small()
    data["plans"][0]["mode"] = "PDP"
    data["plans"][0]["terms"]["AC"] = {"max_duration_minutes": 60, "beta": 0, "reference_temp_F": 80}
    assert "plans.0.terms.AC.beta" in paths_of(data)


def test_pdp_term_with_a_deviation_is_rejected():
    data = small()
    data["plans"][0]["mode"] = "PDP"
    data["plans"][0]["terms"]["AC"] = {"max_duration_minutes": 60, "beta": 0.5, "reference_temp_F": 80}
    config = parse_scenario(data)
    paths = [path for path, _ in scenario_violations(config)]
    assert "plans.CDP.terms.WH.beta" in paths
    assert "plans.CDP.terms.WH.max_deviation_F" in paths


def test_catalog_entries_override_field_by_field():
    spec = CommunityConfig(appliances={"AC": {"rated_kw": 4.0}})
    assert spec.appliances["AC"].rated_kw == 4.0
    assert spec.appliances["AC"].kind == "thermostat-cooling"
    assert spec.appliances["AC"].set_point_F == (68.0, 76.0)
    assert sorted(spec.appliances) == ["AC", "CD", "DW", "WH"]


def test_new_catalog_class_is_added():
    spec = CommunityConfig(appliances={
        "PP": {"kind": "shiftable", "rated_kw": 1.0, "duration_hours": [1.0], "start_hours": [(9.0, 11.0)]},
    })
    assert spec.appliances["PP"].kind == "shiftable"
    community = generate_community(spec.model_copy(update={"homes": 3}), seed=0)
    assert all(load.cls.kind is LoadKind.SHIFTABLE for home in community.customers for load in home.shiftables)
    assert any(load.cls.name == "PP" for home in community.customers for load in home.shiftables)


def test_thermostat_catalog_entry_needs_set_points():
    data = small()
    data["community"]["appliances"] = {"HP": {"kind": "thermostat-cooling", "rated_kw": 3.0,
                                              "duration_hours": [1.0], "start_hours": [(9.0, 10.0)]}}
    assert "community.appliances.HP" in paths_of(data)


def test_plan_class_missing_from_catalog():
    data = small(EV={"max_delay_minutes": 60})
    config = parse_scenario(data)
    assert ("plans.CDP.terms.EV" in [path for path, _ in scenario_violations(config)])
    with pytest.raises(ConfigurationError):
        build_plans(config)


def test_thermostat_term_needs_reference():
    data = small(WH={"max_duration_minutes": 60, "max_deviation_F": 4})
    paths = [path for path, _ in scenario_violations(parse_scenario(data))]
    assert paths == ["plans.CDP.terms.WH.reference_temp_F"]


def test_off_lattice_delay_names_the_field():
    data = small(CD={"max_delay_minutes": 7})
    paths = [path for path, _ in scenario_violations(parse_scenario(data))]
    assert paths == ["plans.CDP.terms.CD.max_delay_minutes"]


def test_delay_that_spills_past_midnight():
    data = small(CD={"max_delay_minutes": 180})
    paths = [path for path, _ in scenario_violations(parse_scenario(data))]
    assert paths == ["plans.CDP.terms.CD.max_delay_minutes"]


def test_catalog_spill_over_and_energy():
    data = small()
    data["community"]["appliances"] = {"CD": {"start_hours": [(17.0, 22.0)]}}
    data["community"]["target_daily_kwh"] = 20.0
    paths = [path for path, _ in scenario_violations(parse_scenario(data))]
    assert "community.appliances.CD" in paths
    assert "community.appliances" in paths


def test_household_base_load_length(write_scenario):
    text = SMALL.replace("  homes: 4", "  households:\n    - {id: 1, base_load_kw: [1.0, 2.0]}")
    config = load_scenario(write_scenario(text))
    paths = [path for path, _ in scenario_violations(config)]
    assert paths == ["community.households.0.base_load_kw"]


def test_household_start_off_the_slot_lattice(write_scenario):
    text = SMALL.replace("  homes: 4", "  households:\n    - id: 1\n      shiftables:\n"
                                       "        - {class: CD, preferred_start_hour: 19.01}")
    config = load_scenario(write_scenario(text))
    paths = [path for path, _ in scenario_violations(config)]
    assert paths == ["community.households.0.shiftables.preferred_start_hour"]


def test_phase_order_must_name_both_phases():
    data = small()
    data["phase_order"] = ["shiftable", "shiftable"]
    assert paths_of(data) == ["phase_order"]


def test_missing_and_malformed_files(tmp_path, write_scenario):
    assert validate_scenario(str(tmp_path / "absent.yaml"))[0][0] == "config"
    assert validate_scenario(write_scenario("plans: [unclosed"))[0][0] == "config"
    assert validate_scenario(write_scenario("- just\n- a list\n")) == [("", "scenario file must hold a mapping")]


def test_sweep_points_of_bundled_scenarios(scenario_path):
    figure3 = load_scenario(scenario_path("figure3_sweep.yaml"))
    points = sweep_points(figure3)
    assert len(points) == 27
    assert points[0] == {
        "plan.AC.max_duration_minutes": 30, "plan.WH.max_duration_minutes": 30,
        "plan.AC.max_deviation_F": 1, "plan.WH.max_deviation_F": 2,
        "num_states": 2,
    }
    assert points[1]["num_states"] == 3
    table3 = load_scenario(scenario_path("table3_sweep.yaml"))
    tied = [(p["plan.AC.reference_temp_F"], p["plan.WH.reference_temp_F"]) for p in sweep_points(table3)]
    assert len(tied) == 15
    assert tied[::3] == [(72, 112), (74, 108), (76, 104), (78, 100), (80, 96)]


def test_sweep_points_of_bundled_pdp_and_delay_scenarios(scenario_path):
    pdp = load_scenario(scenario_path("pdp_beta_sweep.yaml"))
    points = sweep_points(pdp)
    assert len(points) == 27
    assert {(p["plan.AC.beta"], p["plan.WH.beta"]) for p in points} == {(0.1, 0.1), (0.25, 0.25), (0.5, 0.5)}
    assert build_plans(pdp)[0].mode is PlanMode.PDP

    delays = [(p["plan.CD.max_delay_minutes"], p["plan.DW.max_delay_minutes"])
              for p in sweep_points(load_scenario(scenario_path("delay_sweep.yaml")))]
    assert delays == [(0, 0), (30, 30), (60, 60), (90, 90), (120, 120)]

    reference = load_scenario(scenario_path("pdp_reference_sweep.yaml"))
    assert reference.sweep.plan == "PDP"
    assert len(sweep_points(reference)) == 15


def test_sweep_without_axes_or_plan(write_scenario):
    with pytest.raises(ConfigurationError):
        sweep_points(load_scenario(write_scenario(SMALL)))
    data = small()
    data["sweep"] = {"plan": "PDP", "axes": {"num_states": [2, 3]}}
    assert [path for path, _ in scenario_violations(parse_scenario(data))] == ["sweep.plan"]


@pytest.mark.parametrize("axes", [
    {"plan.AC": [1, 2]},
    {"homes": [1, 2]},
    {"num_states": []},
    {"plan.AC.max_deviation_F, plan.WH.max_deviation_F": [[1, 2], [3]]},
])
def test_bad_sweep_axes(axes):
    data = small()
    data["sweep"] = {"axes": axes}
    assert "sweep.axes" in paths_of(data)


def test_apply_point_changes_states_and_terms(write_scenario):
    config = load_scenario(write_scenario(SMALL))
    community = build_community(config)
    plan = build_plans(config)[0]
    point = {"num_states": 3, "plan.AC.max_deviation_F": 3.0, "plan.CD.max_delay_minutes": 0}
    swept, changed = apply_point(community, plan, point, config)
    assert swept.num_states == 3
    assert changed.term(AC).max_deviation_F == 3.0
    assert changed.term(CD).max_delay_minutes == 0
    assert changed.term(WH) == plan.term(WH)
    assert plan.term(AC).max_deviation_F == 2.0


def test_apply_point_with_a_seed_regenerates(write_scenario):
    config = load_scenario(write_scenario(SMALL))
    community = build_community(config)
    plan = build_plans(config)[0]
    swept, _ = apply_point(community, plan, {"seed": 9}, config)
    assert swept.aggregate().values.tolist() == build_community(config, seed=9).aggregate().values.tolist()


def test_apply_point_rejects_unknown_term_field(write_scenario):
    config = load_scenario(write_scenario(SMALL))
    community = build_community(config)
    plan = build_plans(config)[0]
    with pytest.raises(ConfigurationError) as info:
        apply_point(community, plan, {"plan.AC.gain": 1.0}, config)
    assert info.value.violations[0][0] == "sweep.axes.plan.AC.gain"
