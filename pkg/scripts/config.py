#!/usr/bin/env python

"""
Script: config.py
Description:
    Scenario files. A scenario is a YAML document describing the community (generated from an
    appliance catalog, or listed household by household), one or more engagement plans, the customer
    order, the phase order, an optional parameter sweep and the output directory. Documents are
    parsed with PyYAML and validated with pydantic; every problem is reported with its dotted field
    path through ConfigurationError.

Key Features:
    - ScenarioConfig and its sections (CommunityConfig, ApplianceConfig, HouseholdConfig, PlanConfig,
      OrderConfig, SweepConfig, OutputConfig).
    - load_scenario(path): read and validate.
    - build_community / build_plans: turn a scenario into model objects.
    - validate_scenario(path): every violation found, without running a simulation.
    - sweep_points / apply_point: the Cartesian product of sweep axes.

Dependencies:
    - PyYAML: scenario files.
    - pydantic: schema validation and defaults.
"""

import itertools
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from scripts.community import (
    Community,
    Customer,
    LoadProfile,
    check_catalog,
    class_id,
    generate_community,
    make_shiftable,
    make_thermostat,
)
from scripts.constants import DEFAULT_SLOTS, EER_FLOOR, ENERGY_BAND
from scripts.coordinator import DEFAULT_PHASE_ORDER, check_spillover
from scripts.errors import ConfigurationError, EngagementError
from scripts.plan import (
    EngagementPlan,
    LoadKind,
    PlanMode,
    ShiftablePlanTerm,
    ThermostatPlanTerm,
    TimeGrid,
)

KINDS = Literal["shiftable", "thermostat-cooling", "thermostat-heating"]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ApplianceConfig(StrictModel):
    kind: KINDS
    rated_kw: float = Field(gt=0)
    penetration: float = Field(1.0, ge=0, le=1, description="Probability that a home owns the appliance")
    duration_hours: List[float] = Field(min_length=1, description="Run length choices per use")
    instances: List[int] = Field([1], min_length=1, description="Choices for the number of uses per day")
    start_hours: List[Tuple[float, float]] = Field(min_length=1, description="Candidate start-hour ranges")
    set_point_F: Optional[Tuple[float, float]] = None
    alpha_kwh_per_F: float = Field(2.5, gt=0)
    eer: float = Field(10.0, ge=EER_FLOOR)
    tank_volume_gal: float = Field(50.0, gt=0)
    tank_area_ft2: float = Field(25.0, gt=0)
    tank_resistance: float = Field(12.0, gt=0)
    inlet_temp_F: float = 60.0
    ambient_temp_F: float = 75.0

    @field_validator("instances")
    @classmethod
    def _positive_instances(cls, value):
        if any(count < 1 for count in value):
            raise ValueError("instances must be at least 1")
        return value

    @field_validator("start_hours")
    @classmethod
    def _ordered_ranges(cls, value):
        for lo, hi in value:
            if not 0 <= lo <= hi < 24:
                raise ValueError(f"start range [{lo}, {hi}] must satisfy 0 <= lo <= hi < 24")
        return value

    @model_validator(mode="after")
    def _thermostat_fields(self):
        if self.kind != "shiftable":
            if self.set_point_F is None:
                raise ValueError("thermostat appliances need a set_point_F range")
            if self.set_point_F[0] > self.set_point_F[1]:
                raise ValueError("set_point_F range is reversed")
        return self


# Rated power and usage per appliance class for a summer day. The start windows spread the
# 1000-home default community to a 3.7 MW peak on the bundled curve.
DEFAULT_APPLIANCES = {
    "AC": {"kind": "thermostat-cooling", "rated_kw": 5.0, "duration_hours": [4.0],
           "start_hours": [(9.0, 20.0)], "set_point_F": (68.0, 76.0)},
    "WH": {"kind": "thermostat-heating", "rated_kw": 2.5, "duration_hours": [1.0, 1.5, 2.0], "instances": [2, 3],
           "start_hours": [(4.0, 8.0), (10.0, 14.0), (16.0, 20.5)], "set_point_F": (104.0, 120.0)},
    "CD": {"kind": "shiftable", "rated_kw": 3.1, "duration_hours": [2.0], "start_hours": [(10.0, 20.0)]},
    "DW": {"kind": "shiftable", "rated_kw": 1.8, "duration_hours": [1.5], "start_hours": [(10.0, 20.5)]},
}


class ShiftableHousehold(StrictModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)
    class_name: str = Field(alias="class")
    preferred_start_hour: float = Field(ge=0, lt=24)
    duration_hours: Optional[float] = Field(None, gt=0)


class ThermostatHousehold(StrictModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)
    class_name: str = Field(alias="class")
    set_point_F: float
    windows_hours: List[Tuple[float, float]] = Field(min_length=1)
    num_states: Optional[int] = Field(None, ge=2)


class HouseholdConfig(StrictModel):
    id: int
    base_load_kw: Union[float, List[float]] = 0.0
    shiftables: List[ShiftableHousehold] = []
    thermostats: List[ThermostatHousehold] = []


class CommunityConfig(StrictModel):
    homes: int = Field(100, ge=0)
    slots_per_day: int = Field(DEFAULT_SLOTS, ge=1)
    target_daily_kwh: float = Field(41.0, gt=0)
    energy_jitter: float = Field(0.05, ge=0, le=ENERGY_BAND)
    load_shape_csv: Optional[str] = None
    reserve_delay_minutes: int = Field(120, ge=0)
    num_states: int = Field(5, ge=2)
    appliances: Dict[str, ApplianceConfig] = {}
    households: Optional[List[HouseholdConfig]] = None

    @model_validator(mode="before")
    @classmethod
    def _merge_catalog(cls, data):
        """User entries override the default catalog field by field; new class names are added."""
        if not isinstance(data, dict):
            return data
        given = data.get("appliances") or {}
        if not isinstance(given, dict):
            return data
        merged = {name: dict(entry) for name, entry in DEFAULT_APPLIANCES.items()}
        for name, entry in given.items():
            merged[name] = {**merged.get(name, {}), **(entry or {})}
        return {**data, "appliances": merged}


class TermConfig(StrictModel):
    max_delay_minutes: Optional[int] = Field(None, ge=0)
    max_duration_minutes: Optional[int] = Field(None, ge=0)
    reference_temp_F: Optional[float] = None
    max_deviation_F: Optional[float] = Field(None, ge=0)
    beta: Optional[float] = Field(None, gt=0, le=1)


class PlanConfig(StrictModel):
    name: str
    mode: Literal["CDP", "PDP"]
    terms: Dict[str, TermConfig]


class OrderConfig(StrictModel):
    policy: Literal["generation", "reverse", "explicit", "shuffle"] = "generation"
    ids: Optional[List[int]] = None
    seed: Optional[int] = None


class SweepConfig(StrictModel):
    plan: Optional[str] = None
    axes: Dict[str, list] = Field(min_length=1)

    @field_validator("axes")
    @classmethod
    def _non_empty_axes(cls, axes):
        for key, values in axes.items():
            if not values:
                raise ValueError(f"axis '{key}' has no values")
            paths = [path.strip() for path in key.split(",")]
            for path in paths:
                if path not in ("num_states", "seed") and not (path.startswith("plan.") and path.count(".") == 2):
                    raise ValueError(f"unknown sweep path '{path}' (use plan.<CLASS>.<field>, num_states or seed)")
            if len(paths) > 1 and any(not isinstance(v, (list, tuple)) or len(v) != len(paths) for v in values):
                raise ValueError(f"tied axis '{key}' needs {len(paths)} values per point")
        return axes


class OutputConfig(StrictModel):
    directory: str = "results"


class ScenarioConfig(StrictModel):
    seed: int = 0
    temperature_unit: Literal["F"] = "F"
    community: CommunityConfig = CommunityConfig()
    plans: List[PlanConfig] = Field(min_length=1)
    order: OrderConfig = OrderConfig()
    phase_order: List[Literal["shiftable", "thermostat"]] = list(DEFAULT_PHASE_ORDER)
    sweep: Optional[SweepConfig] = None
    outputs: OutputConfig = OutputConfig()

    @field_validator("phase_order")
    @classmethod
    def _each_phase_once(cls, value):
        if sorted(value) != sorted(DEFAULT_PHASE_ORDER):
            raise ValueError("phase_order must name 'shiftable' and 'thermostat' once each")
        return value

    def plan_config(self, name=None):
        if name is None:
            return self.plans[0]
        for plan in self.plans:
            if plan.name == name:
                return plan
        raise ConfigurationError([("sweep.plan", f"no plan named '{name}'")])


def _pydantic_violations(exc):
    return [(".".join(str(part) for part in error["loc"]), error["msg"]) for error in exc.errors()]


def parse_scenario(data):
    if not isinstance(data, dict):
        raise ConfigurationError([("", "scenario file must hold a mapping")])
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(_pydantic_violations(exc)) from exc


def load_scenario(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigurationError([("config", f"cannot read {path}: {exc.strerror}")]) from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError([("config", f"{path} is not valid YAML: {exc}")]) from exc
    return parse_scenario(data or {})


def build_plan(plan_config, appliances):
    terms = {}
    problems = []
    mode = PlanMode(plan_config.mode)
    for name, term in plan_config.terms.items():
        path = f"plans.{plan_config.name}.terms.{name}"
        if name not in appliances:
            problems.append((path, f"class '{name}' is not in the appliance catalog"))
            continue
        cls = class_id(name, appliances[name])
        try:
            if cls.kind is LoadKind.SHIFTABLE:
                if term.max_delay_minutes is None:
                    problems.append((f"{path}.max_delay_minutes", "shiftable classes need a maximum delay"))
                    continue
                terms[cls] = ShiftablePlanTerm(term.max_delay_minutes)
            else:
                missing = [field for field in ("max_duration_minutes", "reference_temp_F") if getattr(term, field) is None]
                if missing:
                    problems.extend((f"{path}.{field}", "required for thermostat classes") for field in missing)
                    continue
                terms[cls] = ThermostatPlanTerm(
                    max_duration_minutes=term.max_duration_minutes,
                    reference_temp_F=term.reference_temp_F,
                    mode=mode,
                    max_deviation_F=term.max_deviation_F,
                    beta=term.beta,
                )
        except ConfigurationError as exc:
            problems.extend((f"{path}.{field}", text) for field, text in exc.violations)
    if problems:
        raise ConfigurationError(problems)
    return EngagementPlan(plan_config.name, terms)


def build_plans(config):
    plans, problems = [], []
    for plan_config in config.plans:
        try:
            plans.append(build_plan(plan_config, config.community.appliances))
        except ConfigurationError as exc:
            problems.extend(exc.violations)
    if problems:
        raise ConfigurationError(problems)
    return plans


def _build_households(community_config):
    grid = TimeGrid(community_config.slots_per_day)
    appliances = community_config.appliances
    customers = []
    for index, household in enumerate(community_config.households):
        path = f"community.households.{index}"
        base = household.base_load_kw
        if isinstance(base, list):
            if len(base) != grid.T:
                raise ConfigurationError([(f"{path}.base_load_kw", f"needs {grid.T} values, got {len(base)}")])
            base = LoadProfile(base)
        else:
            base = LoadProfile(np.full(grid.T, float(base)))

        shiftables, thermostats = [], []
        for entry in household.shiftables:
            appliance = _catalog_entry(appliances, entry.class_name, f"{path}.shiftables")
            start = grid.slot_of_hour(entry.preferred_start_hour, f"{path}.shiftables.preferred_start_hour")
            shiftables.append(make_shiftable(class_id(entry.class_name, appliance), appliance, start, grid,
                                             entry.duration_hours))
        for entry in household.thermostats:
            appliance = _catalog_entry(appliances, entry.class_name, f"{path}.thermostats")
            windows = [
                (grid.slot_of_hour(lo, f"{path}.thermostats.windows_hours"),
                 grid.slot_of_hour(hi, f"{path}.thermostats.windows_hours"))
                for lo, hi in sorted(entry.windows_hours)
            ]
            K = entry.num_states or community_config.num_states
            thermostats.append(make_thermostat(class_id(entry.class_name, appliance), appliance, entry.set_point_F,
                                               windows, grid, K))
        customers.append(Customer(household.id, base, shiftables, thermostats))
    return Community(grid, customers, community_config.num_states)


def _catalog_entry(appliances, name, path):
    if name not in appliances:
        raise ConfigurationError([(path, f"class '{name}' is not in the appliance catalog")])
    return appliances[name]


def build_community(config, seed=None):
    seed = config.seed if seed is None else seed
    if config.community.households is not None:
        return _build_households(config.community)
    return generate_community(config.community, seed)


def _check_thermal(community_config):
    """Build one device per thermostat class at both ends of its set-point range."""
    grid = TimeGrid(community_config.slots_per_day)
    problems = []
    for name, appliance in sorted(community_config.appliances.items()):
        if appliance.kind == "shiftable":
            continue
        for set_point in appliance.set_point_F:
            try:
                lo = grid.slot_of_hour(appliance.start_hours[0][0], f"community.appliances.{name}.start_hours")
                span = [(lo, lo + grid.slot_of_hour(max(appliance.duration_hours), "duration_hours"))]
                make_thermostat(class_id(name, appliance), appliance, set_point, span, grid, community_config.num_states)
            except EngagementError as exc:
                problems.append((f"community.appliances.{name}", str(exc)))
    return problems


def _check_catalog_spillover(community_config, plan):
    problems = []
    for name, appliance in sorted(community_config.appliances.items()):
        cls = class_id(name, appliance)
        if cls.kind is not LoadKind.SHIFTABLE or not plan.covers(cls):
            continue
        delay_hours = plan.term(cls).max_delay_minutes / 60.0
        latest = max(hi for _, hi in appliance.start_hours) + max(appliance.duration_hours) + delay_hours
        if latest > 24:
            problems.append((f"plans.{plan.name}.terms.{name}.max_delay_minutes",
                             f"a {name} started at the latest preferred hour and delayed fully ends at "
                             f"{latest:g} h; tasks may not spill over midnight"))
    return problems


def scenario_violations(config):
    """Every problem found in a parsed scenario."""
    problems = []
    grid = None
    try:
        grid = TimeGrid(config.community.slots_per_day)
        if config.community.households is None:
            check_catalog(config.community, grid)
    except ConfigurationError as exc:
        problems.extend(exc.violations)
    problems.extend(_check_thermal(config.community) if config.community.households is None else [])

    try:
        plans = build_plans(config)
    except ConfigurationError as exc:
        problems.extend(exc.violations)
        plans = []

    community = None
    if config.community.households is not None:
        try:
            community = _build_households(config.community)
        except EngagementError as exc:
            problems.extend(getattr(exc, "violations", [("community.households", str(exc))]))

    for plan in plans:
        try:
            if grid is not None:
                plan.check_grid(grid)
        except ConfigurationError as exc:
            problems.extend(exc.violations)
            continue
        if community is not None:
            try:
                check_spillover(community.fold_unplanned(plan), plan)
            except ConfigurationError as exc:
                problems.extend(exc.violations)
        elif config.community.households is None:
            problems.extend(_check_catalog_spillover(config.community, plan))

    if config.sweep is not None:
        try:
            sweep_points(config)
        except ConfigurationError as exc:
            problems.extend(exc.violations)
    return problems


def validate_scenario(path):
    try:
        config = load_scenario(path)
    except ConfigurationError as exc:
        return exc.violations
    return scenario_violations(config)


def sweep_points(config):
    """List of {path: value} dicts, one per grid point, in axis order (last axis fastest)."""
    if config.sweep is None:
        raise ConfigurationError([("sweep", "the scenario defines no sweep axes")])
    config.plan_config(config.sweep.plan)
    names, columns = [], []
    for key, values in config.sweep.axes.items():
        paths = [path.strip() for path in key.split(",")]
        names.append(paths)
        columns.append([tuple(value) if len(paths) > 1 else (value,) for value in values])
    points = []
    for combination in itertools.product(*columns):
        point = {}
        for paths, values in zip(names, combination):
            point.update(zip(paths, values))
        points.append(point)
    return points


def apply_point(community, plan, point, config):
    """Community and plan for one sweep point. A seed change regenerates the community."""
    if "seed" in point:
        community = build_community(config, seed=int(point["seed"]))
    if "num_states" in point:
        community = community.with_num_states(int(point["num_states"]))
    for path, value in point.items():
        if path.startswith("plan."):
            _, class_name, field = path.split(".")
            try:
                plan = plan.updated(class_name, **{field: value})
            except TypeError as exc:
                raise ConfigurationError([(f"sweep.axes.{path}", f"'{field}' is not a plan term field")]) from exc
    return community, plan
