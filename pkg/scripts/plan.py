#!/usr/bin/env python

"""
Script: plan.py
Description:
    Customer engagement plans. A plan fixes, per flexible load class, how much inconvenience the
    grid operator may impose: a maximum scheduling delay for shiftable loads, and for thermostat
    loads a maximum inconvenience duration plus a temperature-deviation rule. Two rules exist:

    - CDP (constant deviation plan): a fixed maximum deviation, clipped by the reference temperature.
    - PDP (proportional deviation plan): a scaling factor beta applied to the customer's distance
      from the reference temperature.

    The severity of a plan for one customer's device is the largest deviation from the customer's
    own set point the controller may cause. Devices with zero severity are ineligible and are never
    throttled.

Key Features:
    - TimeGrid: the discretised day (T slots of 1440/T minutes) with minute-to-slot conversion.
    - LoadClassId / LoadKind: flexible load classes tagged shiftable, cooling or heating.
    - ShiftablePlanTerm / ThermostatPlanTerm / EngagementPlan: immutable plan records, validated
      on construction (single mode per plan, terms matching class kinds, beta in (0, 1]).
    - severity(), is_eligible(): the per-customer inconvenience computation.

Functions:
    - severity(term, set_point_F, kind): allowed deviation for one device.
    - is_eligible(term, set_point_F, kind): True when that deviation is positive.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction

from scripts.constants import MINUTES_PER_DAY, MINUTES_PER_HOUR, SEVERITY_DECIMALS
from scripts.errors import ConfigurationError


class LoadKind(Enum):
    SHIFTABLE = "shiftable"
    COOLING = "thermostat-cooling"
    HEATING = "thermostat-heating"

    @property
    def is_thermostat(self):
        return self is not LoadKind.SHIFTABLE


class PlanMode(Enum):
    CDP = "CDP"
    PDP = "PDP"


@dataclass(frozen=True)
class TimeGrid:
    T: int = 288

    def __post_init__(self):
        if not isinstance(self.T, int) or self.T < 1:
            raise ConfigurationError([("slots_per_day", f"must be a positive integer, got {self.T!r}")])

    @property
    def dt_minutes(self):
        return Fraction(MINUTES_PER_DAY, self.T)

    @property
    def hours(self):
        """Slot length in hours, as a float."""
        return float(self.dt_minutes) / MINUTES_PER_HOUR

    def slots(self, minutes, what="duration"):
        """Whole number of slots in `minutes`; anything that is not a multiple of the slot length is rejected."""
        count = Fraction(minutes) / self.dt_minutes
        if count.denominator != 1 or count < 0:
            raise ConfigurationError(
                [(what, f"{minutes} min is not a non-negative multiple of the {float(self.dt_minutes):g}-min slot")]
            )
        return int(count)

    def slot_of_hour(self, hour, what="hour"):
        return self.slots(Fraction(str(hour)) * MINUTES_PER_HOUR, what)

    def minutes_of(self, slot):
        return float(slot * self.dt_minutes)


@dataclass(frozen=True, order=True)
class LoadClassId:
    name: str
    kind: LoadKind = field(compare=False)

    def __str__(self):
        return self.name


# The flexible classes of the reference community.
AC = LoadClassId("AC", LoadKind.COOLING)
WH = LoadClassId("WH", LoadKind.HEATING)
CD = LoadClassId("CD", LoadKind.SHIFTABLE)
DW = LoadClassId("DW", LoadKind.SHIFTABLE)
STANDARD_CLASSES = {cls.name: cls for cls in (AC, WH, CD, DW)}


@dataclass(frozen=True)
class ShiftablePlanTerm:
    max_delay_minutes: int

    def __post_init__(self):
        if self.max_delay_minutes < 0:
            raise ConfigurationError([("max_delay_minutes", "must be non-negative")])


@dataclass(frozen=True)
class ThermostatPlanTerm:
    max_duration_minutes: int
    reference_temp_F: float
    mode: PlanMode
    max_deviation_F: float = None
    beta: float = None

    def __post_init__(self):
        problems = []
        if self.max_duration_minutes < 0:
            problems.append(("max_duration_minutes", "must be non-negative"))
        if self.mode is PlanMode.CDP:
            if self.max_deviation_F is None or self.max_deviation_F < 0:
                problems.append(("max_deviation_F", "CDP terms need a non-negative maximum deviation"))
            if self.beta is not None:
                problems.append(("beta", "CDP terms do not take a scaling factor"))
        else:
            if self.beta is None or not 0 < self.beta <= 1:
                problems.append(("beta", f"PDP scaling factor must lie in (0, 1], got {self.beta!r}"))
            if self.max_deviation_F is not None:
                problems.append(("max_deviation_F", "PDP terms do not take a maximum deviation"))
        if problems:
            raise ConfigurationError(problems)


@dataclass(frozen=True)
class EngagementPlan:
    name: str
    terms: dict

    def __post_init__(self):
        terms = dict(self.terms)
        problems = []
        modes = set()
        for cls, term in terms.items():
            if cls.kind is LoadKind.SHIFTABLE and not isinstance(term, ShiftablePlanTerm):
                problems.append((f"terms.{cls.name}", "shiftable classes take a max_delay_minutes term"))
            if cls.kind.is_thermostat:
                if not isinstance(term, ThermostatPlanTerm):
                    problems.append((f"terms.{cls.name}", "thermostat classes take a duration/temperature term"))
                else:
                    modes.add(term.mode)
        if len(modes) > 1:
            problems.append(("terms", "mixed CDP/PDP plans are not supported"))
        if problems:
            raise ConfigurationError(problems)
        object.__setattr__(self, "terms", terms)

    @property
    def mode(self):
        for term in self.terms.values():
            if isinstance(term, ThermostatPlanTerm):
                return term.mode
        return None

    def term(self, cls):
        return self.terms.get(cls)

    def covers(self, cls):
        return cls in self.terms

    def shiftable_classes(self):
        return sorted(cls for cls in self.terms if cls.kind is LoadKind.SHIFTABLE)

    def thermostat_classes(self):
        return sorted(cls for cls in self.terms if cls.kind.is_thermostat)

    def check_grid(self, grid):
        problems = []
        for cls, term in self.terms.items():
            minutes = term.max_delay_minutes if isinstance(term, ShiftablePlanTerm) else term.max_duration_minutes
            name = "max_delay_minutes" if isinstance(term, ShiftablePlanTerm) else "max_duration_minutes"
            try:
                grid.slots(minutes, f"plans.{self.name}.terms.{cls.name}.{name}")
            except ConfigurationError as exc:
                problems.extend(exc.violations)
        if problems:
            raise ConfigurationError(problems)

    def budget_slots(self, cls, grid):
        term = self.terms[cls]
        if isinstance(term, ShiftablePlanTerm):
            return grid.slots(term.max_delay_minutes, f"{cls.name}.max_delay_minutes")
        return grid.slots(term.max_duration_minutes, f"{cls.name}.max_duration_minutes")

    def updated(self, class_name, **changes):
        """Copy of the plan with fields of one class's term replaced."""
        terms = dict(self.terms)
        for cls in terms:
            if cls.name == class_name:
                terms[cls] = replace(terms[cls], **changes)
                return EngagementPlan(self.name, terms)
        raise ConfigurationError([(f"terms.{class_name}", "class is not part of the plan")])


def severity(term, set_point_F, kind):
    if kind is LoadKind.COOLING:
        gap = term.reference_temp_F - set_point_F
    elif kind is LoadKind.HEATING:
        gap = set_point_F - term.reference_temp_F
    else:
        raise ConfigurationError([("kind", f"{kind} loads have no temperature severity")])

    if term.mode is PlanMode.CDP:
        value = max(min(gap, term.max_deviation_F), 0.0)
    else:
        value = term.beta * max(gap, 0.0)
    return round(float(value), SEVERITY_DECIMALS)


def is_eligible(term, set_point_F, kind):
    return severity(term, set_point_F, kind) > 0
