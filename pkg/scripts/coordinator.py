#!/usr/bin/env python

"""
Script: coordinator.py
Description:
    The grid operator / home controller protocol. The operator holds the aggregated load profile and
    visits the homes one after another. Each home controller receives the running profile, removes
    its own flexible demand, schedules its devices against what is left, and returns the updated
    profile. Nothing but LoadProfile objects crosses between operator and home; each message is
    recorded in a trace (phase, customer id, direction, digest of the profile, its peak).

    Two phases run in sequence, shiftable loads then thermostats by default (the order can be
    swapped). evaluate_plan() wires the phases together, verifies the schedule constraints of every
    device and assembles a SimulationReport.

Key Features:
    - HomeController / GridOperator: the sequential fold.
    - run_phase_shiftable / run_phase_thermostat: one phase over an ordered customer list.
    - check_constraints: delay window, one state per slot, duration budget, severity bound.
    - SimulationReport: peaks, % reduction, eligibility counts, deviations, energies, profiles and
      per-device schedule records; exported to JSON/CSV by the command line.
"""

import hashlib
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from scripts import sched_shiftable, sched_thermostat
from scripts.community import LoadProfile
from scripts.constants import ENERGY_RTOL, REPORT_DIGITS, TEMPERATURE_TOLERANCE_F
from scripts.errors import ConfigurationError, ConstraintViolation
from scripts.thermal import simulate_temperature

SHIFTABLE_PHASE = "shiftable"
THERMOSTAT_PHASE = "thermostat"
DEFAULT_PHASE_ORDER = (SHIFTABLE_PHASE, THERMOSTAT_PHASE)


def profile_digest(profile):
    text = ",".join(f"{value:.{REPORT_DIGITS}g}" for value in profile.values)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def rounded(value):
    return float(f"{value:.{REPORT_DIGITS}g}")


class HomeController:
    """Owns one customer's devices. Answers a profile with a profile."""

    def __init__(self, customer, plan, grid):
        self._customer = customer
        self._plan = plan
        self._grid = grid
        self.shift_result = None
        self.thermostat_schedule = None

    @property
    def customer_id(self):
        return self._customer.id

    def respond_shiftable(self, profile):
        self._check_message(profile)
        background = profile - self._customer.shiftable_demand(self._grid.T)
        self.shift_result = sched_shiftable.schedule_customer(background, self._customer, self._plan, self._grid)
        return self.shift_result.profile

    def respond_thermostat(self, profile):
        self._check_message(profile)
        background = profile - self._customer.thermostat_demand(self._grid.T)
        self.thermostat_schedule = sched_thermostat.schedule_customer(
            background, self._customer, self._plan, self._grid
        )
        return self.thermostat_schedule.profile

    def respond(self, phase, profile):
        if phase == SHIFTABLE_PHASE:
            return self.respond_shiftable(profile)
        return self.respond_thermostat(profile)

    def _check_message(self, profile):
        if not isinstance(profile, LoadProfile):
            raise TypeError(f"home controllers exchange LoadProfile objects only, got {type(profile).__name__}")
        if profile.T != self._grid.T:
            raise ValueError(f"profile has {profile.T} slots, expected {self._grid.T}")

    def records(self):
        return schedule_records(self._customer, self.shift_result, self.thermostat_schedule)


class GridOperator:
    def __init__(self, controllers, trace=None):
        self.controllers = list(controllers)
        self.trace = trace if trace is not None else []

    def _record(self, phase, customer_id, direction, profile):
        self.trace.append({
            "phase": phase,
            "customer_id": customer_id,
            "direction": direction,
            "profile_digest": profile_digest(profile),
            "peak": rounded(profile.peak()),
        })

    def run_phase(self, phase, profile):
        if not isinstance(profile, LoadProfile):
            raise TypeError("the operator sends LoadProfile objects only")
        for controller in self.controllers:
            self._record(phase, controller.customer_id, "to_home", profile)
            reply = controller.respond(phase, profile)
            if not isinstance(reply, LoadProfile):
                raise TypeError(f"customer {controller.customer_id} answered with {type(reply).__name__}")
            self._record(phase, controller.customer_id, "to_operator", reply)
            profile = reply
        return profile


def run_phase_shiftable(x, customers, plan, grid, trace=None, controllers=None):
    controllers = controllers or [HomeController(customer, plan, grid) for customer in customers]
    return GridOperator(controllers, trace).run_phase(SHIFTABLE_PHASE, x)


def run_phase_thermostat(x_hat, customers, plan, grid, trace=None, controllers=None):
    controllers = controllers or [HomeController(customer, plan, grid) for customer in customers]
    return GridOperator(controllers, trace).run_phase(THERMOSTAT_PHASE, x_hat)


@dataclass(frozen=True)
class ScheduleRecord:
    customer_id: int
    device: str
    kind: str
    rated_kw: float
    set_point_F: float = None
    severity_F: float = None
    eligible: bool = False
    preferred_start_slot: int = None
    assigned_start_slot: int = None
    delay_slots: int = None
    demanded_slots: int = 0
    denied_slots: int = 0
    min_state: int = None
    num_states: int = None
    max_deviation_F: float = None
    mean_deviation_F: float = None


def schedule_records(customer, shift_result, thermostat_schedule):
    records = []
    shifted = shift_result.loads if shift_result is not None and shift_result.loads else customer.shiftables
    for load in shifted:
        records.append(ScheduleRecord(
            customer_id=customer.id,
            device=load.label,
            kind=load.cls.kind.value,
            rated_kw=load.rated_kw,
            preferred_start_slot=load.preferred_start_slot,
            assigned_start_slot=load.start_slot,
            delay_slots=load.start_slot - load.preferred_start_slot,
            demanded_slots=load.duration_slots,
        ))
    if thermostat_schedule is None:
        return records
    for result in thermostat_schedule.results:
        load = result.load
        window = result.state_matrix.row_sums() > 0
        states = result.state_matrix.states()[window]
        deviation = result.deviation[window]
        records.append(ScheduleRecord(
            customer_id=customer.id,
            device=load.label,
            kind=load.cls.kind.value,
            rated_kw=load.rated_kw,
            set_point_F=load.set_point_F,
            severity_F=result.severity,
            eligible=result.eligible,
            demanded_slots=int(window.sum()),
            denied_slots=result.denied_slots,
            min_state=int(states.min()) if states.size else None,
            num_states=load.num_states,
            max_deviation_F=float(deviation.max()) if deviation.size else 0.0,
            mean_deviation_F=float(deviation.mean()) if deviation.size else 0.0,
        ))
    return records


def check_spillover(community, plan):
    """Every shiftable must finish before midnight even at its maximum delay."""
    grid = community.grid
    delayed = set(plan.shiftable_classes())
    problems = []
    for customer in community.customers:
        for load in customer.shiftables:
            if load.cls not in delayed:
                continue
            budget = plan.budget_slots(load.cls, grid)
            end = load.preferred_start_slot + load.duration_slots + budget
            if end > grid.T:
                problems.append((
                    f"plans.{plan.name}.terms.{load.cls.name}",
                    f"customer {customer.id}: start slot {load.preferred_start_slot} + {load.duration_slots} slots "
                    f"+ {budget}-slot delay runs to slot {end}, past midnight ({grid.T}); tasks may not spill over",
                ))
    if problems:
        raise ConfigurationError(problems)


def check_constraints(community, plan, controllers, grid):
    """Delay window, one state per demanded slot, duration budget and severity bound for every device."""
    T = grid.T
    customers = {customer.id: customer for customer in community.customers}
    for controller in controllers:
        customer = customers[controller.customer_id]
        result = controller.shift_result
        for load in (result.loads if result is not None else ()):
            budget = plan.budget_slots(load.cls, grid) if plan.covers(load.cls) else 0
            delay = load.start_slot - load.preferred_start_slot
            if not 0 <= delay <= budget:
                raise ConstraintViolation(customer.id, load.label, load.start_slot, "delay window",
                                          f"delay {delay} outside 0..{budget}")
            if load.start_slot + load.duration_slots > T:
                raise ConstraintViolation(customer.id, load.label, load.start_slot, "delay window", "spills past midnight")

        schedule = controller.thermostat_schedule
        for res in (schedule.results if schedule is not None else ()):
            load = res.load
            mask = load.demand_mask(T)
            sums = res.state_matrix.row_sums()
            bad = np.flatnonzero(np.where(mask, sums != 1, sums != 0))
            if bad.size:
                raise ConstraintViolation(customer.id, load.label, int(bad[0]), "one state per slot")

            budget = plan.budget_slots(load.cls, grid) if plan.covers(load.cls) and res.severity > 0 else 0
            denied = res.state_matrix.denied_slots()
            if denied.size > budget:
                raise ConstraintViolation(customer.id, load.label, int(denied[budget]), "inconvenience duration",
                                          f"{denied.size} slots below full power, {budget} allowed")

            temps = simulate_temperature(load, res.state_matrix, grid)
            window = np.flatnonzero(mask)
            if window.size:
                gap = np.abs(temps[window] - load.set_point_F)
                worst = int(np.argmax(gap))
                if gap[worst] > res.severity + TEMPERATURE_TOLERANCE_F:
                    raise ConstraintViolation(customer.id, load.label, int(window[worst]), "temperature severity",
                                              f"deviation {gap[worst]:.6g} F, allowed {res.severity:.6g} F")


@dataclass(frozen=True, eq=False)
class SimulationReport:
    plan_name: str
    peak_before: float
    peak_after_shiftable: float
    peak_after_thermostat: float
    percent_peak_reduction: float
    eligible_counts: dict
    device_counts: dict
    avg_severity: dict
    avg_realized_deviation: dict
    energy_before_kwh: float
    energy_after_shiftable_kwh: float
    energy_after_thermostat_kwh: float
    x: LoadProfile
    x_hat: LoadProfile  # after the first phase
    x_tilde: LoadProfile  # after both phases
    schedule: tuple
    phase_order: tuple
    customer_order: tuple
    num_states: int
    trace: list = field(default_factory=list, repr=False)

    def to_summary(self):
        """JSON-ready dict; floats carry 6 significant digits."""
        return {
            "plan": self.plan_name,
            "num_states": self.num_states,
            "phase_order": list(self.phase_order),
            "peak_before_kw": rounded(self.peak_before),
            "peak_after_shiftable_kw": rounded(self.peak_after_shiftable),
            "peak_after_thermostat_kw": rounded(self.peak_after_thermostat),
            "percent_peak_reduction": rounded(self.percent_peak_reduction),
            "eligible_counts": dict(self.eligible_counts),
            "device_counts": dict(self.device_counts),
            "avg_severity_F": {name: rounded(value) for name, value in self.avg_severity.items()},
            "avg_realized_deviation_F": {name: rounded(value) for name, value in self.avg_realized_deviation.items()},
            "energy_kwh": {
                "before": rounded(self.energy_before_kwh),
                "after_shiftable": rounded(self.energy_after_shiftable_kwh),
                "after_thermostat": rounded(self.energy_after_thermostat_kwh),
            },
            "severities": [
                {
                    "customer_id": record.customer_id,
                    "device": record.device,
                    "set_point_F": rounded(record.set_point_F),
                    "severity_F": rounded(record.severity_F),
                    "eligible": record.eligible,
                }
                for record in self.schedule if record.set_point_F is not None
            ],
        }

    def profiles_frame(self, grid):
        slots = np.arange(grid.T)
        return pd.DataFrame({
            "slot": slots,
            "minutes": [grid.minutes_of(slot) for slot in range(grid.T)],
            "x": self.x.values,
            "x_hat": self.x_hat.values,
            "x_tilde": self.x_tilde.values,
        })

    def schedule_frame(self):
        columns = list(ScheduleRecord.__dataclass_fields__)
        return pd.DataFrame([asdict(record) for record in self.schedule], columns=columns)


def _class_stats(plan, schedule):
    eligible, devices, severity, realized = {}, {}, {}, {}
    for cls in plan.thermostat_classes():
        rows = [record for record in schedule if record.device == cls.name and record.set_point_F is not None]
        chosen = [record for record in rows if record.eligible]
        devices[cls.name] = len(rows)
        eligible[cls.name] = len(chosen)
        severity[cls.name] = float(np.mean([r.severity_F for r in chosen])) if chosen else 0.0
        realized[cls.name] = float(np.mean([r.mean_deviation_F for r in chosen])) if chosen else 0.0
    return eligible, devices, severity, realized


def _check_phase(plan_name, phase, before, after, grid):
    """Each phase keeps or lowers the peak; shifting keeps the energy, throttling never adds any."""
    if after.peak() > before.peak() * (1 + ENERGY_RTOL):
        raise ConstraintViolation(None, "community", None, "peak never increases",
                                  f"plan {plan_name}, {phase} phase: {before.peak():.6g} -> {after.peak():.6g} kW")
    first, last = before.energy_kwh(grid), after.energy_kwh(grid)
    if phase == SHIFTABLE_PHASE and abs(last - first) > ENERGY_RTOL * max(first, 1.0):
        raise ConstraintViolation(None, "community", None, "shifting preserves energy",
                                  f"plan {plan_name}: {first:.6g} vs {last:.6g} kWh")
    if phase == THERMOSTAT_PHASE and last > first * (1 + ENERGY_RTOL):
        raise ConstraintViolation(None, "community", None, "throttling never adds energy",
                                  f"plan {plan_name}: {first:.6g} -> {last:.6g} kWh")


def evaluate_plan(community, plan, order=None, phase_order=DEFAULT_PHASE_ORDER, log=None, trace=None):
    """Run both phases of `plan` on `community` and check the result."""
    log = log if log is not None else []
    trace = trace if trace is not None else []
    grid = community.grid
    phase_order = tuple(phase_order)
    if sorted(phase_order) != sorted(DEFAULT_PHASE_ORDER):
        raise ConfigurationError([("phase_order", f"must list {SHIFTABLE_PHASE} and {THERMOSTAT_PHASE} once each")])

    plan.check_grid(grid)
    folded = community.fold_unplanned(plan)
    check_spillover(folded, plan)
    customers = folded.ordered(
        getattr(order, "policy", "generation"), getattr(order, "ids", None), getattr(order, "seed", None)
    )

    x = folded.aggregate()
    log.append(f"Plan {plan.name}: {len(customers)} homes, T={grid.T}, K={folded.num_states}, peak before {x.peak():.6g} kW")
    controllers = [HomeController(customer, plan, grid) for customer in customers]
    runners = {SHIFTABLE_PHASE: run_phase_shiftable, THERMOSTAT_PHASE: run_phase_thermostat}
    outputs = {}
    profile = x
    for phase in phase_order:
        before = profile
        profile = runners[phase](profile, customers, plan, grid, trace, controllers)
        _check_phase(plan.name, phase, before, profile, grid)
        outputs[phase] = profile
        log.append(f"Plan {plan.name}: peak after {phase} phase {profile.peak():.6g} kW")

    check_constraints(folded, plan, controllers, grid)
    x_hat = outputs[phase_order[0]]
    x_tilde = outputs[phase_order[1]]

    schedule = []
    for controller in sorted(controllers, key=lambda c: c.customer_id):
        schedule.extend(controller.records())
    eligible, devices, severity, realized = _class_stats(plan, schedule)

    peak_before = x.peak()
    reduction = 100.0 * (peak_before - x_tilde.peak()) / peak_before if peak_before > 0 else 0.0
    report = SimulationReport(
        plan_name=plan.name,
        peak_before=peak_before,
        peak_after_shiftable=outputs[SHIFTABLE_PHASE].peak(),
        peak_after_thermostat=outputs[THERMOSTAT_PHASE].peak(),
        percent_peak_reduction=min(max(reduction, 0.0), 100.0),
        eligible_counts=eligible,
        device_counts=devices,
        avg_severity=severity,
        avg_realized_deviation=realized,
        energy_before_kwh=x.energy_kwh(grid),
        energy_after_shiftable_kwh=outputs[SHIFTABLE_PHASE].energy_kwh(grid),
        energy_after_thermostat_kwh=x_tilde.energy_kwh(grid),
        x=x,
        x_hat=x_hat,
        x_tilde=x_tilde,
        schedule=tuple(schedule),
        phase_order=phase_order,
        customer_order=tuple(customer.id for customer in customers),
        num_states=folded.num_states,
        trace=trace,
    )
    log.append(f"Plan {plan.name}: peak reduction {report.percent_peak_reduction:.6g}%, "
               f"eligible {', '.join(f'{name}={count}' for name, count in eligible.items()) or 'none'}")
    return report
