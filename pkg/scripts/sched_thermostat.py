#!/usr/bin/env python

"""
Script: sched_thermostat.py
Description:
    Peak reduction with power-throttled thermostats. For each eligible device the slots of its demand
    window where the rest of the community load is highest are found (at most as many as the plan's
    inconvenience duration allows). The device is switched OFF at those slots and runs at full power
    everywhere else in the window. While the output temperature leaves the severity band anywhere in
    the window, the least significant of those peak slots is raised one power state at a time; once it
    reaches full power the next least significant one is raised, and so on.

    A customer's eligible devices are controlled one after another on the running profile; every
    device order is tried and the lowest resulting peak wins (lexicographically first order on ties).
    Ineligible devices (severity 0 or zero allowed duration) always run at full power.

Functions:
    - find_local_peaks(profile, window, count)
    - violates_severity(temps, set_point, severity, window)
    - control_device(background, device, severity, duration_slots, grid)
    - schedule_customer(background, customer, plan, grid)
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from scripts.community import LoadProfile, StateMatrix, demanded_profile
from scripts.constants import MAX_PERMUTED_DEVICES, TEMPERATURE_TOLERANCE_F
from scripts.errors import ConfigurationError, ConvergenceError
from scripts.plan import severity as plan_severity
from scripts.thermal import SlotResponse, state_powers


@dataclass(frozen=True, eq=False)
class ThermostatResult:
    load: object
    state_matrix: StateMatrix
    temperatures: np.ndarray
    deviation: np.ndarray  # |theta_bar - set point| on demanded slots, 0 elsewhere
    severity: float
    peaks: tuple
    eligible: bool

    @property
    def power(self):
        return self.state_matrix.power(self.load.rated_kw)

    @property
    def denied_slots(self):
        return int(self.state_matrix.denied_slots().size)


@dataclass(frozen=True, eq=False)
class ThermostatSchedule:
    order: tuple  # indexes into customer.thermostats
    results: tuple  # aligned with customer.thermostats
    profile: LoadProfile

    @property
    def peak(self):
        return self.profile.peak()


def find_local_peaks(profile, window, count):
    """The `count` window slots with the largest profile values, largest first, ties to the earlier slot."""
    values = profile.values if isinstance(profile, LoadProfile) else np.asarray(profile, dtype=float)
    window = np.asarray(window, dtype=int)
    if window.size == 0 or count <= 0:
        return np.empty(0, dtype=int)
    count = min(count, window.size)
    order = np.lexsort((window, -values[window]))
    return window[order[:count]]


def violates_severity(temps, set_point, severity, window):
    if len(window) == 0:
        return False
    return float(np.abs(temps[window] - set_point).max()) > severity + TEMPERATURE_TOLERANCE_F


def _untouched(device, grid, severity, eligible):
    mask = device.demand_mask(grid.T)
    matrix = StateMatrix.full_power(mask, device.num_states)
    temps = SlotResponse(device, grid).simulate(matrix.power(device.rated_kw))
    deviation = np.where(mask, np.abs(temps - device.set_point_F), 0.0)
    return ThermostatResult(device, matrix, temps, deviation, severity, (), eligible)


def control_device(background, device, severity, duration_slots, grid):
    T = grid.T
    K = device.num_states
    mask = device.demand_mask(T)
    window = np.flatnonzero(mask)
    if severity <= 0 or duration_slots <= 0 or window.size == 0:
        return _untouched(device, grid, severity, severity > 0)

    peaks = find_local_peaks(background, window, duration_slots)
    states = np.where(mask, K, 0)
    states[peaks] = 1
    powers = np.concatenate(([0.0], state_powers(K, device.rated_kw)))

    response = SlotResponse(device, grid)
    temps = response.simulate(powers[states])
    position = len(peaks) - 1
    while violates_severity(temps, device.set_point_F, severity, window):
        if position < 0:
            worst = int(window[np.argmax(np.abs(temps[window] - device.set_point_F))])
            raise ConvergenceError(None, device.label, worst, "severity bound",
                                   "full power at every peak still leaves the band")
        slot = int(peaks[position])
        previous = states[slot]
        states[slot] = previous + 1
        response.nudge(temps, slot, powers[previous + 1] - powers[previous])
        if states[slot] == K:
            position -= 1

    matrix = StateMatrix.from_states(states, K)
    deviation = np.where(mask, np.abs(temps - device.set_point_F), 0.0)
    return ThermostatResult(device, matrix, temps, deviation, severity, tuple(int(p) for p in peaks), True)


def device_terms(device, plan, grid):
    """(severity, duration slots) a plan grants one device; uncovered classes get (0, 0)."""
    term = plan.term(device.cls)
    if term is None:
        return 0.0, 0
    return plan_severity(term, device.set_point_F, device.cls.kind), plan.budget_slots(device.cls, grid)


def schedule_customer(background, customer, plan, grid):
    """`background` is the aggregate without this customer's thermostat demand."""
    loads = customer.thermostats
    terms = [device_terms(load, plan, grid) for load in loads]
    eligible = [index for index, (sev, slots) in enumerate(terms) if sev > 0 and slots > 0]
    if len(eligible) > MAX_PERMUTED_DEVICES:
        raise ConfigurationError([(
            f"customer {customer.id}",
            f"{len(eligible)} eligible thermostats exceed the {MAX_PERMUTED_DEVICES}-device order search",
        )])

    results = [None] * len(loads)
    base = background.values.copy()
    for index, (sev, _) in enumerate(terms):
        if index not in eligible:
            results[index] = _untouched(loads[index], grid, sev, sev > 0)
            base += demanded_profile(loads[index], grid.T).values

    best = None
    for order in permutations(eligible):
        running = base.copy()
        controlled = {}
        for index in order:
            sev, slots = terms[index]
            try:
                result = control_device(LoadProfile(running), loads[index], sev, slots, grid)
            except ConvergenceError as exc:
                raise ConvergenceError(customer.id, exc.device, exc.slot, exc.rule) from exc
            running += result.power
            controlled[index] = result
        peak = float(running.max()) if running.size else 0.0
        if best is None or peak < best[0]:
            best = (peak, order, running, controlled)

    _, order, running, controlled = best
    for index, result in controlled.items():
        results[index] = result
    return ThermostatSchedule(tuple(order), tuple(results), LoadProfile(running))
