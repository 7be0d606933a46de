#!/usr/bin/env python

"""
Script: sched_shiftable.py
Description:
    Peak-minimising placement of one customer's shiftable loads. Each device starts at its preferred
    slot and may be delayed by up to its plan's maximum delay. For a fixed device order the devices
    are placed one at a time on the running profile: the device profile is shifted one slot to the
    right per candidate delay and the delay with the lowest resulting peak is kept (smallest delay on
    ties). Every order of the customer's devices is tried and the order giving the lowest peak wins
    (lexicographically first order on ties).

    If no order beats the unscheduled placement (all devices at their preferred start), the
    unscheduled placement is returned so a customer never raises the peak it was handed.

Functions:
    - circular_shift(profile): move every entry one slot to the right, the last one wrapping to slot 0.
    - place_device(background, device_profile, max_delay_slots): best delay for one device.
    - greedy_pass(background, loads, order, budgets): one fixed order.
    - schedule_customer(background, customer, plan, grid): all orders, returns a ShiftResult.
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from scripts.community import LoadProfile, demanded_profile
from scripts.constants import MAX_PERMUTED_DEVICES
from scripts.errors import ConfigurationError, ModelError


@dataclass(frozen=True, eq=False)
class ShiftResult:
    delays: tuple  # slots, aligned with the customer's shiftables
    order: tuple  # device indexes in placement order
    profile: LoadProfile  # background plus the customer's scheduled shiftables
    loads: tuple  # ShiftableLoad copies carrying their assigned start

    @property
    def peak(self):
        return self.profile.peak()


def circular_shift(profile):
    values = profile.values if isinstance(profile, LoadProfile) else np.asarray(profile, dtype=float)
    return LoadProfile(np.roll(values, 1))


def place_device(background, device_profile, max_delay_slots):
    """Return (l*, background + device delayed by l*)."""
    base = background.values
    device = device_profile.values
    if max_delay_slots >= device.size:
        raise ModelError(f"a delay of {max_delay_slots} slots does not fit a {device.size}-slot day")
    if max_delay_slots and np.any(device[device.size - max_delay_slots:] != 0):
        raise ModelError("delaying the device would carry it past midnight")

    candidates = np.empty((max_delay_slots + 1, device.size))
    shifted = device
    for delay in range(max_delay_slots + 1):
        candidates[delay] = base + shifted
        shifted = circular_shift(shifted).values
    peaks = candidates.max(axis=1)
    best = int(np.argmin(peaks))  # first minimum, i.e. the smallest delay
    return best, LoadProfile(candidates[best])


def greedy_pass(background, loads, order, budgets):
    T = background.T
    delays = [0] * len(loads)
    running = background
    for index in order:
        delays[index], running = place_device(running, demanded_profile(loads[index], T), budgets[index])
    return tuple(delays), running


def delay_budgets(loads, plan, grid):
    return [plan.budget_slots(load.cls, grid) if plan.covers(load.cls) else 0 for load in loads]


def schedule_customer(background, customer, plan, grid):
    """`background` is the aggregate without this customer's shiftable demand."""
    loads = customer.shiftables
    if len(loads) > MAX_PERMUTED_DEVICES:
        raise ConfigurationError([(
            f"customer {customer.id}",
            f"{len(loads)} shiftable devices exceed the {MAX_PERMUTED_DEVICES}-device order search; "
            "sample device orders instead",
        )])
    if not loads:
        return ShiftResult((), (), background, ())

    budgets = delay_budgets(loads, plan, grid)
    unscheduled = background + customer.shiftable_demand(grid.T)

    best = None
    for order in permutations(range(len(loads))):
        delays, profile = greedy_pass(background, loads, order, budgets)
        if best is None or profile.peak() < best[2].peak():
            best = (order, delays, profile)

    order, delays, profile = best
    if profile.peak() > unscheduled.peak():
        order, delays, profile = tuple(range(len(loads))), (0,) * len(loads), unscheduled
    placed = tuple(load.delayed(delay) for load, delay in zip(loads, delays))
    return ShiftResult(delays, order, profile, placed)
