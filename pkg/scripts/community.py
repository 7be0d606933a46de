#!/usr/bin/env python

"""
Script: community.py
Description:
    The residential community: customers, their flexible devices, base loads and the aggregated
    load profile exchanged with the grid operator.

    A community is generated from a CommunityConfig and a seed. Every home draws its appliances
    from the catalog (each class owned with its penetration probability), samples set points on a
    1 F lattice and demand windows on the slot lattice, and receives a base load that fills the
    remaining daily energy with the shape of a normalised summer load curve.

Key Features:
    - LoadProfile: immutable, nonnegative, length-T kW vector.
    - ShiftableLoad / ThermostatLoad / StateMatrix / Customer / Community records.
    - load_shape(): bundled or custom load-curve shape, resampled to T and normalised to mean 1.
    - generate_community(): deterministic for a fixed seed (numpy Generator).
    - demanded_profile(), aggregate(): the demanded power of one device and the community sum.

Dependencies:
    - NumPy: profiles, masks and state matrices.
    - Pandas: reading the load-curve CSV.
"""

import os
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from scripts.constants import ENERGY_BAND, MINUTES_PER_DAY, PROFILE_NEGATIVE_TOLERANCE
from scripts.errors import ConfigurationError, ModelError
from scripts.plan import STANDARD_CLASSES, LoadClassId, LoadKind, TimeGrid
from scripts.thermal import AcParams, WhParams, calibrated_flow, calibrated_heat_gain, state_powers

BUNDLED_SHAPE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "summer_load_shape.csv")


class LoadProfile:
    """kW per slot. Values within PROFILE_NEGATIVE_TOLERANCE below zero are clipped; anything lower is an error."""

    __slots__ = ("values",)

    def __init__(self, values):
        values = np.array(values, dtype=float).reshape(-1)
        if values.size and values.min() < -PROFILE_NEGATIVE_TOLERANCE:
            raise ModelError(f"load profile has a negative entry ({values.min():.6g} kW)")
        values = np.maximum(values, 0.0)
        values.setflags(write=False)
        self.values = values

    @classmethod
    def zeros(cls, T):
        return cls(np.zeros(T))

    @property
    def T(self):
        return self.values.size

    def peak(self):
        return float(self.values.max()) if self.values.size else 0.0

    def energy_kwh(self, grid):
        return float(self.values.sum()) * grid.hours

    def __add__(self, other):
        other = other.values if isinstance(other, LoadProfile) else np.asarray(other, dtype=float)
        return LoadProfile(self.values + other)

    def __sub__(self, other):
        other = other.values if isinstance(other, LoadProfile) else np.asarray(other, dtype=float)
        return LoadProfile(self.values - other)

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"LoadProfile(T={self.T}, peak={self.peak():.6g})"


@dataclass(frozen=True)
class ShiftableLoad:
    cls: LoadClassId
    rated_kw: float
    duration_slots: int
    preferred_start_slot: int
    assigned_start_slot: int = None

    def __post_init__(self):
        if self.rated_kw <= 0:
            raise ModelError(f"{self.cls} rated power must be positive")
        if self.duration_slots < 1:
            raise ModelError(f"{self.cls} duration must be at least one slot")
        if self.preferred_start_slot < 0:
            raise ModelError(f"{self.cls} preferred start slot is negative")

    @property
    def label(self):
        return self.cls.name

    @property
    def start_slot(self):
        return self.preferred_start_slot if self.assigned_start_slot is None else self.assigned_start_slot

    def delayed(self, delay_slots):
        return replace(self, assigned_start_slot=self.preferred_start_slot + delay_slots)

    def profile_at(self, start, T):
        values = np.zeros(T)
        values[start:start + self.duration_slots] = self.rated_kw
        return LoadProfile(values)

    def energy_kwh(self, grid):
        return self.rated_kw * self.duration_slots * grid.hours


@dataclass(frozen=True, eq=False)
class ThermostatLoad:
    cls: LoadClassId
    rated_kw: float
    num_states: int
    set_point_F: float
    demand_windows: tuple  # sorted, disjoint, half-open [start, end) slot intervals
    thermal: object  # AcParams | WhParams

    def __post_init__(self):
        if self.rated_kw <= 0:
            raise ModelError(f"{self.cls} rated power must be positive")
        if self.num_states < 2:
            raise ModelError(f"{self.cls} needs at least 2 power states, got {self.num_states}")
        windows = tuple((int(start), int(end)) for start, end in self.demand_windows)
        previous_end = 0
        for start, end in windows:
            if start < previous_end or end < start:
                raise ModelError(f"{self.cls} demand windows must be sorted, disjoint intervals")
            previous_end = end
        object.__setattr__(self, "demand_windows", windows)

    @property
    def label(self):
        return self.cls.name

    def demand_mask(self, T):
        mask = np.zeros(T, dtype=bool)
        for start, end in self.demand_windows:
            if end > T:
                raise ModelError(f"{self.cls} demand window [{start}, {end}) runs past slot {T}")
            mask[start:end] = True
        return mask

    def demanded_slots(self, T):
        return np.flatnonzero(self.demand_mask(T))

    def energy_kwh(self, grid):
        return self.rated_kw * int(self.demand_mask(grid.T).sum()) * grid.hours


class StateMatrix:
    """T x K binary matrix; column k-1 is state k (state 1 is OFF, state K is full power)."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        entries = np.asarray(entries, dtype=np.int8)
        if entries.ndim != 2 or entries.shape[1] < 2:
            raise ModelError("state matrix must be T x K with K >= 2")
        if np.any((entries != 0) & (entries != 1)):
            raise ModelError("state matrix entries must be binary")
        self.entries = entries

    @classmethod
    def from_states(cls, states, K):
        """Build C from a per-slot state vector; state 0 marks a slot with no demand (empty row)."""
        states = np.asarray(states, dtype=int)
        if np.any((states < 0) | (states > K)):
            raise ModelError(f"states must lie in 0..{K}")
        entries = np.zeros((states.size, K), dtype=np.int8)
        active = states > 0
        entries[np.flatnonzero(active), states[active] - 1] = 1
        return cls(entries)

    @classmethod
    def full_power(cls, mask, K):
        return cls.from_states(np.where(mask, K, 0), K)

    @property
    def K(self):
        return self.entries.shape[1]

    @property
    def T(self):
        return self.entries.shape[0]

    def states(self):
        return np.where(self.row_sums() > 0, self.entries.argmax(axis=1) + 1, 0)

    def row_sums(self):
        return self.entries.sum(axis=1)

    def power(self, rated_kw):
        """(Q . C) 1: kW drawn per slot."""
        return self.entries @ state_powers(self.K, rated_kw)

    def denied_slots(self):
        """Demanded slots not at full power."""
        return np.flatnonzero((self.row_sums() > 0) & (self.entries[:, -1] == 0))


@dataclass(frozen=True, eq=False)
class Customer:
    id: int
    base_load: LoadProfile
    shiftables: tuple = ()
    thermostats: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "shiftables", tuple(self.shiftables))
        object.__setattr__(self, "thermostats", tuple(self.thermostats))

    def devices(self):
        return self.shiftables + self.thermostats

    def shiftable_demand(self, T):
        return sum((demanded_profile(load, T).values for load in self.shiftables), np.zeros(T))

    def thermostat_demand(self, T):
        return sum((demanded_profile(load, T).values for load in self.thermostats), np.zeros(T))

    def demanded_total(self, T):
        return LoadProfile(self.base_load.values + self.shiftable_demand(T) + self.thermostat_demand(T))


@dataclass(frozen=True, eq=False)
class Community:
    grid: TimeGrid
    customers: tuple
    num_states: int = 5

    def __post_init__(self):
        object.__setattr__(self, "customers", tuple(self.customers))
        ids = [customer.id for customer in self.customers]
        if len(set(ids)) != len(ids):
            raise ConfigurationError([("community.households", "customer ids must be unique")])

    def aggregate(self):
        return aggregate(self)

    def fold_unplanned(self, plan):
        """Devices whose class the plan does not cover become part of their owner's base load."""
        T = self.grid.T
        folded = []
        for customer in self.customers:
            keep_s = tuple(load for load in customer.shiftables if plan.covers(load.cls))
            keep_t = tuple(load for load in customer.thermostats if plan.covers(load.cls))
            extra = np.zeros(T)
            for load in customer.devices():
                if not plan.covers(load.cls):
                    extra += demanded_profile(load, T).values
            folded.append(Customer(customer.id, customer.base_load + extra, keep_s, keep_t))
        return Community(self.grid, folded, self.num_states)

    def with_num_states(self, K):
        """Same homes with every thermostat throttled in K states. No randomness is consumed."""
        customers = [
            replace(customer, thermostats=tuple(replace(load, num_states=K) for load in customer.thermostats))
            for customer in self.customers
        ]
        return Community(self.grid, customers, K)

    def ordered(self, policy="generation", ids=None, seed=None):
        customers = list(self.customers)
        if policy == "generation":
            return customers
        if policy == "reverse":
            return customers[::-1]
        if policy == "explicit":
            by_id = {customer.id: customer for customer in customers}
            if ids is None or sorted(ids) != sorted(by_id):
                raise ConfigurationError([("order.ids", "explicit order must list every customer id exactly once")])
            return [by_id[customer_id] for customer_id in ids]
        if policy == "shuffle":
            permutation = np.random.default_rng(seed).permutation(len(customers))
            return [customers[index] for index in permutation]
        raise ConfigurationError([("order.policy", f"unknown customer order policy '{policy}'")])

    def device_count(self, cls):
        return sum(1 for customer in self.customers for load in customer.devices() if load.cls == cls)


def demanded_profile(load, T):
    """p = p_r * w: rated power on the demanded slots (shiftables at their preferred start)."""
    if isinstance(load, ShiftableLoad):
        return load.profile_at(load.preferred_start_slot, T)
    return LoadProfile(np.where(load.demand_mask(T), load.rated_kw, 0.0))


def aggregate(community):
    T = community.grid.T
    total = np.zeros(T)
    for customer in community.customers:
        total += customer.demanded_total(T).values
    return LoadProfile(total)


def load_shape(path=None, T=288):
    """Normalised daily shape (mean 1) resampled to T slots by linear interpolation."""
    path = path or BUNDLED_SHAPE
    try:
        frame = pd.read_csv(path, header=None)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise ConfigurationError([("community.load_shape_csv", f"cannot read {path}: {exc}")]) from exc
    values = pd.to_numeric(frame.iloc[:, 0], errors="coerce").to_numpy(dtype=float)
    if values.size == 0 or np.isnan(values).any():
        raise ConfigurationError([("community.load_shape_csv", f"{path} must hold one number per row")])
    if np.any(values < 0) or values.sum() <= 0:
        raise ConfigurationError([("community.load_shape_csv", "load shape values must be nonnegative, not all zero")])

    if values.size != T:
        # sample the curve at the centre of each new slot
        source = (np.arange(values.size) + 0.5) * MINUTES_PER_DAY / values.size
        target = (np.arange(T) + 0.5) * MINUTES_PER_DAY / T
        values = np.interp(target, source, values)
    return values / values.mean()


def make_shiftable(cls, appliance, preferred_start_slot, grid, duration_hours=None):
    hours = appliance.duration_hours[0] if duration_hours is None else duration_hours
    return ShiftableLoad(
        cls=cls,
        rated_kw=appliance.rated_kw,
        duration_slots=grid.slot_of_hour(hours, f"appliances.{cls.name}.duration_hours"),
        preferred_start_slot=preferred_start_slot,
    )


def make_thermostat(cls, appliance, set_point_F, windows, grid, num_states):
    """Thermostat with its thermal model calibrated so full power holds the set point."""
    mask = np.zeros(grid.T, dtype=bool)
    for start, end in windows:
        mask[start:end] = True
    if cls.kind is LoadKind.COOLING:
        thermal = AcParams(
            alpha_kwh_per_F=appliance.alpha_kwh_per_F,
            eer=appliance.eer,
            heat_gain_profile=calibrated_heat_gain(appliance.eer, appliance.rated_kw, mask),
        )
    else:
        ambient = np.full(grid.T, float(appliance.ambient_temp_F))
        thermal = WhParams(
            tank_volume_gal=appliance.tank_volume_gal,
            tank_area_ft2=appliance.tank_area_ft2,
            tank_resistance=appliance.tank_resistance,
            inlet_temp_F=appliance.inlet_temp_F,
            flow_profile=calibrated_flow(
                appliance.rated_kw, set_point_F, appliance.inlet_temp_F, appliance.tank_area_ft2,
                appliance.tank_resistance, ambient, mask,
            ),
            ambient_temp_profile=ambient,
        )
        thermal.check_flow(grid.dt_minutes)
    return ThermostatLoad(cls, appliance.rated_kw, num_states, float(set_point_F), tuple(windows), thermal)


def class_id(name, appliance):
    if name in STANDARD_CLASSES:
        return STANDARD_CLASSES[name]
    return LoadClassId(name, LoadKind(appliance.kind))


def check_catalog(spec, grid):
    """Spill-over, window overlap and energy feasibility of the appliance catalog."""
    problems = []
    reserve_hours = spec.reserve_delay_minutes / 60.0
    max_flex_kwh = 0.0
    for name, appliance in sorted(spec.appliances.items()):
        path = f"community.appliances.{name}"
        kind = LoadKind(appliance.kind)
        longest = max(appliance.duration_hours)
        windows = sorted(tuple(window) for window in appliance.start_hours)
        headroom = reserve_hours if kind is LoadKind.SHIFTABLE else 0.0
        latest_end = windows[-1][1] + longest + headroom
        if latest_end > 24:
            problems.append((path, f"{name} can run past midnight: latest start {windows[-1][1]} h + "
                                   f"{longest} h + {headroom:g} h delay reserve = {latest_end:g} h > 24 h"))
        for (_, hi), (lo, _) in zip(windows, windows[1:]):
            if hi + longest > lo:
                problems.append((path, f"{name} start windows overlap once {longest} h durations are added"))
        if max(appliance.instances) > len(windows):
            problems.append((path, f"{name} needs one start window per instance"))
        for hours, field_name in [(h, "duration_hours") for h in appliance.duration_hours] + \
                [(h, "start_hours") for window in windows for h in window]:
            try:
                grid.slot_of_hour(hours, f"{path}.{field_name}")
            except ConfigurationError as exc:
                problems.extend(exc.violations)
        max_flex_kwh += appliance.rated_kw * longest * max(appliance.instances)
    if max_flex_kwh > spec.target_daily_kwh * (1 + ENERGY_BAND):
        problems.append(("community.appliances", f"flexible devices can demand {max_flex_kwh:g} kWh, more than "
                                                 f"the {spec.target_daily_kwh:g} kWh daily target allows"))
    if problems:
        raise ConfigurationError(problems)


def _sample_start(rng, window, grid):
    lo = grid.slot_of_hour(window[0], "start_hours")
    hi = grid.slot_of_hour(window[1], "start_hours")
    return int(rng.integers(lo, hi + 1))


def generate_community(spec, seed):
    grid = TimeGrid(spec.slots_per_day)
    check_catalog(spec, grid)
    shape = load_shape(spec.load_shape_csv, grid.T)
    rng = np.random.default_rng(seed)
    catalog = sorted(spec.appliances.items())

    customers = []
    for j in range(spec.homes):
        shiftables, thermostats = [], []
        flex_kwh = 0.0
        for name, appliance in catalog:
            cls = class_id(name, appliance)
            owned = rng.random() < appliance.penetration
            if not owned:
                continue
            windows = sorted(tuple(window) for window in appliance.start_hours)
            count = int(rng.choice(appliance.instances))
            chosen = sorted(rng.choice(len(windows), size=count, replace=False))
            if cls.kind is LoadKind.SHIFTABLE:
                # one run per chosen window
                for index in chosen:
                    hours = float(rng.choice(appliance.duration_hours))
                    load = make_shiftable(cls, appliance, _sample_start(rng, windows[index], grid), grid, hours)
                    shiftables.append(load)
                    flex_kwh += load.energy_kwh(grid)
            else:
                lo, hi = appliance.set_point_F
                set_point = float(rng.integers(int(lo), int(hi) + 1))
                spans = []
                for index in chosen:
                    start = _sample_start(rng, windows[index], grid)
                    hours = float(rng.choice(appliance.duration_hours))
                    spans.append((start, start + grid.slot_of_hour(hours, "duration_hours")))
                load = make_thermostat(cls, appliance, set_point, spans, grid, spec.num_states)
                thermostats.append(load)
                flex_kwh += load.energy_kwh(grid)
        jitter = rng.uniform(-spec.energy_jitter, spec.energy_jitter)
        residual = max(spec.target_daily_kwh * (1 + jitter) - flex_kwh, 0.0)
        base = LoadProfile(residual / 24.0 * shape)
        customers.append(Customer(j, base, tuple(shiftables), tuple(thermostats)))
    return Community(grid, customers, spec.num_states)
