#!/usr/bin/env python

"""
Script: thermal.py
Description:
    Physics of power-throttled thermostat devices. A device with K states draws a linearly spaced
    fraction of its rated power in each state (state 1 is OFF, state K is full power). The output
    temperature evolves slot by slot:

    - Air conditioner: the room gains heat at rate G(t) and the AC removes EER * q watts-equivalent
      of heat while demanded. Cooling acts with a negative sign on the room temperature.
    - Water heater: each slot mixes a draw of inlet water into the tank, adds the electric heating
      q * dt / (c_w * V) and subtracts the standing loss A * (theta - theta_a) / R.

    Heat gain and hot-water draw are calibrated so that continuous full-power operation holds the
    set point during the demand window; "deviation from set point" is therefore zero when the
    grid does not intervene.

Key Features:
    - throttle_power / state_powers: the state-to-power map.
    - cooling_capacity: EER times electrical input in watts, in BTU/hr.
    - ac_step / wh_step: one-slot temperature updates (pure).
    - simulate_temperature: forward recursion over a day for a given state assignment.
    - SlotResponse: the same recursion in affine form, for incremental re-simulation.

Output temperatures:
    theta_bar[t] is the temperature at the end of slot t, after the device ran in its slot-t state.
    Every contiguous demand interval starts from the set point (the device tracked its set point
    before the interval began).
"""

from dataclasses import dataclass

import numpy as np

from scripts.constants import (
    BTU_PER_KWH,
    EER_FLOOR,
    MINUTES_PER_HOUR,
    WATER_HEAT_KWH_PER_GAL_F,
    WATTS_PER_KW,
)
from scripts.errors import ModelError


@dataclass(frozen=True, eq=False)
class AcParams:
    alpha_kwh_per_F: float
    eer: float
    heat_gain_profile: np.ndarray  # kW of heat entering the room, per slot

    def __post_init__(self):
        if self.alpha_kwh_per_F <= 0:
            raise ModelError(f"alpha must be positive, got {self.alpha_kwh_per_F}")
        if self.eer < EER_FLOOR:
            raise ModelError(f"EER {self.eer} is below the {EER_FLOOR} floor")
        object.__setattr__(self, "heat_gain_profile", np.asarray(self.heat_gain_profile, dtype=float))


@dataclass(frozen=True, eq=False)
class WhParams:
    tank_volume_gal: float
    tank_area_ft2: float
    tank_resistance: float  # h*ft2*F/BTU
    inlet_temp_F: float
    flow_profile: np.ndarray  # gal/min drawn during each slot
    ambient_temp_profile: np.ndarray
    water_heat_const: float = WATER_HEAT_KWH_PER_GAL_F

    def __post_init__(self):
        for name in ("tank_volume_gal", "tank_area_ft2", "tank_resistance", "water_heat_const"):
            if getattr(self, name) <= 0:
                raise ModelError(f"{name} must be positive")
        object.__setattr__(self, "flow_profile", np.asarray(self.flow_profile, dtype=float))
        object.__setattr__(self, "ambient_temp_profile", np.asarray(self.ambient_temp_profile, dtype=float))
        if np.any(self.flow_profile < 0):
            raise ModelError("hot-water draw cannot be negative")

    def check_flow(self, dt_minutes):
        if np.any(self.flow_profile * float(dt_minutes) > self.tank_volume_gal):
            raise ModelError("a slot draws more water than the tank holds")


def throttle_power(k, K, rated_kw):
    if K < 2:
        raise ModelError(f"a throttled device needs at least 2 states, got K={K}")
    if not 1 <= k <= K:
        raise ModelError(f"state {k} outside 1..{K}")
    return (k - 1) / (K - 1) * rated_kw


def state_powers(K, rated_kw):
    """Q row: power drawn in states 1..K."""
    return np.array([throttle_power(k, K, rated_kw) for k in range(1, K + 1)])


def cooling_capacity(params, q_kw):
    """BTU/hr removed by an AC drawing q_kw."""
    return params.eer * q_kw * WATTS_PER_KW


def btu_per_hr_to_kw(btu_per_hr):
    return btu_per_hr / BTU_PER_KWH


def ac_step(theta_t, q_kw, params, t, demanded, dt_minutes):
    hours = float(dt_minutes) / MINUTES_PER_HOUR
    removed_kw = btu_per_hr_to_kw(cooling_capacity(params, q_kw)) if demanded else 0.0
    # cooling enters with a negative sign
    return theta_t + hours * (params.heat_gain_profile[t] - removed_kw) / params.alpha_kwh_per_F


def standing_loss_kw(params, theta, t):
    return params.tank_area_ft2 * (theta - params.ambient_temp_profile[t]) / params.tank_resistance / BTU_PER_KWH


def wh_step(theta_t, q_kw, params, t, dt_minutes):
    minutes = float(dt_minutes)
    hours = minutes / MINUTES_PER_HOUR
    volume = params.tank_volume_gal
    drawn = params.flow_profile[t] * minutes
    mixed = (theta_t * (volume - drawn) + params.inlet_temp_F * drawn) / volume
    heating = (q_kw - standing_loss_kw(params, theta_t, t)) * hours / (params.water_heat_const * volume)
    return mixed + heating


def calibrated_heat_gain(eer, rated_kw, demand_mask):
    """Heat gain that full-power cooling exactly cancels, constant over the day."""
    gain = btu_per_hr_to_kw(eer * rated_kw * WATTS_PER_KW)
    return np.full(len(demand_mask), gain)


def calibrated_flow(rated_kw, set_point_F, inlet_temp_F, tank_area_ft2, tank_resistance, ambient, demand_mask,
                    water_heat_const=WATER_HEAT_KWH_PER_GAL_F):
    """Draw (gal/min) that full-power heating replaces exactly at the set point; zero outside the demand."""
    if set_point_F <= inlet_temp_F:
        raise ModelError(f"set point {set_point_F} F must exceed the inlet temperature {inlet_temp_F} F")
    ambient = np.asarray(ambient, dtype=float)
    loss = tank_area_ft2 * (set_point_F - ambient) / tank_resistance / BTU_PER_KWH
    if np.any(loss[np.asarray(demand_mask, dtype=bool)] >= rated_kw):
        raise ModelError("standing loss exceeds the heater's rated power")
    flow = (rated_kw - loss) / (MINUTES_PER_HOUR * water_heat_const * (set_point_F - inlet_temp_F))
    return np.where(demand_mask, flow, 0.0)


def _step(load, theta, state, t, demanded, dt_minutes):
    q_kw = throttle_power(state, load.num_states, load.rated_kw) if demanded else 0.0
    if isinstance(load.thermal, AcParams):
        return ac_step(theta, q_kw, load.thermal, t, demanded, dt_minutes)
    return wh_step(theta, q_kw, load.thermal, t, dt_minutes)


def simulate_temperature(load, C, grid, initial_temp=None):
    """Temperature sequence for `load` operated per state matrix C (or a per-slot state vector)."""
    states = C.states() if hasattr(C, "states") else np.asarray(C, dtype=int)
    theta = load.set_point_F if initial_temp is None else initial_temp
    temps = np.empty(grid.T)
    window_starts = {start for start, _ in load.demand_windows}
    for t in range(grid.T):
        if t in window_starts:
            theta = load.set_point_F
        state = int(states[t])
        theta = _step(load, theta, state, t, state > 0, grid.dt_minutes)
        temps[t] = theta
    return temps


class SlotResponse:
    """
    Affine form of ac_step / wh_step for one device: theta[t] = a[t] * theta[t-1] + b[t] + c[t] * q[t].
    The scheduler re-simulates through it after every escalation, touching only the slots downstream
    of the changed one.
    """

    def __init__(self, load, grid):
        T = grid.T
        hours = grid.hours
        minutes = float(grid.dt_minutes)
        params = load.thermal
        if isinstance(params, AcParams):
            self.a = np.ones(T)
            self.b = hours * params.heat_gain_profile[:T] / params.alpha_kwh_per_F
            self.c = np.full(T, -hours * params.eer * WATTS_PER_KW / BTU_PER_KWH / params.alpha_kwh_per_F)
        else:
            volume = params.tank_volume_gal
            drawn = params.flow_profile[:T] * minutes
            loss = params.tank_area_ft2 * hours / (params.tank_resistance * BTU_PER_KWH * params.water_heat_const * volume)
            self.a = (volume - drawn) / volume - loss
            self.b = params.inlet_temp_F * drawn / volume + loss * params.ambient_temp_profile[:T]
            self.c = np.full(T, hours / (params.water_heat_const * volume))
        self.set_point = load.set_point_F
        self.starts = sorted(start for start, _ in load.demand_windows)

    def simulate(self, q_kw):
        a, b, c = self.a.tolist(), self.b.tolist(), self.c.tolist()
        q_kw = np.asarray(q_kw, dtype=float).tolist()
        resets = set(self.starts)
        temps = []
        theta = self.set_point
        for t in range(len(a)):
            if t in resets:
                theta = self.set_point
            theta = a[t] * theta + b[t] + c[t] * q_kw[t]
            temps.append(theta)
        return np.array(temps)

    def nudge(self, temps, slot, delta_q):
        """Add the effect of changing q[slot] by delta_q to temps, in place, up to the next window start."""
        stop = next((start for start in self.starts if start > slot), self.a.size)
        kick = self.c[slot] * delta_q
        temps[slot] += kick
        if stop > slot + 1:
            temps[slot + 1:stop] += kick * np.cumprod(self.a[slot + 1:stop])
        return temps
