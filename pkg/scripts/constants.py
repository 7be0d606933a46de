#!/usr/bin/env python

"""
Script: constants.py
Description:
    Unit conversions and numeric tolerances shared by every module. The unit regime is fixed:
    kW, kWh, degrees Fahrenheit, minutes, and BTU through 1 kWh = 3412.14 BTU.

    | name                        | value              | meaning                                     |
    |-----------------------------|--------------------|---------------------------------------------|
    | MINUTES_PER_DAY             | 1440               | length of the simulated day                 |
    | DEFAULT_SLOTS               | 288                | T, 5-minute slots                           |
    | BTU_PER_KWH                 | 3412.14            | energy conversion                           |
    | WATTS_PER_KW                | 1000               | EER is defined per watt of input            |
    | BTU_PER_HR_PER_TON          | 12000              | 1 ton of cooling                            |
    | WATER_LB_PER_GAL            | 8.33               | mass of a gallon of water                   |
    | WATER_HEAT_KWH_PER_GAL_F    | 8.33 / 3412.14     | c_w, energy to heat 1 gal by 1 F            |
    | EER_FLOOR                   | 8.0                | minimum EER allowed for AC units            |
    | SEVERITY_DECIMALS           | 9                  | severities are quantised to 1e-9 F          |
    | TEMPERATURE_TOLERANCE_F     | 1e-9               | slack when comparing deviations to bounds   |
    | MAX_PERMUTED_DEVICES        | 8                  | largest fleet searched over all orders      |
    | REPORT_DIGITS               | 6                  | significant digits in emitted files         |
"""

MINUTES_PER_DAY = 1440
MINUTES_PER_HOUR = 60
DEFAULT_SLOTS = 288

BTU_PER_KWH = 3412.14
WATTS_PER_KW = 1000.0
BTU_PER_HR_PER_TON = 12000.0

WATER_LB_PER_GAL = 8.33
WATER_HEAT_KWH_PER_GAL_F = WATER_LB_PER_GAL / BTU_PER_KWH

EER_FLOOR = 8.0

SEVERITY_DECIMALS = 9
TEMPERATURE_TOLERANCE_F = 1e-9
ENERGY_RTOL = 1e-9
PROFILE_NEGATIVE_TOLERANCE = 1e-9

MAX_PERMUTED_DEVICES = 8

REPORT_DIGITS = 6
FLOAT_FORMAT = "%.6g"

# allowed spread of a home's daily energy around the configured target
ENERGY_BAND = 0.10
