#!/usr/bin/env python

"""
Script: cli.py
Description:
    Command-line entry point. Three verbs work on a scenario file:

    - run:      evaluate every plan of the scenario on one seeded community and write
                summary.json, profiles_<plan>.csv, schedule_<plan>.csv and trace_<plan>.jsonl.
    - sweep:    evaluate the Cartesian product of the sweep axes on the same community and write
                sweep.csv, one row per grid point.
    - validate: report every problem in the scenario without simulating; prints "ok" when clean.

    Every command writes LOGFILE.txt to the output directory, whether it succeeds or not. Files are
    UTF-8 with LF line endings; floats carry 6 significant digits; nothing time-dependent is
    written, so reruns are byte-identical.

Usage:
    $ python main.py run --config scenarios/table1_plans.yaml --out-dir results
    $ python main.py sweep --config scenarios/figure3_sweep.yaml --workers 4
    $ python main.py validate --config scenarios/community_cdp.yaml

Dependencies:
    - Pandas: CSV output.
    - Colorama: coloured terminal output (through RunLog).
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import pandas as pd

from scripts.config import (
    apply_point,
    build_community,
    build_plan,
    build_plans,
    load_scenario,
    scenario_violations,
    sweep_points,
)
from scripts.constants import FLOAT_FORMAT
from scripts.coordinator import evaluate_plan, rounded
from scripts.errors import ConfigurationError, EngagementError
from scripts.runlog import RunLog


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def _write_csv(path, frame):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")


def _write_trace(path, trace):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in trace:
            handle.write(json.dumps(record) + "\n")


def _file_stem(name):
    return "".join(char if char.isalnum() or char in "-_" else "_" for char in name)


def _prepare(args, log):
    config = load_scenario(args.config)
    if args.seed is not None:
        config = config.model_copy(update={"seed": args.seed})
    out_dir = args.out_dir or config.outputs.directory
    args.resolved_out_dir = out_dir
    log.append(f"Scenario: {args.config}")
    log.append(f"Seed: {config.seed}")
    return config, out_dir


def run(args, log):
    config, out_dir = _prepare(args, log)
    plans = build_plans(config)
    community = build_community(config)
    os.makedirs(out_dir, exist_ok=True)
    log.info(f"Community: {len(community.customers)} homes, {community.grid.T} slots per day")

    summary = {
        "seed": config.seed,
        "homes": len(community.customers),
        "slots_per_day": community.grid.T,
        "plans": [],
    }
    for plan in plans:
        trace = []
        report = evaluate_plan(community, plan, config.order, config.phase_order, log, trace)
        stem = _file_stem(plan.name)
        _write_csv(os.path.join(out_dir, f"profiles_{stem}.csv"), report.profiles_frame(community.grid))
        _write_csv(os.path.join(out_dir, f"schedule_{stem}.csv"), report.schedule_frame())
        _write_trace(os.path.join(out_dir, f"trace_{stem}.jsonl"), trace)
        summary["plans"].append(report.to_summary())
        if any(report.device_counts.values()) and not any(report.eligible_counts.values()):
            log.warn(f"{plan.name}: no thermostat is eligible at the plan's reference temperatures")
        log.success(f"{plan.name}: {report.percent_peak_reduction:.3g}% peak reduction "
                    f"({report.peak_before:.6g} -> {report.peak_after_thermostat:.6g} kW)")
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    log.append(f"Results written to {out_dir}")
    return out_dir


def sweep_row(point, report):
    row = {path: (rounded(value) if isinstance(value, float) else value) for path, value in point.items()}
    row["num_states"] = report.num_states
    row["peak_reduction_pct"] = rounded(report.percent_peak_reduction)
    for name in report.eligible_counts:
        row[f"n_eligible_{name}"] = report.eligible_counts[name]
        row[f"theta_ave_{name}"] = rounded(report.avg_realized_deviation[name])
        row[f"severity_ave_{name}"] = rounded(report.avg_severity[name])
    return row


def evaluate_point(task):
    """One sweep point; module-level so worker processes can import it."""
    community, plan, point, config = task
    community, plan = apply_point(community, plan, point, config)
    report = evaluate_plan(community, plan, config.order, config.phase_order)
    return sweep_row(point, report)


def sweep(args, log):
    config, out_dir = _prepare(args, log)
    points = sweep_points(config)
    plan_config = config.plan_config(config.sweep.plan)
    plan = build_plan(plan_config, config.community.appliances)
    community = build_community(config)
    os.makedirs(out_dir, exist_ok=True)
    workers = max(1, args.workers or 1)
    log.info(f"Sweep over {len(points)} points of plan {plan.name} with {workers} worker(s)")

    tasks = [(community, plan, point, config) for point in points]
    if workers == 1:
        rows = [evaluate_point(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate_point, tasks))
    for row in rows:
        log.append(", ".join(f"{key}={value}" for key, value in row.items()))

    _write_csv(os.path.join(out_dir, "sweep.csv"), pd.DataFrame(rows))
    log.success(f"Sweep written to {os.path.join(out_dir, 'sweep.csv')}")
    return out_dir


def validate(args, log):
    try:
        config = load_scenario(args.config)
    except ConfigurationError as exc:
        problems = exc.violations
        out_dir = args.out_dir
    else:
        problems = scenario_violations(config)
        out_dir = args.out_dir or config.outputs.directory
    for path, text in problems:
        log.error(f"{path}: {text}" if path else text)
    if not problems:
        log.success("ok")
    return out_dir, not problems


def build_parser():
    parser = argparse.ArgumentParser(
        prog="engageplan",
        description="Simulate customer engagement plans for peak-load reduction in a residential community.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "evaluate every plan of a scenario"),
        ("sweep", "evaluate a grid of plan parameters"),
        ("validate", "check a scenario without running it"),
    ):
        command = commands.add_parser(name, help=text)
        command.add_argument("--config", required=True, help="scenario YAML file")
        command.add_argument("--out-dir", default=None, help="output directory (overrides outputs.directory)")
        command.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        command.add_argument("--workers", type=int, default=1, help="parallel sweep workers")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    log = RunLog()
    log.append(f"Command: {args.command}")
    out_dir = args.out_dir
    status = 0
    try:
        if args.command == "validate":
            out_dir, valid = validate(args, log)
            status = 0 if valid else 1
        elif args.command == "run":
            out_dir = run(args, log)
        else:
            out_dir = sweep(args, log)
    except EngagementError as exc:
        violations = getattr(exc, "violations", None)
        if violations:
            for path, text in violations:
                log.error(f"{path}: {text}" if path else text)
        else:
            log.error(str(exc))
        status = 1
    finally:
        log.write(out_dir or getattr(args, "resolved_out_dir", None) or os.getcwd())
    return status


if __name__ == "__main__":
    sys.exit(main())
