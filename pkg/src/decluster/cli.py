"""Command-line front end: simulate, classify, and sweep scenarios.

Exit codes: 0 success, 2 validation error (bad scenario, arguments, or
geometry), 3 simulation error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import Scenario, run, sweep
from .core import (
    ClusterError,
    ConfigError,
    DomainError,
    GeometryError,
    SchemaError,
    StiffnessError,
    ThresholdError,
)
from .regimes import classify_kernel, classify_state
from .core import Configuration

_VALIDATION_ERRORS = (SchemaError, ConfigError, DomainError, GeometryError, OSError)
_SIMULATION_ERRORS = (StiffnessError, ClusterError, ThresholdError)


def _cmd_simulate(args) -> int:
    scenario = Scenario.load(args.scenario)
    paths, summary = run(scenario, args.out)
    print(json.dumps({"outputs": paths, "summary": summary}, indent=2, sort_keys=True))
    return 0


def _cmd_classify(args) -> int:
    scenario = Scenario.load(args.scenario)
    kernel = scenario.build_kernel()
    M = float(scenario.control.get("M", 0.0))
    if scenario.mode == "micro" and M > 0:
        c0 = Configuration(scenario.build_positions())
        report = classify_state(c0, kernel, scenario.build_generator(), M).to_dict()
    else:
        report = {"kernel_cell": list(classify_kernel(kernel))}
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _cmd_sweep(args) -> int:
    scenario = Scenario.load(args.scenario)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise SchemaError(f"bad sweep values {args.values!r}: {exc}") from exc
    rows = sweep(scenario, args.axis, values, args.out)
    print(json.dumps(rows, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decluster",
        description="Declustering-control simulations of consensus dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one scenario and write its artifacts")
    p_sim.add_argument("--scenario", required=True, help="scenario JSON file")
    p_sim.add_argument("--out", default=None, help="output directory (default: scenario outputs)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_cls = sub.add_parser("classify", help="print the regime report for a scenario")
    p_cls.add_argument("--scenario", required=True, help="scenario JSON file")
    p_cls.set_defaults(func=_cmd_classify)

    p_swp = sub.add_parser("sweep", help="run a scenario along one parameter axis")
    p_swp.add_argument("--scenario", required=True, help="scenario JSON file")
    p_swp.add_argument("--axis", required=True, help="M | seed | V0-scale")
    p_swp.add_argument("--values", required=True, help="comma-separated values")
    p_swp.add_argument("--out", default=None, help="output directory (default: scenario outputs)")
    p_swp.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _SIMULATION_ERRORS as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
