"""Command-line scenario runner.

Subcommands
-----------
run <config> [--seed S] [--out DIR] [--horizon N] [--duration T]
    Execute one scenario and write trace.csv plus summary.txt. ``<config>``
    is either a bundled scenario id or a YAML file selecting one and
    overriding its parameters.
list-scenarios [--ids]
    Print bundled scenario ids (with one-line descriptions by default).

Exit codes: 0 success, 1 configuration/usage error, 2 solver
nonconvergence during the run, 3 tracking lost.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np
import yaml

from . import scenarios
from .simulate import SimTrace, metrics, rollout

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NONCONVERGED = 2
EXIT_TRACKING_LOST = 3


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_CONFIG)


def _build_parser() -> _Parser:
    parser = _Parser(prog="manifold-mpc", description="On-manifold tracking MPC scenarios")
    sub = parser.add_subparsers(dest="command", metavar="command")

    run = sub.add_parser("run", help="run a scenario", parents=[], add_help=True)
    run.add_argument("config", help="bundled scenario id or YAML config file")
    run.add_argument("--seed", type=int, default=None, help="disturbance seed override")
    run.add_argument("--out", default=None, help="output directory (default runs/<id>)")
    run.add_argument("--horizon", type=int, default=None, help="MPC horizon override")
    run.add_argument("--duration", type=float, default=None, help="run duration override, s")

    ls = sub.add_parser("list-scenarios", help="list bundled scenarios")
    ls.add_argument("--ids", action="store_true", help="machine readable: one id per line")
    return parser


def _load_config(arg: str) -> tuple[str, dict]:
    """Resolve the run argument into (scenario id, override dict)."""
    if os.path.isfile(arg):
        with open(arg, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
        if not isinstance(doc, dict) or "scenario" not in doc:
            raise ValueError("config file must be a mapping with a 'scenario' key")
        name = str(doc["scenario"])
        overrides = doc.get("overrides", {})
        if not isinstance(overrides, dict):
            raise ValueError("'overrides' must be a mapping")
        # top-level convenience keys
        if "seed" in doc:
            overrides = scenarios.merge_params(overrides, {"sim": {"seed": int(doc["seed"])}})
        if "duration_s" in doc:
            overrides = scenarios.merge_params(
                overrides, {"sim": {"duration_s": float(doc["duration_s"])}})
        if "horizon" in doc:
            overrides = scenarios.merge_params(
                overrides, {"mpc": {"horizon": int(doc["horizon"])}})
        out_dir = doc.get("out_dir")
        if out_dir is not None:
            overrides = scenarios.merge_params(overrides, {"_out_dir": str(out_dir)})
        return name, overrides
    if arg in scenarios.SCENARIOS:
        return arg, {}
    raise ValueError(f"'{arg}' is neither a config file nor a bundled scenario id")


def write_trace_csv(path: str, trace: SimTrace):
    amb = trace.x.shape[1]
    n = trace.dx.shape[1]
    mu = trace.u.shape[1]
    header = (
        ["t"]
        + [f"x{i}" for i in range(amb)]
        + [f"ref{i}" for i in range(amb)]
        + [f"dx{i}" for i in range(n)]
        + [f"u{i}" for i in range(mu)]
        + [f"ud{i}" for i in range(mu)]
        + ["solver_iters", "solve_time_us"]
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(len(trace)):
            row = (
                [trace.t[k]]
                + list(trace.x[k])
                + list(trace.x_ref[k])
                + list(trace.dx[k])
                + list(trace.u[k])
                + list(trace.u_d[k])
            )
            cells = [f"{v:.12g}" for v in row]
            cells.append(str(int(trace.iterations[k])))
            cells.append(f"{trace.solve_time_us[k]:.3f}")
            fh.write(",".join(cells) + "\n")


def read_trace_csv(path: str):
    """Parse a trace file back into (header list, float array)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(c) for c in line.strip().split(",")] for line in fh if line.strip()]
    return header, np.array(rows)


def write_summary(path: str, summary: dict):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(summary):
            fh.write(f"{key} = {summary[key]:.9g}\n")


def read_summary(path: str) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if "=" in line:
                key, val = line.split("=", 1)
                out[key.strip()] = float(val)
    return out


def run_command(args) -> int:
    try:
        name, overrides = _load_config(args.config)
        out_dir = overrides.pop("_out_dir", None)
        if args.seed is not None:
            overrides = scenarios.merge_params(overrides, {"sim": {"seed": args.seed}})
        if args.duration is not None:
            overrides = scenarios.merge_params(
                overrides, {"sim": {"duration_s": args.duration}})
        if args.horizon is not None:
            overrides = scenarios.merge_params(
                overrides, {"mpc": {"horizon": args.horizon}})
        scenario = scenarios.load_scenario(name, overrides)
    except (ValueError, KeyError, TypeError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.out is not None:
        out_dir = args.out
    if out_dir is None:
        out_dir = os.path.join("runs", scenario.name)
    os.makedirs(out_dir, exist_ok=True)

    trace = rollout(scenario)
    if len(trace) > 0:
        summary = metrics(trace)
    else:
        summary = {"ticks": 0.0, "failed": 1.0}
    write_trace_csv(os.path.join(out_dir, "trace.csv"), trace)
    write_summary(os.path.join(out_dir, "summary.txt"), summary)

    print(f"scenario {scenario.name}: {len(trace)} ticks -> {out_dir}")
    for key in ("max_pos_err_m", "rms_pos_err_m", "mean_solve_time_ms"):
        if key in summary:
            print(f"  {key} = {summary[key]:.6g}")
    if trace.failed:
        print("tracking lost: trace truncated", file=sys.stderr)
        return EXIT_TRACKING_LOST
    if len(trace) > 0 and not bool(np.all(trace.converged)):
        print("solver failed to converge on some ticks", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def list_command(args) -> int:
    for name in scenarios.scenario_ids():
        if args.ids:
            print(name)
        else:
            print(f"{name:12s}  {scenarios.SCENARIOS[name]['description']}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return run_command(args)
    if args.command == "list-scenarios":
        return list_command(args)
    parser.print_usage(sys.stderr)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
