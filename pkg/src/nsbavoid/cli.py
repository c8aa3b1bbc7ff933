"""Batch front-end: load a scenario file, run it, emit logs/metrics/plots.

Exit codes are the only success/failure channel: 0 success, 2 scenario
rejected (message names the offending field), 3 non-finite state during
integration (message names the tick). Nothing is written on failure.
"""

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from . import simulator
from .scenario_io import ScenarioFormatError, load_scenario

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NONFINITE = 3

CONTROLLER_CHOICES = ("nsb", "nsb-arctan", "nsb-piecewise", "nsb-crisp", "apf")


def _split_controller(spec):
    """'nsb-arctan' -> ('nsb', 'arctan'); plain names pass through."""
    if spec.startswith("nsb-"):
        return "nsb", spec[len("nsb-") :]
    return spec, None


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _effective_config(doc, args, controller_spec=None):
    return {
        "scenario": str(args.scenario),
        "name": doc.get("name", ""),
        "controller": controller_spec or doc["controller"],
        "supervisor": doc["gains"]["supervisor"],
        "t_s": doc["gains"]["t_s"],
        "duration": doc["duration"],
        "seed": args.seed,
        "overrides": {
            "supervisor": args.supervisor,
            "controller": getattr(args, "controller", None),
            "ts": args.ts,
            "duration": args.duration,
        },
    }


def _plot_script(log):
    """Gnuplot commands rendering the paper-style figures from the CSV."""
    n = log.n
    x, y = n + 2, n + 3
    xd, yd = n + 5, n + 6
    sigma_col = n + 8
    qd1, qd2 = n + 11, n + 12
    return f"""\
# gnuplot script; run from this directory: gnuplot plot.gp
set datafile separator ','
set terminal pngcairo size 900,600
set grid

set output 'path.png'
set xlabel 'x [m]'
set ylabel 'y [m]'
plot 'trajectory.csv' every ::1 using {xd}:{yd} with lines lw 2 title 'planned path', \\
     'trajectory.csv' every ::1 using {x}:{y} with lines lw 2 title 'actual path'

set output 'sigma.png'
set xlabel 't [s]'
set ylabel 'total pseudo-energy'
plot 'trajectory.csv' every ::1 using 1:{sigma_col} with lines lw 2 title 'sigma'

set output 'velocity.png'
set xlabel 't [s]'
set ylabel 'commanded velocity'
plot 'trajectory.csv' every ::1 using 1:{qd1} with lines title 'qdot 1 (x)', \\
     'trajectory.csv' every ::1 using 1:{qd2} with lines title 'qdot 2 (y)'
"""


def _run_one(scenario):
    log = simulator.run(scenario)
    result = {"metrics": simulator.metrics(log, scenario)}
    if log.partner is not None:
        partner_scenario = dataclasses.replace(scenario, path=scenario.second_robot.path)
        result["robot2_metrics"] = simulator.metrics(log.partner, partner_scenario)
    return log, result


def _write_outputs(out_dir, log, payload):
    out_dir.mkdir(parents=True, exist_ok=True)
    log.to_csv(out_dir / "trajectory.csv")
    if log.partner is not None:
        log.partner.to_csv(out_dir / "trajectory_robot2.csv")
    with open(out_dir / "metrics.json", "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2)
        fh.write("\n")
    (out_dir / "plot.gp").write_text(_plot_script(log))


def cmd_run(args):
    controller, supervisor = (
        _split_controller(args.controller) if args.controller else (None, None)
    )
    scenario, doc = load_scenario(
        args.scenario,
        supervisor=args.supervisor or supervisor,
        controller=controller,
        t_s=args.ts,
        duration=args.duration,
    )
    log, result = _run_one(scenario)
    payload = {"effective_config": _effective_config(doc, args), **result}
    out = Path(args.out)
    _write_outputs(out, log, payload)
    if not args.quiet:
        print(f"wrote {out / 'trajectory.csv'}")
        for key, val in result["metrics"].items():
            if not isinstance(val, dict):
                print(f"  {key}: {val:.6g}")
    return EXIT_OK


def cmd_compare(args):
    if len(args.controllers) < 2:
        raise ScenarioFormatError("compare needs at least two controllers", "$.controllers")
    runs = []
    for spec in args.controllers:
        controller, supervisor = _split_controller(spec)
        scenario, doc = load_scenario(
            args.scenario,
            supervisor=args.supervisor or supervisor,
            controller=controller,
            t_s=args.ts,
            duration=args.duration,
        )
        log, result = _run_one(scenario)
        payload = {
            "effective_config": _effective_config(doc, args, controller_spec=spec),
            **result,
        }
        runs.append((spec, log, payload))
    out = Path(args.out)
    table = {}
    for spec, log, payload in runs:
        _write_outputs(out / spec, log, payload)
        table[spec] = payload["metrics"]
    with open(out / "comparison.json", "w") as fh:
        json.dump(_jsonable(table), fh, indent=2)
        fh.write("\n")
    if not args.quiet:
        keys = ["min_clearance", "max_path_deviation", "return_time", "chattering", "final_goal_error"]
        print(f"{'controller':<16}" + "".join(f"{k:>20}" for k in keys))
        for spec, m in table.items():
            print(f"{spec:<16}" + "".join(f"{m[k]:>20.6g}" for k in keys))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nsbavoid",
        description="Run obstacle-avoidance scenarios for the 8-dof mobile manipulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario file path or bundled name")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument(
            "--supervisor",
            choices=("arctan", "piecewise", "crisp"),
            help="override the task-combination supervisor",
        )
        p.add_argument("--ts", type=float, help="override the sampling time [s]")
        p.add_argument("--duration", type=float, help="override the run duration [s]")
        p.add_argument(
            "--seed", type=int, default=None, help="reserved; scenarios are deterministic"
        )
        p.add_argument("--quiet", action="store_true", help="suppress progress output")

    p_run = sub.add_parser("run", help="run one scenario")
    common(p_run)
    p_run.add_argument(
        "--controller",
        choices=CONTROLLER_CHOICES,
        help="override the controller selection",
    )
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run one scenario under several controllers")
    common(p_cmp)
    p_cmp.add_argument(
        "--controllers",
        required=True,
        help="comma-separated controller list, e.g. nsb-arctan,apf",
    )
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "controllers", None) is not None:
        args.controllers = [c.strip() for c in args.controllers.split(",") if c.strip()]
        bad = [c for c in args.controllers if c not in CONTROLLER_CHOICES]
        if bad:
            print(f"error: unknown controller(s) {bad}", file=sys.stderr)
            return EXIT_SCHEMA
    try:
        return args.func(args)
    except (ScenarioFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except simulator.NonFiniteStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONFINITE


if __name__ == "__main__":
    sys.exit(main())
