"""Command-line front end.

Subcommands: run a scenario (optionally writing its trace), benchmark the
per-tick solve, render plot files from a trace, emit bound contours for a
rectangle, and serve the live bridge.  An assisted run whose logged edge
potential breaks the safety bound exits nonzero so scripted checks fail
loudly.  TELESTEER_LOG controls log verbosity and nothing else.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .plots import PLOT_KINDS, export_contour_sheet, export_plot_data
from .scenarios import load_scenario
from .simtrace import SimTrace
from .simulate import benchmark, final_line_offset, run_scenario

log = logging.getLogger("telesteer")

VIOLATION_MARGIN = 1.01  # assisted runs may graze the bound, not cross it


def _setup_logging() -> None:
    level = os.environ.get("TELESTEER_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    assisted = not args.unassisted
    trace = run_scenario(scenario, assisted=assisted)
    if args.trace:
        trace.save(args.trace)
        log.info("trace written to %s", args.trace)

    max_p = trace.max_potential()
    offset = final_line_offset(scenario, trace)
    faulted = any(r.fault for r in trace.records)
    print(f"scenario: {scenario.name}")
    print(f"assisted: {'yes' if assisted else 'no'}")
    print(f"ticks: {len(trace)}")
    print(f"max edge potential: {max_p:.6g} (bound {scenario.alpha:.6g})")
    print(f"final path offset: {offset:.4f} m")
    if faulted:
        print("fault: solver gave up; vehicle stopped")

    if assisted and max_p > VIOLATION_MARGIN * scenario.alpha:
        print("VIOLATION: assisted run crossed the potential bound", file=sys.stderr)
        return 2
    if faulted:
        return 3
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    summary = benchmark(scenario, ticks=args.ticks)
    print(json.dumps(summary, sort_keys=True, indent=2))
    return 0


def _cmd_plot(args: argparse.Namespace) -> int:
    trace = SimTrace.load(args.trace)
    written = export_plot_data(trace, kind=args.kind, out_dir=args.out)
    for path in written:
        print(path)
    return 0


def _cmd_contours(args: argparse.Namespace) -> int:
    try:
        orders = tuple(int(tok) for tok in args.n.split(","))
        length, width = (float(tok) for tok in args.rect.split(","))
    except ValueError:
        print("contours: --n expects e.g. 2,4,6,8 and --rect L,W", file=sys.stderr)
        return 2
    written = export_contour_sheet(length, width, orders, out_dir=args.out)
    for path in written:
        print(path)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .bridge import create_app

    static = args.static if args.static and os.path.isdir(args.static) else None
    app = create_app(realtime=not args.stepped, static_dir=static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="telesteer",
        description="semi-autonomous steering correction simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario")
    p_run.add_argument("scenario", help="bundled scenario name or YAML path")
    mode = p_run.add_mutually_exclusive_group()
    mode.add_argument("--assisted", action="store_true", default=True,
                      help="steering correction on (default)")
    mode.add_argument("--unassisted", action="store_true",
                      help="teleoperator only, no correction")
    p_run.add_argument("--trace", help="write the run trace to this file")
    p_run.set_defaults(func=_cmd_run)

    p_bench = sub.add_parser("bench", help="time the per-tick solve")
    p_bench.add_argument("scenario", help="bundled scenario name or YAML path")
    p_bench.add_argument("--ticks", type=int, default=400)
    p_bench.set_defaults(func=_cmd_bench)

    p_plot = sub.add_parser("plot", help="render plot files from a trace")
    p_plot.add_argument("trace", help="trace file from run --trace")
    p_plot.add_argument("--kind", choices=PLOT_KINDS, required=True)
    p_plot.add_argument("--out", default="plots", help="output directory")
    p_plot.set_defaults(func=_cmd_plot)

    p_cont = sub.add_parser("contours", help="bound contours for a rectangle")
    p_cont.add_argument("--n", default="2,4,6,8", help="comma-separated even powers")
    p_cont.add_argument("--rect", default="4.6,1.8", help="length,width in meters")
    p_cont.add_argument("--out", default="plots", help="output directory")
    p_cont.set_defaults(func=_cmd_contours)

    p_serve = sub.add_parser("serve", help="run the live teleoperation bridge")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8700)
    p_serve.add_argument("--static", default="frontend/dist",
                         help="cockpit files to serve at /")
    p_serve.add_argument("--stepped", action="store_true",
                         help="advance only on step messages, for deterministic clients")
    p_serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
