"""Command line entry points: run models, compare traces, list models.

A run is headless by default (or with --no-ui): the search runs free and
writes its trace. With --port (or CPSCOPE_PORT set) the solver connects
to a listening debugger UI and obeys its session commands.
"""

from __future__ import annotations

import argparse
import os
import sys

from .alldifferent import FilterLevel
from .compare import compare_traces, format_report
from .models import BUILTIN_MODELS, build_model
from .protocol import WireMessage, encode
from .search import Engine, NodeState, SearchStrategy
from .server import DebugClient, HandshakeError, WireSink
from .store import Store
from .trace import SearchMonitor, TraceWriter, load_trace, run_engine

_FILTER_LEVELS = {level.value: level for level in FilterLevel}


def _parse_breakpoint(text: str) -> tuple[int, ...]:
    text = text.strip()
    if text in ("", "root", "[]"):
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"breakpoint path must be comma-separated child indices, got {text!r}"
        )


class _EventFileWriter:
    """Records the wire event stream of one run to a file (replay fixtures)."""

    def __init__(self, path: str, run_id: int) -> None:
        self._fh = open(path, "w", encoding="utf-8")
        self.run_id = run_id
        self._seq = 0

    def send(self, name: str, payload: dict) -> None:
        self._seq += 1
        msg = WireMessage("event", name, self.run_id, self._seq, payload)
        self._fh.write(encode(msg))

    def close(self) -> None:
        self._fh.close()


def _run_once(args, filter_level, strategy, control=None, wire_sink=None, run_id=1):
    """One complete run: fresh store, monitor wiring, model build, solve."""
    store = Store()
    sinks = []
    trace_writer = None
    event_file = None
    if args.trace:
        trace_writer = TraceWriter(args.trace)
        sinks.append(trace_writer)
    if args.events_out:
        event_file = _EventFileWriter(args.events_out, run_id)
        sinks.append(WireSink(event_file.send))
    if wire_sink is not None:
        sinks.append(wire_sink)
    monitor = SearchMonitor(store, sinks, all_vars=args.all_vars)
    if control is not None:
        control.attach(store, monitor)
    if args.spy:
        monitor.spy_activate(True)
    try:
        built = build_model(args.model, filter_level=filter_level, order=args.order, store=store)
        header = {
            "model": built.name,
            "strategy": strategy.describe(),
            "run_id": run_id,
            **built.options,
        }
        if not built.post_ok:
            # inconsistent before any search: a run with a single red root
            monitor.run_start(header)
            monitor.node_created((), "")
            monitor.node_visit(())
            monitor.node_done((), NodeState.RED)
            summary = {"outcome": "inconsistent", "best_objective": None, "solution_count": 0}
            monitor.run_done(summary)
        else:
            engine = Engine(
                store,
                built.goal,
                strategy,
                objective=built.objective,
                monitor=monitor,
                control=control,
            )
            summary = run_engine(engine, header)
    finally:
        if trace_writer is not None:
            trace_writer.close()
        if event_file is not None:
            event_file.close()
    return summary, monitor


def _print_run(summary: dict, monitor) -> None:
    counts = monitor.state_counts()
    states = " ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    print(f"outcome: {summary['outcome']}")
    print(f"nodes: {sum(counts.values())} ({states})")
    print(f"events: {monitor.total_events}")
    if summary.get("best_objective") is not None:
        print(f"best objective: {summary['best_objective']}")
    if monitor.solutions:
        last = monitor.solutions[-1]
        pairs = " ".join(f"{k}={v}" for k, v in last["assignments"].items())
        print(f"solution: {pairs}")


def _cmd_run(args) -> int:
    filter_level = _FILTER_LEVELS[args.filter_level] if args.filter_level else None
    try:
        strategy = SearchStrategy.parse(args.strategy)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.model not in BUILTIN_MODELS and not os.path.exists(args.model):
        print(f"error: unknown model {args.model!r} (not a builtin, not a file)", file=sys.stderr)
        return 2

    port = args.port
    if port is None and not args.no_ui:
        env = os.environ.get("CPSCOPE_PORT")
        if env:
            try:
                port = int(env)
            except ValueError:
                print(f"error: CPSCOPE_PORT={env!r} is not a port number", file=sys.stderr)
                return 2
    headless = args.no_ui or port is None

    if headless:
        if args.breakpoint:
            print("warning: breakpoints are ignored without an attached UI", file=sys.stderr)
        try:
            summary, monitor = _run_once(args, filter_level, strategy)
        except (ValueError, FileNotFoundError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        _print_run(summary, monitor)
        return 0 if summary["outcome"] != "aborted" else 1

    results = []

    def runner(control, wire_sink):
        summary, monitor = _run_once(
            args, filter_level, strategy, control, wire_sink, run_id=client.run_id
        )
        results.append((summary, monitor))

    client = DebugClient(
        args.host, port, model_name=args.model, runner=runner, breakpoints=args.breakpoint
    )
    try:
        client.run()
    except (ConnectionError, HandshakeError, OSError) as exc:
        print(f"error: debugger connection failed: {exc}", file=sys.stderr)
        return 1
    if not results:
        return 1
    summary, monitor = results[-1]
    _print_run(summary, monitor)
    return 0 if summary["outcome"] != "aborted" else 1


def _cmd_compare(args) -> int:
    try:
        trace_a = load_trace(args.trace_a)
        trace_b = load_trace(args.trace_b)
    except Exception as exc:  # missing file, malformed trace
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = compare_traces(trace_a, trace_b)
    print(format_report(report))
    return 0


def _cmd_list_models(_args) -> int:
    width = max(len(name) for name in BUILTIN_MODELS)
    for name, (description, _) in BUILTIN_MODELS.items():
        print(f"{name:<{width}}  {description}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpscope",
        description="Instrumented finite-domain solver with a search-tree debugger.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve a builtin model or a JSON model file")
    run.add_argument("model", help="builtin name (see list-models) or path to a model JSON")
    run.add_argument("--strategy", default="dfs", help="dfs (default) or lds[:K]")
    run.add_argument(
        "--filter-level",
        choices=sorted(_FILTER_LEVELS),
        default=None,
        help="alldifferent filter level (models that take one)",
    )
    run.add_argument(
        "--order",
        choices=("increasing", "decreasing"),
        default="increasing",
        help="task selection order for resource ranking models",
    )
    run.add_argument("--port", type=int, default=None, help="connect to a debugger UI on this port")
    run.add_argument("--host", default="127.0.0.1", help="debugger UI host (with --port)")
    run.add_argument("--no-ui", action="store_true", help="run headless (default without --port)")
    run.add_argument("--trace", default=None, help="write the run trace to this file")
    run.add_argument(
        "--events-out", default=None, help="record the wire event stream to this file"
    )
    run.add_argument(
        "--breakpoint",
        type=_parse_breakpoint,
        action="append",
        default=[],
        help="node path as comma-separated child indices (repeatable); '' for the root",
    )
    run.add_argument("--spy", action="store_true", help="start with the propagation spy active")
    run.add_argument(
        "--all-vars",
        action="store_true",
        help="measure reduction over all variables, not just decision variables",
    )
    run.set_defaults(fn=_cmd_run)

    comp = sub.add_parser("compare", help="compare two recorded traces")
    comp.add_argument("trace_a")
    comp.add_argument("trace_b")
    comp.set_defaults(fn=_cmd_compare)

    ls = sub.add_parser("list-models", help="list builtin models")
    ls.set_defaults(fn=_cmd_list_models)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
