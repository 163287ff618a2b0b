"""Search monitoring: per-node statistics, spy rows, trace files.

The SearchMonitor is the hub between the store's event stream, the
search engine's node lifecycle callbacks, and any number of sinks (a
trace-file writer, a debugger wire sender). Statistics are maintained
whether or not the spy is active; individual event rows are only
retained and forwarded while it is.

Node statistics: event_count counts every event attributed to the node;
size_before/size_after total the decision variables' domain sizes at
visit start and at the end of the node's own propagation phase; the root
measures size_before against the declared domains so its reduction
covers the initial propagation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .events import PropagationEvent
from .search import ChoiceFrame, NodePath, NodeState
from .store import Store

TRACE_VERSION = 1


def reduction_pct(size_before: int, size_after: int) -> float:
    """Percentage of the search space removed at a node, two decimals.
    Zero by definition when there was nothing to reduce."""
    if size_before < 0 or size_after < 0:
        raise ValueError("domain sizes must be non-negative")
    if size_after > size_before:
        raise ValueError("size_after exceeds size_before")
    if size_before == 0:
        return 0.0
    return round(100.0 * (size_before - size_after) / size_before, 2)


@dataclass
class NodeStats:
    event_count: int = 0
    size_before: int = 0
    size_after: int = 0
    reduction_pct: float = 0.0

    def as_dict(self) -> dict:
        return {
            "event_count": self.event_count,
            "size_before": self.size_before,
            "size_after": self.size_after,
            "reduction_pct": self.reduction_pct,
        }


@dataclass
class NodeRecord:
    path: NodePath
    state: NodeState = NodeState.WHITE
    choice_label: str = ""
    visit_order: Optional[int] = None
    stats: NodeStats = field(default_factory=NodeStats)

    @property
    def depth(self) -> int:
        return len(self.path)


_STATE_RANK = {
    NodeState.WHITE: 0,
    NodeState.BLUE: 1,
    NodeState.BLACK: 2,
    NodeState.GREEN: 2,
    NodeState.RED: 2,
}


class SearchMonitor:
    """Collects the live picture of one run."""

    def __init__(self, store: Store, sinks=(), all_vars: bool = False) -> None:
        self.store = store
        self.sinks = list(sinks)
        self.all_vars = all_vars
        self.nodes: dict[NodePath, NodeRecord] = {}
        self.frames: list[ChoiceFrame] = []
        self.spy_rows: list[dict] = []
        self.solutions: list[dict] = []
        self.spy_active = False
        self.header: dict = {}
        self.summary: dict = {}
        self.total_events = 0
        self._visit_counter = 0
        self._event_counts: dict[NodePath, int] = {(): 0}
        self._frozen_after: dict[NodePath, int] = {}
        self._started = False
        self._prerun_rows: list[dict] = []
        store.add_listener(self.on_event)

    # -- sizes -----------------------------------------------------------

    def _size_now(self) -> int:
        if self.all_vars:
            return sum(self.store.dom(v.vid).size for v in self.store.vars)
        return self.store.decision_size()

    def _declared_size(self) -> int:
        if self.all_vars:
            return sum(v.declared.size for v in self.store.vars)
        return self.store.declared_decision_size()

    # -- store events ------------------------------------------------------

    def on_event(self, ev: PropagationEvent) -> None:
        self.total_events += 1
        path = ev.node_path
        self._event_counts[path] = self._event_counts.get(path, 0) + 1
        if self.spy_active:
            row = self.event_row(ev)
            self.spy_rows.append(row)
            if not self._started:
                # posting happens before run_start; hold rows back so the
                # header stays the first record everywhere
                self._prerun_rows.append(row)
                return
            for sink in self.sinks:
                sink.prop(row)

    def event_row(self, ev: PropagationEvent) -> dict:
        names = tuple(self.store.var_name(v) for v in ev.var_ids)
        cname = (
            self.store.constraints[ev.constraint_id].name
            if ev.constraint_id is not None
            else None
        )
        return {
            "seq": ev.seq,
            "event": ev.kind.value,
            "vars": list(names),
            "before": list(ev.before),
            "after": list(ev.after),
            "constraint": cname,
            "cid": ev.constraint_id,
            "internal": ev.internal,
            "node": list(ev.node_path),
        }

    # -- spy ----------------------------------------------------------------

    def spy_activate(self, on: bool) -> None:
        self.spy_active = on

    # -- engine callbacks -----------------------------------------------------

    def run_start(self, header: dict) -> None:
        self.header = dict(header)
        self.header["version"] = TRACE_VERSION
        for sink in self.sinks:
            sink.header(self.header)
        self._started = True
        for row in self._prerun_rows:
            for sink in self.sinks:
                sink.prop(row)
        self._prerun_rows.clear()

    def node_created(self, path: NodePath, label: str) -> None:
        self.nodes[path] = NodeRecord(path, NodeState.WHITE, label)
        self._event_counts.setdefault(path, 0)
        for sink in self.sinks:
            sink.node_created(path, label)

    def node_visit(self, path: NodePath) -> None:
        rec = self.nodes[path]
        rec.state = NodeState.BLUE
        rec.visit_order = self._visit_counter
        self._visit_counter += 1
        rec.stats.size_before = self._declared_size() if path == () else self._size_now()
        for sink in self.sinks:
            sink.node_visit(path, rec.visit_order)

    def node_expanded(self, path: NodePath) -> None:
        self._frozen_after[path] = self._size_now()

    def node_done(self, path: NodePath, state: NodeState) -> None:
        rec = self.nodes[path]
        if _STATE_RANK[state] < _STATE_RANK[rec.state]:
            raise RuntimeError(f"state regression at {path}: {rec.state} -> {state}")
        rec.state = state
        if rec.visit_order is not None:
            rec.stats.event_count = self._event_counts.get(path, 0)
            rec.stats.size_after = self._frozen_after.get(path, None)
            if rec.stats.size_after is None:
                rec.stats.size_after = self._size_now()
            rec.stats.reduction_pct = reduction_pct(
                rec.stats.size_before, rec.stats.size_after
            )
        for sink in self.sinks:
            sink.node_done(path, state, rec.stats)

    def frame_push(self, frame: ChoiceFrame) -> None:
        self.frames.append(frame)
        for sink in self.sinks:
            sink.frame_push(frame)

    def frame_pop(self) -> None:
        self.frames.pop()
        for sink in self.sinks:
            sink.frame_pop()

    def solution(self, sol: dict) -> None:
        self.solutions.append(sol)
        for sink in self.sinks:
            sink.solution(sol)

    def run_done(self, summary: dict) -> None:
        counts: dict[str, int] = {}
        for rec in self.nodes.values():
            counts[rec.state.value] = counts.get(rec.state.value, 0) + 1
        self.summary = dict(summary)
        self.summary["nodes"] = {k: counts[k] for k in sorted(counts)}
        self.summary["events"] = self.total_events
        for sink in self.sinks:
            sink.summary(self.summary)

    # -- derived -----------------------------------------------------------

    def state_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for rec in self.nodes.values():
            counts[rec.state.value] = counts.get(rec.state.value, 0) + 1
        return counts


def run_engine(engine, header: dict) -> dict:
    """Drive one engine run with run_start/run_done bracketing."""
    monitor = engine.monitor
    if monitor is not None:
        monitor.run_start(header)
    result = engine.run()
    summary = {
        "outcome": result.outcome,
        "best_objective": result.best_objective,
        "solution_count": len(result.solutions),
    }
    if monitor is not None:
        monitor.run_done(summary)
        return monitor.summary
    return summary


# ----------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class ChristmasNode:
    radius: float
    shade: int  # 0..4, darker = more reduction


def christmas_geometry(
    nodes: dict[NodePath, NodeRecord],
    r_min: float = 4.0,
    r_max: float = 18.0,
    scaling: str = "sqrt",
) -> dict[NodePath, ChristmasNode]:
    """Radius proportional to each node's share of propagation events,
    shade bucketed from its reduction percentage (five 20% bands)."""
    if scaling not in ("sqrt", "linear"):
        raise ValueError(f"unknown scaling {scaling!r}")
    max_events = max((rec.stats.event_count for rec in nodes.values()), default=0)
    geometry = {}
    for path, rec in nodes.items():
        if max_events == 0:
            ratio = 0.0
        else:
            ratio = rec.stats.event_count / max_events
        if scaling == "sqrt":
            ratio = math.sqrt(ratio)
        radius = round(r_min + (r_max - r_min) * ratio, 3)
        shade = min(4, int(rec.stats.reduction_pct // 20))
        geometry[path] = ChristmasNode(radius, shade)
    return geometry


# ----------------------------------------------------------------------
# trace files


class TraceParseError(Exception):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _dump(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"


class TraceWriter:
    """Sink that writes the line-oriented trace format."""

    def __init__(self, path, include_timestamps: bool = False) -> None:
        self._fh = open(path, "w", encoding="utf-8")
        self.include_timestamps = include_timestamps

    def _write(self, record: dict) -> None:
        if self.include_timestamps:
            import time

            record = dict(record, ts=time.time())
        self._fh.write(_dump(record))

    def header(self, header: dict) -> None:
        self._write({"kind": "header", **header})

    def node_created(self, path: NodePath, label: str) -> None:
        self._write({"kind": "node", "ev": "created", "path": list(path), "label": label})

    def node_visit(self, path: NodePath, order: int) -> None:
        self._write({"kind": "node", "ev": "visit", "path": list(path), "order": order})

    def node_done(self, path: NodePath, state: NodeState, stats: NodeStats) -> None:
        self._write(
            {
                "kind": "node",
                "ev": "done",
                "path": list(path),
                "state": state.value,
                "stats": stats.as_dict(),
            }
        )

    def frame_push(self, frame: ChoiceFrame) -> None:
        self._write(
            {
                "kind": "frame",
                "ev": "push",
                "name": frame.name,
                "value": frame.value,
                "depth": frame.depth,
            }
        )

    def frame_pop(self) -> None:
        self._write({"kind": "frame", "ev": "pop"})

    def prop(self, row: dict) -> None:
        self._write({"kind": "prop", **row})

    def solution(self, sol: dict) -> None:
        self._write(
            {
                "kind": "solution",
                "path": list(sol["path"]),
                "objective": sol["objective"],
                "assignments": sol["assignments"],
            }
        )

    def summary(self, summary: dict) -> None:
        self._write({"kind": "summary", **summary})

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "TraceWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


@dataclass
class TraceData:
    header: dict
    nodes: dict[NodePath, NodeRecord]
    prop_rows: list[dict]
    solutions: list[dict]
    summary: dict
    frame_log: list[dict]


def load_trace(path) -> TraceData:
    """Parse a trace file back into node records, spy rows and summary.

    Raises TraceParseError (with the offending line number) on malformed
    input and rejects headers whose version does not match."""
    header: dict = {}
    nodes: dict[NodePath, NodeRecord] = {}
    prop_rows: list[dict] = []
    solutions: list[dict] = []
    summary: dict = {}
    frame_log: list[dict] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceParseError(lineno, f"invalid JSON: {exc.msg}") from exc
            kind = record.get("kind")
            if lineno == 1:
                if kind != "header":
                    raise TraceParseError(lineno, "first record must be the header")
                if record.get("version") != TRACE_VERSION:
                    raise TraceParseError(
                        lineno,
                        f"unsupported trace version {record.get('version')!r}",
                    )
                header = {k: v for k, v in record.items() if k != "kind"}
                continue
            if kind == "node":
                path = tuple(record["path"])
                ev = record["ev"]
                if ev == "created":
                    nodes[path] = NodeRecord(path, NodeState.WHITE, record["label"])
                elif ev == "visit":
                    rec = nodes.get(path)
                    if rec is None:
                        raise TraceParseError(lineno, f"visit of unknown node {path}")
                    rec.state = NodeState.BLUE
                    rec.visit_order = record["order"]
                elif ev == "done":
                    rec = nodes.get(path)
                    if rec is None:
                        raise TraceParseError(lineno, f"done of unknown node {path}")
                    rec.state = NodeState(record["state"])
                    s = record["stats"]
                    rec.stats = NodeStats(
                        s["event_count"],
                        s["size_before"],
                        s["size_after"],
                        s["reduction_pct"],
                    )
                else:
                    raise TraceParseError(lineno, f"unknown node event {ev!r}")
            elif kind == "frame":
                frame_log.append({k: v for k, v in record.items() if k != "kind"})
            elif kind == "prop":
                prop_rows.append({k: v for k, v in record.items() if k != "kind"})
            elif kind == "solution":
                solutions.append(
                    {
                        "path": tuple(record["path"]),
                        "objective": record["objective"],
                        "assignments": record["assignments"],
                    }
                )
            elif kind == "summary":
                summary = {k: v for k, v in record.items() if k != "kind"}
            else:
                raise TraceParseError(lineno, f"unknown record kind {kind!r}")
    if not header:
        raise TraceParseError(1, "empty trace (missing header)")
    return TraceData(header, nodes, prop_rows, solutions, summary, frame_log)
