"""Side-by-side comparison of two recorded runs.

Meant for before/after questions: did a stronger filter level shrink the
tree, where did the extra events go, which right subtrees disappeared.
Structural comparison only makes sense for runs of the same model; on a
model mismatch the report carries a warning and skips that part.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .search import NodePath, right_subtree_report
from .trace import TraceData, reduction_pct


@dataclass
class SideSummary:
    model: str
    node_count: int
    state_counts: dict[str, int]
    total_events: int
    root_reduction_pct: float | None
    right_subtrees_by_depth: dict[int, int]


@dataclass
class CompareReport:
    a: SideSummary
    b: SideSummary
    same_model: bool
    warnings: list[str] = field(default_factory=list)
    # structural part (same model only)
    same_shape: bool | None = None
    only_in_a: int = 0
    only_in_b: int = 0
    matched_paths: int = 0
    event_deltas: dict[NodePath, int] = field(default_factory=dict)

    @property
    def all_deltas_zero(self) -> bool:
        return not self.event_deltas


def _summarize(trace: TraceData) -> SideSummary:
    counts: dict[str, int] = {}
    for rec in trace.nodes.values():
        counts[rec.state.value] = counts.get(rec.state.value, 0) + 1
    root = trace.nodes.get(())
    root_pct = None
    if root is not None and root.visit_order is not None:
        root_pct = reduction_pct(root.stats.size_before, root.stats.size_after)
    by_depth: dict[int, int] = {}
    for entry in right_subtree_report(trace.nodes):
        by_depth[entry.depth] = by_depth.get(entry.depth, 0) + 1
    return SideSummary(
        model=str(trace.header.get("model", "?")),
        node_count=len(trace.nodes),
        state_counts={k: counts[k] for k in sorted(counts)},
        total_events=int(trace.summary.get("events", 0)),
        root_reduction_pct=root_pct,
        right_subtrees_by_depth=by_depth,
    )


def compare_traces(trace_a: TraceData, trace_b: TraceData) -> CompareReport:
    a, b = _summarize(trace_a), _summarize(trace_b)
    report = CompareReport(a, b, same_model=a.model == b.model)
    if not report.same_model:
        report.warnings.append(
            f"model mismatch ({a.model} vs {b.model}); structural comparison skipped"
        )
        return report
    paths_a, paths_b = set(trace_a.nodes), set(trace_b.nodes)
    report.same_shape = paths_a == paths_b
    report.only_in_a = len(paths_a - paths_b)
    report.only_in_b = len(paths_b - paths_a)
    matched = paths_a & paths_b
    report.matched_paths = len(matched)
    for path in matched:
        delta = (
            trace_b.nodes[path].stats.event_count
            - trace_a.nodes[path].stats.event_count
        )
        if delta != 0:
            report.event_deltas[path] = delta
    return report


def _fmt_pct(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}%"


def format_report(report: CompareReport, max_deltas: int = 10) -> str:
    """Human-readable rendering for the command line."""
    lines = []
    for tag, side in (("A", report.a), ("B", report.b)):
        states = ", ".join(f"{k}={v}" for k, v in side.state_counts.items()) or "none"
        lines.append(f"[{tag}] model={side.model} nodes={side.node_count} ({states})")
        lines.append(
            f"[{tag}] events={side.total_events} root_reduction={_fmt_pct(side.root_reduction_pct)}"
        )
        depths = (
            ", ".join(f"d{d}:{n}" for d, n in sorted(side.right_subtrees_by_depth.items()))
            or "none"
        )
        lines.append(f"[{tag}] right subtrees by depth: {depths}")
    for warning in report.warnings:
        lines.append(f"warning: {warning}")
    if report.same_model:
        shape = "identical" if report.same_shape else (
            f"different (only in A: {report.only_in_a}, only in B: {report.only_in_b})"
        )
        lines.append(f"tree shape: {shape}; matched paths: {report.matched_paths}")
        if report.all_deltas_zero:
            lines.append("event-count deltas: all zero")
        else:
            lines.append(f"event-count deltas: {len(report.event_deltas)} nonzero")
            worst = sorted(
                report.event_deltas.items(), key=lambda kv: (-abs(kv[1]), kv[0])
            )[:max_deltas]
            for path, delta in worst:
                lines.append(f"  {list(path)}: {delta:+d}")
    return "\n".join(lines)
