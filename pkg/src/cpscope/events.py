"""Typed propagation events.

Every observable solver action is one event. Reductions are normalized
before they are emitted: a removal of the current minimum becomes SetMin,
of the current maximum SetMax, and any reduction that leaves a singleton
is reported as SetValue. Consumers (spy, trace, statistics) never see the
raw store operation, only the normalized kind.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class EventKind(Enum):
    POST_CONSTRAINT = "post_constraint"
    PROPAGATE_CONSTRAINT = "propagate_constraint"
    SET_VALUE = "set_value"
    SET_MIN = "set_min"
    SET_MAX = "set_max"
    REMOVE_VALUE = "remove_value"
    CONSTRAINT_FAIL = "constraint_fail"

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    EventKind.POST_CONSTRAINT: "Post Constraint",
    EventKind.PROPAGATE_CONSTRAINT: "Propagate Constraint",
    EventKind.SET_VALUE: "Set Value",
    EventKind.SET_MIN: "Set Min",
    EventKind.SET_MAX: "Set Max",
    EventKind.REMOVE_VALUE: "Remove Value",
    EventKind.CONSTRAINT_FAIL: "Constraint Fail",
}

REDUCTION_KINDS = frozenset(
    {EventKind.SET_VALUE, EventKind.SET_MIN, EventKind.SET_MAX, EventKind.REMOVE_VALUE}
)


@dataclass(frozen=True, slots=True)
class PropagationEvent:
    """One solver action, attributed to a constraint and a tree node.

    before/after hold textual domain snapshots for the affected variables
    (empty for post/propagate rows, a literal "{}" after-image for a
    failure that emptied a domain).
    """

    seq: int
    kind: EventKind
    var_ids: tuple[int, ...]
    before: tuple[str, ...]
    after: tuple[str, ...]
    constraint_id: int | None
    internal: bool
    node_path: tuple[int, ...]

    @property
    def is_reduction(self) -> bool:
        return self.kind in REDUCTION_KINDS
