"""Constraint store: variables, trail, propagation queue, event stream.

The store owns the current domains, a chronological trail for exact
backtracking, and a FIFO propagator queue with re-entry suppression.
All domain mutation funnels through _apply(), which normalizes the
resulting event kind and wakes watching constraints. Determinism is a
contract: identical call sequences produce identical event sequences.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from .domain import Domain
from .events import EventKind, PropagationEvent

log = logging.getLogger(__name__)

ROOT_PATH: tuple[int, ...] = ()


class Outcome(Enum):
    REDUCED = "reduced"
    NOOP = "noop"
    FAILED = "failed"


@dataclass(frozen=True, slots=True)
class VarRef:
    """Handle for a store variable. `declared` is the domain at creation
    time; the current domain lives in the store. Decision variables are
    the ones reduction statistics aggregate over."""

    vid: int
    name: str
    declared: Domain
    decision: bool = True
    value_names: tuple[str, ...] | None = None

    def display_value(self, v: int) -> str:
        if self.value_names is not None and 0 <= v < len(self.value_names):
            return self.value_names[v]
        return str(v)


@dataclass(frozen=True)
class PropagationOutcome:
    ok: bool
    failed_constraint: int | None = None


class Constraint:
    """Base propagator. Subclasses set `name`, implement scope() and
    filter(). filter() returns False exactly when the constraint proved
    inconsistency; the engine that invoked it emits the ConstraintFail."""

    internal: bool = False

    def __init__(self) -> None:
        self.cid: int = -1
        self.name: str = type(self).__name__

    def scope(self) -> tuple[int, ...]:
        raise NotImplementedError

    def filter(self, store: "Store") -> bool:
        raise NotImplementedError

    def state_key(self):
        """Reversible extra state for snapshot comparisons (None if stateless)."""
        return None


# Trail entry tags.
_DOM = 0
_REV = 1
_POST = 2


class Store:
    def __init__(self) -> None:
        self.vars: list[VarRef] = []
        self._domains: list[Domain] = []
        self.constraints: list[Constraint] = []
        self._active: list[bool] = []
        self._watchers: list[list[int]] = []
        self._trail: list[tuple] = []
        self._markers: list[int] = []
        self._queue: deque[int] = deque()
        self._queued: set[int] = set()
        self._running: int | None = None
        self._listeners: list[Callable[[PropagationEvent], None]] = []
        self._seq = 0
        self.events_emitted = 0
        self.emit_enabled = True
        self.replaying = False
        self.current_path: tuple[int, ...] = ROOT_PATH
        self._last_fail_vid: int | None = None

    # ------------------------------------------------------------------
    # variables

    def new_var(
        self,
        name: str,
        lo: int | None = None,
        hi: int | None = None,
        values=None,
        decision: bool = True,
        value_names: tuple[str, ...] | None = None,
    ) -> VarRef:
        domain = Domain.of(values) if values is not None else Domain.interval(lo, hi)
        var = VarRef(len(self.vars), name, domain, decision, value_names)
        self.vars.append(var)
        self._domains.append(domain)
        self._watchers.append([])
        return var

    def dom(self, v: VarRef | int) -> Domain:
        return self._domains[v.vid if isinstance(v, VarRef) else v]

    def var_name(self, vid: int) -> str:
        return self.vars[vid].name

    def decision_size(self) -> int:
        """Total current domain size over decision variables."""
        return sum(d.size for var, d in zip(self.vars, self._domains) if var.decision)

    def declared_decision_size(self) -> int:
        return sum(var.declared.size for var in self.vars if var.decision)

    # ------------------------------------------------------------------
    # events

    def add_listener(self, fn: Callable[[PropagationEvent], None]) -> None:
        self._listeners.append(fn)

    def _emit(
        self,
        kind: EventKind,
        var_ids: tuple[int, ...],
        before: tuple[str, ...],
        after: tuple[str, ...],
        constraint_id: int | None,
        internal: bool,
    ) -> None:
        if not self.emit_enabled:
            return
        self._seq += 1
        self.events_emitted += 1
        ev = PropagationEvent(
            self._seq, kind, var_ids, before, after, constraint_id, internal, self.current_path
        )
        for fn in self._listeners:
            fn(ev)

    def emit_constraint_fail(self, cid: int | None, vid: int | None = None) -> None:
        """Report inconsistency. The failed variable defaults to the one
        whose reduction came up empty in the current filter run."""
        if vid is None:
            vid = self._last_fail_vid
        internal = self.constraints[cid].internal if cid is not None else False
        if vid is not None:
            self._emit(
                EventKind.CONSTRAINT_FAIL,
                (vid,),
                (self._domains[vid].text(),),
                ("{}",),
                cid,
                internal,
            )
        else:
            self._emit(EventKind.CONSTRAINT_FAIL, (), (), (), cid, internal)

    # ------------------------------------------------------------------
    # reductions

    def set_value(self, v, value: int, cause: int | None = None) -> Outcome:
        vid = v.vid if isinstance(v, VarRef) else v
        return self._apply(vid, self._domains[vid].with_value(value), cause)

    def set_min(self, v, value: int, cause: int | None = None) -> Outcome:
        vid = v.vid if isinstance(v, VarRef) else v
        return self._apply(vid, self._domains[vid].with_min(value), cause)

    def set_max(self, v, value: int, cause: int | None = None) -> Outcome:
        vid = v.vid if isinstance(v, VarRef) else v
        return self._apply(vid, self._domains[vid].with_max(value), cause)

    def remove_value(self, v, value: int, cause: int | None = None) -> Outcome:
        vid = v.vid if isinstance(v, VarRef) else v
        return self._apply(vid, self._domains[vid].remove(value), cause)

    def set_range(self, v, lo: int, hi: int, cause: int | None = None) -> Outcome:
        """Tighten both bounds as a single reduction (one event)."""
        vid = v.vid if isinstance(v, VarRef) else v
        if lo > hi:
            self._last_fail_vid = vid
            return Outcome.FAILED
        return self._apply(vid, self._domains[vid].clamp(lo, hi), cause)

    def reduce(self, v, action: str, value: int, cause: int | None = None) -> Outcome:
        """Name-dispatched reduction, mirroring the operation vocabulary."""
        fn = {
            "set_value": self.set_value,
            "set_min": self.set_min,
            "set_max": self.set_max,
            "remove_value": self.remove_value,
        }[action]
        return fn(v, value, cause)

    @staticmethod
    def _classify(old: Domain, new: Domain) -> EventKind:
        if new.is_singleton:
            return EventKind.SET_VALUE
        if new.lo > old.lo and new.hi == old.hi:
            return EventKind.SET_MIN
        if new.hi < old.hi and new.lo == old.lo:
            return EventKind.SET_MAX
        if new.lo > old.lo and new.hi < old.hi:
            # both bounds moved in one operation; report the stronger side
            return EventKind.SET_MIN
        return EventKind.REMOVE_VALUE

    def _apply(self, vid: int, new: Optional[Domain], cause: int | None) -> Outcome:
        old = self._domains[vid]
        if new is old:
            return Outcome.NOOP
        if new is None:
            self._last_fail_vid = vid
            return Outcome.FAILED
        self._trail.append((_DOM, vid, old))
        self._domains[vid] = new
        internal = self.constraints[cause].internal if cause is not None else False
        self._emit(
            self._classify(old, new), (vid,), (old.text(),), (new.text(),), cause, internal
        )
        for cid in self._watchers[vid]:
            if cid != self._running:
                self.schedule(cid)
        return Outcome.REDUCED

    # ------------------------------------------------------------------
    # constraints and propagation

    def post(self, constraint: Constraint) -> tuple[int, PropagationOutcome]:
        """Register a constraint, emit PostConstraint and run its initial
        filtering inline. Constraints it wakes are queued for propagate().
        Registration is trailed, so a post inside a branch is retracted on
        backtrack."""
        cid = len(self.constraints)
        constraint.cid = cid
        self.constraints.append(constraint)
        self._active.append(True)
        for vid in constraint.scope():
            self._watchers[vid].append(cid)
        self._trail.append((_POST, cid))
        self._emit(
            EventKind.POST_CONSTRAINT,
            constraint.scope(),
            (),
            (),
            cid,
            constraint.internal,
        )
        self._last_fail_vid = None
        self._running = cid
        ok = constraint.filter(self)
        self._running = None
        if not ok:
            self.emit_constraint_fail(cid)
            self._clear_queue()
            return cid, PropagationOutcome(False, cid)
        return cid, PropagationOutcome(True)

    def schedule(self, cid: int) -> None:
        if cid not in self._queued and self._active[cid]:
            self._queued.add(cid)
            self._queue.append(cid)

    def propagate(self) -> PropagationOutcome:
        """Run queued propagators FIFO until fixpoint or failure. Each
        dequeued run emits one PropagateConstraint event. On failure the
        queue is cleared and the failing constraint reported."""
        while self._queue:
            cid = self._queue.popleft()
            self._queued.discard(cid)
            if not self._active[cid]:
                continue
            c = self.constraints[cid]
            self._emit(
                EventKind.PROPAGATE_CONSTRAINT, c.scope(), (), (), cid, c.internal
            )
            self._last_fail_vid = None
            self._running = cid
            ok = c.filter(self)
            self._running = None
            if not ok:
                self.emit_constraint_fail(cid)
                self._clear_queue()
                return PropagationOutcome(False, cid)
        return PropagationOutcome(True)

    def _clear_queue(self) -> None:
        self._queue.clear()
        self._queued.clear()

    # ------------------------------------------------------------------
    # trail

    def trail_set(self, obj, attr: str, value) -> None:
        """Assign a reversible attribute (used by stateful constraints)."""
        self._trail.append((_REV, obj, attr, getattr(obj, attr)))
        setattr(obj, attr, value)

    def push_choice(self) -> int:
        self._markers.append(len(self._trail))
        return len(self._markers)

    def pop_choice(self) -> None:
        if not self._markers:
            raise RuntimeError("pop_choice with no pending marker")
        mark = self._markers.pop()
        while len(self._trail) > mark:
            entry = self._trail.pop()
            tag = entry[0]
            if tag == _DOM:
                _, vid, old = entry
                self._domains[vid] = old
            elif tag == _REV:
                _, obj, attr, old = entry
                setattr(obj, attr, old)
            else:  # _POST
                _, cid = entry
                self._active[cid] = False
                for vid in self.constraints[cid].scope():
                    popped = self._watchers[vid].pop()
                    assert popped == cid, "watcher retraction out of order"
        self._clear_queue()

    @property
    def depth(self) -> int:
        return len(self._markers)

    # ------------------------------------------------------------------
    # snapshots (tests, debugging)

    def snapshot_key(self) -> tuple:
        """Hashable image of the backtrackable state: domains plus the
        active constraints. Registry slots of retracted posts are skipped
        (registration order is permanent, activity is what backtracks),
        so states reached along different branches compare equal whenever
        their live constraints and domains agree."""
        live = tuple(
            (c.name, c.scope(), c.state_key())
            for c, active in zip(self.constraints, self._active)
            if active
        )
        return (tuple(self._domains), live)
