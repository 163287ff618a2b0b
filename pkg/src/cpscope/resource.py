"""Unary (disjunctive) resources and ranking.

A resource owns a set of activities (start variable, fixed duration)
that must not overlap. Search fixes the order by repeatedly ranking one
activity first among the not-yet-ranked ones; ranking posts explicit
precedence constraints, which the trail retracts on backtrack. The
propagator itself only applies pairwise earliest-start/latest-end
reasoning among unranked activities; there is no edge finding.
"""

from __future__ import annotations

from dataclasses import dataclass

from .constraints import Linear
from .store import Constraint, Outcome, Store, VarRef


@dataclass(frozen=True, slots=True)
class Activity:
    index: int
    start: int  # vid
    duration: int
    name: str


class UnaryResource(Constraint):
    """No-overlap resource with a trailed ranking state.

    ranked    activity indices already sequenced, in order
    excluded  activities barred from being first at the current step
              (reset whenever a new activity is ranked first)
    """

    def __init__(self, name: str, activities: list[tuple[VarRef, int, str]]) -> None:
        super().__init__()
        self.name = name
        self.activities = tuple(
            Activity(i, var.vid, dur, label) for i, (var, dur, label) in enumerate(activities)
        )
        self.ranked: tuple[int, ...] = ()
        self.excluded: frozenset[int] = frozenset()

    def scope(self) -> tuple[int, ...]:
        return tuple(a.start for a in self.activities)

    def state_key(self):
        return (self.ranked, tuple(sorted(self.excluded)))

    # ------------------------------------------------------------------

    def unranked(self) -> tuple[Activity, ...]:
        ranked = set(self.ranked)
        return tuple(a for a in self.activities if a.index not in ranked)

    def is_ranked(self) -> bool:
        return len(self.ranked) == len(self.activities)

    def filter(self, store: Store) -> bool:
        """Pairwise reasoning among unranked activities: if neither order
        is feasible the node fails; if only one is, the forced
        predecessor tightens the other's earliest start."""
        changed = True
        while changed:
            changed = False
            acts = self.unranked()
            for i in range(len(acts)):
                for j in range(i + 1, len(acts)):
                    a, b = acts[i], acts[j]
                    ea, la = store.dom(a.start).lo, store.dom(a.start).hi
                    eb, lb = store.dom(b.start).lo, store.dom(b.start).hi
                    a_before = ea + a.duration <= lb
                    b_before = eb + b.duration <= la
                    if not a_before and not b_before:
                        return False
                    if not a_before:
                        out = store.set_min(a.start, eb + b.duration, self.cid)
                        if out is Outcome.FAILED:
                            return False
                        changed = changed or out is Outcome.REDUCED
                    elif not b_before:
                        out = store.set_min(b.start, ea + a.duration, self.cid)
                        if out is Outcome.FAILED:
                            return False
                        changed = changed or out is Outcome.REDUCED
        return True


def possible_firsts(store: Store, res: UnaryResource) -> list[Activity]:
    """Activities that may still run first among the unranked ones:
    not excluded, and able to finish before every peer's latest start."""
    acts = res.unranked()
    result = []
    for a in acts:
        if a.index in res.excluded:
            continue
        est_end = store.dom(a.start).lo + a.duration
        if all(est_end <= store.dom(b.start).hi for b in acts if b.index != a.index):
            result.append(a)
    return result


def nb_possible_first(store: Store, res: UnaryResource) -> int:
    return len(possible_firsts(store, res))


def rank_first(store: Store, res: UnaryResource, act_index: int) -> bool:
    """Sequence one activity before every other unranked activity.

    Posts a precedence constraint per remaining peer and clears the
    exclusion set (exclusions only constrain the step they were made
    at). Fails if the activity is not currently a possible first.
    """
    if act_index not in {a.index for a in possible_firsts(store, res)}:
        store.emit_constraint_fail(res.cid)
        return False
    act = res.activities[act_index]
    peers = [a for a in res.unranked() if a.index != act_index]
    store.trail_set(res, "ranked", res.ranked + (act_index,))
    store.trail_set(res, "excluded", frozenset())
    for b in peers:
        _, out = store.post(
            Linear(((1, b.start), (-1, act.start)), ">=", act.duration, name="precedence")
        )
        if not out.ok:
            return False
    store.schedule(res.cid)
    return True


def not_rank_first(store: Store, res: UnaryResource, act_index: int) -> bool:
    """Bar an activity from running first at the current step: some other
    unranked activity precedes it. When a single candidate remains it is
    ranked first on the spot (forced); with none left the node fails."""
    if act_index not in {a.index for a in possible_firsts(store, res)}:
        store.emit_constraint_fail(res.cid)
        return False
    store.trail_set(res, "excluded", res.excluded | {act_index})
    remaining = possible_firsts(store, res)
    if not remaining:
        store.emit_constraint_fail(res.cid)
        return False
    if len(remaining) == 1:
        return rank_first(store, res, remaining[0].index)
    return True
