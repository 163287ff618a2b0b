"""Store semantics: event normalization, the queue, and the trail.

The randomized trail check replays scripts of reductions and choice
pushes/pops against a pure snapshot model; matching snapshot keys mean
backtracking restores domains, constraint activity, and reversible
constraint attributes exactly.
"""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpscope.constraints import Linear, Neq, less_than
from cpscope.events import EventKind
from cpscope.store import Outcome, Store


def collect(store):
    events = []
    store.add_listener(events.append)
    return events


def kinds(events):
    return [e.kind for e in events]


class TestEventNormalization:
    def test_remove_interior_value_stays_remove(self):
        store = Store()
        x = store.new_var("x", 1, 5)
        ev = collect(store)
        store.remove_value(x, 3)
        assert kinds(ev) == [EventKind.REMOVE_VALUE]
        assert ev[0].before == ("1..5",) and ev[0].after == ("{1,2,4,5}",)

    def test_remove_at_min_becomes_set_min(self):
        store = Store()
        x = store.new_var("x", 1, 5)
        ev = collect(store)
        store.remove_value(x, 1)
        assert kinds(ev) == [EventKind.SET_MIN]
        assert store.dom(x).lo == 2

    def test_remove_at_max_becomes_set_max(self):
        store = Store()
        x = store.new_var("x", 1, 5)
        ev = collect(store)
        store.remove_value(x, 5)
        assert kinds(ev) == [EventKind.SET_MAX]

    def test_reduction_to_singleton_becomes_set_value(self):
        store = Store()
        x = store.new_var("x", values=[1, 3])
        ev = collect(store)
        store.remove_value(x, 3)
        assert kinds(ev) == [EventKind.SET_VALUE]
        assert store.dom(x).value() == 1

    def test_set_min_reports_set_min(self):
        store = Store()
        x = store.new_var("x", 0, 9)
        ev = collect(store)
        store.set_min(x, 4)
        assert kinds(ev) == [EventKind.SET_MIN]

    def test_noop_reduction_emits_nothing(self):
        store = Store()
        x = store.new_var("x", 0, 9)
        ev = collect(store)
        assert store.set_min(x, 0) is Outcome.NOOP
        assert ev == []

    def test_set_range_is_one_event(self):
        store = Store()
        x = store.new_var("x", 0, 10)
        ev = collect(store)
        assert store.set_range(x, 3, 7) is Outcome.REDUCED
        assert kinds(ev) == [EventKind.SET_MIN]  # both bounds moved, one event
        assert store.dom(x).text() == "3..7"

    def test_set_range_empty_fails_without_domain_event(self):
        store = Store()
        x = store.new_var("x", 0, 10)
        ev = collect(store)
        assert store.set_range(x, 8, 5) is Outcome.FAILED
        assert ev == []


class TestPostAndPropagate:
    def test_post_runs_initial_filter_inline(self):
        # x in {3}, y in {1,3}: posting x != y must fix y immediately
        store = Store()
        x = store.new_var("x", values=[3])
        y = store.new_var("y", values=[1, 3])
        ev = collect(store)
        _, out = store.post(Neq(x, y))
        assert out.ok
        assert kinds(ev) == [EventKind.POST_CONSTRAINT, EventKind.SET_VALUE]
        assert store.dom(y).value() == 1

    def test_post_inconsistent_fails_with_constraint_fail(self):
        # x < x is unsatisfiable on any domain
        store = Store()
        x = store.new_var("x", 0, 5)
        ev = collect(store)
        _, out = store.post(less_than(x, x))
        assert not out.ok
        assert kinds(ev) == [EventKind.POST_CONSTRAINT, EventKind.CONSTRAINT_FAIL]

    def test_equality_fixing_emits_single_set_value(self):
        # x + y = 10 with x already 3: exactly [propagate, SetValue(y)]
        store = Store()
        x = store.new_var("x", 0, 10)
        y = store.new_var("y", 0, 10)
        store.post(Linear(((1, x), (1, y)), "==", 10))
        store.set_value(x, 3)
        ev = collect(store)
        assert store.propagate().ok
        assert kinds(ev) == [EventKind.PROPAGATE_CONSTRAINT, EventKind.SET_VALUE]
        assert ev[1].var_ids == (y.vid,)
        assert store.dom(y).value() == 7

    def test_propagate_on_empty_queue_emits_nothing(self):
        store = Store()
        x = store.new_var("x", 0, 9)
        y = store.new_var("y", 0, 9)
        store.post(Neq(x, y))
        store.propagate()
        ev = collect(store)
        assert store.propagate().ok
        assert ev == []

    def test_queue_reruns_woken_constraint(self):
        store = Store()
        x = store.new_var("x", 0, 9)
        y = store.new_var("y", 0, 9)
        store.post(Neq(x, y))
        ev = collect(store)
        store.set_value(x, 4)
        assert store.propagate().ok
        assert kinds(ev) == [
            EventKind.SET_VALUE,
            EventKind.PROPAGATE_CONSTRAINT,
            EventKind.REMOVE_VALUE,
        ]
        assert not store.dom(y).contains(4)

    def test_failure_clears_queue(self):
        store = Store()
        x = store.new_var("x", values=[2])
        y = store.new_var("y", values=[2])
        z = store.new_var("z", 0, 9)
        store.post(Neq(y, z))
        _, out = store.post(Neq(x, y))  # filter fails inline: y loses its only value
        assert not out.ok
        ev = collect(store)
        assert not store.propagate().ok or ev == []


class TestEventPayloads:
    def test_seq_strictly_increasing(self):
        store = Store()
        x = store.new_var("x", 0, 9)
        y = store.new_var("y", 0, 9)
        ev = collect(store)
        store.post(Neq(x, y))
        store.set_value(x, 1)
        store.propagate()
        seqs = [e.seq for e in ev]
        assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)

    def test_events_carry_node_path(self):
        store = Store()
        x = store.new_var("x", 0, 9)
        store.current_path = (0, 1)
        ev = collect(store)
        store.set_min(x, 2)
        assert ev[0].node_path == (0, 1)

    def test_emit_disabled_suppresses_and_keeps_state(self):
        store = Store()
        x = store.new_var("x", 0, 9)
        ev = collect(store)
        store.emit_enabled = False
        store.set_min(x, 5)
        store.emit_enabled = True
        assert ev == [] and store.dom(x).lo == 5


# ----------------------------------------------------------------------
# trail


class _Model:
    """Pure-python mirror of domains across choice levels."""

    def __init__(self, doms):
        self.stack = [dict(doms)]

    @property
    def top(self):
        return self.stack[-1]

    def push(self):
        self.stack.append(dict(self.top))

    def pop(self):
        self.stack.pop()


def _mirror_apply(model, op, vid, a, b):
    vals = model.top[vid]
    if op == "set_min":
        new = {v for v in vals if v >= a}
    elif op == "set_max":
        new = {v for v in vals if v <= a}
    elif op == "remove":
        new = vals - {a}
    else:
        new = {v for v in vals if a <= v <= b}
    if not new:
        return False
    model.top[vid] = new
    return True


def trail_script(rng):
    """One randomized push/reduce/pop script, checked move for move against
    the set-of-sets mirror, ending with a full unwind to the root key."""
    ops = ("set_min", "set_max", "remove", "set_range")
    store = Store()
    nvars = rng.randint(1, 4)
    vs = [store.new_var(f"v{i}", 0, 9) for i in range(nvars)]
    model = _Model({v.vid: set(range(10)) for v in vs})
    keys = [store.snapshot_key()]
    depth = 0
    for _step in range(rng.randint(1, 40)):
        action = rng.random()
        if action < 0.30:
            store.push_choice()
            model.push()
            keys.append(store.snapshot_key())
            depth += 1
        elif action < 0.45 and depth > 0:
            store.pop_choice()
            model.pop()
            depth -= 1
            assert store.snapshot_key() == keys.pop()
        else:
            v = rng.choice(vs)
            op = rng.choice(ops)
            a = rng.randint(0, 9)
            b = rng.randint(a, 9) if op == "set_range" else 0
            ok = _mirror_apply(model, op, v.vid, a, b)
            if op == "set_min":
                out = store.set_min(v, a)
            elif op == "set_max":
                out = store.set_max(v, a)
            elif op == "remove":
                out = store.remove_value(v, a)
            else:
                out = store.set_range(v, a, b)
            if not ok:
                # mirror emptied the domain: the store must fail and
                # keep the previous domain so backtracking stays sound
                assert out is Outcome.FAILED
                model.top[v.vid] = set(store.dom(v).values())
            else:
                assert out is not Outcome.FAILED
        for v in vs:
            assert set(store.dom(v).values()) == model.top[v.vid]
    while depth > 0:
        store.pop_choice()
        depth -= 1
        assert store.snapshot_key() == keys.pop()


class TestTrail:
    def test_push_set_pop_restores(self):
        store = Store()
        x = store.new_var("x", 0, 9)
        store.push_choice()
        store.set_min(x, 5)
        assert store.dom(x).lo == 5
        store.pop_choice()
        assert store.dom(x).text() == "0..9"

    def test_pop_restores_constraint_activity(self):
        store = Store()
        x = store.new_var("x", 0, 9)
        y = store.new_var("y", 0, 9)
        key0 = store.snapshot_key()
        store.push_choice()
        store.post(Neq(x, y))
        store.set_value(x, 3)
        store.propagate()
        store.pop_choice()
        assert store.snapshot_key() == key0

    def test_pop_restores_reversible_attributes(self):
        class Holder:
            pass

        store = Store()
        h = Holder()
        h.tag = "before"
        store.push_choice()
        store.trail_set(h, "tag", "after")
        assert h.tag == "after"
        store.pop_choice()
        assert h.tag == "before"

    def test_nested_pops_unwind_in_order(self):
        store = Store()
        x = store.new_var("x", 0, 9)
        store.push_choice()
        store.set_min(x, 3)
        store.push_choice()
        store.set_max(x, 5)
        assert store.dom(x).text() == "3..5"
        store.pop_choice()
        assert store.dom(x).text() == "3..9"
        store.pop_choice()
        assert store.dom(x).text() == "0..9"

    def test_randomized_scripts_against_snapshot_model(self):
        rng = random.Random(20240817)
        for _ in range(300):
            trail_script(rng)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(0, 9), min_size=1, max_size=20), st.integers(0, 4))
    def test_push_pop_always_restores_key(self, reductions, splits):
        store = Store()
        x = store.new_var("x", 0, 9)
        y = store.new_var("y", 0, 9)
        base = store.snapshot_key()
        store.push_choice()
        for i, r in enumerate(reductions):
            v = x if i % 2 else y
            if i % 3 == 0:
                store.set_min(v, r)
            elif i % 3 == 1:
                store.set_max(v, r)
            else:
                store.remove_value(v, r)
        store.pop_choice()
        assert store.snapshot_key() == base
