"""Linear and disequality propagators against the scanning oracle."""

import random

import pytest

from cpscope.constraints import Linear, Neq, ObjectiveBound, less_than
from cpscope.store import Outcome, Store

from oracles import linear_bounds_fixpoint, linear_solutions


def run_linear(bounds, coefs, rel, constant):
    store = Store()
    vs = [store.new_var(f"v{i}", lo, hi) for i, (lo, hi) in enumerate(bounds)]
    terms = tuple((c, v) for c, v in zip(coefs, vs))
    _, out = store.post(Linear(terms, rel, constant))
    if out.ok:
        out = store.propagate()
    if not out.ok:
        return None
    return [(store.dom(v).lo, store.dom(v).hi) for v in vs]


class TestLinearCases:
    def test_pheasant_rabbit_equations_force_solution(self):
        # p + r = 20 and 2p + 4r = 56 pin p=12, r=8 with no search
        store = Store()
        p = store.new_var("pheasants", 0, 20)
        r = store.new_var("rabbits", 0, 20)
        assert store.post(Linear(((1, p), (1, r)), "==", 20))[1].ok
        assert store.post(Linear(((2, p), (4, r)), "==", 56))[1].ok
        assert store.propagate().ok
        assert store.dom(p).value() == 12
        assert store.dom(r).value() == 8

    def test_difference_chain_fails_when_span_too_small(self):
        # x - y = 5 with both in 0..3 cannot hold
        assert run_linear([(0, 3), (0, 3)], [1, -1], "==", 5) is None

    def test_le_tightens_upper_bounds_only(self):
        got = run_linear([(0, 10), (2, 10)], [1, 1], "<=", 6)
        assert got == [(0, 4), (2, 6)]

    def test_ge_tightens_lower_bounds_only(self):
        got = run_linear([(0, 10), (0, 4)], [1, 1], ">=", 12)
        assert got == [(8, 10), (2, 4)]

    def test_negative_coefficients(self):
        # x - 2y >= 3, x in 0..10, y in 0..10 -> x >= 3, y <= 3
        got = run_linear([(0, 10), (0, 10)], [1, -2], ">=", 3)
        assert got == [(3, 10), (0, 3)]

    def test_rounding_toward_feasibility(self):
        # 2x <= 7 keeps x=3 (floor), 2x >= 7 forces x=4 (ceil)
        assert run_linear([(0, 10)], [2], "<=", 7) == [(0, 3)]
        assert run_linear([(0, 10)], [2], ">=", 7) == [(4, 10)]

    def test_unknown_relation_rejected(self):
        store = Store()
        x = store.new_var("x", 0, 5)
        with pytest.raises(ValueError):
            Linear(((1, x),), "!=", 3)

    def test_less_than_is_strict(self):
        store = Store()
        x = store.new_var("x", 0, 5)
        y = store.new_var("y", 0, 5)
        assert store.post(less_than(x, y))[1].ok
        assert store.propagate().ok
        assert (store.dom(x).hi, store.dom(y).lo) == (4, 1)

    def test_less_than_self_fails(self):
        store = Store()
        x = store.new_var("x", 0, 5)
        _, out = store.post(less_than(x, x))
        assert not out.ok


class TestLinearOracle:
    def test_random_three_term_instances(self):
        rng = random.Random(7311)
        for _ in range(400):
            n = rng.randint(1, 3)
            bounds = [
                (lo, lo + rng.randint(0, 8))
                for lo in (rng.randint(-5, 5) for _ in range(n))
            ]
            coefs = [rng.choice((-3, -2, -1, 1, 2, 3)) for _ in range(n)]
            rel = rng.choice(("==", "<=", ">="))
            lo, hi = (
                sum(c * b[0 if c >= 0 else 1] for c, b in zip(coefs, bounds)),
                sum(c * b[1 if c >= 0 else 0] for c, b in zip(coefs, bounds)),
            )
            constant = rng.randint(lo - 3, hi + 3)
            expect = linear_bounds_fixpoint(bounds, coefs, rel, constant)
            got = run_linear(bounds, coefs, rel, constant)
            assert got == expect, (bounds, coefs, rel, constant)

    def test_never_removes_an_integer_solution(self):
        rng = random.Random(7312)
        for _ in range(200):
            n = rng.randint(2, 3)
            bounds = [(0, rng.randint(1, 6)) for _ in range(n)]
            coefs = [rng.choice((-2, -1, 1, 2)) for _ in range(n)]
            rel = rng.choice(("==", "<=", ">="))
            constant = rng.randint(-4, 10)
            sols = linear_solutions(bounds, coefs, rel, constant)
            got = run_linear(bounds, coefs, rel, constant)
            if not sols:
                continue
            assert got is not None
            for tup in sols:
                for v, (lo, hi) in zip(tup, got):
                    assert lo <= v <= hi


class TestNeq:
    def test_waits_until_one_side_is_fixed(self):
        store = Store()
        x = store.new_var("x", 0, 5)
        y = store.new_var("y", 0, 5)
        store.post(Neq(x, y))
        store.propagate()
        assert store.dom(x).size == 6 and store.dom(y).size == 6

    def test_removes_fixed_value_from_peer(self):
        store = Store()
        x = store.new_var("x", 0, 5)
        y = store.new_var("y", 0, 5)
        store.post(Neq(x, y))
        store.set_value(y, 2)
        assert store.propagate().ok
        assert not store.dom(x).contains(2)

    def test_two_fixed_equal_yields_failure(self):
        store = Store()
        x = store.new_var("x", values=[4])
        y = store.new_var("y", values=[4])
        _, out = store.post(Neq(x, y))
        assert not out.ok


class TestObjectiveBound:
    def test_inactive_until_bound_set(self):
        store = Store()
        obj = store.new_var("obj", 0, 100)
        bc = ObjectiveBound(obj)
        _, out = store.post(bc)
        assert out.ok and store.dom(obj).hi == 100

    def test_clamps_objective_to_bound(self):
        # the engine feeds it incumbent - 1, making improvement strict
        store = Store()
        obj = store.new_var("obj", 0, 100)
        bc = ObjectiveBound(obj)
        store.post(bc)
        bc.bound = 40
        store.schedule(bc.cid)
        assert store.propagate().ok
        assert store.dom(obj).hi == 40

    def test_bound_survives_backtracking(self):
        # the incumbent is knowledge about the whole search, not the branch
        store = Store()
        obj = store.new_var("obj", 0, 100)
        bc = ObjectiveBound(obj)
        store.post(bc)
        store.push_choice()
        bc.bound = 40
        store.pop_choice()
        assert bc.bound == 40

    def test_silent_during_replay(self):
        store = Store()
        obj = store.new_var("obj", 0, 100)
        bc = ObjectiveBound(obj)
        store.post(bc)
        bc.bound = 40
        store.replaying = True
        store.schedule(bc.cid)
        assert store.propagate().ok
        store.replaying = False
        assert store.dom(obj).hi == 100  # replay reproduces the recorded tree
