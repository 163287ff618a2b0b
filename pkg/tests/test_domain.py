"""Domain value semantics: construction, reduction ops, rendering."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cpscope.domain import Domain


def values_of(d):
    return list(d.values()) if d is not None else None


class TestConstruction:
    def test_interval(self):
        d = Domain.interval(2, 5)
        assert values_of(d) == [2, 3, 4, 5]
        assert (d.lo, d.hi, d.size) == (2, 5, 4)

    def test_of_values(self):
        d = Domain.of([7, 3, 5, 3])
        assert values_of(d) == [3, 5, 7]
        assert d.holes == frozenset({4, 6})

    def test_empty_interval_rejected(self):
        with pytest.raises(ValueError):
            Domain.interval(5, 2)
        with pytest.raises(ValueError):
            Domain.of([])

    def test_singleton(self):
        d = Domain.interval(4, 4)
        assert d.is_singleton and d.value() == 4


class TestReduction:
    def test_remove_middle_keeps_bounds(self):
        d = Domain.interval(1, 5).remove(3)
        assert (d.lo, d.hi) == (1, 5)
        assert values_of(d) == [1, 2, 4, 5]

    def test_remove_at_bound_renormalizes(self):
        d = Domain.of([1, 2, 4, 5]).remove(5)
        assert (d.lo, d.hi) == (1, 4)
        assert d.holes == frozenset({3})

    def test_remove_missing_is_noop_identity(self):
        d = Domain.of([1, 3])
        assert d.remove(2) is d

    def test_remove_last_value_empties(self):
        assert Domain.interval(3, 3).remove(3) is None

    def test_with_min_skips_holes(self):
        d = Domain.of([1, 2, 5, 6]).with_min(3)
        assert values_of(d) == [5, 6]

    def test_with_max(self):
        d = Domain.of([1, 2, 5, 6]).with_max(4)
        assert values_of(d) == [1, 2]

    def test_with_min_noop_identity(self):
        d = Domain.interval(2, 9)
        assert d.with_min(2) is d
        assert d.with_min(1) is d

    def test_with_min_empty(self):
        assert Domain.interval(2, 4).with_min(5) is None

    def test_with_value(self):
        d = Domain.of([1, 3, 5])
        assert values_of(d.with_value(3)) == [3]
        assert d.with_value(2) is None

    def test_clamp_both_sides_at_once(self):
        d = Domain.interval(0, 10).clamp(3, 7)
        assert values_of(d) == [3, 4, 5, 6, 7]

    def test_clamp_noop_identity(self):
        d = Domain.interval(3, 5)
        assert d.clamp(0, 9) is d

    def test_clamp_empty(self):
        assert Domain.of([1, 2, 8, 9]).clamp(3, 7) is None

    def test_contains(self):
        d = Domain.of([1, 4])
        assert d.contains(4) and not d.contains(3) and not d.contains(9)


class TestText:
    def test_singleton_text(self):
        assert Domain.interval(12, 12).text() == "12"

    def test_interval_text(self):
        assert Domain.interval(7, 11).text() == "7..11"

    def test_holey_text_enumerates(self):
        assert Domain.of([1, 3, 4]).text() == "{1,3,4}"


small_sets = st.sets(st.integers(min_value=-8, max_value=8), min_size=1, max_size=10)


class TestProperties:
    @given(small_sets, st.integers(min_value=-9, max_value=9))
    def test_remove_matches_set_semantics(self, vals, v):
        d = Domain.of(vals).remove(v)
        assert (set(values_of(d)) if d else set()) == vals - {v}

    @given(small_sets, st.integers(min_value=-9, max_value=9))
    def test_with_min_matches_set_semantics(self, vals, lo):
        d = Domain.of(vals).with_min(lo)
        expect = {v for v in vals if v >= lo}
        assert (set(values_of(d)) if d else set()) == expect

    @given(small_sets, st.integers(-9, 9), st.integers(-9, 9))
    def test_clamp_matches_set_semantics(self, vals, lo, hi):
        d = Domain.of(vals).clamp(lo, hi)
        expect = {v for v in vals if lo <= v <= hi}
        assert (set(values_of(d)) if d else set()) == expect

    @given(small_sets)
    def test_bounds_never_sit_on_holes(self, vals):
        d = Domain.of(vals)
        assert d.contains(d.lo) and d.contains(d.hi)
        assert all(d.lo < h < d.hi for h in d.holes)
