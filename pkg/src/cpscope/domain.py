"""Finite integer domains.

A domain is a non-empty set of integers stored as an interval [lo, hi]
minus an explicit set of interior holes. Instances are immutable; every
reduction returns a new Domain, or None when the result would be empty.
Keeping bounds first-class makes min/max reasoning cheap and lets the
event layer tell bound updates apart from interior removals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional


def _normalize(lo: int, hi: int, holes: frozenset[int]) -> Optional["Domain"]:
    """Build a domain from raw parts, or None if it comes out empty."""
    while lo <= hi and lo in holes:
        lo += 1
    while hi >= lo and hi in holes:
        hi -= 1
    if lo > hi:
        return None
    trimmed = frozenset(h for h in holes if lo < h < hi)
    return Domain(lo, hi, trimmed)


@dataclass(frozen=True, slots=True)
class Domain:
    lo: int
    hi: int
    holes: frozenset[int] = frozenset()

    @staticmethod
    def interval(lo: int, hi: int) -> "Domain":
        if lo > hi:
            raise ValueError(f"empty interval {lo}..{hi}")
        return Domain(lo, hi)

    @staticmethod
    def of(values: Iterable[int]) -> "Domain":
        vals = sorted(set(values))
        if not vals:
            raise ValueError("empty value set")
        lo, hi = vals[0], vals[-1]
        holes = frozenset(set(range(lo, hi + 1)) - set(vals))
        return Domain(lo, hi, holes)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1 - len(self.holes)

    @property
    def is_singleton(self) -> bool:
        return self.lo == self.hi

    def value(self) -> int:
        if not self.is_singleton:
            raise ValueError(f"domain {self.text()} is not a singleton")
        return self.lo

    def contains(self, v: int) -> bool:
        return self.lo <= v <= self.hi and v not in self.holes

    def values(self) -> Iterator[int]:
        for v in range(self.lo, self.hi + 1):
            if v not in self.holes:
                yield v

    def remove(self, v: int) -> Optional["Domain"]:
        """Domain minus one value; self if v was absent; None if emptied."""
        if not self.contains(v):
            return self
        if self.is_singleton:
            return None
        return _normalize(self.lo, self.hi, self.holes | {v})

    def with_min(self, v: int) -> Optional["Domain"]:
        """Domain restricted to values >= v; self if already true."""
        if v <= self.lo:
            return self
        return _normalize(v, self.hi, self.holes)

    def with_max(self, v: int) -> Optional["Domain"]:
        """Domain restricted to values <= v; self if already true."""
        if v >= self.hi:
            return self
        return _normalize(self.lo, v, self.holes)

    def with_value(self, v: int) -> Optional["Domain"]:
        """Domain intersected with {v}; None if v is unsupported."""
        if not self.contains(v):
            return None
        if self.is_singleton:
            return self
        return Domain(v, v)

    def clamp(self, lo: int, hi: int) -> Optional["Domain"]:
        """Domain intersected with [lo, hi] in one step; self if already
        inside; None if emptied."""
        if lo <= self.lo and hi >= self.hi:
            return self
        return _normalize(max(lo, self.lo), min(hi, self.hi), self.holes)

    def text(self) -> str:
        """Snapshot used by events and traces: "12", "7..11" or "{1,3,4}"."""
        if self.is_singleton:
            return str(self.lo)
        if not self.holes:
            return f"{self.lo}..{self.hi}"
        return "{" + ",".join(str(v) for v in self.values()) + "}"

    def __iter__(self) -> Iterator[int]:
        return self.values()

    def __len__(self) -> int:
        return self.size
