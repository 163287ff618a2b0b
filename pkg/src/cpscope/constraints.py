"""Arithmetic propagators: disequality, linear (in)equalities, and the
global objective bound used by branch-and-bound."""

from __future__ import annotations

from .store import Constraint, Outcome, Store


def _floor_div(p: int, q: int) -> int:
    return p // q


def _ceil_div(p: int, q: int) -> int:
    return -((-p) // q)


class Neq(Constraint):
    """x != y (value consistency)."""

    def __init__(self, x, y) -> None:
        super().__init__()
        self.x = x.vid if hasattr(x, "vid") else x
        self.y = y.vid if hasattr(y, "vid") else y
        self.name = "neq"

    def scope(self) -> tuple[int, ...]:
        return (self.x, self.y)

    def filter(self, store: Store) -> bool:
        dx, dy = store.dom(self.x), store.dom(self.y)
        if dx.is_singleton:
            if store.remove_value(self.y, dx.value(), self.cid) is Outcome.FAILED:
                return False
        if dy.is_singleton:
            if store.remove_value(self.x, dy.value(), self.cid) is Outcome.FAILED:
                return False
        return True


class Linear(Constraint):
    """sum(coef_i * x_i) REL constant with REL in {==, <=, >=}.

    Bounds-consistent filtering by interval arithmetic, iterated to a
    local fixpoint. Duplicate variables are merged at construction, so a
    degenerate post like x < x collapses to a constant check and fails
    immediately.
    """

    def __init__(self, terms, rel: str, constant: int, name: str | None = None) -> None:
        super().__init__()
        if rel not in ("==", "<=", ">="):
            raise ValueError(f"unsupported relation {rel!r}")
        merged: dict[int, int] = {}
        for coef, v in terms:
            vid = v.vid if hasattr(v, "vid") else v
            merged[vid] = merged.get(vid, 0) + coef
        self.terms = tuple((c, vid) for vid, c in merged.items() if c != 0)
        self.rel = rel
        self.constant = constant
        self.name = name or f"linear{rel}"

    def scope(self) -> tuple[int, ...]:
        return tuple(vid for _, vid in self.terms)

    def _term_bounds(self, store: Store, coef: int, vid: int) -> tuple[int, int]:
        d = store.dom(vid)
        if coef >= 0:
            return coef * d.lo, coef * d.hi
        return coef * d.hi, coef * d.lo

    def filter(self, store: Store) -> bool:
        if not self.terms:
            if self.rel == "==":
                return self.constant == 0
            if self.rel == "<=":
                return 0 <= self.constant
            return 0 >= self.constant
        changed = True
        while changed:
            changed = False
            lows = []
            highs = []
            for coef, vid in self.terms:
                lo, hi = self._term_bounds(store, coef, vid)
                lows.append(lo)
                highs.append(hi)
            total_lo, total_hi = sum(lows), sum(highs)
            if self.rel in ("==", "<=") and total_lo > self.constant:
                return False
            if self.rel in ("==", ">=") and total_hi < self.constant:
                return False
            for i, (coef, vid) in enumerate(self.terms):
                others_lo = total_lo - lows[i]
                others_hi = total_hi - highs[i]
                d = store.dom(vid)
                lo_t, hi_t = d.lo, d.hi
                if self.rel in ("==", "<="):
                    slack = self.constant - others_lo  # coef*x <= slack
                    if coef > 0:
                        hi_t = min(hi_t, _floor_div(slack, coef))
                    else:
                        lo_t = max(lo_t, _ceil_div(slack, coef))
                if self.rel in ("==", ">="):
                    slack = self.constant - others_hi  # coef*x >= slack
                    if coef > 0:
                        lo_t = max(lo_t, _ceil_div(slack, coef))
                    else:
                        hi_t = min(hi_t, _floor_div(slack, coef))
                out = store.set_range(vid, lo_t, hi_t, self.cid)
                if out is Outcome.FAILED:
                    return False
                if out is Outcome.REDUCED:
                    changed = True
                    break  # bounds moved; recompute sums
        return True


def less_than(x, y) -> Linear:
    """x < y as a linear constraint (x - y <= -1)."""
    return Linear(((1, x), (-1, y)), "<=", -1, name="less_than")


class ObjectiveBound(Constraint):
    """Global strict-improvement bound: objective <= incumbent - 1.

    `bound` lives outside the trail on purpose: once a solution is found
    the bound applies to every subsequently explored branch, regardless
    of backtracking. During silent replay the filter no-ops so that state
    reconstruction cannot diverge from the recorded visit.
    """

    internal = True

    def __init__(self, objective) -> None:
        super().__init__()
        self.vid = objective.vid if hasattr(objective, "vid") else objective
        self.bound: int | None = None
        self.name = "objective-bound"

    def scope(self) -> tuple[int, ...]:
        return (self.vid,)

    def filter(self, store: Store) -> bool:
        if self.bound is None or store.replaying:
            return True
        return store.set_max(self.vid, self.bound, self.cid) is not Outcome.FAILED
