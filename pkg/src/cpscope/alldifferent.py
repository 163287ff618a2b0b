"""alldifferent at three filter levels.

Basic      value consistency: iterated deletion of assigned values.
Bounds     basic closure plus shrinking every variable's bounds to the
           min/max of its exactly-supported values. Interior holes are
           never introduced beyond the basic rule, so this level only
           moves bounds, but it detects every failure the extended level
           does (supported sets are computed from the true domains).
Extended   domain consistency. Posting the user constraint also posts a
           hidden internal propagator that computes maximum matchings on
           the variable/value graph and deletes every value outside a
           strongly connected component or alternating path (the internal
           row is what a spy sees doing the heavy lifting).

Removals are issued in ascending variable id, ascending value order,
which the event normalizer turns into the characteristic cascades of
SetMin/SetMax rows when pruned values sit at a bound.
"""

from __future__ import annotations

from enum import Enum

from .domain import Domain
from .store import Constraint, Outcome, Store


class FilterLevel(Enum):
    BASIC = "basic"
    BOUNDS = "bounds"
    EXTENDED = "extended"


def _value_closure(store: Store, vids: tuple[int, ...], cid: int) -> bool:
    """Iterated assigned-value deletion over vids. False on wipeout."""
    done: set[int] = set()
    progress = True
    while progress:
        progress = False
        for vid in vids:
            d = store.dom(vid)
            if not d.is_singleton or vid in done:
                continue
            v = d.value()
            for other in vids:
                if other != vid and store.remove_value(other, v, cid) is Outcome.FAILED:
                    return False
            done.add(vid)
            progress = True
    return True


def supported_value_sets(domains: list[Domain]) -> list[set[int]] | None:
    """Exact per-variable supported values, or None when no perfect
    matching exists. An assignment edge survives iff it is matched, lies
    in a strongly connected component of the residual graph, or sits on
    an alternating path from a free value."""
    n = len(domains)
    values = sorted({v for d in domains for v in d.values()})
    m = len(values)
    if m < n:
        return None
    vindex = {v: j for j, v in enumerate(values)}
    adj = [[vindex[v] for v in d.values()] for d in domains]

    match_var = [-1] * n
    match_val = [-1] * m

    def augment(i: int, seen: list[bool]) -> bool:
        for j in adj[i]:
            if not seen[j]:
                seen[j] = True
                if match_val[j] == -1 or augment(match_val[j], seen):
                    match_var[i] = j
                    match_val[j] = i
                    return True
        return False

    for i in range(n):
        if not augment(i, [False] * m):
            return None

    # Residual digraph on nodes [0..n) vars, [n..n+m) values:
    #   var i  -> value match_var[i]          (matched edge)
    #   value j -> var i for j in adj[i]\{match_var[i]}  (unmatched edge)
    total = n + m
    out: list[list[int]] = [[] for _ in range(total)]
    for i in range(n):
        out[i].append(n + match_var[i])
        for j in adj[i]:
            if j != match_var[i]:
                out[n + j].append(i)

    scc = _tarjan(out)

    # Nodes reachable from free values along residual arcs.
    reachable = [False] * total
    stack = [n + j for j in range(m) if match_val[j] == -1]
    for node in stack:
        reachable[node] = True
    while stack:
        node = stack.pop()
        for nxt in out[node]:
            if not reachable[nxt]:
                reachable[nxt] = True
                stack.append(nxt)

    keep: list[set[int]] = []
    for i in range(n):
        kept = set()
        for j in adj[i]:
            if j == match_var[i] or scc[i] == scc[n + j] or reachable[n + j]:
                kept.add(values[j])
        keep.append(kept)
    return keep


def _tarjan(out: list[list[int]]) -> list[int]:
    """Iterative Tarjan SCC; returns component id per node."""
    n = len(out)
    index = [-1] * n
    low = [0] * n
    comp = [-1] * n
    on_stack = [False] * n
    stack: list[int] = []
    counter = 0
    comp_count = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack[node] = True
            advanced = False
            while pi < len(out[node]):
                nxt = out[node][pi]
                pi += 1
                if index[nxt] == -1:
                    work[-1] = (node, pi)
                    work.append((nxt, 0))
                    advanced = True
                    break
                if on_stack[nxt]:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = comp_count
                    if w == node:
                        break
                comp_count += 1
            if work:
                parent, _ = work[-1]
                low[parent] = min(low[parent], low[node])
    return comp


class AllDiffValue(Constraint):
    """User-level alldifferent row; value consistency."""

    def __init__(self, variables) -> None:
        super().__init__()
        self.vids = tuple(v.vid if hasattr(v, "vid") else v for v in variables)
        self.name = "alldifferent"

    def scope(self) -> tuple[int, ...]:
        return self.vids

    def filter(self, store: Store) -> bool:
        return _value_closure(store, self.vids, self.cid)


class AllDiffBounds(Constraint):
    """Bounds-level alldifferent: basic closure plus support-based bound
    shrinking, iterated to a local fixpoint."""

    def __init__(self, variables) -> None:
        super().__init__()
        self.vids = tuple(v.vid if hasattr(v, "vid") else v for v in variables)
        self.name = "alldifferent"

    def scope(self) -> tuple[int, ...]:
        return self.vids

    def filter(self, store: Store) -> bool:
        while True:
            if not _value_closure(store, self.vids, self.cid):
                return False
            keep = supported_value_sets([store.dom(v) for v in self.vids])
            if keep is None:
                return False
            changed = False
            for vid, kept in zip(self.vids, keep):
                out = store.set_min(vid, min(kept), self.cid)
                if out is Outcome.FAILED:
                    return False
                changed = changed or out is Outcome.REDUCED
                out = store.set_max(vid, max(kept), self.cid)
                if out is Outcome.FAILED:
                    return False
                changed = changed or out is Outcome.REDUCED
            if not changed:
                return True


class AllDiffDomain(Constraint):
    """Hidden matching-based propagator posted by the extended level."""

    internal = True

    def __init__(self, variables) -> None:
        super().__init__()
        self.vids = tuple(v.vid if hasattr(v, "vid") else v for v in variables)
        self.name = "alldifferent-filter"

    def scope(self) -> tuple[int, ...]:
        return self.vids

    def filter(self, store: Store) -> bool:
        keep = supported_value_sets([store.dom(v) for v in self.vids])
        if keep is None:
            return False
        for vid, kept in zip(self.vids, keep):
            for v in list(store.dom(vid).values()):
                if v not in kept:
                    if store.remove_value(vid, v, self.cid) is Outcome.FAILED:
                        return False
        return True


def post_alldifferent(store: Store, variables, level: FilterLevel) -> tuple[list[int], bool]:
    """Post alldifferent at the requested filter level.

    Returns the constraint ids (the extended level surfaces two rows: the
    user constraint plus the hidden internal filter) and whether posting
    reached a consistent state.
    """
    cids: list[int] = []
    if level is FilterLevel.BASIC:
        cid, out = store.post(AllDiffValue(variables))
        cids.append(cid)
        return cids, out.ok
    if level is FilterLevel.BOUNDS:
        cid, out = store.post(AllDiffBounds(variables))
        cids.append(cid)
        return cids, out.ok
    cid, out = store.post(AllDiffValue(variables))
    cids.append(cid)
    if not out.ok:
        return cids, False
    cid, out = store.post(AllDiffDomain(variables))
    cids.append(cid)
    return cids, out.ok
