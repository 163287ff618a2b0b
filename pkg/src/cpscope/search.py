"""Programmed search: goals, strategies, and the tree-building engine.

Choice points (try_branches, rank_branch) are the only goals that create
tree nodes; sequences, dynamic generators and deterministic decisions
execute inside the current node's visit. A node's identity is its path
of child indices from the root. The engine explores depth-first or by
limited-discrepancy order over the same tree; in both cases every node
is visited at most once and sibling entries start from the parent's
fixpoint (trail markers bracket each visit).
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Optional

from .constraints import ObjectiveBound
from .resource import UnaryResource, not_rank_first, rank_first
from .store import Store, Outcome, VarRef

log = logging.getLogger(__name__)

NodePath = tuple[int, ...]


class NodeState(Enum):
    WHITE = "white"  # created, not yet explored
    BLUE = "blue"  # explored
    BLACK = "black"  # pruned without exploration
    GREEN = "green"  # solution
    RED = "red"  # failure


class ChoiceFrame(NamedTuple):
    """One entry of the choice stack, rendered "name = value [depth]"."""

    name: str
    value: str
    depth: int

    def text(self) -> str:
        return f"{self.name} = {self.value} [{self.depth}]"


# ----------------------------------------------------------------------
# goals


@dataclass(frozen=True)
class Assign:
    var: VarRef
    value: int


@dataclass(frozen=True)
class RemoveVal:
    var: VarRef
    value: int


@dataclass(frozen=True)
class FixMin:
    var: VarRef


class Branch(NamedTuple):
    name: str
    value: str
    goal: "Goal"


@dataclass(frozen=True)
class TryBranches:
    label: str
    branches: tuple[Branch, ...]


@dataclass(frozen=True)
class RankBranch:
    resource: UnaryResource
    act_index: int


@dataclass(frozen=True)
class RankFirstGoal:
    resource: UnaryResource
    act_index: int


@dataclass(frozen=True)
class NotRankFirstGoal:
    resource: UnaryResource
    act_index: int


@dataclass(frozen=True)
class Sequence:
    goals: tuple


@dataclass(frozen=True)
class Noop:
    pass


@dataclass(frozen=True)
class FailGoal:
    """Deterministic dead end (e.g. a required selection found no candidate)."""

    constraint_id: int | None = None


@dataclass(frozen=True)
class Dynamic:
    """Produce the next goal from the current store; None means done.
    The function must be deterministic in the store state."""

    fn: Callable[[Store], Optional["Goal"]]


Goal = object  # union of the dataclasses above


def label_binary(variables) -> Dynamic:
    """Classic labeling: pick the first unbound variable, try value = dmin
    on the left and value != dmin on the right, repeat."""
    vars_tuple = tuple(variables)

    def step(store: Store):
        for var in vars_tuple:
            d = store.dom(var.vid)
            if not d.is_singleton:
                v = d.lo
                return TryBranches(
                    var.name,
                    (
                        Branch(var.name, var.display_value(v), Assign(var, v)),
                        Branch(var.name, f"!= {var.display_value(v)}", RemoveVal(var, v)),
                    ),
                )
        return None

    return Dynamic(step)


def label_enum(variables) -> Dynamic:
    """n-ary labeling: one child per remaining value of the first unbound
    variable (the paper's tryall shape)."""
    vars_tuple = tuple(variables)

    def step(store: Store):
        for var in vars_tuple:
            d = store.dom(var.vid)
            if not d.is_singleton:
                return TryBranches(
                    var.name,
                    tuple(
                        Branch(var.name, var.display_value(v), Assign(var, v))
                        for v in d.values()
                    ),
                )
        return None

    return Dynamic(step)


def select(candidates, key, direction: str = "increasing"):
    """Pick the candidate with the smallest (increasing) or largest
    (decreasing) key; ties resolve to the earliest candidate."""
    items = list(candidates)
    if not items:
        raise ValueError("select over an empty candidate set")
    best = items[0]
    best_key = key(best)
    for cand in items[1:]:
        k = key(cand)
        if (direction == "increasing" and k < best_key) or (
            direction == "decreasing" and k > best_key
        ):
            best, best_key = cand, k
    return best


# ----------------------------------------------------------------------
# strategies


@dataclass(frozen=True)
class SearchStrategy:
    kind: str = "dfs"  # "dfs" | "lds"
    max_discrepancies: int = 0

    @staticmethod
    def parse(text: str) -> "SearchStrategy":
        if text == "dfs":
            return SearchStrategy("dfs")
        if text.startswith("lds"):
            k = int(text.split(":", 1)[1]) if ":" in text else 4
            return SearchStrategy("lds", k)
        raise ValueError(f"unknown strategy {text!r}")

    def describe(self) -> str:
        return self.kind if self.kind == "dfs" else f"lds:{self.max_discrepancies}"


class SearchAbort(Exception):
    """Raised out of a control checkpoint to abandon the current run."""

    def __init__(self, restart: bool) -> None:
        super().__init__("search aborted")
        self.restart = restart


# ----------------------------------------------------------------------
# engine


@dataclass
class _Node:
    path: NodePath
    frame: ChoiceFrame | None
    pending: tuple
    parent: Optional["_Node"]
    disc: int
    created_seq: int
    choice_label: str = ""
    visited: bool = False
    finalized: bool = False
    expanded: bool = False
    children: list = field(default_factory=list)
    unfinished: int = 0
    failed_children: int = 0


class _Done:
    pass


class _Fail:
    pass


@dataclass
class _Choice:
    label: str
    branches: tuple[Branch, ...]
    rest: tuple


@dataclass
class RunResult:
    # "optimal"    proven best (objective, frontier never cut)
    # "solution"   solution(s) found, optimality not established
    # "exhausted"  no solution, full tree explored
    # "incomplete" no solution, but the discrepancy limit cut branches
    # "aborted"    stopped by a session command or lost UI
    outcome: str
    best_objective: int | None
    solutions: list


class Engine:
    """Runs one search over a prepared store.

    monitor  receives node/frame/solution callbacks (trace module)
    control  optional debugger hooks (checkpoints may pause or abort)
    """

    def __init__(
        self,
        store: Store,
        goal,
        strategy: SearchStrategy = SearchStrategy("dfs"),
        objective: VarRef | None = None,
        monitor=None,
        control=None,
        all_solutions: bool = False,
    ) -> None:
        self.store = store
        self.goal = goal
        self.strategy = strategy
        self.objective = objective
        self.monitor = monitor
        self.control = control
        self.all_solutions = all_solutions
        self.incumbent: int | None = None
        self.solutions: list[dict] = []
        self.bound_constraint: ObjectiveBound | None = None
        self._created = 0
        self._nodes: list[_Node] = []
        self._position: _Node | None = None
        self._stop = False
        self._truncated = False

    # -- monitor shims -------------------------------------------------

    def _m(self, name: str, *args) -> None:
        if self.monitor is not None:
            getattr(self.monitor, name)(*args)

    # -- goal execution ------------------------------------------------

    def _apply_decision(self, goal) -> bool:
        store = self.store
        if isinstance(goal, Assign):
            return store.set_value(goal.var, goal.value) is not Outcome.FAILED
        if isinstance(goal, RemoveVal):
            return store.remove_value(goal.var, goal.value) is not Outcome.FAILED
        if isinstance(goal, FixMin):
            d = store.dom(goal.var.vid)
            return store.set_value(goal.var, d.lo) is not Outcome.FAILED
        if isinstance(goal, RankFirstGoal):
            return rank_first(store, goal.resource, goal.act_index)
        if isinstance(goal, NotRankFirstGoal):
            return not_rank_first(store, goal.resource, goal.act_index)
        if isinstance(goal, Noop):
            return True
        if isinstance(goal, FailGoal):
            store.emit_constraint_fail(goal.constraint_id)
            return False
        raise TypeError(f"not a decision goal: {goal!r}")

    def _advance(self, pending: tuple):
        """Execute goals until a choice point, completion, or failure."""
        store = self.store
        items = list(pending)
        while items:
            g = items.pop(0)
            if isinstance(g, Sequence):
                items[:0] = list(g.goals)
            elif isinstance(g, Dynamic):
                nxt = g.fn(store)
                if nxt is not None:
                    items[:0] = [nxt, g]
            elif isinstance(g, TryBranches):
                return _Choice(g.label, g.branches, tuple(items))
            elif isinstance(g, RankBranch):
                res, idx = g.resource, g.act_index
                act = res.activities[idx]
                branches = (
                    Branch(res.name, f"{act.name} first", RankFirstGoal(res, idx)),
                    Branch(res.name, f"{act.name} not first", NotRankFirstGoal(res, idx)),
                )
                return _Choice(res.name, branches, tuple(items))
            else:
                if not self._apply_decision(g):
                    return _Fail()
                if not store.propagate().ok:
                    return _Fail()
        return _Done()

    # -- tree positioning ----------------------------------------------

    def _is_ancestor(self, a: _Node, b: _Node | None) -> bool:
        """a is b or an ancestor of b."""
        while b is not None:
            if b is a:
                return True
            b = b.parent
        return False

    def _goto(self, target: _Node) -> None:
        """Move the store to the state right after `target`'s visit:
        pop to the deepest common ancestor, then silently replay the
        chain of decisions down to `target`."""
        while not self._is_ancestor(self._position, target):
            self.store.pop_choice()
            self._m("frame_pop")
            self._position = self._position.parent
        chain: list[_Node] = []
        node = target
        while node is not self._position:
            chain.append(node)
            node = node.parent
        for step in reversed(chain):
            self.store.push_choice()
            self._m("frame_push", step.frame)
            self._replay(step)
            self._position = step

    def _replay(self, node: _Node) -> None:
        store = self.store
        store.emit_enabled = False
        store.replaying = True
        try:
            result = self._advance(node.pending)
        finally:
            store.emit_enabled = True
            store.replaying = False
        if not isinstance(result, _Choice):
            raise RuntimeError(f"non-deterministic replay at {node.path}")

    # -- node lifecycle --------------------------------------------------

    def _finalize(self, node: _Node, state: NodeState) -> None:
        node.finalized = True
        self._m("node_done", node.path, state)
        parent = node.parent
        if parent is not None and parent.expanded:
            parent.unfinished -= 1
            if state is NodeState.RED:
                parent.failed_children += 1
            if parent.unfinished == 0 and not parent.finalized:
                all_failed = parent.failed_children == len(parent.children)
                self._finalize(parent, NodeState.RED if all_failed else NodeState.BLUE)

    def _visit(self, node: _Node) -> None:
        store = self.store
        if node.parent is not None:
            self._goto(node.parent)
            store.push_choice()
            self._m("frame_push", node.frame)
            self._position = node
        else:
            self._position = node
        if self.control is not None:
            self.control.checkpoint_node(node.path)
        node.visited = True
        self._m("node_visit", node.path)
        store.current_path = node.path
        if self.bound_constraint is not None and self.incumbent is not None:
            store.schedule(self.bound_constraint.cid)
        ok = store.propagate().ok
        result = self._advance(node.pending) if ok else _Fail()
        if isinstance(result, _Fail):
            self._finalize(node, NodeState.RED)
        elif isinstance(result, _Done):
            self._record_solution(node)
            self._finalize(node, NodeState.GREEN)
            if self.objective is None and not self.all_solutions:
                self._stop = True
        else:
            self._expand(node, result)

    def _expand(self, node: _Node, choice: _Choice) -> None:
        depth = len(node.path) + 1
        children = []
        for i, branch in enumerate(choice.branches):
            child = _Node(
                path=node.path + (i,),
                frame=ChoiceFrame(branch.name, branch.value, depth),
                pending=(branch.goal,) + choice.rest,
                parent=node,
                disc=node.disc + i,
                created_seq=self._created,
                choice_label=f"{branch.name} = {branch.value}",
            )
            self._created += 1
            children.append(child)
            self._nodes.append(child)
        node.children = children
        node.expanded = True
        node.unfinished = len(children)
        self._m("node_expanded", node.path)
        for child in children:
            self._m("node_created", child.path, child.choice_label)
        self._push_children(children)

    # -- frontier --------------------------------------------------------

    def _push_children(self, children: list[_Node]) -> None:
        if self.strategy.kind == "dfs":
            self._stack.extend(reversed(children))
        else:
            for child in children:
                if child.disc <= self.strategy.max_discrepancies:
                    heapq.heappush(self._heap, (child.disc, child.created_seq, child))
                else:
                    self._truncated = True

    def _next_node(self) -> _Node | None:
        if self.strategy.kind == "dfs":
            return self._stack.pop() if self._stack else None
        return heapq.heappop(self._heap)[2] if self._heap else None

    # -- solutions -------------------------------------------------------

    def _record_solution(self, node: _Node) -> None:
        store = self.store
        assignments = {}
        for var in store.vars:
            if not var.decision:
                continue
            d = store.dom(var.vid)
            assignments[var.name] = (
                var.display_value(d.value()) if d.is_singleton else d.text()
            )
        value = None
        if self.objective is not None:
            d = store.dom(self.objective.vid)
            if not d.is_singleton:
                raise RuntimeError("objective unbound at solution")
            value = d.value()
            self.incumbent = value
            if self.bound_constraint is not None:
                self.bound_constraint.bound = value - 1
        sol = {"path": node.path, "objective": value, "assignments": assignments}
        self.solutions.append(sol)
        self._m("solution", sol)

    # -- run ---------------------------------------------------------------

    def run(self) -> RunResult:
        store = self.store
        if self.objective is not None:
            self.bound_constraint = ObjectiveBound(self.objective)
            _, out = store.post(self.bound_constraint)
            if not out.ok:
                raise RuntimeError("objective bound rejected at post time")
        root = _Node(
            path=(), frame=None, pending=(self.goal,), parent=None, disc=0, created_seq=0
        )
        self._created = 1
        self._nodes.append(root)
        self._stack: list[_Node] = []
        self._heap: list = []
        self._m("node_created", root.path, "")
        aborted = False
        restart = False
        try:
            self._visit(root)
            while not self._stop:
                node = self._next_node()
                if node is None:
                    break
                self._visit(node)
        except SearchAbort as abort:
            aborted = True
            restart = abort.restart
        # unwind to the root so the store ends at the root fixpoint
        while self._position is not None and self._position.parent is not None:
            store.pop_choice()
            self._m("frame_pop")
            self._position = self._position.parent
        store._running = None
        store._clear_queue()
        # terminal bookkeeping: unvisited nodes were pruned; abandoned
        # interiors stay explored
        for node in self._nodes:
            if node.finalized:
                continue
            if not node.visited:
                node.finalized = True
                self._m("node_done", node.path, NodeState.BLACK)
            elif node.expanded:
                node.finalized = True
                self._m("node_done", node.path, NodeState.BLUE)
        if aborted:
            outcome = "aborted"
        elif self.solutions:
            if self.objective is not None and not self._truncated:
                outcome = "optimal"
            else:
                outcome = "solution"
        else:
            outcome = "exhausted" if not self._truncated else "incomplete"
        return RunResult(outcome, self.incumbent, self.solutions)


# ----------------------------------------------------------------------
# reporting


@dataclass(frozen=True)
class RightSubtreeEntry:
    path: NodePath
    depth: int
    contains_solution: bool


def right_subtree_report(nodes: dict) -> list[RightSubtreeEntry]:
    """Right children of binary nodes that were expanded into subtrees,
    ordered by ascending depth. `nodes` maps path -> record with a
    `state` attribute (NodeRecord from the trace module or equivalent).

    Each entry notes whether any node of the subtree is a solution: the
    diagnostic reading is that a pure-failure right subtree marks work a
    stronger filter level would have skipped.
    """
    paths = set(nodes)
    child_count: dict[NodePath, int] = {}
    for p in paths:
        if p:
            parent = p[:-1]
            child_count[parent] = child_count.get(parent, 0) + 1

    def subtree_has_green(root: NodePath) -> bool:
        for p, rec in nodes.items():
            if len(p) >= len(root) and p[: len(root)] == root:
                state = getattr(rec, "state", rec)
                name = state.value if hasattr(state, "value") else str(state)
                if name == "green":
                    return True
        return False

    entries = []
    for p in sorted(paths, key=lambda q: (len(q), q)):
        if not p or p[-1] != 1:
            continue
        if child_count.get(p[:-1]) != 2:
            continue
        if child_count.get(p, 0) == 0:
            continue  # leaf, not a subtree
        entries.append(RightSubtreeEntry(p, len(p), subtree_has_green(p)))
    return entries
