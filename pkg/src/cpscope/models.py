"""Builtin example models and the JSON model loader.

A built model bundles a fresh store, the goal tree, an optional
objective and the posting outcome. Event listeners must be attached to
the store before building if root statistics are to cover the initial
propagation, which is why builders accept an optional pre-wired store.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from typing import Callable, Optional

from .alldifferent import FilterLevel, post_alldifferent
from .constraints import Linear, Neq, less_than
from .resource import UnaryResource, nb_possible_first, possible_firsts
from .search import (
    Dynamic,
    FailGoal,
    FixMin,
    RankBranch,
    Sequence,
    label_binary,
    label_enum,
    select,
)
from .store import Store, VarRef


@dataclass
class BuiltModel:
    name: str
    store: Store
    goal: object
    objective: Optional[VarRef]
    resources: list[UnaryResource] = field(default_factory=list)
    options: dict = field(default_factory=dict)
    post_ok: bool = True


def build_pheasants(store: Store | None = None, **_) -> BuiltModel:
    """Heads and legs: p + r = 20, 2p + 4r = 56. Propagation alone pins
    p = 12, r = 8, so the run is a single green root."""
    store = store if store is not None else Store()
    p = store.new_var("pheasants", 0, 20)
    r = store.new_var("rabbits", 0, 20)
    ok = store.post(Linear(((1, p), (1, r)), "==", 20, name="heads"))[1].ok
    ok = store.post(Linear(((2, p), (4, r)), "==", 56, name="legs"))[1].ok and ok
    return BuiltModel("pheasants", store, label_binary((p, r)), None, post_ok=ok)


_CITIES = ("London", "Paris", "Berlin", "Rome", "Madrid")


def build_warehouse(store: Store | None = None, **_) -> BuiltModel:
    """Five stores each pick a distinct warehouse; the goal tries every
    remaining city per store, so the tree shows wide n-ary nodes."""
    store = store if store is not None else Store()
    suppliers = [
        store.new_var(f"Supplier[{i}]", 0, len(_CITIES) - 1, value_names=_CITIES)
        for i in range(5)
    ]
    _, ok = post_alldifferent(store, suppliers, FilterLevel.BASIC)
    return BuiltModel("warehouse", store, label_enum(suppliers), None, post_ok=ok)


def build_golomb(
    n: int,
    filter_level: FilterLevel = FilterLevel.EXTENDED,
    store: Store | None = None,
    **_,
) -> BuiltModel:
    """Golomb ruler: n marks, all pairwise differences distinct, minimize
    the last mark. Marks live in [0, n^2]; binary labeling on the marks
    keeps their domains hole-free, so the bounds and extended filter
    levels walk identical trees."""
    if not 3 <= n <= 8:
        raise ValueError("golomb size must be in 3..8")
    store = store if store is not None else Store()
    ub = n * n
    marks = [store.new_var(f"m[{i}]", 0, 0 if i == 0 else ub) for i in range(n)]
    ok = True
    for i in range(n - 1):
        ok = (
            store.post(
                Linear(((1, marks[i + 1]), (-1, marks[i])), ">=", 1, name="order")
            )[1].ok
            and ok
        )
    diffs = []
    for i in range(n):
        for j in range(i + 1, n):
            d = store.new_var(f"d[{i},{j}]", 1, ub)
            diffs.append(d)
            ok = (
                store.post(
                    Linear(((1, marks[j]), (-1, marks[i]), (-1, d)), "==", 0, name="difference")
                )[1].ok
                and ok
            )
    _, ad_ok = post_alldifferent(store, diffs, filter_level)
    ok = ok and ad_ok
    ok = store.post(less_than(diffs[0], diffs[-1]))[1].ok and ok
    goal = label_binary(marks[1:])
    return BuiltModel(
        f"golomb{n}",
        store,
        goal,
        marks[-1],
        options={"filter_level": filter_level.value},
        post_ok=ok,
    )


def _ft06_data() -> dict:
    with importlib_resources.files("cpscope.data").joinpath("ft06.json").open() as fh:
        return json.load(fh)


def jobshop_goal(resources, starts, makespan, order: str) -> Sequence:
    """Rank-first search over unary resources, then fix starts.

    While unranked resources remain: pick the resource with the fewest
    possible firsts, then among its candidates the task whose earliest
    start is smallest (increasing) or largest (decreasing), and branch
    on ranking it first versus not. Ties pick the earliest candidate.
    Afterwards every start (and the makespan) is pinned to its minimum.
    """

    def step(store: Store):
        unranked = [r for r in resources if not r.is_ranked()]
        if unranked:
            res = select(unranked, key=lambda r: nb_possible_first(store, r))
            cands = possible_firsts(store, res)
            if not cands:
                return FailGoal(res.cid)
            act = select(cands, key=lambda a: store.dom(a.start).lo, direction=order)
            return RankBranch(res, act.index)
        return None

    fix = Sequence(tuple(FixMin(v) for v in (*starts, makespan)))
    return Sequence((Dynamic(step), fix))


def build_ft06(order: str = "increasing", store: Store | None = None, **_) -> BuiltModel:
    """Fisher-Thompson 6x6 job shop, minimize makespan (optimum 55)."""
    if order not in ("increasing", "decreasing"):
        raise ValueError("order must be increasing or decreasing")
    store = store if store is not None else Store()
    data = _ft06_data()
    jobs = data["jobs"]
    horizon = sum(dur for job in jobs for _, dur in job)
    starts: list[VarRef] = []
    by_machine: dict[int, list[tuple[VarRef, int, str]]] = {}
    ok = True
    makespan = store.new_var("makespan", 0, horizon)
    for i, job in enumerate(jobs):
        prev = None
        for k, (machine, dur) in enumerate(job):
            s = store.new_var(f"task[{i},{k}]", 0, horizon)
            starts.append(s)
            by_machine.setdefault(machine, []).append((s, dur, s.name))
            if prev is not None:
                pv, pd = prev
                ok = (
                    store.post(Linear(((1, s), (-1, pv)), ">=", pd, name="job-order"))[1].ok
                    and ok
                )
            ok = (
                store.post(
                    Linear(((1, makespan), (-1, s)), ">=", dur, name="span")
                )[1].ok
                and ok
            )
            prev = (s, dur)
    resources = []
    for machine in sorted(by_machine):
        res = UnaryResource(f"machine[{machine}]", by_machine[machine])
        _, out = store.post(res)
        ok = ok and out.ok
        resources.append(res)
    goal = jobshop_goal(resources, starts, makespan, order)
    return BuiltModel(
        "ft06",
        store,
        goal,
        makespan,
        resources=resources,
        options={"order": order},
        post_ok=ok,
    )


# ----------------------------------------------------------------------
# JSON model loading


def _load_json_model(
    path: str,
    filter_level: FilterLevel | None,
    order: str,
    store: Store | None,
) -> BuiltModel:
    with open(path, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    store = store if store is not None else Store()
    byname: dict[str, VarRef] = {}
    for vdef in spec.get("variables", []):
        if "values" in vdef:
            var = store.new_var(
                vdef["name"],
                values=vdef["values"],
                decision=vdef.get("decision", True),
                value_names=tuple(vdef["value_names"]) if "value_names" in vdef else None,
            )
        else:
            var = store.new_var(
                vdef["name"],
                vdef["min"],
                vdef["max"],
                decision=vdef.get("decision", True),
                value_names=tuple(vdef["value_names"]) if "value_names" in vdef else None,
            )
        byname[var.name] = var
    ok = True
    resources: list[UnaryResource] = []
    res_byname: dict[str, UnaryResource] = {}
    for cdef in spec.get("constraints", []):
        ctype = cdef["type"]
        if ctype == "linear":
            terms = tuple((coef, byname[name]) for coef, name in cdef["terms"])
            ok = store.post(Linear(terms, cdef["rel"], cdef["constant"]))[1].ok and ok
        elif ctype == "neq":
            ok = store.post(Neq(byname[cdef["x"]], byname[cdef["y"]]))[1].ok and ok
        elif ctype == "less_than":
            ok = store.post(less_than(byname[cdef["x"]], byname[cdef["y"]]))[1].ok and ok
        elif ctype == "alldifferent":
            level = filter_level or FilterLevel(cdef.get("level", "basic"))
            _, ad_ok = post_alldifferent(store, [byname[v] for v in cdef["vars"]], level)
            ok = ok and ad_ok
        elif ctype == "unary_resource":
            acts = [
                (byname[a["start"]], a["duration"], a.get("label", a["start"]))
                for a in cdef["activities"]
            ]
            res = UnaryResource(cdef["name"], acts)
            _, out = store.post(res)
            ok = ok and out.ok
            resources.append(res)
            res_byname[res.name] = res
        else:
            raise ValueError(f"unknown constraint type {ctype!r}")
    gdef = spec.get("goal", {"type": "label_binary"})
    gtype = gdef.get("type", "label_binary")
    gvars = [byname[v] for v in gdef["vars"]] if "vars" in gdef else list(byname.values())
    if gtype == "label_binary":
        goal = label_binary(gvars)
    elif gtype == "label_enum":
        goal = label_enum(gvars)
    elif gtype == "jobshop":
        objective_name = spec["objective"]["minimize"]
        goal = jobshop_goal(
            resources,
            [v for v in gvars if v.name != objective_name],
            byname[objective_name],
            gdef.get("order", order),
        )
    else:
        raise ValueError(f"unknown goal type {gtype!r}")
    objective = None
    if "objective" in spec:
        objective = byname[spec["objective"]["minimize"]]
    return BuiltModel(
        spec.get("name", path),
        store,
        goal,
        objective,
        resources=resources,
        post_ok=ok,
    )


BUILTIN_MODELS: dict[str, tuple[str, Callable[..., BuiltModel]]] = {
    "pheasants": ("heads-and-legs arithmetic puzzle (solved at the root)", build_pheasants),
    "warehouse": ("assignment demo with n-ary choices and named values", build_warehouse),
    "golomb3": ("Golomb ruler, 3 marks", lambda **kw: build_golomb(3, **kw)),
    "golomb4": ("Golomb ruler, 4 marks (optimum 6)", lambda **kw: build_golomb(4, **kw)),
    "golomb5": ("Golomb ruler, 5 marks (optimum 11)", lambda **kw: build_golomb(5, **kw)),
    "golomb6": ("Golomb ruler, 6 marks (optimum 17)", lambda **kw: build_golomb(6, **kw)),
    "golomb7": ("Golomb ruler, 7 marks", lambda **kw: build_golomb(7, **kw)),
    "golomb8": ("Golomb ruler, 8 marks", lambda **kw: build_golomb(8, **kw)),
    "ft06": ("Fisher-Thompson 6x6 job shop (optimum 55)", build_ft06),
}


def build_model(
    ref: str,
    filter_level: FilterLevel | None = None,
    order: str = "increasing",
    store: Store | None = None,
) -> BuiltModel:
    """Resolve a builtin name or a JSON model path."""
    if ref in BUILTIN_MODELS:
        _, builder = BUILTIN_MODELS[ref]
        kwargs: dict = {"store": store}
        if ref.startswith("golomb") and filter_level is not None:
            kwargs["filter_level"] = filter_level
        if ref == "ft06":
            kwargs["order"] = order
        return builder(**kwargs)
    if not os.path.exists(ref):
        raise ValueError(f"unknown model {ref!r} (not a builtin, not a file)")
    return _load_json_model(ref, filter_level, order, store)
