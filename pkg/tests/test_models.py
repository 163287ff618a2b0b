"""Builtin models and the JSON model format."""

import json

import pytest

from cpscope.alldifferent import FilterLevel
from cpscope.models import BUILTIN_MODELS, build_model

from conftest import run_model
from oracles import golomb_optimum


class TestGolomb:
    @pytest.mark.parametrize("n,expect", [(3, 3), (4, 6), (5, 11)])
    def test_optimum_matches_exhaustive_search(self, n, expect):
        assert golomb_optimum(n) == expect  # the oracle agrees with the pin
        summary, _, _ = run_model(f"golomb{n}")
        assert summary["outcome"] == "optimal"
        assert summary["best_objective"] == expect

    def test_marks_form_a_valid_ruler(self):
        _, monitor, _ = run_model("golomb5")
        best = monitor.solutions[-1]["assignments"]
        marks = [int(best[f"m[{i}]"]) for i in range(5)]
        assert marks[0] == 0
        assert all(a < b for a, b in zip(marks, marks[1:]))
        diffs = [b - a for i, a in enumerate(marks) for b in marks[i + 1:]]
        assert len(set(diffs)) == len(diffs)
        assert marks[-1] == 11

    def test_level_defaults_to_extended(self):
        built = build_model("golomb4")
        names = [c.name for c in built.store.constraints]
        assert "alldifferent-filter" in names

    def test_level_is_configurable(self):
        built = build_model("golomb4", filter_level=FilterLevel.BASIC)
        names = [c.name for c in built.store.constraints]
        assert "alldifferent" in names and "alldifferent-filter" not in names

    def test_sizes_outside_range_rejected(self):
        with pytest.raises(ValueError):
            build_model("golomb9")  # not a registered name, not a file either

    def test_options_record_level(self):
        built = build_model("golomb4", filter_level=FilterLevel.BOUNDS)
        assert built.options.get("filter_level") == "bounds"


class TestOtherBuiltins:
    def test_registry_entries_build(self):
        for name in ("pheasants", "warehouse", "golomb3", "ft06"):
            built = build_model(name)
            assert built.post_ok, name
            assert built.goal is not None

    def test_descriptions_present(self):
        for name, (desc, _) in BUILTIN_MODELS.items():
            assert desc and isinstance(desc, str)

    def test_ft06_shape(self):
        built = build_model("ft06")
        assert len(built.resources) == 6
        assert all(len(res.activities) == 6 for res in built.resources)
        starts = [v for v in built.store.vars if v.name.startswith("task[")]
        assert len(starts) == 36
        assert built.objective.name == "makespan"

    def test_ft06_order_validation(self):
        with pytest.raises(ValueError):
            build_model("ft06", order="sideways")

    def test_warehouse_choices_carry_value_names(self):
        built = build_model("warehouse")
        sup = next(v for v in built.store.vars if v.name == "Supplier[0]")
        assert sup.value_names is not None
        assert sup.display_value(0) == "London"


class TestJsonModels:
    def write(self, tmp_path, spec):
        path = tmp_path / "model.json"
        path.write_text(json.dumps(spec))
        return str(path)

    def test_minimal_satisfaction_model(self, tmp_path):
        path = self.write(tmp_path, {
            "name": "tiny",
            "variables": [
                {"name": "x", "min": 0, "max": 3},
                {"name": "y", "min": 0, "max": 3},
            ],
            "constraints": [
                {"type": "linear", "terms": [[1, "x"], [1, "y"]], "rel": "==",
                 "constant": 3},
                {"type": "less_than", "x": "x", "y": "y"},
            ],
        })
        summary, monitor, _ = run_model(path)
        assert summary["outcome"] == "solution"
        sol = monitor.solutions[0]["assignments"]
        assert int(sol["x"]) + int(sol["y"]) == 3
        assert int(sol["x"]) < int(sol["y"])

    def test_alldifferent_and_objective(self, tmp_path):
        path = self.write(tmp_path, {
            "name": "spread",
            "variables": [
                {"name": "a", "values": [0, 1, 2, 3]},
                {"name": "b", "values": [0, 1, 2, 3]},
                {"name": "obj", "min": 0, "max": 10},
            ],
            "constraints": [
                {"type": "alldifferent", "vars": ["a", "b"], "level": "extended"},
                {"type": "linear", "terms": [[1, "obj"], [-1, "a"], [-1, "b"]],
                 "rel": "==", "constant": 0},
            ],
            "goal": {"type": "label_binary", "vars": ["a", "b", "obj"]},
            "objective": {"minimize": "obj"},
        })
        summary, _, _ = run_model(path)
        assert summary["outcome"] == "optimal"
        assert summary["best_objective"] == 1  # 0 + 1 with a != b

    def test_value_names_render_in_solutions(self, tmp_path):
        path = self.write(tmp_path, {
            "variables": [
                {"name": "pick", "min": 0, "max": 1,
                 "value_names": ["red", "blue"]},
            ],
            "goal": {"type": "label_enum"},
        })
        _, monitor, _ = run_model(path)
        assert monitor.solutions[0]["assignments"]["pick"] == "red"

    def test_unary_resource_and_jobshop_goal(self, tmp_path):
        path = self.write(tmp_path, {
            "name": "twotask",
            "variables": [
                {"name": "s0", "min": 0, "max": 10},
                {"name": "s1", "min": 0, "max": 10},
                {"name": "end", "min": 0, "max": 20},
            ],
            "constraints": [
                {"type": "unary_resource", "name": "m",
                 "activities": [
                     {"start": "s0", "duration": 3},
                     {"start": "s1", "duration": 4, "label": "second"},
                 ]},
                {"type": "linear", "terms": [[1, "end"], [-1, "s0"]],
                 "rel": ">=", "constant": 3},
                {"type": "linear", "terms": [[1, "end"], [-1, "s1"]],
                 "rel": ">=", "constant": 4},
            ],
            "goal": {"type": "jobshop", "vars": ["s0", "s1", "end"]},
            "objective": {"minimize": "end"},
        })
        summary, _, _ = run_model(path)
        assert summary["outcome"] == "optimal"
        assert summary["best_objective"] == 7

    def test_neq_constraint(self, tmp_path):
        path = self.write(tmp_path, {
            "variables": [
                {"name": "x", "values": [3]},
                {"name": "y", "values": [1, 3]},
            ],
            "constraints": [{"type": "neq", "x": "x", "y": "y"}],
        })
        built = build_model(path)
        assert built.post_ok
        assert built.store.dom(built.store.vars[1].vid).value() == 1

    def test_unknown_constraint_type_rejected(self, tmp_path):
        path = self.write(tmp_path, {
            "variables": [{"name": "x", "min": 0, "max": 1}],
            "constraints": [{"type": "table"}],
        })
        with pytest.raises(ValueError, match="table"):
            build_model(path)

    def test_unknown_goal_type_rejected(self, tmp_path):
        path = self.write(tmp_path, {
            "variables": [{"name": "x", "min": 0, "max": 1}],
            "goal": {"type": "montecarlo"},
        })
        with pytest.raises(ValueError, match="montecarlo"):
            build_model(path)

    def test_inconsistent_posts_surface_in_post_ok(self, tmp_path):
        path = self.write(tmp_path, {
            "variables": [{"name": "x", "min": 0, "max": 5}],
            "constraints": [{"type": "less_than", "x": "x", "y": "x"}],
        })
        built = build_model(path)
        assert not built.post_ok
