import json
from pathlib import Path

import pytest

from isolab.harness.builtins import builtin_workload, builtin_workloads
from isolab.harness.manifest import WorkloadManifestLoader, load_workload_file
from isolab.harness.workloads import (
    Step,
    StepKind,
    parse_constraint,
    parse_schedule,
    parse_step,
    parse_workload,
)
from isolab.history_core.models import PredicateDecl
from isolab.shared.errors import WorkloadError

LOST_UPDATE_TEXT = """
name deposits
describe Two deposits to the same account
init x=100
check x == 150
schedule 1 2 2 2 1 1
txn 1: r[x] w[x+=30] commit
txn 2: r[x] w[x+=20] commit
"""


@pytest.fixture
def manifest_data():
    return {
        "name": "hiring",
        "universe": ["e1", "y", "z"],
        "initial": {"e1": 1, "z": 1},
        "predicates": {"active": ["e1", "y"]},
        "check": "count(P:active) - z == 0",
        "schedule": [1, 2, 2, 2, 2, 1, 1],
        "transactions": {
            "1": "r[P:active] r[z] commit",
            "2": ["w[y=1]", "r[z]", "w[z+=1]", "commit"],
        },
    }


@pytest.mark.parametrize("token, expected", [
    ("r[x]", Step(StepKind.READ, key="x")),
    ("w[x=5]", Step(StepKind.WRITE, key="x", value=5)),
    ("w[x+=30]", Step(StepKind.WRITE, key="x", delta=30)),
    ("w[x-=40]", Step(StepKind.WRITE, key="x", delta=-40)),
    ("d[x]", Step(StepKind.DELETE, key="x")),
    ("r[P:active]", Step(StepKind.PREDICATE_READ, predicate="active")),
    ("rc[P:acct]", Step(StepKind.FETCH, predicate="acct")),
    ("wc[P:acct+=30]", Step(StepKind.CURSOR_WRITE, predicate="acct", delta=30)),
    ("close[P:acct]", Step(StepKind.CLOSE, predicate="acct")),
    ("commit", Step(StepKind.COMMIT)),
    ("abort", Step(StepKind.ABORT)),
])
def test_parse_step(token, expected):
    step = parse_step(token)

    assert step == expected
    assert step.render() == token


@pytest.mark.parametrize("token", ["x[1]", "w[x]", "rc[x]", "wc[x=1]", "r[P:]", "w[P:acct=1]", "d[P:acct]"])
def test_parse_step_rejects_malformed_tokens(token):
    with pytest.raises(WorkloadError, match="Malformed program step"):
        parse_step(token)


def test_step_values():
    assert Step(StepKind.WRITE, key="x", delta=30).resolve_value(100) == 130
    assert Step(StepKind.WRITE, key="x", delta=-40).resolve_value(None) == -40
    assert Step(StepKind.WRITE, key="x", value=7).resolve_value(100) == 7
    assert Step(StepKind.DELETE, key="x").resolve_value(100) is None


def test_constraints():
    preds = {"tasks": PredicateDecl("tasks", {"t1", "t2", "t3"})}

    assert parse_constraint("x + y == 100").evaluate({"x": 60, "y": 40}, {})
    assert not parse_constraint("x + y > 0").evaluate({"x": -40, "y": -40}, {})
    assert parse_constraint("sum(P:tasks) <= 8").evaluate({"t1": 4, "t2": 3, "t3": None}, preds)
    assert not parse_constraint("sum(P:tasks) <= 8").evaluate({"t1": 4, "t2": 3, "t3": 2}, preds)
    assert parse_constraint("count(P:tasks) - 2 == 0").evaluate({"t1": 4, "t2": 3, "t3": None}, preds)


@pytest.mark.parametrize("text", ["x +", "x y == 1", "x == y", "== 3"])
def test_malformed_constraints(text):
    with pytest.raises(WorkloadError, match="Malformed constraint"):
        parse_constraint(text)


def test_parse_schedule():
    assert parse_schedule("1 2, 2 1") == (1, 2, 2, 1)
    assert parse_schedule([1, 2]) == (1, 2)
    with pytest.raises(WorkloadError, match="Malformed schedule"):
        parse_schedule("1 two")


def test_parse_workload():
    # Call
    workload = parse_workload(LOST_UPDATE_TEXT)

    # Assertions
    assert workload.name == "deposits"
    assert workload.description == "Two deposits to the same account"
    assert workload.txns() == [1, 2]
    assert workload.universe == ("x",)
    assert workload.initial_state() == {"x": 100}
    assert workload.step_counts() == {1: 3, 2: 3}
    assert workload.total_steps() == 6
    assert workload.reference_schedule == (1, 2, 2, 2, 1, 1)
    assert workload.variant == "plain"
    assert workload.check_constraint({"x": 150}) is True
    assert workload.check_constraint({"x": 130}) is False


def test_render_round_trips():
    workload = parse_workload(LOST_UPDATE_TEXT)

    assert parse_workload(workload.render()) == workload


def test_absent_keys_start_as_none(workload):
    phantom = workload("employee-phantom")

    assert phantom.initial_state() == {"e1": 1, "y": None, "z": 1}


@pytest.mark.parametrize("text, message", [
    ("txn 1: r[x]", "must end with commit or abort"),
    ("txn 1: commit r[x] commit", "steps after its terminal"),
    ("txn 1: w[x+=1] commit", "no earlier read"),
    ("pred P = {x}\ntxn 1: wc[P:P=1] commit", "before its first fetch"),
    ("universe {x}\ntxn 1: r[y] commit", "not in the declared universe"),
    ("txn 1: r[P:missing] commit", "Undeclared predicate"),
    ("txn 1: r[x] commit\ntxn 1: r[x] commit", "declared twice"),
    ("schedule 1 2\ntxn 1: r[x] commit", "unknown transaction"),
    ("schedule 1\ntxn 1: r[x] commit", "gives T1 1 slots for 2 steps"),
    ("check z == 1\ntxn 1: r[x] commit", "not in the declared universe"),
    ("name empty", "no transactions"),
    ("txn 0: r[x] commit", "positive integers, got T0"),
])
def test_invalid_workloads(text, message):
    with pytest.raises(WorkloadError, match=message):
        parse_workload(text)


def test_validate_schedule(workload):
    transfer = workload("transfer")

    assert transfer.validate_schedule([2, 1]) == (2, 1)
    with pytest.raises(WorkloadError):
        transfer.validate_schedule([3])


def test_builtin_catalogue(workloads):
    assert list(workloads) == [
        "transfer", "inconsistent-analysis", "employee-phantom", "phantom-reread",
        "lost-update", "cursor-lost-update", "write-skew", "write-skew-cursor",
        "read-skew", "job-tasks", "dirty-write", "dirty-read-rollback",
    ]
    for workload in workloads.values():
        assert workload.description
        assert workload.reference_schedule is not None


def test_builtin_variants(workloads):
    assert workloads["cursor-lost-update"].variant == "cursor"
    assert workloads["lost-update"].variant == "plain"


def test_builtin_catalogue_is_a_copy():
    builtin_workloads().clear()

    assert builtin_workload("transfer").name == "transfer"


def test_unknown_builtin():
    with pytest.raises(WorkloadError, match="Unknown built-in workload"):
        builtin_workload("missing")


def test_manifest_validation(manifest_data):
    loader = WorkloadManifestLoader()

    assert loader.validate_manifest_data(manifest_data) == (True, None)

    del manifest_data["transactions"]
    is_valid, error = loader.validate_manifest_data(manifest_data)

    assert not is_valid
    assert "transactions" in error


def test_manifest_rejects_unknown_fields(manifest_data):
    manifest_data["isolation"] = "serializable"

    with pytest.raises(WorkloadError, match="Invalid workload manifest"):
        WorkloadManifestLoader().load(manifest_data)


def test_manifest_rejects_transaction_zero(manifest_data):
    manifest_data["transactions"]["0"] = manifest_data["transactions"].pop("2")

    is_valid, error = WorkloadManifestLoader().validate_manifest_data(manifest_data)

    assert not is_valid
    assert "'0' does not match" in error


def test_manifest_matches_builtin(manifest_data, workload):
    loaded = WorkloadManifestLoader().load(manifest_data)
    builtin = workload("employee-phantom")

    assert loaded.programs == builtin.programs
    assert loaded.predicates == builtin.predicates
    assert loaded.initial_state() == builtin.initial_state()
    assert loaded.reference_schedule == builtin.reference_schedule


def test_load_json_file(tmp_path, manifest_data):
    path = tmp_path / "hiring.json"
    path.write_text(json.dumps(manifest_data), encoding="utf-8")

    workload = load_workload_file(path)

    assert workload.name == "hiring"
    assert workload.txns() == [1, 2]


def test_load_yaml_file_with_integer_transaction_ids(tmp_path):
    path = tmp_path / "deposits.yaml"
    path.write_text(
        "initial:\n"
        "  x: 100\n"
        "check: x == 150\n"
        "schedule: 1 2 2 2 1 1\n"
        "transactions:\n"
        "  1: ['r[x]', 'w[x+=30]', commit]\n"
        "  2: r[x] w[x+=20] commit\n",
        encoding="utf-8",
    )

    workload = load_workload_file(path)

    assert workload.name == "deposits"
    assert workload.programs == parse_workload(LOST_UPDATE_TEXT).programs


def test_load_text_file(tmp_path):
    path = tmp_path / "deposits.txt"
    path.write_text(LOST_UPDATE_TEXT, encoding="utf-8")

    assert load_workload_file(path) == parse_workload(LOST_UPDATE_TEXT)


def test_yaml_list_is_not_a_manifest(tmp_path):
    path = tmp_path / "list.yml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")

    with pytest.raises(WorkloadError, match="Unsupported workload file"):
        load_workload_file(path)


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{", encoding="utf-8")

    with pytest.raises(WorkloadError, match="Invalid workload manifest"):
        load_workload_file(path)


def test_documented_example_matches_builtin(workload):
    example = Path(__file__).parents[2] / "docs" / "schemas" / "workload-example.json"

    loaded = load_workload_file(example)

    assert loaded == workload("job-tasks")
