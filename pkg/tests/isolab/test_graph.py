import pytest

from isolab.history_core.graph import (
    ConflictScope,
    DependencyEdge,
    EdgeLabel,
    action_conflicts,
    dependency_graph,
    histories_equivalent,
    is_serializable,
)
from isolab.history_core.models import Action, ActionKind, PredicateDecl
from isolab.history_core.notation import parse_history
from isolab.mvcc.sv_mapping import mv_to_sv
from isolab.shared.errors import HistoryValidationError

from tests.conftest import H1_SI


def test_serial_history_graph_and_dot():
    history = parse_history("w1[x=1] c1 r2[x=1] c2")

    # Call
    graph = dependency_graph(history)

    # Assertions
    assert graph.nodes == frozenset({1, 2})
    assert graph.edges == frozenset({DependencyEdge(1, 2, EdgeLabel.WR, ConflictScope.ITEM, "x")})
    assert graph.to_dot() == 'digraph dependencies {\n  T1;\n  T2;\n  T1 -> T2 [label="wr x"];\n}'
    assert is_serializable(history) == (True, None)


def test_dirty_read_history_has_a_cycle(textbook):
    serializable, cycle = is_serializable(textbook["H1"])

    assert not serializable
    assert sorted(cycle) == [1, 2]


@pytest.mark.parametrize("name", ["H1", "H2", "H3", "H4", "H5"])
def test_textbook_histories_are_not_serializable(textbook, name):
    serializable, _ = is_serializable(textbook[name])

    assert not serializable


def test_predicate_edges(textbook):
    graph = dependency_graph(textbook["H3"])

    assert DependencyEdge(1, 2, EdgeLabel.RW, ConflictScope.PREDICATE, "active") in graph.edges
    assert DependencyEdge(2, 1, EdgeLabel.WR, ConflictScope.ITEM, "z") in graph.edges
    assert 'T1 -> T2 [label="rw P:active"];' in graph.to_dot()


def test_aborted_and_incomplete_transactions_are_left_out():
    history = parse_history("w1[x=1] r2[x=1] w3[x=3] a1 c2")

    graph = dependency_graph(history)

    assert graph.nodes == frozenset({2})
    assert graph.edges == frozenset()


def test_multi_version_history_is_rejected():
    with pytest.raises(HistoryValidationError, match="mv_to_sv"):
        dependency_graph(parse_history(H1_SI))


def test_action_conflicts():
    preds = [PredicateDecl("P", {"y"})]
    predicate_read = Action(ActionKind.PREDICATE_READ, 1, "P")

    assert action_conflicts(Action(ActionKind.READ, 1, "x"), Action(ActionKind.WRITE, 2, "x"), preds)
    assert action_conflicts(predicate_read, Action(ActionKind.WRITE, 2, "y"), preds)
    assert not action_conflicts(predicate_read, Action(ActionKind.WRITE, 2, "x"), preds)
    assert not action_conflicts(Action(ActionKind.READ, 1, "x"), Action(ActionKind.READ, 2, "x"), preds)
    assert not action_conflicts(Action(ActionKind.WRITE, 1, "x"), Action(ActionKind.WRITE, 1, "x"), preds)
    assert not action_conflicts(Action(ActionKind.WRITE, 1, "x"), Action(ActionKind.COMMIT, 2), preds)


def test_histories_equivalent():
    first = parse_history("r1[x] r2[y] w1[x] c1 w2[y] c2")
    second = parse_history("r2[y] w2[y] c2 r1[x] w1[x] c1")
    reordered = parse_history("w2[x] c2 r1[x] c1")
    original = parse_history("r1[x] c1 w2[x] c2")

    assert histories_equivalent(first, second)
    assert not histories_equivalent(original, reordered)


def test_snapshot_mapping_of_h1_is_equivalent_to_t2_then_t1(textbook):
    mapped = mv_to_sv(parse_history(H1_SI))

    assert histories_equivalent(mapped, parse_history("r2[x=50] r2[y=50] c2 r1[x=50] r1[y=50] w1[x=10] w1[y=90] c1"))
    assert not histories_equivalent(textbook["H1"], parse_history("r1[x=50] w1[x=10] r1[y=50] w1[y=90] c1 r2[x=10] r2[y=90] c2"))


def test_serial_history_with_blind_writes_is_serializable():
    history = parse_history("r1[x] w1[x] c1 w2[x] r2[y] c2 w3[y] c3")

    assert history.is_serial()
    assert is_serializable(history) == (True, None)
