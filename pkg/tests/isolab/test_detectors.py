import pytest

from isolab.history_core.notation import parse_history
from isolab.phenomena.admission import (
    IsolationLevel,
    admits,
    admits_classification,
    prohibited_phenomena,
)
from isolab.phenomena.detectors import Phenomenon, Witness, classify, detect
from isolab.phenomena.report import (
    render_classification,
    render_classification_records,
    render_witness,
)
from isolab.shared.errors import HistoryValidationError

from tests.conftest import H1_SI


def _present(classification):
    return {phenomenon for phenomenon, witnesses in classification.items() if witnesses}


@pytest.mark.parametrize("name, expected", [
    ("H1", {Phenomenon.P1}),
    ("H2", {Phenomenon.P2, Phenomenon.A5A}),
    ("H3", {Phenomenon.P3}),
    ("H4", {Phenomenon.P2, Phenomenon.P4}),
    ("H5", {Phenomenon.P2, Phenomenon.A5B}),
])
def test_textbook_classification(textbook, name, expected):
    # Call
    classification = classify(textbook[name])

    # Assertions
    assert _present(classification) == expected
    assert list(classification) == list(Phenomenon)


def test_dirty_read_witness(textbook):
    witnesses = detect(textbook["H1"], Phenomenon.P1)

    assert witnesses == [Witness(Phenomenon.P1, (1, 2, 7), ("x",), (1, 2))]
    assert render_witness(textbook["H1"], witnesses[0]) == "P1: w1[x]@1 r2[x]@2 c1@7"


def test_fuzzy_read_without_reread(textbook):
    assert detect(textbook["H2"], Phenomenon.P2) == [Witness(Phenomenon.P2, (0, 2, 7), ("x",), (1, 2))]
    assert detect(textbook["H2"], Phenomenon.A2) == []


def test_phantom_without_reread(textbook):
    assert detect(textbook["H3"], Phenomenon.P3) == [
        Witness(Phenomenon.P3, (0, 1, 6), ("active", "y"), (1, 2))
    ]
    assert detect(textbook["H3"], Phenomenon.A3) == []


def test_lost_update_witness(textbook):
    assert detect(textbook["H4"], Phenomenon.P4) == [Witness(Phenomenon.P4, (0, 2, 4, 5), ("x",), (1, 2))]
    assert detect(textbook["H4"], Phenomenon.P4C) == []


def test_write_skew_witness(textbook):
    assert detect(textbook["H5"], Phenomenon.A5B) == [
        Witness(Phenomenon.A5B, (0, 3, 4, 5, 6, 7), ("x", "y"), (1, 2))
    ]


def test_read_skew_witness(textbook):
    assert detect(textbook["H2"], Phenomenon.A5A) == [
        Witness(Phenomenon.A5A, (0, 2, 4, 5, 6, 7), ("x", "y"), (1, 2))
    ]


def test_dirty_write():
    history = parse_history("w1[x=1] w2[x=2] w2[y=2] c2 w1[y=1] c1")

    assert detect(history, Phenomenon.P0) == [Witness(Phenomenon.P0, (0, 1, 5), ("x",), (1, 2))]


def test_aborted_read():
    history = parse_history("w1[x=10] r2[x=10] a1 c2")

    assert detect(history, Phenomenon.A1) == [Witness(Phenomenon.A1, (0, 1, 2, 3), ("x",), (1, 2))]
    assert detect(history, Phenomenon.P1) == [Witness(Phenomenon.P1, (0, 1, 2), ("x",), (1, 2))]


def test_aborted_read_needs_the_reader_to_commit():
    history = parse_history("w1[x=10] r2[x=10] a1 a2")

    assert detect(history, Phenomenon.A1) == []


def test_fuzzy_reread():
    history = parse_history("r1[x=1] w2[x=2] c2 r1[x=2] c1")

    assert detect(history, Phenomenon.A2) == [Witness(Phenomenon.A2, (0, 1, 2, 3, 4), ("x",), (1, 2))]
    assert detect(history, Phenomenon.P2) == [Witness(Phenomenon.P2, (0, 1, 4), ("x",), (1, 2))]


def test_phantom_reread():
    history = parse_history("pred P = {y}\nr1[P:P] w2[y=1 in P:P] c2 r1[P:P] c1")

    assert detect(history, Phenomenon.A3) == [Witness(Phenomenon.A3, (0, 1, 2, 3, 4), ("P", "y"), (1, 2))]


def test_write_outside_predicate_is_no_phantom():
    history = parse_history("pred P = {y}\nr1[P:P] w2[x=1] c2 r1[P:P] c1")

    assert detect(history, Phenomenon.P3) == []
    assert detect(history, Phenomenon.A3) == []


def test_cursor_lost_update():
    history = parse_history("rc1[x=100] r2[x=100] w2[x=120] c2 wc1[x=130] c1")

    assert detect(history, Phenomenon.P4C) == [Witness(Phenomenon.P4C, (0, 2, 4, 5), ("x",), (1, 2))]
    assert detect(history, Phenomenon.P4) == [Witness(Phenomenon.P4, (0, 2, 4, 5), ("x",), (1, 2))]


def test_incomplete_reader_has_no_fuzzy_read():
    history = parse_history("r1[x=1] w2[x=2] c2")

    assert detect(history, Phenomenon.P2) == []


def test_serial_history_has_no_phenomena():
    history = parse_history("r1[x] w1[x] c1 r2[x] w2[x] c2")

    assert _present(classify(history)) == set()


def test_multi_version_history_is_rejected():
    with pytest.raises(HistoryValidationError):
        classify(parse_history(H1_SI))


def test_prohibited_phenomena():
    assert prohibited_phenomena(IsolationLevel.READ_UNCOMMITTED) == [Phenomenon.P0]
    assert prohibited_phenomena(IsolationLevel.REPEATABLE_READ) == [
        Phenomenon.P0, Phenomenon.P1, Phenomenon.P4C, Phenomenon.P4,
        Phenomenon.P2, Phenomenon.A5A, Phenomenon.A5B,
    ]
    assert prohibited_phenomena(IsolationLevel.DEGREE_0) == []
    assert prohibited_phenomena("read-consistency") == [Phenomenon.P0, Phenomenon.P1, Phenomenon.P4C]
    assert len(prohibited_phenomena(IsolationLevel.SERIALIZABLE)) == 8


@pytest.mark.parametrize("level, name, expected", [
    (IsolationLevel.DEGREE_0, "H1", True),
    (IsolationLevel.READ_UNCOMMITTED, "H1", True),
    (IsolationLevel.READ_COMMITTED, "H1", False),
    (IsolationLevel.READ_COMMITTED, "H4", True),
    (IsolationLevel.CURSOR_STABILITY, "H4", True),
    (IsolationLevel.REPEATABLE_READ, "H4", False),
    (IsolationLevel.REPEATABLE_READ, "H3", True),
    (IsolationLevel.SERIALIZABLE, "H3", False),
    (IsolationLevel.READ_CONSISTENCY, "H5", True),
])
def test_admits(textbook, level, name, expected):
    assert admits(level, textbook[name]) is expected


def test_admits_classification_ignores_empty_entries():
    assert admits_classification(IsolationLevel.SERIALIZABLE, {Phenomenon.P0: []})


def test_level_properties():
    assert IsolationLevel.SNAPSHOT.is_multiversion
    assert IsolationLevel.READ_CONSISTENCY.is_engine_defined
    assert not IsolationLevel.REPEATABLE_READ.is_engine_defined
    assert [level.value for level in IsolationLevel.matrix_rows()] == [
        "read-uncommitted", "read-committed", "cursor-stability",
        "repeatable-read", "snapshot", "serializable",
    ]
    assert [p.value for p in Phenomenon.matrix_columns()] == ["P0", "P1", "P4C", "P4", "P2", "P3", "A5A", "A5B"]


def test_render_classification(textbook):
    history = textbook["H2"]

    lines = render_classification(history, classify(history))

    assert "P0: none" in lines
    assert "P2: r1[x]@0 w2[x]@2 c1@7" in lines
    assert "A2: none" in lines
    assert len(lines) == len(Phenomenon)


def test_render_classification_records(textbook):
    lines = render_classification_records(classify(textbook["H2"]))

    assert "phenomenon=P2 positions=0,2,7 txns=1,2 items=x" in lines
    assert "phenomenon=A3 witnesses=0" in lines
