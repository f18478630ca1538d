import pytest

from isolab.harness.outcomes import AbortReason, TxnStatus
from isolab.harness.schedules import enumerate_schedules, serial_schedule
from isolab.harness.search import counted_classification
from isolab.history_core.graph import is_serializable
from isolab.history_core.notation import format_actions
from isolab.mvcc.snapshot import SnapshotEngine, run_si
from isolab.phenomena.admission import IsolationLevel
from isolab.phenomena.detectors import Phenomenon, classify
from isolab.shared.errors import EngineError

from tests.conftest import H1_SI


def test_begin_read_write_commit(workload):
    engine = SnapshotEngine(workload("transfer"))

    # Call
    first = engine.begin(1)
    second = engine.begin(2)
    engine.write(1, "x", 10)

    # Assertions
    assert (first.start_ts, second.start_ts) == (1, 2)
    assert engine.read(1, "x") == (10, 1)
    assert engine.read(2, "x") == (50, 0)
    assert engine.commit(1) == (True, [])
    assert first.commit_ts == 3
    assert engine.read(2, "x") == (50, 0)
    assert engine.begin(3).start_ts == 4
    assert engine.read(3, "x") == (10, 1)


def test_first_committer_wins(workload):
    engine = SnapshotEngine(workload("lost-update"))
    engine.begin(1)
    engine.begin(2)
    engine.write(1, "x", 130)
    engine.write(2, "x", 120)

    assert engine.commit(2) == (True, [])
    assert engine.commit(1) == (False, ["x"])
    assert engine.store.visible("x").value == 120


def test_disjoint_writes_both_commit(workload):
    engine = SnapshotEngine(workload("write-skew"))
    engine.begin(1)
    engine.begin(2)
    engine.write(1, "y", -40)
    engine.write(2, "x", -40)

    assert engine.commit(1) == (True, [])
    assert engine.commit(2) == (True, [])


def test_operations_after_commit_are_rejected(workload):
    engine = SnapshotEngine(workload("transfer"))
    engine.begin(1)
    engine.commit(1)

    with pytest.raises(EngineError, match="already terminated"):
        engine.read(1, "x")


def test_write_to_unknown_key_is_rejected(workload):
    engine = SnapshotEngine(workload("transfer"))
    engine.begin(1)

    with pytest.raises(EngineError):
        engine.write(1, "z", 1)


def test_transfer_reads_its_snapshot(workload):
    result = run_si(workload("transfer"))

    assert format_actions(result.history.actions) == H1_SI
    assert format_actions(result.sv_history().actions) == (
        "r1[x=50] r1[y=50] r2[x=50] r2[y=50] c2 w1[x=10] w1[y=90] c1"
    )
    assert result.all_committed()
    assert result.state() == {"x": 10, "y": 90}


def test_lost_update_loses_first_committer_wins(workload):
    result = run_si(workload("lost-update"))

    assert format_actions(result.history.actions) == "r1[x@0=100] r2[x@0=100] w2[x@2=120] c2 w1[x@1=130] a1"
    assert result.outcome(1).status is TxnStatus.ABORTED
    assert result.outcome(1).reason is AbortReason.FIRST_COMMITTER_WINS
    assert result.outcome(1).render() == "T1 aborted (first-committer-wins on x)"
    assert result.state() == {"x": 120}


def test_write_skew_commits_both(workload):
    result = run_si(workload("write-skew"))
    history = result.sv_history()

    assert result.all_committed()
    assert result.constraint_holds is False
    assert format_actions(history.actions) == (
        "r1[x=50] r1[y=50] r2[x=50] r2[y=50] w1[y=-40] c1 w2[x=-40] c2"
    )
    assert classify(history)[Phenomenon.A5B]
    assert not is_serializable(history)[0]


def test_job_tasks_shows_a_phantom(workload):
    result = run_si(workload("job-tasks"))

    assert result.all_committed()
    assert result.constraint_holds is False
    assert counted_classification(IsolationLevel.SNAPSHOT, result.sv_history())[Phenomenon.P3]
    assert [observation.render() for observation in result.observations] == [
        "@0 T1 P:tasks {t1=4 t2=3}",
        "@1 T2 P:tasks {t1=4 t2=3}",
    ]


def test_serial_run_sees_committed_writes(workload):
    lost_update = workload("lost-update")

    result = run_si(lost_update, serial_schedule(lost_update))

    assert result.all_committed()
    assert result.state() == {"x": 150}


def test_overlapping_writers_of_x_abort_exactly_one(workload):
    lost_update = workload("lost-update")
    serial = {(1, 1, 1, 2, 2, 2), (2, 2, 2, 1, 1, 1)}

    for schedule in enumerate_schedules(lost_update):
        result = run_si(lost_update, schedule)
        aborted = [o for o in result.outcomes if o.status is TxnStatus.ABORTED]
        if schedule in serial:
            assert not aborted, schedule
        else:
            assert len(aborted) == 1, schedule
            assert aborted[0].conflict_keys == ("x",)


def test_snapshot_histories_never_show_lost_update_or_rereads(workloads):
    for workload in workloads.values():
        for schedule in enumerate_schedules(workload):
            history = run_si(workload, schedule).sv_history()
            classification = classify(history)
            for phenomenon in (Phenomenon.P4, Phenomenon.P4C, Phenomenon.A1, Phenomenon.A2, Phenomenon.A3):
                assert not classification[phenomenon], f"{workload.name} {schedule}: {phenomenon.value}"


def test_snapshot_histories_are_valid_snapshot_reads(workloads):
    # sv_history() raises when a read does not match its snapshot
    for workload in workloads.values():
        for schedule in enumerate_schedules(workload):
            run_si(workload, schedule).sv_history()
