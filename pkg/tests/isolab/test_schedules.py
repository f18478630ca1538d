import logging

import pytest

from isolab.harness.schedules import enumerate_schedules, resolve_schedule, schedule_count, serial_schedule
from isolab.harness.workloads import parse_workload
from isolab.shared.constants import Defaults
from isolab.shared.errors import WorkloadError


@pytest.fixture
def pair():
    return parse_workload("name pair\ntxn 1: r[x] commit\ntxn 2: w[x=1] commit")


@pytest.mark.parametrize("programs, expected", [
    ("txn 1: commit\ntxn 2: commit", 2),
    ("txn 1: r[x] commit\ntxn 2: w[x=1] commit", 6),
    ("txn 1: r[x] commit\ntxn 2: commit\ntxn 3: abort", 12),
])
def test_enumeration_matches_schedule_count(programs, expected):
    workload = parse_workload(programs)

    schedules = list(enumerate_schedules(workload))

    assert len(schedules) == expected
    assert len(set(schedules)) == expected
    assert schedule_count(workload.step_counts().values()) == expected


def test_schedules_are_lexicographic(pair):
    schedules = list(enumerate_schedules(pair))

    assert schedules == sorted(schedules)
    assert schedules[0] == serial_schedule(pair) == (1, 1, 2, 2)
    assert schedules[-1] == (2, 2, 1, 1)


def test_builtin_enumeration_sizes(workloads):
    for workload in workloads.values():
        if workload.total_steps() > Defaults.SCHEDULE_BOUND:
            continue
        schedules = list(enumerate_schedules(workload))
        assert len(schedules) == schedule_count(workload.step_counts().values()), workload.name
        for schedule in schedules:
            assert sorted(schedule) == sorted(serial_schedule(workload))


def test_truncated_enumeration_yields_distinct_prefixes(pair, caplog):
    with caplog.at_level(logging.WARNING):
        schedules = list(enumerate_schedules(pair, max_actions=2))

    assert schedules == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert "Schedules of pair truncated to 2 of 4 slots" in caplog.text


def test_full_enumeration_does_not_warn(pair, caplog):
    with caplog.at_level(logging.WARNING):
        list(enumerate_schedules(pair))

    assert caplog.text == ""


def test_resolve_schedule(workload, pair):
    transfer = workload("transfer")

    assert resolve_schedule(transfer) == transfer.reference_schedule
    assert resolve_schedule(pair) == (1, 1, 2, 2)
    assert resolve_schedule(pair, "2 1,2 1") == (2, 1, 2, 1)
    assert resolve_schedule(pair, [2, 2]) == (2, 2)


def test_resolve_schedule_rejects_unknown_txns(pair):
    with pytest.raises(WorkloadError, match="unknown transaction T3"):
        resolve_schedule(pair, "1 3")
