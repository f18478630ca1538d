"""
Built-in workloads: the classic anomaly scenarios, each with its final-state
constraint and the reference schedule that reproduces the textbook history.
"""
from __future__ import annotations

import logging
from functools import lru_cache

from isolab.harness.workloads import Workload, parse_workload
from isolab.shared.constants import ErrorMessages
from isolab.shared.errors import WorkloadError

logger = logging.getLogger(__name__)


_WORKLOAD_TEXTS = [
    """
    name transfer
    describe T1 moves 40 from x to y while T2 reads both balances
    init x=50 y=50
    check x + y == 100
    schedule 1 1 2 2 2 1 1 1
    txn 1: r[x] w[x-=40] r[y] w[y+=40] commit
    txn 2: r[x] r[y] commit
    """,
    """
    name inconsistent-analysis
    describe T1 reads both balances around T2's transfer of 40 from x to y
    init x=50 y=50
    check x + y == 100
    schedule 1 2 2 2 2 2 1 1
    txn 1: r[x] r[y] commit
    txn 2: r[x] w[x-=40] r[y] w[y+=40] commit
    """,
    """
    name employee-phantom
    describe T1 lists active employees while T2 hires y and bumps the head count z
    universe {e1,y,z}
    init e1=1 z=1
    pred active = {e1,y}
    check count(P:active) - z == 0
    schedule 1 2 2 2 2 1 1
    txn 1: r[P:active] r[z] commit
    txn 2: w[y=1] r[z] w[z+=1] commit
    """,
    """
    name phantom-reread
    describe T1 evaluates the same search condition twice around an insert
    universe {e1,y}
    init e1=1
    pred active = {e1,y}
    schedule 1 2 2 1 1
    txn 1: r[P:active] r[P:active] commit
    txn 2: w[y=1] commit
    """,
    """
    name lost-update
    describe Two deposits of 30 and 20 read x before either writes it back
    init x=100
    check x == 150
    schedule 1 2 2 2 1 1
    txn 1: r[x] w[x+=30] commit
    txn 2: r[x] w[x+=20] commit
    """,
    """
    name cursor-lost-update
    describe The first deposit reads and updates x through a cursor
    init x=100
    pred acct = {x}
    check x == 150
    schedule 1 2 2 2 1 1
    txn 1: rc[P:acct] wc[P:acct+=30] commit
    txn 2: r[x] w[x+=20] commit
    """,
    """
    name write-skew
    describe Each txn checks x + y before withdrawing 90 from a different account
    init x=50 y=50
    check x + y > 0
    schedule 1 1 2 2 1 2 1 2
    txn 1: r[x] r[y] w[y-=90] commit
    txn 2: r[x] r[y] w[x-=90] commit
    """,
    """
    name write-skew-cursor
    describe The write-skew withdrawals, with one cursor per account
    init x=50 y=50
    pred cx = {x}
    pred cy = {y}
    check x + y > 0
    schedule 1 1 2 2 1 2 1 2
    txn 1: rc[P:cx] rc[P:cy] wc[P:cy-=90] commit
    txn 2: rc[P:cx] rc[P:cy] wc[P:cx-=90] commit
    """,
    """
    name read-skew
    describe T1 reads x before and y after T2 rebalances both
    init x=50 y=50
    check x + y == 100
    schedule 1 2 2 2 1 1
    txn 1: r[x] r[y] commit
    txn 2: w[x=10] w[y=90] commit
    """,
    """
    name job-tasks
    describe Two txns each check the task hours and add a task; the total may not exceed 8
    universe {t1,t2,t3,t4}
    init t1=4 t2=3
    pred tasks = {t1,t2,t3,t4}
    check sum(P:tasks) <= 8
    schedule 1 2 1 2 1 2
    txn 1: r[P:tasks] w[t3=1] commit
    txn 2: r[P:tasks] w[t4=1] commit
    """,
    """
    name dirty-write
    describe Two writers set x and y to their own id; x and y must agree
    init x=0 y=0
    check x - y == 0
    schedule 1 2 2 2 1 1
    txn 1: w[x=1] w[y=1] commit
    txn 2: w[x=2] w[y=2] commit
    """,
    """
    name dirty-read-rollback
    describe T2 reads a value T1 later rolls back
    init x=50
    schedule 1 2 2 1
    txn 1: w[x=10] abort
    txn 2: r[x] commit
    """,
]


@lru_cache(maxsize=1)
def _catalogue() -> tuple[Workload, ...]:
    workloads = tuple(parse_workload(text) for text in _WORKLOAD_TEXTS)
    logger.debug(f"Loaded {len(workloads)} built-in workloads")
    return workloads


def builtin_workloads() -> dict[str, Workload]:
    """All built-in workloads keyed by name, in catalogue order"""
    return {workload.name: workload for workload in _catalogue()}


def builtin_workload(name: str) -> Workload:
    workloads = builtin_workloads()
    if name not in workloads:
        raise WorkloadError(ErrorMessages.UNKNOWN_WORKLOAD.format(name=name))
    return workloads[name]
