"""
Read Consistency: every statement reads the most recent committed data as of
the statement's start, and a cursor reads as of its open. Writes take long
write locks, so the first writer of a key wins and later writers wait.
Cursor fetches hold a read lock on the current row until the cursor moves.
"""
from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable

from isolab.harness.outcomes import RunResult
from isolab.harness.schedules import resolve_schedule
from isolab.harness.workloads import Workload
from isolab.history_core.models import Flavor, PredicateDecl
from isolab.locking.engine import CursorState, LockingEngine, TxnState
from isolab.locking.policy import LockDuration, LockPolicy
from isolab.mvcc.versions import VersionStore
from isolab.phenomena.admission import IsolationLevel

logger = logging.getLogger(__name__)


class ReadConsistencyEngine(LockingEngine):
    engine_name = "read-consistency"
    flavor = Flavor.MULTI_VERSION

    def __init__(self, workload: Workload):
        super().__init__(workload, IsolationLevel.READ_CONSISTENCY)
        self.store = VersionStore(workload.universe, workload.initial_state())
        self._counter = itertools.count(1)
        self.last_commit_ts = 0

    def _policy(self) -> LockPolicy:
        return LockPolicy(item_read=LockDuration.CURSOR, pred_read=None, write=LockDuration.LONG)

    @property
    def plain_read_lock(self) -> LockDuration | None:
        return None

    def _visible(self, state: TxnState, key: str, as_of: int | None = None) -> tuple[int | None, int]:
        if key in state.buffer:
            return state.buffer[key], state.txn
        version = self.store.visible(key, as_of)
        return version.value, version.writer

    def _new_cursor(self, state: TxnState, decl: PredicateDecl) -> CursorState:
        return CursorState(predicate=decl, open_ts=self.last_commit_ts)

    def _write(self, state: TxnState, key: str, value: int | None) -> None:
        state.buffer[key] = value

    def _rollback(self, state: TxnState, database: dict, last_writer: dict) -> None:
        state.buffer.clear()

    def _publish(self, state: TxnState) -> None:
        commit_ts = next(self._counter)
        for key, value in sorted(state.buffer.items()):
            self.store.install(key, value, state.txn, commit_ts)
        self.last_commit_ts = commit_ts
        logger.debug(f"T{state.txn} publishes {sorted(state.buffer)} at {commit_ts}")

    def _read_point(self, state: TxnState, position: int) -> int:
        return position

    def _cursor_read_point(self, state: TxnState, cursor: CursorState) -> int:
        return cursor.opened_at

    def _final_state(self) -> dict[str, int | None]:
        return self.store.snapshot()


def run_read_consistency(workload: Workload, schedule: Iterable[int] | str | None = None) -> RunResult:
    """Replay the workload under Read Consistency; deadlocks are resolved as in the locking engine"""
    engine = ReadConsistencyEngine(workload)
    return engine.run(resolve_schedule(workload, schedule))
