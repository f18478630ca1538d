"""
Snapshot Isolation.

A txn reads the committed state as of its start timestamp plus its own
buffered writes; reads never block. At commit the txn takes a commit
timestamp and aborts if a txn that committed inside its execution interval
wrote any key it also wrote (first committer wins).
"""
from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable

from attrs import define, field

from isolab.harness.outcomes import AbortReason, RunResult
from isolab.harness.schedules import resolve_schedule
from isolab.harness.workloads import Step, Workload
from isolab.history_core.models import Action, Flavor, PredicateDecl
from isolab.locking.engine import CursorState, LockingEngine, TxnState
from isolab.mvcc.versions import VersionStore
from isolab.phenomena.admission import IsolationLevel
from isolab.shared.constants import ErrorMessages
from isolab.shared.errors import EngineError

logger = logging.getLogger(__name__)


@define
class SnapshotTxn:
    txn: int
    start_ts: int
    write_set: dict = field(factory=dict)
    commit_ts: int | None = None
    aborted: bool = False
    # History length when the snapshot was taken
    read_point: int = 0

    @property
    def active(self) -> bool:
        return self.commit_ts is None and not self.aborted


class SnapshotEngine(LockingEngine):
    """Schedule replay with snapshot reads and buffered writes; takes no locks"""

    engine_name = "snapshot"
    flavor = Flavor.MULTI_VERSION

    def __init__(self, workload: Workload):
        super().__init__(workload, IsolationLevel.SNAPSHOT)
        self.store = VersionStore(workload.universe, workload.initial_state())
        self._counter = itertools.count(1)
        self.snapshots: dict[int, SnapshotTxn] = {}

    def _policy(self):
        return None

    def _tick(self) -> int:
        return next(self._counter)

    def _active(self, txn: int) -> SnapshotTxn:
        snapshot = self.snapshots.get(txn)
        if snapshot is None or not snapshot.active:
            raise EngineError(ErrorMessages.TERMINATED_REQUEST.format(txn=txn))
        return snapshot

    # ===== SNAPSHOT OPERATIONS =====

    def begin(self, txn: int) -> SnapshotTxn:
        snapshot = SnapshotTxn(txn=txn, start_ts=self._tick(), read_point=len(self.actions))
        self.snapshots[txn] = snapshot
        return snapshot

    def read(self, txn: int, key: str) -> tuple[int | None, int]:
        """(value, writer of the version read): own write first, else the snapshot"""
        snapshot = self._active(txn)
        if key in snapshot.write_set:
            return snapshot.write_set[key], txn
        version = self.store.visible(key, snapshot.start_ts)
        return version.value, version.writer

    def predicate_read(self, txn: int, decl: PredicateDecl) -> dict[str, int]:
        rows = {}
        for key in sorted(decl.covered_keys):
            value, _ = self.read(txn, key)
            if value is not None:
                rows[key] = value
        return rows

    def write(self, txn: int, key: str, value: int | None) -> None:
        snapshot = self._active(txn)
        if key not in self.store.keys():
            raise EngineError(ErrorMessages.UNKNOWN_KEY.format(key=key))
        snapshot.write_set[key] = value

    def commit(self, txn: int) -> tuple[bool, list[str]]:
        """
        Validate and publish the txn's writes.

        Returns:
            tuple: (committed, keys written by a txn that committed inside the execution interval)
        """
        snapshot = self._active(txn)
        commit_ts = self._tick()
        conflicts = sorted(
            key
            for key in snapshot.write_set
            if any(writer != txn for writer in self.store.writers_between(key, snapshot.start_ts, commit_ts))
        )
        if conflicts:
            snapshot.aborted = True
            logger.debug(f"T{txn} loses first-committer-wins on {conflicts}")
            return False, conflicts

        for key, value in sorted(snapshot.write_set.items()):
            self.store.install(key, value, txn, commit_ts)
        snapshot.commit_ts = commit_ts
        return True, []

    # ===== ENGINE HOOKS =====

    def _lock_needs(self, state: TxnState, step: Step) -> list:
        return []

    def _begin(self, state: TxnState) -> None:
        self.begin(state.txn)

    def _visible(self, state: TxnState, key: str, as_of: int | None = None) -> tuple[int | None, int]:
        return self.read(state.txn, key)

    def _predicate_rows(self, state: TxnState, decl: PredicateDecl, as_of: int | None = None) -> dict[str, int]:
        return self.predicate_read(state.txn, decl)

    def _write(self, state: TxnState, key: str, value: int | None) -> None:
        self.write(state.txn, key, value)

    def _rollback(self, state: TxnState, database: dict, last_writer: dict) -> None:
        snapshot = self.snapshots.get(state.txn)
        if snapshot is not None and snapshot.active:
            snapshot.aborted = True

    def _read_point(self, state: TxnState, position: int) -> int:
        return self.snapshots[state.txn].read_point

    def _cursor_read_point(self, state: TxnState, cursor: CursorState) -> int:
        return self.snapshots[state.txn].read_point

    def _commit(self, state: TxnState) -> Action:
        committed, conflicts = self.commit(state.txn)
        if not committed:
            return self._abort(state, AbortReason.FIRST_COMMITTER_WINS, conflicts)
        return super()._commit(state)

    def _final_state(self) -> dict[str, int | None]:
        return self.store.snapshot()


def run_si(workload: Workload, schedule: Iterable[int] | str | None = None) -> RunResult:
    """
    Replay the workload under Snapshot Isolation.

    Returns:
        RunResult: multi-version history (reads carry the version they saw) and read points
    """
    engine = SnapshotEngine(workload)
    return engine.run(resolve_schedule(workload, schedule))
