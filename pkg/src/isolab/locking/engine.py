"""
Single-version lock scheduler.

Replays a workload under an explicit schedule: each slot names a txn, and
the engine attempts that txn's next program step. A step first acquires the
locks the level's policy requires; if one is refused the txn blocks and the
slot is consumed. A blocked txn whose request is later granted runs its
pending step at its next slot.
"""
from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from enum import Enum

import networkx as nx
from attrs import define, field, frozen

from isolab.harness.outcomes import AbortReason, PredicateObservation, RunResult, TxnOutcome, TxnStatus
from isolab.harness.schedules import resolve_schedule
from isolab.harness.workloads import Step, StepKind, Workload
from isolab.history_core.models import Action, ActionKind, Flavor, PredicateDecl
from isolab.locking.lock_table import LockEntry, LockTable
from isolab.locking.policy import LockDuration, LockMode, LockPolicy, LockScope, policy_for_level
from isolab.phenomena.admission import IsolationLevel
from isolab.shared.constants import ErrorMessages
from isolab.shared.errors import EngineError

logger = logging.getLogger(__name__)


class ReleaseEvent(str, Enum):
    ACTION_COMPLETE = "action-complete"
    CURSOR_MOVE = "cursor-move"
    TERMINAL = "terminal"


class RunState(str, Enum):
    ACTIVE = "active"
    BLOCKED = "blocked"
    COMMITTED = "committed"
    ABORTED = "aborted"


class StepStatus(str, Enum):
    EXECUTED = "executed"
    BLOCKED = "blocked"
    DEADLOCK_ABORTED = "deadlock-aborted"
    # The txn has nothing left to run
    IDLE = "idle"


@frozen
class StepResult:
    status: StepStatus
    action: Action | None = None
    victim: int | None = None


class LockEventKind(str, Enum):
    GRANT = "grant"
    BLOCK = "block"
    RELEASE = "release"


@frozen
class LockEvent:
    kind: LockEventKind
    # Number of actions emitted when the event happened
    position: int
    entry: LockEntry


@define
class CursorState:
    predicate: PredicateDecl
    # Last key fetched; the next fetch continues after it
    position: str | None = None
    # Row under the cursor, None before the first fetch and once exhausted
    row: str | None = None
    opened_at: int | None = None
    open_ts: int = 0


@define
class TxnState:
    txn: int
    program: tuple[Step, ...]
    pc: int = 0
    status: RunState = RunState.ACTIVE
    started_at: int | None = None
    # Value last read or written per key; base of relative writes
    seen: dict = field(factory=dict)
    cursors: dict = field(factory=dict)
    # key -> (before image, writer of the before image)
    undo: dict = field(factory=dict)
    # Buffered writes of engines that publish at commit
    buffer: dict = field(factory=dict)
    reason: AbortReason | None = None
    conflict_keys: tuple[str, ...] = ()

    @property
    def terminated(self) -> bool:
        return self.status in (RunState.COMMITTED, RunState.ABORTED)


class LockingEngine:
    """Well-formed locking with the durations of the level's LockPolicy"""

    engine_name = "locking"
    flavor = Flavor.SINGLE_VERSION

    def __init__(self, workload: Workload, level: IsolationLevel):
        self.workload = workload
        self.level = IsolationLevel(level)
        self.policy = self._policy()
        self.locks = LockTable()
        self.predicates = workload.predicate_map()
        self.database: dict[str, int | None] = workload.initial_state()
        self.last_writer: dict[str, int] = {}
        self.txns = {txn: TxnState(txn, steps) for txn, steps in workload.programs}
        self.actions: list[Action] = []
        self.observations: list[PredicateObservation] = []
        self.lock_events: list[LockEvent] = []
        self.read_points: dict[int, int] = {}
        self._slot = 0

    def _policy(self) -> LockPolicy:
        return policy_for_level(self.level)

    @property
    def plain_read_lock(self) -> LockDuration | None:
        return self.policy.plain_read

    # ===== LOCKS =====

    def _record(self, kind: LockEventKind, entry: LockEntry) -> None:
        self.lock_events.append(LockEvent(kind, len(self.actions), entry))

    def acquire_lock(self, txn: int, scope: LockScope, mode: LockMode, duration: LockDuration) -> bool:
        """
        Request a lock for txn.

        Returns:
            bool: True when granted; otherwise the request is queued and txn blocks
        """
        state = self.txns[txn]
        if state.terminated:
            raise EngineError(ErrorMessages.TERMINATED_REQUEST.format(txn=txn))

        request = LockEntry(txn, scope, mode, duration)
        if self.locks.covered(request):
            return True
        if self.locks.request(request):
            self._record(LockEventKind.GRANT, request)
            return True

        self._record(LockEventKind.BLOCK, request)
        state.status = RunState.BLOCKED
        logger.debug(f"T{txn} blocks on {request.render()}, held by {self.locks.conflicting_holders(request)}")
        return False

    def release_for(self, txn: int, event: ReleaseEvent, scope: LockScope | None = None) -> list[LockEntry]:
        """Release the locks of txn whose duration expires at the event, then serve the queue"""
        if event is ReleaseEvent.ACTION_COMPLETE:
            released = self.locks.release(txn, lambda entry: entry.duration is LockDuration.SHORT)
        elif event is ReleaseEvent.CURSOR_MOVE:
            released = self.locks.release(
                txn, lambda entry: entry.duration is LockDuration.CURSOR and entry.scope == scope
            )
        else:
            self.locks.forget(txn)
            released = self.locks.release(txn, lambda entry: True)

        for entry in released:
            self._record(LockEventKind.RELEASE, entry)
        self._grant_waiting()
        return released

    def _grant_waiting(self) -> None:
        for request in self.locks.grant_waiting():
            self._record(LockEventKind.GRANT, request)
            state = self.txns[request.txn]
            still_waiting = any(entry.txn == request.txn for entry in self.locks.waiting())
            if state.status is RunState.BLOCKED and not still_waiting:
                state.status = RunState.ACTIVE

    def detect_deadlock(self) -> list[int] | None:
        """One cycle of the waits-for graph, or None"""
        graph = nx.DiGraph()
        graph.add_edges_from(self.locks.waits_for())
        try:
            cycle = nx.find_cycle(graph, orientation="original")
        except nx.NetworkXNoCycle:
            return None
        return [source for source, _, _ in cycle]

    def _resolve_deadlocks(self) -> list[int]:
        victims = []
        while (cycle := self.detect_deadlock()) is not None:
            # The most recently started txn in the cycle is aborted
            victim = max(cycle, key=lambda txn: self.txns[txn].started_at)
            logger.debug(f"Deadlock among {cycle}; aborting T{victim}")
            self._abort(self.txns[victim], AbortReason.DEADLOCK)
            victims.append(victim)
        return victims

    # ===== DATA ACCESS =====

    def _visible(self, state: TxnState, key: str, as_of: int | None = None) -> tuple[int | None, int | None]:
        """Value the txn sees for key, and the version it came from"""
        return self.database[key], None

    def _write(self, state: TxnState, key: str, value: int | None) -> None:
        if key not in state.undo:
            state.undo[key] = (self.database[key], self.last_writer.get(key))
        self.database[key] = value
        self.last_writer[key] = state.txn

    def _rollback(self, state: TxnState, database: dict, last_writer: dict) -> None:
        """Restore before images of keys nobody has overwritten since"""
        for key, (before, writer) in state.undo.items():
            if last_writer.get(key) != state.txn:
                continue
            database[key] = before
            if writer is None:
                last_writer.pop(key, None)
            else:
                last_writer[key] = writer

    def _publish(self, state: TxnState) -> None:
        """Make the txn's writes visible at commit; locking writes are in place"""

    def _final_state(self) -> dict[str, int | None]:
        database, last_writer = dict(self.database), dict(self.last_writer)
        incomplete = [state for state in self.txns.values() if not state.terminated and state.started_at is not None]
        for state in sorted(incomplete, key=lambda state: state.started_at, reverse=True):
            self._rollback(state, database, last_writer)
        return database

    def _predicate_rows(self, state: TxnState, decl: PredicateDecl, as_of: int | None = None) -> dict[str, int]:
        rows = {}
        for key in sorted(decl.covered_keys):
            value, _ = self._visible(state, key, as_of)
            if value is not None:
                rows[key] = value
        return rows

    def _new_cursor(self, state: TxnState, decl: PredicateDecl) -> CursorState:
        return CursorState(predicate=decl)

    def _cursor(self, state: TxnState, name: str) -> CursorState:
        return state.cursors.get(name) or self._new_cursor(state, self.predicates[name])

    def _next_row(self, state: TxnState, cursor: CursorState) -> str | None:
        rows = self._predicate_rows(state, cursor.predicate, cursor.open_ts)
        for key in rows:
            if cursor.position is None or key > cursor.position:
                return key
        return None

    def _write_version(self, state: TxnState) -> int | None:
        return state.txn if self.flavor is Flavor.MULTI_VERSION else None

    def _read_point(self, state: TxnState, position: int) -> int | None:
        return None

    def _begin(self, state: TxnState) -> None:
        """Called before the first step of a txn runs"""

    # ===== STEPS =====

    def _lock_needs(self, state: TxnState, step: Step) -> list[tuple[LockScope, LockMode, LockDuration]]:
        kind = step.kind
        if kind is StepKind.READ:
            if self.plain_read_lock is None:
                return []
            return [(LockScope.item(step.key), LockMode.READ, self.plain_read_lock)]
        if kind in (StepKind.WRITE, StepKind.DELETE):
            return [(LockScope.item(step.key), LockMode.WRITE, self.policy.write)]
        if kind is StepKind.PREDICATE_READ:
            if self.policy.pred_read is None:
                return []
            return [(LockScope.on_predicate(self.predicates[step.predicate]), LockMode.READ, self.policy.pred_read)]
        if kind is StepKind.FETCH:
            needs = []
            cursor = self._cursor(state, step.predicate)
            if step.predicate not in state.cursors and self.policy.pred_read is not None:
                needs.append((LockScope.on_predicate(cursor.predicate), LockMode.READ, self.policy.pred_read))
            row = self._next_row(state, cursor)
            if row is not None and self.policy.cursor_read is not None:
                needs.append((LockScope.item(row), LockMode.READ, self.policy.cursor_read))
            return needs
        if kind is StepKind.CURSOR_WRITE:
            return [(LockScope.item(self._current_row(state, step.predicate)), LockMode.WRITE, self.policy.write)]
        return []

    def _has_current_row(self, state: TxnState, name: str) -> bool:
        cursor = state.cursors.get(name)
        return cursor is not None and cursor.row is not None

    def _current_row(self, state: TxnState, name: str) -> str:
        cursor = state.cursors.get(name)
        if cursor is None or cursor.row is None:
            raise EngineError(ErrorMessages.NO_CURRENT_ROW.format(name=name, txn=state.txn))
        return cursor.row

    def _emit(self, action: Action, read_point: int | None = None) -> Action:
        position = len(self.actions)
        self.actions.append(action)
        if read_point is not None:
            self.read_points[position] = read_point
        return action

    def _execute(self, state: TxnState, step: Step) -> Action | None:
        txn = state.txn
        kind = step.kind

        if kind is StepKind.READ:
            value, version = self._visible(state, step.key)
            state.seen[step.key] = value
            position = len(self.actions)
            return self._emit(Action(ActionKind.READ, txn, step.key, value, version), self._read_point(state, position))

        if kind in (StepKind.WRITE, StepKind.DELETE):
            value = step.resolve_value(state.seen.get(step.key))
            self._write(state, step.key, value)
            state.seen[step.key] = value
            return self._emit(Action(ActionKind.WRITE, txn, step.key, value, self._write_version(state)))

        if kind is StepKind.PREDICATE_READ:
            decl = self.predicates[step.predicate]
            rows = self._predicate_rows(state, decl)
            position = len(self.actions)
            self.observations.append(PredicateObservation(position, txn, decl.name, rows))
            return self._emit(Action(ActionKind.PREDICATE_READ, txn, decl.name), self._read_point(state, position))

        if kind is StepKind.FETCH:
            return self._fetch(state, step.predicate)

        if kind is StepKind.CURSOR_WRITE:
            row = self._current_row(state, step.predicate)
            value = step.resolve_value(state.seen.get(row))
            self._write(state, row, value)
            state.seen[row] = value
            return self._emit(Action(ActionKind.CURSOR_WRITE, txn, row, value, self._write_version(state)))

        if kind is StepKind.CLOSE:
            cursor = state.cursors.pop(step.predicate)
            if cursor.row is not None:
                self.release_for(txn, ReleaseEvent.CURSOR_MOVE, LockScope.item(cursor.row))
            return None

        if kind is StepKind.COMMIT:
            return self._commit(state)
        return self._abort(state, AbortReason.PROGRAM)

    def _fetch(self, state: TxnState, name: str) -> Action | None:
        cursor = self._cursor(state, name)
        if name not in state.cursors:
            cursor.opened_at = len(self.actions)
            state.cursors[name] = cursor

        previous = cursor.row
        row = self._next_row(state, cursor)
        cursor.row = row
        if row is not None:
            cursor.position = row
        if previous is not None:
            self.release_for(state.txn, ReleaseEvent.CURSOR_MOVE, LockScope.item(previous))
        if row is None:
            return None

        value, version = self._visible(state, row, cursor.open_ts)
        state.seen[row] = value
        return self._emit(Action(ActionKind.CURSOR_READ, state.txn, row, value, version), self._cursor_read_point(state, cursor))

    def _cursor_read_point(self, state: TxnState, cursor: CursorState) -> int | None:
        return None

    def _commit(self, state: TxnState) -> Action:
        self._publish(state)
        action = self._emit(Action(ActionKind.COMMIT, state.txn))
        state.status = RunState.COMMITTED
        self.release_for(state.txn, ReleaseEvent.TERMINAL)
        return action

    def _abort(self, state: TxnState, reason: AbortReason, conflict_keys: Iterable[str] = ()) -> Action:
        self._rollback(state, self.database, self.last_writer)
        action = self._emit(Action(ActionKind.ABORT, state.txn))
        state.status = RunState.ABORTED
        state.reason = reason
        state.conflict_keys = tuple(sorted(conflict_keys))
        self.release_for(state.txn, ReleaseEvent.TERMINAL)
        return action

    def step(self, txn: int) -> StepResult:
        """Attempt the next (or pending) program step of txn"""
        state = self.txns[txn]
        if state.terminated or state.pc >= len(state.program):
            return StepResult(StepStatus.IDLE)
        if state.status is RunState.BLOCKED:
            return StepResult(StepStatus.BLOCKED)
        if state.started_at is None:
            state.started_at = self._slot
            self._begin(state)

        step = state.program[state.pc]
        if step.kind is StepKind.CURSOR_WRITE and not self._has_current_row(state, step.predicate):
            logger.debug(f"T{txn} writes through cursor {step.predicate} with no current row; aborting")
            state.pc += 1
            return StepResult(StepStatus.EXECUTED, action=self._abort(state, AbortReason.NO_CURRENT_ROW))

        for scope, mode, duration in self._lock_needs(state, step):
            if not self.acquire_lock(txn, scope, mode, duration):
                victims = self._resolve_deadlocks()
                if txn in victims:
                    return StepResult(StepStatus.DEADLOCK_ABORTED, victim=txn)
                return StepResult(StepStatus.BLOCKED, victim=victims[0] if victims else None)

        action = self._execute(state, step)
        state.pc += 1
        if not state.terminated:
            self.release_for(txn, ReleaseEvent.ACTION_COMPLETE)
        return StepResult(StepStatus.EXECUTED, action=action)

    # ===== RUNS =====

    def run(self, schedule: Iterable[int]) -> RunResult:
        schedule = tuple(schedule)
        for slot, txn in enumerate(schedule):
            self._slot = slot
            self.step(txn)
        return self.result(schedule)

    def _outcome(self, state: TxnState) -> TxnOutcome:
        if state.status is RunState.COMMITTED:
            return TxnOutcome(state.txn, TxnStatus.COMMITTED)
        if state.status is RunState.ABORTED:
            return TxnOutcome(state.txn, TxnStatus.ABORTED, state.reason, state.conflict_keys)
        return TxnOutcome(state.txn, TxnStatus.INCOMPLETE)

    def result(self, schedule: tuple[int, ...]) -> RunResult:
        final_state = self._final_state()
        multi_version = self.flavor is Flavor.MULTI_VERSION
        return RunResult(
            workload=self.workload.name,
            level=self.level.value,
            schedule=schedule,
            history=self.workload.history(self.actions, self.flavor),
            outcomes=[self._outcome(state) for state in self.txns.values()],
            final_state=final_state,
            constraint_holds=self.workload.check_constraint(final_state),
            observations=self.observations,
            read_points=dict(self.read_points) if multi_version else None,
            lock_events=self.lock_events,
        )


def run_locking(workload: Workload, level: IsolationLevel, schedule: Iterable[int] | str | None = None) -> RunResult:
    """
    Replay the workload under the level's locking policy.

    Args:
        workload: Workload to run
        level: Any level with a locking policy
        schedule: Txn ids per slot; defaults to the workload's reference schedule

    Returns:
        RunResult: emitted history, per-txn outcomes and final state
    """
    engine = LockingEngine(workload, level)
    return engine.run(resolve_schedule(workload, schedule))


def lock_holdings(events: Iterable[LockEvent]) -> Mapping[int, list[LockEntry]]:
    """Locks held after each position, reconstructed from grant and release events"""
    held: list[LockEntry] = []
    snapshots: dict[int, list[LockEntry]] = {}
    for event in events:
        if event.kind is LockEventKind.GRANT:
            held = [entry for entry in held if not (entry.txn == event.entry.txn and entry.scope == event.entry.scope)]
            held.append(event.entry)
        elif event.kind is LockEventKind.RELEASE:
            held = [entry for entry in held if not (entry.txn == event.entry.txn and entry.scope == event.entry.scope)]
        snapshots[event.position] = list(held)
    return snapshots
