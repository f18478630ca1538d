"""
Run reports shared by every engine.
"""
from __future__ import annotations

from collections.abc import Mapping
from enum import Enum

from attrs import field, frozen

from isolab.history_core.models import Flavor, History
from isolab.history_core.notation import format_actions
from isolab.mvcc.sv_mapping import mv_to_sv


class TxnStatus(str, Enum):
    COMMITTED = "committed"
    ABORTED = "aborted"
    INCOMPLETE = "incomplete"


class AbortReason(str, Enum):
    PROGRAM = "program"
    DEADLOCK = "deadlock"
    FIRST_COMMITTER_WINS = "first-committer-wins"
    # Cursor write while the cursor is exhausted or closed
    NO_CURRENT_ROW = "no-current-row"


@frozen
class TxnOutcome:
    txn: int
    status: TxnStatus
    reason: AbortReason | None = None
    conflict_keys: tuple[str, ...] = field(default=(), converter=lambda keys: tuple(sorted(keys)))

    def render(self) -> str:
        line = f"T{self.txn} {self.status.value}"
        if self.reason is not None:
            line += f" ({self.reason.value}"
            if self.conflict_keys:
                line += f" on {','.join(self.conflict_keys)}"
            line += ")"
        return line


@frozen
class PredicateObservation:
    """Rows a predicate read returned, keyed to the read's history position"""

    position: int
    txn: int
    predicate: str
    rows: tuple[tuple[str, int], ...] = field(converter=lambda rows: tuple(sorted(dict(rows).items())))

    def render(self) -> str:
        rows = " ".join(f"{key}={value}" for key, value in self.rows)
        return f"@{self.position} T{self.txn} P:{self.predicate} {{{rows}}}"


def _pairs(mapping: Mapping | tuple) -> tuple:
    pairs = mapping.items() if isinstance(mapping, Mapping) else mapping
    return tuple(sorted(pairs))


@frozen
class RunResult:
    workload: str
    level: str
    schedule: tuple[int, ...] = field(converter=tuple)
    history: History
    outcomes: tuple[TxnOutcome, ...] = field(converter=lambda outcomes: tuple(sorted(outcomes, key=lambda o: o.txn)))
    # Committed state at the end of the run, incomplete txns rolled back
    final_state: tuple[tuple[str, int | None], ...] = field(converter=_pairs)
    constraint_holds: bool | None = None
    observations: tuple[PredicateObservation, ...] = field(default=(), converter=tuple)
    # History position -> position of the snapshot the read used (multi-version runs)
    read_points: tuple[tuple[int, int], ...] | None = field(
        default=None, converter=lambda points: None if points is None else _pairs(points)
    )
    lock_events: tuple = field(default=(), converter=tuple)

    def outcome(self, txn: int) -> TxnOutcome:
        for outcome in self.outcomes:
            if outcome.txn == txn:
                return outcome
        raise KeyError(txn)

    def all_committed(self) -> bool:
        return all(outcome.status is TxnStatus.COMMITTED for outcome in self.outcomes)

    def state(self) -> dict[str, int | None]:
        return dict(self.final_state)

    def sv_history(self) -> History:
        """The single-version history the detectors analyse"""
        if self.history.flavor is Flavor.MULTI_VERSION:
            read_points = None if self.read_points is None else dict(self.read_points)
            return mv_to_sv(self.history, read_points)
        return self.history

    def render(self) -> list[str]:
        lines = [
            f"workload: {self.workload}",
            f"level: {self.level}",
            f"schedule: {' '.join(str(slot) for slot in self.schedule)}",
            f"history: {format_actions(self.history.actions)}",
        ]
        if self.history.flavor is Flavor.MULTI_VERSION:
            lines.append(f"single-version: {format_actions(self.sv_history().actions)}")
        lines.extend(outcome.render() for outcome in self.outcomes)
        state = " ".join(f"{key}={'-' if value is None else value}" for key, value in self.final_state)
        lines.append(f"final state: {state}")
        if self.constraint_holds is not None:
            lines.append(f"constraint: {'holds' if self.constraint_holds else 'violated'}")
        lines.extend(f"observed {observation.render()}" for observation in self.observations)
        return lines
