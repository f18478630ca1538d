"""
Lock modes, scopes, durations and the per-level locking policies.
"""
from __future__ import annotations

from enum import Enum, IntEnum

from attrs import frozen

from isolab.history_core.models import PredicateDecl
from isolab.phenomena.admission import IsolationLevel
from isolab.shared.constants import ErrorMessages, Notation
from isolab.shared.errors import EngineError


class LockMode(str, Enum):
    READ = "read"
    WRITE = "write"

    def conflicts_with(self, other: LockMode) -> bool:
        return LockMode.WRITE in (self, other)

    def covers(self, requested: LockMode) -> bool:
        """A held Write lock also serves Read requests"""
        return self is LockMode.WRITE or requested is LockMode.READ


class LockDuration(IntEnum):
    # Released when the action completes
    SHORT = 1
    # Released when the cursor moves off the row or closes
    CURSOR = 2
    # Released at commit or abort
    LONG = 3


@frozen
class LockScope:
    """A single item, or every item (present or phantom) a predicate covers"""

    key: str | None = None
    predicate: PredicateDecl | None = None

    @classmethod
    def item(cls, key: str) -> LockScope:
        return cls(key=key)

    @classmethod
    def on_predicate(cls, decl: PredicateDecl) -> LockScope:
        return cls(predicate=decl)

    @property
    def keys(self) -> frozenset[str]:
        if self.predicate is not None:
            return self.predicate.covered_keys
        return frozenset([self.key])

    def overlaps(self, other: LockScope) -> bool:
        return not self.keys.isdisjoint(other.keys)

    def render(self) -> str:
        if self.predicate is not None:
            return f"{Notation.PREDICATE_PREFIX}{self.predicate.name}"
        return self.key


@frozen
class LockPolicy:
    """
    Read and write lock durations for one level.

    item_read is None, SHORT, CURSOR or LONG; CURSOR means cursor fetches
    hold the row lock until the cursor moves while plain reads hold it SHORT.
    pred_read is None, SHORT or LONG. write is SHORT or LONG and applies to
    items and predicates alike.
    """

    item_read: LockDuration | None
    pred_read: LockDuration | None
    write: LockDuration

    @property
    def plain_read(self) -> LockDuration | None:
        if self.item_read is LockDuration.CURSOR:
            return LockDuration.SHORT
        return self.item_read

    @property
    def cursor_read(self) -> LockDuration | None:
        return self.item_read


_POLICIES = {
    IsolationLevel.DEGREE_0: LockPolicy(None, None, LockDuration.SHORT),
    IsolationLevel.READ_UNCOMMITTED: LockPolicy(None, None, LockDuration.LONG),
    IsolationLevel.READ_COMMITTED: LockPolicy(LockDuration.SHORT, LockDuration.SHORT, LockDuration.LONG),
    IsolationLevel.CURSOR_STABILITY: LockPolicy(LockDuration.CURSOR, LockDuration.SHORT, LockDuration.LONG),
    IsolationLevel.REPEATABLE_READ: LockPolicy(LockDuration.LONG, LockDuration.SHORT, LockDuration.LONG),
    IsolationLevel.SERIALIZABLE: LockPolicy(LockDuration.LONG, LockDuration.LONG, LockDuration.LONG),
}


def policy_for_level(level: IsolationLevel) -> LockPolicy:
    level = IsolationLevel(level)
    if level not in _POLICIES:
        raise EngineError(ErrorMessages.UNSUPPORTED_LEVEL.format(level=level.value, engine="locking"))
    return _POLICIES[level]


def is_locking_level(level: IsolationLevel) -> bool:
    return IsolationLevel(level) in _POLICIES
