"""
Isolation levels and their admission rules.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from enum import Enum

from isolab.history_core.models import History
from isolab.phenomena.detectors import Phenomenon, Witness, classify
from isolab.shared.constants import IsolationTable, LevelNames


class IsolationLevel(str, Enum):
    DEGREE_0 = LevelNames.DEGREE_0
    READ_UNCOMMITTED = LevelNames.READ_UNCOMMITTED
    READ_COMMITTED = LevelNames.READ_COMMITTED
    CURSOR_STABILITY = LevelNames.CURSOR_STABILITY
    REPEATABLE_READ = LevelNames.REPEATABLE_READ
    SNAPSHOT = LevelNames.SNAPSHOT
    READ_CONSISTENCY = LevelNames.READ_CONSISTENCY
    SERIALIZABLE = LevelNames.SERIALIZABLE

    @classmethod
    def matrix_rows(cls) -> list[IsolationLevel]:
        return [cls(name) for name in LevelNames.MATRIX_LEVELS]

    @property
    def is_multiversion(self) -> bool:
        return self in (IsolationLevel.SNAPSHOT, IsolationLevel.READ_CONSISTENCY)

    @property
    def is_engine_defined(self) -> bool:
        return self.value in LevelNames.ENGINE_DEFINED


def prohibited_phenomena(level: IsolationLevel) -> list[Phenomenon]:
    """Phenomena listed Not Possible for the level"""
    return [Phenomenon(name) for name in IsolationTable.prohibited(IsolationLevel(level).value)]


def admits_classification(level: IsolationLevel, classification: Mapping[Phenomenon, Sequence[Witness]]) -> bool:
    return not any(classification.get(phenomenon) for phenomenon in prohibited_phenomena(level))


def admits(level: IsolationLevel, history: History) -> bool:
    """True iff the history exhibits none of the phenomena the level prohibits"""
    return admits_classification(level, classify(history))
