"""
Subsequence detectors for isolation phenomena and anomalies.

Each detector matches one action template against a single-version history
and reports the earliest match per instantiation (transaction pair and
items). Reads in templates match plain and cursor reads; writes match plain
and cursor writes. Only the cursor lost update requires a cursor read.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Callable
from enum import Enum

from attrs import field, frozen

from isolab.history_core.models import ActionKind, Flavor, History
from isolab.shared.constants import ErrorMessages, PhenomenonNames
from isolab.shared.errors import HistoryValidationError

logger = logging.getLogger(__name__)


class Phenomenon(str, Enum):
    P0 = PhenomenonNames.P0
    P1 = PhenomenonNames.P1
    P2 = PhenomenonNames.P2
    P3 = PhenomenonNames.P3
    A1 = PhenomenonNames.A1
    A2 = PhenomenonNames.A2
    A3 = PhenomenonNames.A3
    P4 = PhenomenonNames.P4
    P4C = PhenomenonNames.P4C
    A5A = PhenomenonNames.A5A
    A5B = PhenomenonNames.A5B

    @classmethod
    def matrix_columns(cls) -> list[Phenomenon]:
        return [cls(name) for name in PhenomenonNames.MATRIX_PHENOMENA]


@frozen(order=True)
class Witness:
    phenomenon: Phenomenon
    action_indices: tuple[int, ...] = field(converter=tuple)
    items: tuple[str, ...] = field(converter=tuple)
    txns: tuple[int, ...] = field(converter=tuple)


Entries = list[tuple[int, int]]


class _HistoryIndex:
    """Per-key positions of reads and writes, plus terminal positions"""

    def __init__(self, history: History):
        self.txns = history.txns()
        self.predicates = {decl.name: decl for decl in history.predicates}
        self.commit: dict[int, int] = {}
        self.abort: dict[int, int] = {}
        self.reads: dict[str, Entries] = defaultdict(list)
        self.cursor_reads: dict[str, Entries] = defaultdict(list)
        self.writes: dict[str, Entries] = defaultdict(list)
        self.predicate_reads: dict[str, Entries] = defaultdict(list)

        for index, action in enumerate(history.actions):
            if action.kind is ActionKind.COMMIT:
                self.commit[action.txn] = index
            elif action.kind is ActionKind.ABORT:
                self.abort[action.txn] = index
            elif action.is_predicate_read:
                self.predicate_reads[action.target].append((index, action.txn))
            elif action.is_write:
                self.writes[action.target].append((index, action.txn))
            else:
                self.reads[action.target].append((index, action.txn))
                if action.kind is ActionKind.CURSOR_READ:
                    self.cursor_reads[action.target].append((index, action.txn))

    def terminal(self, txn: int) -> int | None:
        if txn in self.commit:
            return self.commit[txn]
        return self.abort.get(txn)

    def pairs(self):
        for first in self.txns:
            for second in self.txns:
                if first != second:
                    yield first, second

    def keys(self) -> list[str]:
        return sorted(set(self.reads) | set(self.writes))

    def covered_writes(self, predicate: str) -> list[str]:
        decl = self.predicates.get(predicate)
        if decl is None:
            return []
        return sorted(key for key in decl.covered_keys if key in self.writes)


def _first(entries: Entries, txn: int, after: int) -> int | None:
    """Earliest position of txn in entries strictly after the given position"""
    for index, owner in entries:
        if owner == txn and index > after:
            return index
    return None


def _before(position: int | None, limit: int | None) -> bool:
    return position is not None and limit is not None and position < limit


def _dirty_pattern(index: _HistoryIndex, phenomenon: Phenomenon, first_ops: dict, second_ops: dict) -> list[Witness]:
    """op1[x] ... op2[x] ... (c1 or a1)"""
    witnesses = []
    for key in index.keys():
        for first, second in index.pairs():
            i = _first(first_ops.get(key, []), first, -1)
            if i is None:
                continue
            terminal = index.terminal(first)
            j = _first(second_ops.get(key, []), second, i)
            if _before(j, terminal):
                witnesses.append(Witness(phenomenon, (i, j, terminal), (key,), (first, second)))
    return witnesses


def detect_dirty_write(index: _HistoryIndex) -> list[Witness]:
    return _dirty_pattern(index, Phenomenon.P0, index.writes, index.writes)


def detect_dirty_read(index: _HistoryIndex) -> list[Witness]:
    return _dirty_pattern(index, Phenomenon.P1, index.writes, index.reads)


def detect_fuzzy_read(index: _HistoryIndex) -> list[Witness]:
    return _dirty_pattern(index, Phenomenon.P2, index.reads, index.writes)


def detect_phantom(index: _HistoryIndex) -> list[Witness]:
    witnesses = []
    for predicate in sorted(index.predicate_reads):
        for first, second in index.pairs():
            i = _first(index.predicate_reads[predicate], first, -1)
            if i is None:
                continue
            terminal = index.terminal(first)
            for key in index.covered_writes(predicate):
                j = _first(index.writes[key], second, i)
                if _before(j, terminal):
                    witnesses.append(Witness(Phenomenon.P3, (i, j, terminal), (predicate, key), (first, second)))
    return witnesses


def detect_aborted_read(index: _HistoryIndex) -> list[Witness]:
    """w1[x] ... r2[x] ... (a1 and c2 in any order)"""
    witnesses = []
    for key in index.keys():
        for first, second in index.pairs():
            if first not in index.abort or second not in index.commit:
                continue
            i = _first(index.writes.get(key, []), first, -1)
            if i is None:
                continue
            j = _first(index.reads.get(key, []), second, i)
            if _before(j, index.abort[first]):
                positions = sorted((i, j, index.abort[first], index.commit[second]))
                witnesses.append(Witness(Phenomenon.A1, positions, (key,), (first, second)))
    return witnesses


def detect_fuzzy_reread(index: _HistoryIndex) -> list[Witness]:
    """r1[x] ... w2[x] ... c2 ... r1[x] ... c1"""
    witnesses = []
    for key in index.keys():
        for first, second in index.pairs():
            if first not in index.commit or second not in index.commit:
                continue
            i = _first(index.reads.get(key, []), first, -1)
            if i is None:
                continue
            j = _first(index.writes.get(key, []), second, i)
            if j is None:
                continue
            commit_second = index.commit[second]
            reread = _first(index.reads[key], first, commit_second)
            if _before(reread, index.commit[first]):
                positions = (i, j, commit_second, reread, index.commit[first])
                witnesses.append(Witness(Phenomenon.A2, positions, (key,), (first, second)))
    return witnesses


def detect_phantom_reread(index: _HistoryIndex) -> list[Witness]:
    """r1[P] ... w2[y in P] ... c2 ... r1[P] ... c1"""
    witnesses = []
    for predicate in sorted(index.predicate_reads):
        reads = index.predicate_reads[predicate]
        for first, second in index.pairs():
            if first not in index.commit or second not in index.commit:
                continue
            i = _first(reads, first, -1)
            if i is None:
                continue
            commit_second = index.commit[second]
            reread = _first(reads, first, commit_second)
            if not _before(reread, index.commit[first]):
                continue
            for key in index.covered_writes(predicate):
                j = _first(index.writes[key], second, i)
                if _before(j, commit_second):
                    positions = (i, j, commit_second, reread, index.commit[first])
                    witnesses.append(Witness(Phenomenon.A3, positions, (predicate, key), (first, second)))
    return witnesses


def _lost_update(index: _HistoryIndex, phenomenon: Phenomenon, first_reads: dict) -> list[Witness]:
    """r1[x] ... w2[x] ... w1[x] ... c1"""
    witnesses = []
    for key in index.keys():
        for first, second in index.pairs():
            if first not in index.commit:
                continue
            i = _first(first_reads.get(key, []), first, -1)
            if i is None:
                continue
            j = _first(index.writes.get(key, []), second, i)
            if j is None:
                continue
            k = _first(index.writes[key], first, j)
            if _before(k, index.commit[first]):
                witnesses.append(Witness(phenomenon, (i, j, k, index.commit[first]), (key,), (first, second)))
    return witnesses


def detect_lost_update(index: _HistoryIndex) -> list[Witness]:
    return _lost_update(index, Phenomenon.P4, index.reads)


def detect_cursor_lost_update(index: _HistoryIndex) -> list[Witness]:
    return _lost_update(index, Phenomenon.P4C, index.cursor_reads)


def detect_read_skew(index: _HistoryIndex) -> list[Witness]:
    """r1[x] ... w2[x] ... w2[y] ... c2 ... r1[y] ... (c1 or a1)"""
    witnesses = []
    keys = index.keys()
    for x in keys:
        for y in keys:
            if x == y:
                continue
            for first, second in index.pairs():
                if second not in index.commit:
                    continue
                i = _first(index.reads.get(x, []), first, -1)
                if i is None:
                    continue
                j = _first(index.writes.get(x, []), second, i)
                if j is None:
                    continue
                k = _first(index.writes.get(y, []), second, j)
                if not _before(k, index.commit[second]):
                    continue
                later_read = _first(index.reads.get(y, []), first, index.commit[second])
                terminal = index.terminal(first)
                if _before(later_read, terminal):
                    positions = (i, j, k, index.commit[second], later_read, terminal)
                    witnesses.append(Witness(Phenomenon.A5A, positions, (x, y), (first, second)))
    return witnesses


def detect_write_skew(index: _HistoryIndex) -> list[Witness]:
    """r1[x] ... r2[y] ... w1[y] ... w2[x] ... (c1 and c2 occur)"""
    witnesses = []
    keys = index.keys()
    for x in keys:
        for y in keys:
            if x == y:
                continue
            for first, second in index.pairs():
                if first not in index.commit or second not in index.commit:
                    continue
                i = _first(index.reads.get(x, []), first, -1)
                if i is None:
                    continue
                j = _first(index.reads.get(y, []), second, i)
                if j is None:
                    continue
                k = _first(index.writes.get(y, []), first, j)
                if k is None:
                    continue
                l = _first(index.writes.get(x, []), second, k)
                if l is None:
                    continue
                positions = sorted((i, j, k, l, index.commit[first], index.commit[second]))
                witnesses.append(Witness(Phenomenon.A5B, positions, (x, y), (first, second)))
    return witnesses


DETECTORS: dict[Phenomenon, Callable[[_HistoryIndex], list[Witness]]] = {
    Phenomenon.P0: detect_dirty_write,
    Phenomenon.P1: detect_dirty_read,
    Phenomenon.P2: detect_fuzzy_read,
    Phenomenon.P3: detect_phantom,
    Phenomenon.A1: detect_aborted_read,
    Phenomenon.A2: detect_fuzzy_reread,
    Phenomenon.A3: detect_phantom_reread,
    Phenomenon.P4: detect_lost_update,
    Phenomenon.P4C: detect_cursor_lost_update,
    Phenomenon.A5A: detect_read_skew,
    Phenomenon.A5B: detect_write_skew,
}


def _require_single_version(history: History) -> None:
    if history.flavor is Flavor.MULTI_VERSION:
        raise HistoryValidationError(ErrorMessages.MULTIVERSION_INPUT)


def detect(history: History, phenomenon: Phenomenon) -> list[Witness]:
    """Return every earliest match of the phenomenon's template, ordered by position"""
    _require_single_version(history)
    return sorted(DETECTORS[Phenomenon(phenomenon)](_HistoryIndex(history)))


def classify(history: History) -> dict[Phenomenon, list[Witness]]:
    """Run every detector; one entry per phenomenon, in declaration order"""
    _require_single_version(history)
    index = _HistoryIndex(history)
    return {phenomenon: sorted(DETECTORS[phenomenon](index)) for phenomenon in Phenomenon}
