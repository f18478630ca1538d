"""
Mapping of multi-version histories to view-equivalent single-version ones.

Each read is placed at the instant its snapshot was taken; the writes of a
committed txn (and the reads of its own writes) move to just before its
commit. Writes of aborted or unfinished txns never became versions and are
dropped.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Mapping

from isolab.history_core.models import Action, ActionKind, Flavor, History
from isolab.shared.constants import Defaults, ErrorMessages
from isolab.shared.errors import HistoryValidationError

logger = logging.getLogger(__name__)

_READ_GROUP = 0
_COMMIT_BLOCK_GROUP = 1
_TERMINAL_GROUP = 2


def _is_own_read(action: Action) -> bool:
    return action.is_item_read and action.version == action.txn


def _committed_writers(history: History, commit_index: Mapping[int, int]) -> dict[str, list[tuple[int, int]]]:
    """key -> [(commit position, writer)] for committed writers, by commit position"""
    writers: dict[str, set[tuple[int, int]]] = defaultdict(set)
    for action in history.actions:
        if action.is_write and action.txn in commit_index:
            writers[action.target].add((commit_index[action.txn], action.txn))
    return {key: sorted(entries) for key, entries in writers.items()}


def _expected_version(writers: list[tuple[int, int]], instant: int) -> int:
    expected = Defaults.INITIAL_VERSION
    for commit_position, writer in writers:
        if commit_position < instant:
            expected = writer
    return expected


def mv_to_sv(history: History, read_points: Mapping[int, int] | None = None) -> History:
    """
    Map a multi-version history to a single-version history.

    Args:
        history: Multi-version history whose reads carry the version they observed
        read_points: Optional position -> snapshot instant per read; a txn's
            first action is the default instant

    Returns:
        History: single-version history in which every read observes the same value
    """
    if history.flavor is not Flavor.MULTI_VERSION:
        if any(action.is_item_access for action in history.actions):
            raise HistoryValidationError(ErrorMessages.NOT_MULTIVERSION)
        return history

    points = dict(read_points or {})
    first_action: dict[int, int] = {}
    for position, action in enumerate(history.actions):
        first_action.setdefault(action.txn, position)
    commit_index = {
        txn: position for txn, (position, kind) in history.terminals().items() if kind is ActionKind.COMMIT
    }
    writers = _committed_writers(history, commit_index)

    ordered = []
    for position, action in enumerate(history.actions):
        if action.is_terminal:
            ordered.append((position, _TERMINAL_GROUP, position))
            continue
        if action.is_write or _is_own_read(action):
            if action.txn in commit_index:
                ordered.append((commit_index[action.txn], _COMMIT_BLOCK_GROUP, position))
            continue

        instant = points.get(position, first_action[action.txn])
        if action.is_item_read:
            expected = _expected_version(writers.get(action.target, []), instant)
            if action.version != expected:
                raise HistoryValidationError(
                    ErrorMessages.SNAPSHOT_READ_VIOLATION.format(action=action, observed=action.version, expected=expected)
                )
        ordered.append((instant, _READ_GROUP, position))

    ordered.sort()
    actions = [history.actions[position].without_version() for _, _, position in ordered]
    logger.debug(f"Mapped {len(history)} multi-version actions to {len(actions)} single-version actions")
    return history.with_actions(actions, flavor=Flavor.SINGLE_VERSION)
