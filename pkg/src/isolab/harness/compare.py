"""
Ordering of isolation levels by the non-serializable histories they allow.

L1 is weaker than L2 when every non-serializable history that can occur at
L2 can also occur at L1, and at least one can occur at L1 but not at L2.
A history occurs at a phenomenon-defined level when the level admits it,
and at an engine-defined level when the level's engine emitted it.
"""
from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from enum import Enum

from attrs import field, frozen

from isolab.harness.builtins import builtin_workloads
from isolab.harness.search import iterate_runs
from isolab.harness.workloads import Workload
from isolab.history_core.graph import is_serializable
from isolab.history_core.models import History
from isolab.history_core.notation import format_actions, format_history
from isolab.phenomena.admission import IsolationLevel, admits_classification
from isolab.phenomena.detectors import Phenomenon, classify
from isolab.shared.constants import Defaults

logger = logging.getLogger(__name__)


class Relation(str, Enum):
    WEAKER = "weaker"
    STRONGER = "stronger"
    EQUIVALENT = "equivalent"
    INCOMPARABLE = "incomparable"


@frozen
class HistoryEvidence:
    """A non-serializable history and the engine levels that emitted it"""

    history: History
    classification: dict
    reached_by: frozenset[IsolationLevel] = field(converter=frozenset)

    @property
    def phenomena(self) -> list[Phenomenon]:
        return [phenomenon for phenomenon, witnesses in self.classification.items() if witnesses]

    def occurs_at(self, level: IsolationLevel) -> bool:
        if level.is_engine_defined:
            return level in self.reached_by
        return admits_classification(level, self.classification)


@frozen
class LevelOrder:
    left: IsolationLevel
    right: IsolationLevel
    relation: Relation
    left_only: tuple[HistoryEvidence, ...] = field(converter=tuple)
    right_only: tuple[HistoryEvidence, ...] = field(converter=tuple)
    considered: int = 0

    @property
    def left_witness(self) -> HistoryEvidence | None:
        return _representative(self.left_only)

    @property
    def right_witness(self) -> HistoryEvidence | None:
        return _representative(self.right_only)

    def render(self) -> list[str]:
        lines = [
            f"{self.left.value} vs {self.right.value}: {self.relation.value}",
            f"non-serializable histories considered: {self.considered}",
        ]
        for level, only, witness in (
            (self.left, self.left_only, self.left_witness),
            (self.right, self.right_only, self.right_witness),
        ):
            lines.append(f"only at {level.value}: {len(only)}")
            if witness is not None:
                lines.append(f"  witness: {format_actions(witness.history.actions)}")
                lines.append(f"  phenomena: {' '.join(p.value for p in witness.phenomena) or 'none'}")
        return lines


def _representative(evidence: Sequence[HistoryEvidence]) -> HistoryEvidence | None:
    """Most distinct phenomena, then the shortest text, then lexicographic"""
    if not evidence:
        return None

    def rank(item: HistoryEvidence):
        text = format_history(item.history)
        return (-len(item.phenomena), len(text), text)

    return min(evidence, key=rank)


def collect_histories(
    workloads: Sequence[Workload],
    bound: int = Defaults.SCHEDULE_BOUND,
    levels: Iterable[IsolationLevel] | None = None,
) -> list[HistoryEvidence]:
    """Every distinct non-serializable single-version history the engines emit"""
    levels = [IsolationLevel(level) for level in (levels or list(IsolationLevel))]
    histories: dict[str, History] = {}
    reached: dict[str, set[IsolationLevel]] = {}

    for level in levels:
        for sample in iterate_runs(level, workloads, bound):
            text = format_history(sample.history)
            if text not in histories:
                serializable, _ = is_serializable(sample.history)
                if serializable:
                    continue
                histories[text] = sample.history
            reached.setdefault(text, set()).add(level)

    logger.info(f"Collected {len(histories)} distinct non-serializable histories")
    return [
        HistoryEvidence(histories[text], classify(histories[text]), reached[text])
        for text in sorted(histories)
    ]


def order_levels(left: IsolationLevel, right: IsolationLevel, evidence: Sequence[HistoryEvidence]) -> LevelOrder:
    left, right = IsolationLevel(left), IsolationLevel(right)
    left_only = [item for item in evidence if item.occurs_at(left) and not item.occurs_at(right)]
    right_only = [item for item in evidence if item.occurs_at(right) and not item.occurs_at(left)]

    if left_only and right_only:
        relation = Relation.INCOMPARABLE
    elif left_only:
        relation = Relation.WEAKER
    elif right_only:
        relation = Relation.STRONGER
    else:
        relation = Relation.EQUIVALENT
    return LevelOrder(left, right, relation, left_only, right_only, considered=len(evidence))


def compare_levels(
    left: IsolationLevel,
    right: IsolationLevel,
    workloads: Sequence[Workload] | None = None,
    bound: int = Defaults.SCHEDULE_BOUND,
) -> LevelOrder:
    """
    Order two levels over the histories every engine emits for the workloads.

    Args:
        left: First level
        right: Second level
        workloads: Workloads to run; the built-in catalogue by default
        bound: Schedule length bound

    Returns:
        LevelOrder: relation of left to right, with one-sided witnesses
    """
    workloads = list(workloads) if workloads is not None else list(builtin_workloads().values())
    logger.info(f"=== COMPARE {IsolationLevel(left).value} {IsolationLevel(right).value} ===")
    return order_levels(left, right, collect_histories(workloads, bound))
