"""
Schedules: which txn runs at each slot.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Iterator

from isolab.harness.workloads import Workload, parse_schedule
from isolab.shared.constants import Defaults

logger = logging.getLogger(__name__)


def serial_schedule(workload: Workload) -> tuple[int, ...]:
    return tuple(txn for txn, steps in workload.programs for _ in steps)


def resolve_schedule(workload: Workload, schedule: Iterable[int] | str | None = None) -> tuple[int, ...]:
    """Parse and check a schedule; None means the reference schedule, else serial order"""
    if schedule is None:
        schedule = workload.reference_schedule or serial_schedule(workload)
    return workload.validate_schedule(parse_schedule(schedule))


def schedule_count(step_counts: Iterable[int]) -> int:
    """Number of interleavings: the multinomial coefficient of the step counts"""
    counts = list(step_counts)
    total = math.factorial(sum(counts))
    for count in counts:
        total //= math.factorial(count)
    return total


def enumerate_schedules(workload: Workload, max_actions: int = Defaults.SCHEDULE_BOUND) -> Iterator[tuple[int, ...]]:
    """
    Yield every interleaving of the txn programs in lexicographic order.

    When max_actions is below the total number of steps the schedules are
    cut to max_actions slots; each distinct prefix is yielded once.

    Args:
        workload: Workload whose step counts bound each txn's slots
        max_actions: Schedule length bound

    Returns:
        Iterator of schedules
    """
    caps = workload.step_counts()
    total = workload.total_steps()
    length = min(total, max_actions)
    if length < total:
        logger.warning(
            f"Schedules of {workload.name} truncated to {length} of {total} slots; enumeration is incomplete"
        )

    txns = sorted(caps)
    used = {txn: 0 for txn in txns}
    prefix: list[int] = []

    def extend() -> Iterator[tuple[int, ...]]:
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for txn in txns:
            if used[txn] == caps[txn]:
                continue
            used[txn] += 1
            prefix.append(txn)
            yield from extend()
            prefix.pop()
            used[txn] -= 1

    yield from extend()
