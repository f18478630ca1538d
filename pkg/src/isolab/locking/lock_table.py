"""
Lock table: held locks plus a FIFO queue of blocked requests.
"""
from __future__ import annotations

import logging
from collections.abc import Callable

from attrs import evolve, frozen

from isolab.locking.policy import LockDuration, LockMode, LockScope

logger = logging.getLogger(__name__)


@frozen
class LockEntry:
    txn: int
    scope: LockScope
    mode: LockMode
    duration: LockDuration

    def conflicts_with(self, other: LockEntry) -> bool:
        return (
            self.txn != other.txn
            and self.mode.conflicts_with(other.mode)
            and self.scope.overlaps(other.scope)
        )

    def render(self) -> str:
        return f"T{self.txn} {self.mode.value} {self.scope.render()} {self.duration.name.lower()}"


class LockTable:
    """
    One entry per (txn, scope) with the strongest mode and longest duration
    granted so far. A request is granted iff it conflicts with no held entry;
    a txn's own entries never block it, which makes Read to Write upgrades
    wait only for other holders.
    """

    def __init__(self):
        self._held: list[LockEntry] = []
        self._queue: list[LockEntry] = []

    def held(self) -> list[LockEntry]:
        return list(self._held)

    def waiting(self) -> list[LockEntry]:
        return list(self._queue)

    def held_by(self, txn: int) -> list[LockEntry]:
        return [entry for entry in self._held if entry.txn == txn]

    def conflicting_holders(self, request: LockEntry) -> list[int]:
        return sorted({entry.txn for entry in self._held if entry.conflicts_with(request)})

    def _own(self, request: LockEntry) -> LockEntry | None:
        for entry in self._held:
            if entry.txn == request.txn and entry.scope == request.scope:
                return entry
        return None

    def _grant(self, request: LockEntry) -> LockEntry:
        own = self._own(request)
        if own is None:
            self._held.append(request)
            return request
        mode = LockMode.WRITE if LockMode.WRITE in (own.mode, request.mode) else LockMode.READ
        merged = evolve(own, mode=mode, duration=max(own.duration, request.duration))
        self._held[self._held.index(own)] = merged
        return merged

    def covered(self, request: LockEntry) -> bool:
        own = self._own(request)
        return own is not None and own.mode.covers(request.mode) and own.duration >= request.duration

    def request(self, request: LockEntry) -> bool:
        """
        Grant the request or queue it.

        Args:
            request: txn, scope, mode and duration wanted

        Returns:
            bool: True when granted (including already-held locks)
        """
        if self.covered(request):
            return True
        if self.conflicting_holders(request):
            if request not in self._queue:
                self._queue.append(request)
            return False
        self._grant(request)
        return True

    def release(self, txn: int, selector: Callable[[LockEntry], bool]) -> list[LockEntry]:
        released = [entry for entry in self._held if entry.txn == txn and selector(entry)]
        self._held = [entry for entry in self._held if entry not in released]
        return released

    def forget(self, txn: int) -> None:
        """Drop every queued request of txn"""
        self._queue = [entry for entry in self._queue if entry.txn != txn]

    def grant_waiting(self) -> list[LockEntry]:
        """Grant queued requests, in FIFO order, that no longer conflict"""
        granted = []
        for request in list(self._queue):
            if not self.conflicting_holders(request):
                self._queue.remove(request)
                self._grant(request)
                granted.append(request)
        return granted

    def waits_for(self) -> list[tuple[int, int]]:
        """Edges blocked txn -> each txn holding a conflicting lock"""
        return sorted({(request.txn, holder) for request in self._queue for holder in self.conflicting_holders(request)})

    def assert_grant_safety(self) -> None:
        for position, entry in enumerate(self._held):
            for other in self._held[position + 1:]:
                if entry.conflicts_with(other):
                    raise AssertionError(f"Conflicting locks held: {entry.render()} / {other.render()}")
