"""
Value types for transaction histories.

A history is a linear ordering of the actions of a set of transactions,
together with the predicate declarations its predicate reads refer to.
All types are immutable and safe to share between threads.
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping
from enum import Enum

from attrs import evolve, field, frozen

from isolab.shared.constants import ErrorMessages, Notation
from isolab.shared.errors import HistoryValidationError


class ActionKind(str, Enum):
    READ = "Read"
    WRITE = "Write"
    PREDICATE_READ = "PredicateRead"
    CURSOR_READ = "CursorRead"
    CURSOR_WRITE = "CursorWrite"
    COMMIT = "Commit"
    ABORT = "Abort"

    @property
    def is_terminal(self) -> bool:
        return self in (ActionKind.COMMIT, ActionKind.ABORT)

    @property
    def is_write(self) -> bool:
        return self in (ActionKind.WRITE, ActionKind.CURSOR_WRITE)

    @property
    def is_item_read(self) -> bool:
        return self in (ActionKind.READ, ActionKind.CURSOR_READ)


class Flavor(str, Enum):
    SINGLE_VERSION = "SingleVersion"
    MULTI_VERSION = "MultiVersion"


def _sorted_keys(keys: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(set(keys)))


def _sorted_initial(initial: Mapping[str, int] | Iterable[tuple[str, int]]) -> tuple[tuple[str, int], ...]:
    pairs = initial.items() if isinstance(initial, Mapping) else initial
    return tuple(sorted((key, value) for key, value in pairs))


def _sorted_predicates(predicates: Iterable[PredicateDecl]) -> tuple[PredicateDecl, ...]:
    return tuple(sorted(predicates, key=lambda decl: decl.name))


@frozen
class PredicateDecl:
    """A named finite set of keys; covers present and phantom keys alike"""

    name: str
    covered_keys: frozenset[str] = field(converter=frozenset)

    def covers(self, key: str) -> bool:
        return key in self.covered_keys


@frozen
class Action:
    kind: ActionKind
    txn: int
    target: str | None = None
    value: int | None = None
    version: int | None = None
    # Membership annotation of the "k in P:name" target form
    predicate: str | None = None

    @property
    def is_terminal(self) -> bool:
        return self.kind.is_terminal

    @property
    def is_write(self) -> bool:
        return self.kind.is_write

    @property
    def is_item_read(self) -> bool:
        return self.kind.is_item_read

    @property
    def is_predicate_read(self) -> bool:
        return self.kind is ActionKind.PREDICATE_READ

    @property
    def is_item_access(self) -> bool:
        return self.is_write or self.is_item_read

    def render(self, detailed: bool = True) -> str:
        """Render as a notation token; detailed=False drops values and versions"""
        if self.kind is ActionKind.COMMIT:
            return f"{Notation.COMMIT}{self.txn}"
        if self.kind is ActionKind.ABORT:
            return f"{Notation.ABORT}{self.txn}"
        if self.kind is ActionKind.PREDICATE_READ:
            return f"{Notation.READ}{self.txn}[{Notation.PREDICATE_PREFIX}{self.target}]"

        op = {
            ActionKind.READ: Notation.READ,
            ActionKind.WRITE: Notation.WRITE,
            ActionKind.CURSOR_READ: Notation.CURSOR_READ,
            ActionKind.CURSOR_WRITE: Notation.CURSOR_WRITE,
        }[self.kind]
        body = self.target
        if detailed:
            if self.version is not None:
                body += f"{Notation.VERSION_MARKER}{self.version}"
            if self.value is not None:
                body += f"={self.value}"
        if self.predicate is not None:
            body += f"{Notation.MEMBERSHIP}{self.predicate}"
        return f"{op}{self.txn}[{body}]"

    def without_version(self) -> Action:
        return evolve(self, version=None)

    def __str__(self) -> str:
        return self.render()


@frozen
class History:
    actions: tuple[Action, ...] = field(default=(), converter=tuple)
    predicates: tuple[PredicateDecl, ...] = field(default=(), converter=_sorted_predicates)
    flavor: Flavor = Flavor.SINGLE_VERSION
    universe: tuple[str, ...] = field(default=(), converter=_sorted_keys)
    initial: tuple[tuple[str, int], ...] = field(default=(), converter=_sorted_initial)

    def __attrs_post_init__(self):
        validate_history(self)

    def __len__(self) -> int:
        return len(self.actions)

    def predicate(self, name: str) -> PredicateDecl:
        for decl in self.predicates:
            if decl.name == name:
                return decl
        raise HistoryValidationError(ErrorMessages.UNDECLARED_PREDICATE.format(name=name))

    def txns(self) -> list[int]:
        return sorted({action.txn for action in self.actions})

    def terminals(self) -> dict[int, tuple[int, ActionKind]]:
        """Map each terminated txn to (position, Commit|Abort)"""
        return {
            action.txn: (index, action.kind)
            for index, action in enumerate(self.actions)
            if action.is_terminal
        }

    def committed(self) -> frozenset[int]:
        return frozenset(
            txn for txn, (_, kind) in self.terminals().items() if kind is ActionKind.COMMIT
        )

    def aborted(self) -> frozenset[int]:
        return frozenset(
            txn for txn, (_, kind) in self.terminals().items() if kind is ActionKind.ABORT
        )

    def with_actions(self, actions: Iterable[Action], flavor: Flavor | None = None) -> History:
        """Same declarations, different action sequence"""
        return evolve(self, actions=tuple(actions), flavor=flavor or self.flavor)

    def is_serial(self) -> bool:
        seen = []
        for action in self.actions:
            if seen and seen[-1] == action.txn:
                continue
            if action.txn in seen:
                return False
            seen.append(action.txn)
        return True


def validate_history(history: History) -> None:
    """Raise HistoryValidationError when the history breaks a structural invariant"""
    names = [decl.name for decl in history.predicates]
    declared = {decl.name: decl for decl in history.predicates}
    if len(names) != len(declared):
        raise HistoryValidationError(ErrorMessages.BAD_HEADER.format(line=", ".join(names)))

    universe = set(history.universe)
    if universe:
        for decl in history.predicates:
            for key in decl.covered_keys - universe:
                raise HistoryValidationError(ErrorMessages.UNKNOWN_KEY.format(key=key))
        for key, _ in history.initial:
            if key not in universe:
                raise HistoryValidationError(ErrorMessages.UNKNOWN_KEY.format(key=key))

    multi_version = history.flavor is Flavor.MULTI_VERSION
    terminated: set[int] = set()
    for action in history.actions:
        if action.txn < 1:
            raise HistoryValidationError(ErrorMessages.INVALID_TXN_ID.format(txn=action.txn))
        if action.txn in terminated:
            if action.is_terminal:
                raise HistoryValidationError(ErrorMessages.DUPLICATE_TERMINAL.format(txn=action.txn))
            raise HistoryValidationError(
                ErrorMessages.ACTION_AFTER_TERMINAL.format(action=action, txn=action.txn)
            )
        if action.is_terminal:
            terminated.add(action.txn)
            continue

        if action.is_predicate_read:
            if action.target not in declared:
                raise HistoryValidationError(ErrorMessages.UNDECLARED_PREDICATE.format(name=action.target))
            continue

        if universe and action.target not in universe:
            raise HistoryValidationError(ErrorMessages.UNKNOWN_KEY.format(key=action.target))
        if action.predicate is not None:
            if action.predicate not in declared:
                raise HistoryValidationError(ErrorMessages.UNDECLARED_PREDICATE.format(name=action.predicate))
            if not declared[action.predicate].covers(action.target):
                raise HistoryValidationError(
                    ErrorMessages.KEY_NOT_COVERED.format(key=action.target, name=action.predicate)
                )

        if multi_version and action.version is None:
            raise HistoryValidationError(ErrorMessages.MIXED_VERSION_MARKERS)
        if not multi_version and action.version is not None:
            raise HistoryValidationError(ErrorMessages.VERSION_ON_SINGLE_VERSION.format(action=action))
        if multi_version and action.is_write and action.version != action.txn:
            raise HistoryValidationError(ErrorMessages.WRITE_VERSION_MISMATCH.format(action=action))
