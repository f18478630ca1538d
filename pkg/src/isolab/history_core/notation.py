"""
Parsing and rendering of the shorthand history notation.

    universe {x,y}
    init x=50 y=50
    pred P = {y,z}
    r1[x=50] w1[x=10] r2[x@0=50] r1[P:P] w2[y in P:P] c2 a1
"""
from __future__ import annotations

import logging
import re
from collections.abc import Iterable

from isolab.history_core.models import Action, ActionKind, Flavor, History, PredicateDecl
from isolab.shared.constants import ErrorMessages, Notation
from isolab.shared.errors import HistorySyntaxError

logger = logging.getLogger(__name__)

IDENTIFIER = r"[A-Za-z_][A-Za-z0-9_]*"

_TOKEN = re.compile(
    r"(?P<op>rc|wc|r|w)(?P<txn>\d+)\[(?P<body>[^\]]*)\]|(?P<terminal>[ca])(?P<terminal_txn>\d+)"
)
_ITEM_BODY = re.compile(
    rf"^(?P<key>{IDENTIFIER})(?:@(?P<version>\d+))?(?:=(?P<value>-?\d+))?(?: in P:(?P<predicate>{IDENTIFIER}))?$"
)
_PREDICATE_BODY = re.compile(rf"^P:(?P<name>{IDENTIFIER})$")
_PRED_HEADER = re.compile(rf"^pred\s+(?P<name>{IDENTIFIER})\s*=\s*\{{(?P<keys>[^}}]*)\}}\s*$")
_UNIVERSE_HEADER = re.compile(r"^universe\s*\{(?P<keys>[^}]*)\}\s*$")
_ASSIGNMENT = re.compile(rf"^(?P<key>{IDENTIFIER})=(?P<value>-?\d+)$")

_OPS = {
    Notation.READ: ActionKind.READ,
    Notation.WRITE: ActionKind.WRITE,
    Notation.CURSOR_READ: ActionKind.CURSOR_READ,
    Notation.CURSOR_WRITE: ActionKind.CURSOR_WRITE,
}

HEADER_WORDS = (Notation.PRED_HEADER, Notation.INIT_HEADER, Notation.UNIVERSE_HEADER)


def parse_key_set(text: str, line: int, column: int) -> list[str]:
    """Parse the inside of "{k1,k2,...}"; an empty set is allowed"""
    keys = [part.strip() for part in text.split(",") if part.strip()]
    for key in keys:
        if not re.fullmatch(IDENTIFIER, key):
            raise HistorySyntaxError(ErrorMessages.BAD_TARGET.format(target=key), line, column)
    return keys


def parse_assignments(text: str, line: int, column: int) -> list[tuple[str, int]]:
    """Parse "k=v" pairs separated by whitespace or commas"""
    pairs = []
    for part in re.split(r"[,\s]+", text.strip()):
        if not part:
            continue
        match = _ASSIGNMENT.match(part)
        if not match:
            raise HistorySyntaxError(ErrorMessages.UNEXPECTED_TOKEN.format(token=part), line, column)
        pairs.append((match.group("key"), int(match.group("value"))))
    return pairs


def _parse_action(match: re.Match, line: int, column: int) -> Action:
    if match.group("terminal"):
        kind = ActionKind.COMMIT if match.group("terminal") == Notation.COMMIT else ActionKind.ABORT
        return Action(kind=kind, txn=int(match.group("terminal_txn")))

    op = match.group("op")
    txn = int(match.group("txn"))
    body = match.group("body").strip()

    predicate_match = _PREDICATE_BODY.match(body)
    if predicate_match:
        if op != Notation.READ:
            raise HistorySyntaxError(ErrorMessages.PREDICATE_READ_OP.format(token=match.group(0)), line, column)
        return Action(kind=ActionKind.PREDICATE_READ, txn=txn, target=predicate_match.group("name"))

    item_match = _ITEM_BODY.match(body)
    if not item_match:
        raise HistorySyntaxError(ErrorMessages.BAD_TARGET.format(target=body), line, column)
    version = item_match.group("version")
    value = item_match.group("value")
    return Action(
        kind=_OPS[op],
        txn=txn,
        target=item_match.group("key"),
        value=int(value) if value is not None else None,
        version=int(version) if version is not None else None,
        predicate=item_match.group("predicate"),
    )


def _scan_actions(text: str, line: int) -> list[Action]:
    actions = []
    position = 0
    while position < len(text):
        if text[position].isspace():
            position += 1
            continue
        match = _TOKEN.match(text, position)
        end = match.end() if match else position
        if not match or (end < len(text) and not text[end].isspace()):
            token = text[position:].split()[0]
            raise HistorySyntaxError(ErrorMessages.UNEXPECTED_TOKEN.format(token=token), line, position + 1)
        actions.append(_parse_action(match, line, position + 1))
        position = end
    return actions


def parse_history(text: str) -> History:
    """
    Parse history notation into a History.

    Args:
        text: Header lines followed by whitespace-separated action tokens

    Returns:
        History: multi-version when any read or write carries an '@' marker
    """
    predicates: list[PredicateDecl] = []
    universe: list[str] = []
    initial: list[tuple[str, int]] = []
    actions: list[Action] = []

    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith(Notation.COMMENT):
            continue

        first_word = line.split()[0]
        if first_word in HEADER_WORDS or line.startswith(Notation.UNIVERSE_HEADER + "{"):
            if actions:
                raise HistorySyntaxError(ErrorMessages.BAD_HEADER.format(line=line), line_number, 1)
            if first_word == Notation.PRED_HEADER:
                match = _PRED_HEADER.match(line)
                if not match:
                    raise HistorySyntaxError(ErrorMessages.BAD_HEADER.format(line=line), line_number, 1)
                keys = parse_key_set(match.group("keys"), line_number, match.start("keys") + 1)
                predicates.append(PredicateDecl(name=match.group("name"), covered_keys=keys))
            elif first_word == Notation.INIT_HEADER:
                initial.extend(parse_assignments(line[len(Notation.INIT_HEADER):], line_number, 1))
            else:
                match = _UNIVERSE_HEADER.match(line)
                if not match:
                    raise HistorySyntaxError(ErrorMessages.BAD_HEADER.format(line=line), line_number, 1)
                universe.extend(parse_key_set(match.group("keys"), line_number, match.start("keys") + 1))
            continue

        actions.extend(_scan_actions(raw_line, line_number))

    multi_version = any(action.version is not None for action in actions)
    history = History(
        actions=actions,
        predicates=predicates,
        flavor=Flavor.MULTI_VERSION if multi_version else Flavor.SINGLE_VERSION,
        universe=universe,
        initial=initial,
    )
    logger.debug(f"Parsed history with {len(history)} actions and {len(predicates)} predicates")
    return history


def format_actions(actions: Iterable[Action], detailed: bool = True) -> str:
    return " ".join(action.render(detailed) for action in actions)


def format_history(history: History) -> str:
    """Render a History in canonical notation; the empty history renders as ''"""
    lines = []
    if history.universe:
        lines.append(f"{Notation.UNIVERSE_HEADER} {{{','.join(history.universe)}}}")
    for key, value in history.initial:
        lines.append(f"{Notation.INIT_HEADER} {key}={value}")
    for decl in history.predicates:
        lines.append(f"{Notation.PRED_HEADER} {decl.name} = {{{','.join(sorted(decl.covered_keys))}}}")
    if history.actions:
        lines.append(format_actions(history.actions))
    return "\n".join(lines)
