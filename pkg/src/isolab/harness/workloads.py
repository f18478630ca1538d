"""
Workloads: a key universe, initial values, predicates and one program per
transaction, plus an optional final-state constraint and reference schedule.

Line-oriented text form:

    name transfer
    universe {x,y}
    init x=50 y=50
    check x + y == 100
    schedule 1 1 2 2 2 1 1 1
    txn 1: r[x] w[x-=40] r[y] w[y+=40] commit
    txn 2: r[x] r[y] commit
"""
from __future__ import annotations

import logging
import operator
import re
from collections.abc import Iterable, Mapping
from enum import Enum

from attrs import field, frozen

from isolab.history_core.models import Action, Flavor, History, PredicateDecl
from isolab.history_core.notation import IDENTIFIER, parse_assignments, parse_key_set
from isolab.shared.constants import ErrorMessages, WorkloadKeywords
from isolab.shared.errors import HistorySyntaxError, WorkloadError

logger = logging.getLogger(__name__)


class StepKind(str, Enum):
    READ = "read"
    WRITE = "write"
    DELETE = "delete"
    PREDICATE_READ = "predicate-read"
    FETCH = "fetch"
    CURSOR_WRITE = "cursor-write"
    CLOSE = "close"
    COMMIT = "commit"
    ABORT = "abort"

    @property
    def is_terminal(self) -> bool:
        return self in (StepKind.COMMIT, StepKind.ABORT)

    @property
    def is_write(self) -> bool:
        return self in (StepKind.WRITE, StepKind.DELETE, StepKind.CURSOR_WRITE)


@frozen
class Step:
    """One statement of a transaction program"""

    kind: StepKind
    key: str | None = None
    predicate: str | None = None
    value: int | None = None
    # Relative writes add delta to the value the txn last read or wrote
    delta: int | None = None

    @property
    def is_terminal(self) -> bool:
        return self.kind.is_terminal

    def resolve_value(self, base: int | None) -> int | None:
        if self.kind is StepKind.DELETE:
            return None
        if self.delta is not None:
            return (base or 0) + self.delta
        return self.value

    def render(self) -> str:
        if self.kind is StepKind.COMMIT:
            return WorkloadKeywords.COMMIT
        if self.kind is StepKind.ABORT:
            return WorkloadKeywords.ABORT
        if self.kind is StepKind.READ:
            return f"r[{self.key}]"
        if self.kind is StepKind.DELETE:
            return f"d[{self.key}]"
        if self.kind is StepKind.PREDICATE_READ:
            return f"r[P:{self.predicate}]"
        if self.kind is StepKind.FETCH:
            return f"rc[P:{self.predicate}]"
        if self.kind is StepKind.CLOSE:
            return f"close[P:{self.predicate}]"

        target = self.key if self.kind is StepKind.WRITE else f"P:{self.predicate}"
        op = "wc" if self.kind is StepKind.CURSOR_WRITE else "w"
        if self.delta is None:
            return f"{op}[{target}={self.value}]"
        sign = "+" if self.delta >= 0 else "-"
        return f"{op}[{target}{sign}={abs(self.delta)}]"


_COMPARATORS = {
    "<=": operator.le,
    ">=": operator.ge,
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    ">": operator.gt,
}

_CONSTRAINT = re.compile(r"^(?P<lhs>.+?)\s*(?P<op><=|>=|==|!=|<|>)\s*(?P<bound>-?\d+)\s*$")
_TERM = re.compile(
    rf"\s*(?P<sign>[+-])?\s*(?:(?P<func>sum|count)\(P:(?P<predicate>{IDENTIFIER})\)|(?P<key>{IDENTIFIER})|(?P<literal>\d+))\s*"
)


@frozen
class ConstraintTerm:
    sign: int
    key: str | None = None
    function: str | None = None
    predicate: str | None = None
    literal: int | None = None

    def evaluate(self, state: Mapping[str, int | None], predicates: Mapping[str, PredicateDecl]) -> int:
        if self.literal is not None:
            return self.sign * self.literal
        if self.key is not None:
            return self.sign * (state.get(self.key) or 0)

        present = [state[key] for key in sorted(predicates[self.predicate].covered_keys) if state.get(key) is not None]
        total = len(present) if self.function == WorkloadKeywords.COUNT else sum(present)
        return self.sign * total


@frozen
class Constraint:
    """Final-state condition such as "x + y > 0" or "sum(P:tasks) <= 8" """

    text: str
    terms: tuple[ConstraintTerm, ...] = field(converter=tuple)
    comparator: str
    bound: int

    def evaluate(self, state: Mapping[str, int | None], predicates: Mapping[str, PredicateDecl]) -> bool:
        total = sum(term.evaluate(state, predicates) for term in self.terms)
        return _COMPARATORS[self.comparator](total, self.bound)

    def references(self) -> tuple[set[str], set[str]]:
        keys = {term.key for term in self.terms if term.key is not None}
        predicates = {term.predicate for term in self.terms if term.predicate is not None}
        return keys, predicates


def parse_constraint(text: str) -> Constraint:
    match = _CONSTRAINT.match(text.strip())
    if not match:
        raise WorkloadError(ErrorMessages.BAD_CONSTRAINT.format(text=text))

    lhs = match.group("lhs")
    terms = []
    position = 0
    while position < len(lhs):
        term_match = _TERM.match(lhs, position)
        if not term_match or term_match.end() == position:
            raise WorkloadError(ErrorMessages.BAD_CONSTRAINT.format(text=text))
        if terms and not term_match.group("sign"):
            raise WorkloadError(ErrorMessages.BAD_CONSTRAINT.format(text=text))
        sign = -1 if term_match.group("sign") == "-" else 1
        literal = term_match.group("literal")
        terms.append(ConstraintTerm(
            sign=sign,
            key=term_match.group("key"),
            function=term_match.group("func"),
            predicate=term_match.group("predicate"),
            literal=int(literal) if literal is not None else None,
        ))
        position = term_match.end()

    return Constraint(text=text.strip(), terms=terms, comparator=match.group("op"), bound=int(match.group("bound")))


_STEP = re.compile(r"^(?P<op>rc|wc|r|w|d|close)\[(?P<body>[^\]]*)\]$")
_PREDICATE_TARGET = re.compile(rf"^P:(?P<name>{IDENTIFIER})$")
_ASSIGNED_TARGET = re.compile(rf"^(?P<target>(?:P:)?{IDENTIFIER})(?P<op>=|\+=|-=)(?P<amount>-?\d+)$")


def _assignment(body: str, token: str) -> tuple[str, int | None, int | None]:
    match = _ASSIGNED_TARGET.match(body)
    if not match:
        raise WorkloadError(ErrorMessages.BAD_STEP.format(step=token))
    amount = int(match.group("amount"))
    if match.group("op") == "=":
        return match.group("target"), amount, None
    return match.group("target"), None, amount if match.group("op") == "+=" else -amount


def parse_step(token: str) -> Step:
    """Parse one program step token such as "w[x+=30]" or "rc[P:acct]" """
    if token == WorkloadKeywords.COMMIT:
        return Step(StepKind.COMMIT)
    if token == WorkloadKeywords.ABORT:
        return Step(StepKind.ABORT)

    match = _STEP.match(token)
    if not match:
        raise WorkloadError(ErrorMessages.BAD_STEP.format(step=token))
    op, body = match.group("op"), match.group("body").strip()
    predicate_match = _PREDICATE_TARGET.match(body)

    if op == "r":
        if predicate_match:
            return Step(StepKind.PREDICATE_READ, predicate=predicate_match.group("name"))
        if re.fullmatch(IDENTIFIER, body):
            return Step(StepKind.READ, key=body)
    elif op == "d":
        if re.fullmatch(IDENTIFIER, body):
            return Step(StepKind.DELETE, key=body)
    elif op in ("rc", "close"):
        if predicate_match:
            kind = StepKind.FETCH if op == "rc" else StepKind.CLOSE
            return Step(kind, predicate=predicate_match.group("name"))
    elif op == "w":
        key, value, delta = _assignment(body, token)
        if re.fullmatch(IDENTIFIER, key):
            return Step(StepKind.WRITE, key=key, value=value, delta=delta)
    else:
        target, value, delta = _assignment(body, token)
        target_match = _PREDICATE_TARGET.match(target)
        if target_match:
            return Step(StepKind.CURSOR_WRITE, predicate=target_match.group("name"), value=value, delta=delta)

    raise WorkloadError(ErrorMessages.BAD_STEP.format(step=token))


def parse_schedule(text: str | Iterable[int]) -> tuple[int, ...]:
    """Parse "1 2 1" (commas allowed) into a tuple of txn ids"""
    if not isinstance(text, str):
        return tuple(int(slot) for slot in text)
    parts = [part for part in re.split(r"[,\s]+", text.strip()) if part]
    if not all(part.isdigit() for part in parts):
        raise WorkloadError(ErrorMessages.BAD_SCHEDULE.format(text=text))
    return tuple(int(part) for part in parts)


def _programs(programs: Mapping[int, Iterable[Step]] | Iterable[tuple[int, Iterable[Step]]]):
    pairs = programs.items() if isinstance(programs, Mapping) else programs
    return tuple(sorted((int(txn), tuple(steps)) for txn, steps in pairs))


def _optional_schedule(schedule):
    return None if schedule is None else tuple(schedule)


@frozen
class Workload:
    name: str
    programs: tuple[tuple[int, tuple[Step, ...]], ...] = field(converter=_programs)
    universe: tuple[str, ...] = field(default=(), converter=lambda keys: tuple(sorted(set(keys))))
    initial: tuple[tuple[str, int], ...] = field(
        default=(), converter=lambda pairs: tuple(sorted(dict(pairs).items()))
    )
    predicates: tuple[PredicateDecl, ...] = field(
        default=(), converter=lambda decls: tuple(sorted(decls, key=lambda decl: decl.name))
    )
    constraint: Constraint | None = None
    reference_schedule: tuple[int, ...] | None = field(default=None, converter=_optional_schedule)
    description: str = ""

    def __attrs_post_init__(self):
        validate_workload(self)

    def txns(self) -> list[int]:
        return [txn for txn, _ in self.programs]

    def program(self, txn: int) -> tuple[Step, ...]:
        for owner, steps in self.programs:
            if owner == txn:
                return steps
        raise WorkloadError(ErrorMessages.UNKNOWN_SCHEDULE_TXN.format(txn=txn))

    def step_counts(self) -> dict[int, int]:
        return {txn: len(steps) for txn, steps in self.programs}

    def total_steps(self) -> int:
        return sum(len(steps) for _, steps in self.programs)

    def uses_cursors(self) -> bool:
        return any(step.kind is StepKind.FETCH for _, steps in self.programs for step in steps)

    @property
    def variant(self) -> str:
        return WorkloadKeywords.CURSOR_TAG if self.uses_cursors() else WorkloadKeywords.PLAIN_TAG

    def predicate_map(self) -> dict[str, PredicateDecl]:
        return {decl.name: decl for decl in self.predicates}

    def initial_state(self) -> dict[str, int | None]:
        """Every universe key; keys without an initial value are absent (None)"""
        state: dict[str, int | None] = {key: None for key in self.universe}
        state.update(dict(self.initial))
        return state

    def history(self, actions: Iterable[Action], flavor: Flavor = Flavor.SINGLE_VERSION) -> History:
        return History(
            actions=tuple(actions),
            predicates=self.predicates,
            flavor=flavor,
            universe=self.universe,
            initial=self.initial,
        )

    def check_constraint(self, state: Mapping[str, int | None]) -> bool | None:
        if self.constraint is None:
            return None
        return self.constraint.evaluate(state, self.predicate_map())

    def validate_schedule(self, schedule: Iterable[int]) -> tuple[int, ...]:
        schedule = tuple(schedule)
        known = set(self.txns())
        for slot in schedule:
            if slot not in known:
                raise WorkloadError(ErrorMessages.UNKNOWN_SCHEDULE_TXN.format(txn=slot))
        return schedule

    def render(self) -> str:
        lines = [f"{WorkloadKeywords.NAME} {self.name}"]
        if self.description:
            lines.append(f"{WorkloadKeywords.DESCRIBE} {self.description}")
        if self.universe:
            lines.append(f"{WorkloadKeywords.UNIVERSE} {{{','.join(self.universe)}}}")
        if self.initial:
            lines.append(f"{WorkloadKeywords.INIT} " + " ".join(f"{key}={value}" for key, value in self.initial))
        for decl in self.predicates:
            lines.append(f"{WorkloadKeywords.PRED} {decl.name} = {{{','.join(sorted(decl.covered_keys))}}}")
        if self.constraint is not None:
            lines.append(f"{WorkloadKeywords.CHECK} {self.constraint.text}")
        if self.reference_schedule is not None:
            lines.append(f"{WorkloadKeywords.SCHEDULE} " + " ".join(str(slot) for slot in self.reference_schedule))
        for txn, steps in self.programs:
            lines.append(f"{WorkloadKeywords.TXN} {txn}: " + " ".join(step.render() for step in steps))
        return "\n".join(lines)


def _validate_program(workload: Workload, txn: int, steps: tuple[Step, ...]) -> None:
    universe = set(workload.universe)
    predicates = workload.predicate_map()

    if not steps or not steps[-1].is_terminal:
        raise WorkloadError(ErrorMessages.MISSING_TERMINAL.format(txn=txn))
    if any(step.is_terminal for step in steps[:-1]):
        raise WorkloadError(ErrorMessages.STEP_AFTER_TERMINAL.format(txn=txn))

    touched: set[str] = set()
    fetched: set[str] = set()
    for step in steps:
        if step.key is not None and step.key not in universe:
            raise WorkloadError(ErrorMessages.UNKNOWN_KEY.format(key=step.key))
        if step.predicate is not None and step.predicate not in predicates:
            raise WorkloadError(ErrorMessages.UNDECLARED_PREDICATE.format(name=step.predicate))

        if step.kind is StepKind.WRITE and step.delta is not None and step.key not in touched:
            raise WorkloadError(ErrorMessages.DELTA_WITHOUT_READ.format(key=step.key, txn=txn))
        if step.kind in (StepKind.CURSOR_WRITE, StepKind.CLOSE) and step.predicate not in fetched:
            raise WorkloadError(ErrorMessages.CURSOR_NOT_OPEN.format(name=step.predicate, txn=txn))

        if step.key is not None:
            touched.add(step.key)
        if step.kind is StepKind.FETCH:
            fetched.add(step.predicate)
        if step.kind is StepKind.CLOSE:
            fetched.discard(step.predicate)


def validate_workload(workload: Workload) -> None:
    """Raise WorkloadError when a program or declaration is inconsistent"""
    if not workload.programs:
        raise WorkloadError(ErrorMessages.EMPTY_WORKLOAD)

    txns = workload.txns()
    for txn in txns:
        if txn < 1:
            raise WorkloadError(ErrorMessages.INVALID_TXN_ID.format(txn=txn))
    if len(txns) != len(set(txns)):
        duplicate = next(txn for txn in txns if txns.count(txn) > 1)
        raise WorkloadError(ErrorMessages.DUPLICATE_TXN.format(txn=duplicate))

    universe = set(workload.universe)
    for key, _ in workload.initial:
        if key not in universe:
            raise WorkloadError(ErrorMessages.UNKNOWN_KEY.format(key=key))
    for decl in workload.predicates:
        for key in sorted(decl.covered_keys - universe):
            raise WorkloadError(ErrorMessages.UNKNOWN_KEY.format(key=key))

    for txn, steps in workload.programs:
        _validate_program(workload, txn, steps)

    if workload.constraint is not None:
        keys, predicates = workload.constraint.references()
        for key in sorted(keys - universe):
            raise WorkloadError(ErrorMessages.UNKNOWN_KEY.format(key=key))
        for name in sorted(predicates - set(workload.predicate_map())):
            raise WorkloadError(ErrorMessages.UNDECLARED_PREDICATE.format(name=name))

    if workload.reference_schedule is not None:
        workload.validate_schedule(workload.reference_schedule)
        counts = workload.step_counts()
        for txn, expected in counts.items():
            given = workload.reference_schedule.count(txn)
            if given != expected:
                raise WorkloadError(
                    ErrorMessages.SCHEDULE_LENGTH_MISMATCH.format(txn=txn, given=given, expected=expected)
                )


_TXN_LINE = re.compile(r"^txn\s+(?P<txn>\d+)\s*:\s*(?P<steps>.*)$")


def parse_workload(text: str, name: str | None = None) -> Workload:
    """
    Parse the line-oriented workload format.

    Args:
        text: Workload text
        name: Fallback name when the text has no "name" line

    Returns:
        Workload: validated workload; the universe defaults to every key mentioned
    """
    header: dict = {"name": name, "description": "", "constraint": None, "schedule": None}
    universe: list[str] = []
    initial: list[tuple[str, int]] = []
    predicates: list[PredicateDecl] = []
    programs: dict[int, list[Step]] = {}

    try:
        for line_number, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.strip()
            if not line or line.startswith("#"):
                continue
            keyword, _, rest = line.partition(" ")
            rest = rest.strip()

            if keyword == WorkloadKeywords.NAME:
                header["name"] = rest
            elif keyword == WorkloadKeywords.DESCRIBE:
                header["description"] = rest
            elif keyword == WorkloadKeywords.UNIVERSE:
                universe.extend(parse_key_set(rest.strip().lstrip("{").rstrip("}"), line_number, 1))
            elif keyword == WorkloadKeywords.INIT:
                initial.extend(parse_assignments(rest, line_number, 1))
            elif keyword == WorkloadKeywords.PRED:
                pred_name, _, keys = rest.partition("=")
                keys = keys.strip()
                if not re.fullmatch(IDENTIFIER, pred_name.strip()) or not (keys.startswith("{") and keys.endswith("}")):
                    raise WorkloadError(ErrorMessages.BAD_STEP.format(step=line))
                covered = parse_key_set(keys[1:-1], line_number, 1)
                predicates.append(PredicateDecl(name=pred_name.strip(), covered_keys=covered))
            elif keyword == WorkloadKeywords.CHECK:
                header["constraint"] = parse_constraint(rest)
            elif keyword == WorkloadKeywords.SCHEDULE:
                header["schedule"] = parse_schedule(rest)
            else:
                match = _TXN_LINE.match(line)
                if not match:
                    raise WorkloadError(ErrorMessages.BAD_STEP.format(step=line))
                txn = int(match.group("txn"))
                if txn in programs:
                    raise WorkloadError(ErrorMessages.DUPLICATE_TXN.format(txn=txn))
                programs[txn] = [parse_step(token) for token in match.group("steps").split()]
    except HistorySyntaxError as e:
        raise WorkloadError(str(e)) from e

    if not universe:
        universe = sorted(
            {key for key, _ in initial}
            | {key for decl in predicates for key in decl.covered_keys}
            | {step.key for steps in programs.values() for step in steps if step.key is not None}
        )

    workload = Workload(
        name=header["name"] or "workload",
        programs=programs,
        universe=universe,
        initial=initial,
        predicates=predicates,
        constraint=header["constraint"],
        reference_schedule=header["schedule"],
        description=header["description"],
    )
    logger.debug(f"Parsed workload {workload.name} with {len(programs)} transactions")
    return workload
