"""
Witness search: replay workloads on a level's engine and classify what the
engine emits.
"""
from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Sequence

from attrs import field, frozen

from isolab.harness.outcomes import RunResult
from isolab.harness.schedules import enumerate_schedules, resolve_schedule
from isolab.harness.workloads import Workload
from isolab.history_core.models import History
from isolab.locking.engine import run_locking
from isolab.mvcc.read_consistency import run_read_consistency
from isolab.mvcc.snapshot import run_si
from isolab.phenomena.admission import IsolationLevel, prohibited_phenomena
from isolab.phenomena.detectors import Phenomenon, Witness, classify
from isolab.shared.constants import Defaults

logger = logging.getLogger(__name__)


def run_level(workload: Workload, level: IsolationLevel, schedule: Iterable[int] | str | None = None) -> RunResult:
    """Run the workload on the engine that implements the level"""
    level = IsolationLevel(level)
    if level is IsolationLevel.SNAPSHOT:
        return run_si(workload, schedule)
    if level is IsolationLevel.READ_CONSISTENCY:
        return run_read_consistency(workload, schedule)
    return run_locking(workload, level, schedule)


def _writer_visible_to_reader(history: History, witness: Witness) -> bool:
    """The writer commits before the reader ends, so a later statement of the reader would see it"""
    reader, writer = witness.txns
    terminals = history.terminals()
    if writer not in history.committed() or reader not in terminals:
        return False
    return terminals[writer][0] < terminals[reader][0]


def counted_classification(level: IsolationLevel, history: History) -> dict[Phenomenon, list[Witness]]:
    """
    Classify a history emitted at the level.

    Multi-version engines are classified on their single-version mapping; a
    fuzzy read there only counts when the reader could observe the writer's
    version. Snapshot reads never move forward, so they never count.
    """
    level = IsolationLevel(level)
    classification = classify(history)
    if not level.is_multiversion:
        return classification
    if level is IsolationLevel.SNAPSHOT:
        classification[Phenomenon.P2] = []
    else:
        classification[Phenomenon.P2] = [
            witness for witness in classification[Phenomenon.P2] if _writer_visible_to_reader(history, witness)
        ]
    return classification


@frozen
class RunSample:
    workload: Workload
    schedule: tuple[int, ...] = field(converter=tuple)
    result: RunResult
    history: History
    classification: dict

    @property
    def variant(self) -> str:
        return self.workload.variant


@frozen
class Finding:
    """A replayable witness: workload, schedule and the analysed history"""

    level: IsolationLevel
    phenomenon: Phenomenon
    workload: str
    variant: str
    schedule: tuple[int, ...] = field(converter=tuple)
    history: History
    witness: Witness

    @property
    def location(self) -> str:
        return f"{self.workload}:{','.join(str(slot) for slot in self.schedule)}"


@frozen
class Exhausted:
    level: IsolationLevel
    phenomenon: Phenomenon
    bound: int
    runs: int


@frozen
class AdmissionViolation:
    level: IsolationLevel
    workload: str
    schedule: tuple[int, ...] = field(converter=tuple)
    phenomena: tuple[Phenomenon, ...] = field(converter=tuple)

    def render(self) -> str:
        schedule = ",".join(str(slot) for slot in self.schedule)
        names = " ".join(phenomenon.value for phenomenon in self.phenomena)
        return f"{self.level.value} {self.workload}:{schedule} {names}"


def candidate_schedules(workload: Workload, bound: int) -> Iterator[tuple[int, ...]]:
    """The reference schedule first (when it fits the bound), then every enumerated schedule"""
    reference = workload.reference_schedule
    if reference is not None and len(reference) <= bound:
        yield reference
    for schedule in enumerate_schedules(workload, bound):
        if schedule != reference:
            yield schedule


def iterate_runs(level: IsolationLevel, workloads: Iterable[Workload], bound: int = Defaults.SCHEDULE_BOUND) -> Iterator[RunSample]:
    level = IsolationLevel(level)
    for workload in workloads:
        for schedule in candidate_schedules(workload, bound):
            result = run_level(workload, level, resolve_schedule(workload, schedule))
            history = result.sv_history()
            yield RunSample(workload, schedule, result, history, counted_classification(level, history))


@frozen
class LevelSurvey:
    level: IsolationLevel
    findings: dict
    violations: tuple[AdmissionViolation, ...] = field(converter=tuple)
    runs: int
    bound: int
    workloads: tuple[str, ...] = field(converter=tuple)

    def finding(self, phenomenon: Phenomenon) -> Finding | None:
        return self.findings.get(Phenomenon(phenomenon))


def _finding(level: IsolationLevel, phenomenon: Phenomenon, sample: RunSample) -> Finding:
    return Finding(
        level=level,
        phenomenon=phenomenon,
        workload=sample.workload.name,
        variant=sample.variant,
        schedule=sample.schedule,
        history=sample.history,
        witness=sample.classification[phenomenon][0],
    )


def survey_level(
    level: IsolationLevel,
    workloads: Sequence[Workload],
    bound: int = Defaults.SCHEDULE_BOUND,
    phenomena: Iterable[Phenomenon] | None = None,
) -> LevelSurvey:
    """
    Run every candidate schedule of every workload at the level.

    Args:
        level: Level whose engine runs the workloads
        workloads: Workloads in search order
        bound: Schedule length bound
        phenomena: Phenomena to find witnesses for (all when None)

    Returns:
        LevelSurvey: first witness per phenomenon and every admission violation
    """
    level = IsolationLevel(level)
    wanted = list(Phenomenon) if phenomena is None else [Phenomenon(p) for p in phenomena]
    prohibited = prohibited_phenomena(level)
    findings: dict[Phenomenon, Finding] = {}
    violations = []
    runs = 0

    logger.info(f"=== SURVEY {level.value} ===")
    for sample in iterate_runs(level, workloads, bound):
        runs += 1
        for phenomenon in wanted:
            if phenomenon not in findings and sample.classification[phenomenon]:
                findings[phenomenon] = _finding(level, phenomenon, sample)
        offending = [phenomenon for phenomenon in prohibited if sample.classification[phenomenon]]
        if offending:
            violations.append(AdmissionViolation(level, sample.workload.name, sample.schedule, offending))
            logger.warning(f"{level.value} emitted {[p.value for p in offending]} on {sample.workload.name}")

    logger.info(f"{level.value}: {runs} runs, {len(findings)} phenomena witnessed, {len(violations)} admission violations")
    return LevelSurvey(
        level=level,
        findings={phenomenon: findings[phenomenon] for phenomenon in wanted if phenomenon in findings},
        violations=violations,
        runs=runs,
        bound=bound,
        workloads=[workload.name for workload in workloads],
    )


def witness_search(
    level: IsolationLevel,
    phenomenon: Phenomenon,
    workloads: Sequence[Workload],
    bound: int = Defaults.SCHEDULE_BOUND,
) -> Finding | Exhausted:
    """The first emitted history exhibiting the phenomenon, in search order"""
    level, phenomenon = IsolationLevel(level), Phenomenon(phenomenon)
    runs = 0
    for sample in iterate_runs(level, workloads, bound):
        runs += 1
        if sample.classification[phenomenon]:
            logger.debug(f"{phenomenon.value} at {level.value} witnessed after {runs} runs")
            return _finding(level, phenomenon, sample)
    return Exhausted(level, phenomenon, bound, runs)


def replay(finding: Finding, workloads: Iterable[Workload]) -> RunSample:
    """Re-run a finding's workload and schedule on its level's engine"""
    workload = next(workload for workload in workloads if workload.name == finding.workload)
    result = run_level(workload, finding.level, finding.schedule)
    history = result.sv_history()
    return RunSample(workload, finding.schedule, result, history, counted_classification(finding.level, history))
