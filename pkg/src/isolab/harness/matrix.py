"""
Reproduction of the possible-anomalies table.

Each row is one level survey; surveys run on a thread pool and are assembled
in row order, so the result does not depend on completion order.
"""
from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor

from attrs import field, frozen

from isolab.harness.builtins import builtin_workloads
from isolab.harness.search import AdmissionViolation, Finding, LevelSurvey, survey_level
from isolab.harness.workloads import Workload
from isolab.history_core.notation import format_actions
from isolab.phenomena.admission import IsolationLevel
from isolab.phenomena.detectors import Phenomenon
from isolab.phenomena.report import render_witness
from isolab.shared.constants import (
    Defaults,
    ErrorMessages,
    IsolationTable,
    PhenomenonNames,
    TableEntries,
    Verdicts,
)
from isolab.shared.errors import IsolabError

logger = logging.getLogger(__name__)


def expected_entry(level: IsolationLevel, phenomenon: Phenomenon) -> str:
    """Table entry for the cell; levels outside the table are derived from their prohibitions"""
    level, phenomenon = IsolationLevel(level), Phenomenon(phenomenon)
    if phenomenon.value not in PhenomenonNames.MATRIX_PHENOMENA:
        raise IsolabError(ErrorMessages.NOT_A_MATRIX_COLUMN.format(phenomenon=phenomenon.value))
    if level.value not in IsolationTable.ROWS:
        prohibited = IsolationTable.prohibited(level.value)
        return TableEntries.NOT_POSSIBLE if phenomenon.value in prohibited else TableEntries.POSSIBLE
    return IsolationTable.entry(level.value, phenomenon.value)


@frozen
class MatrixCell:
    level: IsolationLevel
    phenomenon: Phenomenon
    expected: str
    finding: Finding | None = None

    @property
    def verdict(self) -> str:
        return Verdicts.POSSIBLE if self.finding is not None else Verdicts.NOT_POSSIBLE

    @property
    def matches(self) -> bool:
        # Sometimes Possible counts as Possible
        expected_possible = self.expected != TableEntries.NOT_POSSIBLE
        return expected_possible == (self.finding is not None)

    def render_record(self) -> str:
        location = self.finding.location if self.finding is not None else "-"
        return f"{self.level.value} {self.phenomenon.value} {self.verdict} {location}"


@frozen
class MatrixResult:
    levels: tuple[IsolationLevel, ...] = field(converter=tuple)
    phenomena: tuple[Phenomenon, ...] = field(converter=tuple)
    cells: tuple[MatrixCell, ...] = field(converter=tuple)
    bound: int
    workloads: tuple[str, ...] = field(converter=tuple)
    violations: tuple[AdmissionViolation, ...] = field(default=(), converter=tuple)
    runs: int = 0

    def cell(self, level: IsolationLevel, phenomenon: Phenomenon) -> MatrixCell:
        level, phenomenon = IsolationLevel(level), Phenomenon(phenomenon)
        for cell in self.cells:
            if cell.level is level and cell.phenomenon is phenomenon:
                return cell
        raise KeyError((level, phenomenon))

    def mismatches(self) -> list[MatrixCell]:
        return [cell for cell in self.cells if not cell.matches]

    def render_table(self) -> list[str]:
        label_width = max(len(level.value) for level in self.levels)
        column_width = max(len(Verdicts.NOT_POSSIBLE), max(len(p.value) for p in self.phenomena)) + 1
        header = " " * label_width + " |" + "".join(p.value.rjust(column_width) for p in self.phenomena)
        lines = [header, "-" * len(header)]
        for level in self.levels:
            row = level.value.ljust(label_width) + " |"
            for phenomenon in self.phenomena:
                cell = self.cell(level, phenomenon)
                mark = cell.verdict if cell.matches else f"{cell.verdict}!"
                row += mark.rjust(column_width)
            lines.append(row)
        return lines

    def render_records(self) -> list[str]:
        return [cell.render_record() for cell in self.cells]

    def render_witnesses(self) -> list[str]:
        lines = []
        for cell in self.cells:
            if cell.finding is None:
                continue
            finding = cell.finding
            lines.append(f"{cell.level.value} {cell.phenomenon.value} ({finding.variant}) {finding.location}")
            lines.append(f"  {format_actions(finding.history.actions)}")
            lines.append(f"  {render_witness(finding.history, finding.witness)}")
        return lines

    def render(self) -> list[str]:
        lines = self.render_table()
        lines.append("")
        lines.extend(self.render_records())
        lines.append("")
        lines.append("Witnesses:")
        lines.extend(self.render_witnesses())
        if self.violations:
            lines.append("")
            lines.append("Admission violations:")
            lines.extend(violation.render() for violation in self.violations)
        mismatches = self.mismatches()
        lines.append("")
        lines.append(f"bound {self.bound}, {self.runs} runs, {len(mismatches)} mismatches")
        for cell in mismatches:
            lines.append(f"mismatch: {cell.level.value} {cell.phenomenon.value} expected {cell.expected}, got {cell.verdict}")
        return lines


def build_matrix(
    levels: Iterable[IsolationLevel] | None = None,
    phenomena: Iterable[Phenomenon] | None = None,
    workloads: Sequence[Workload] | None = None,
    bound: int = Defaults.SCHEDULE_BOUND,
    max_workers: int = Defaults.MATRIX_WORKERS,
) -> MatrixResult:
    """
    Search a witness for every (level, phenomenon) cell.

    Args:
        levels: Rows; the table's six levels by default
        phenomena: Columns; the table's eight phenomena by default
        workloads: Workloads to search; the built-in catalogue by default
        bound: Schedule length bound
        max_workers: Threads running level surveys

    Returns:
        MatrixResult: cells in row-major order with their expected entries
    """
    levels = [IsolationLevel(level) for level in (levels or IsolationLevel.matrix_rows())]
    phenomena = [Phenomenon(p) for p in (phenomena or Phenomenon.matrix_columns())]
    workloads = list(workloads) if workloads is not None else list(builtin_workloads().values())
    expected = {(level, phenomenon): expected_entry(level, phenomenon) for level in levels for phenomenon in phenomena}

    logger.info(f"=== MATRIX {len(levels)}x{len(phenomena)} bound={bound} workers={max_workers} ===")
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {level: executor.submit(survey_level, level, workloads, bound, phenomena) for level in levels}
        surveys: dict[IsolationLevel, LevelSurvey] = {level: future.result() for level, future in futures.items()}

    cells = [
        MatrixCell(level, phenomenon, expected[level, phenomenon], surveys[level].finding(phenomenon))
        for level in levels
        for phenomenon in phenomena
    ]
    result = MatrixResult(
        levels=levels,
        phenomena=phenomena,
        cells=cells,
        bound=bound,
        workloads=[workload.name for workload in workloads],
        violations=[violation for level in levels for violation in surveys[level].violations],
        runs=sum(survey.runs for survey in surveys.values()),
    )
    logger.info(f"Matrix complete with {len(result.mismatches())} mismatches")
    return result
