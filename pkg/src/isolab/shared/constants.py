"""
Constants module for the isolation laboratory.
Centralizes magic strings, numbers, and the transcribed isolation table.
"""

# =============================================================================
# ENVIRONMENT AND DEFAULTS
# =============================================================================

class EnvironmentVariables:
    LOG_LEVEL = "ISOLAB_LOG_LEVEL"
    SCHEDULE_BOUND = "ISOLAB_SCHEDULE_BOUND"
    MATRIX_WORKERS = "ISOLAB_MATRIX_WORKERS"


class Defaults:
    LOG_LEVEL = "WARNING"
    LOG_FORMAT = "%(asctime)s - %(name)s - %(message)s"

    # All built-in scenarios fit in 14 schedule slots
    SCHEDULE_BOUND = 14
    MATRIX_WORKERS = 1

    # Initial version writer in multi-version histories
    INITIAL_VERSION = 0


# =============================================================================
# HISTORY NOTATION
# =============================================================================

class Notation:
    READ = "r"
    WRITE = "w"
    CURSOR_READ = "rc"
    CURSOR_WRITE = "wc"
    COMMIT = "c"
    ABORT = "a"

    PREDICATE_PREFIX = "P:"
    MEMBERSHIP = " in P:"
    VERSION_MARKER = "@"

    PRED_HEADER = "pred"
    INIT_HEADER = "init"
    UNIVERSE_HEADER = "universe"
    COMMENT = "#"


class WorkloadKeywords:
    NAME = "name"
    DESCRIBE = "describe"
    UNIVERSE = "universe"
    INIT = "init"
    PRED = "pred"
    CHECK = "check"
    SCHEDULE = "schedule"
    TXN = "txn"

    COMMIT = "commit"
    ABORT = "abort"
    DELETE = "d"
    CLOSE = "close"

    SUM = "sum"
    COUNT = "count"

    COMPARATORS = ["<=", ">=", "==", "!=", "<", ">"]

    YAML_SUFFIXES = [".yaml", ".yml"]
    JSON_SUFFIX = ".json"

    CURSOR_TAG = "cursor"
    PLAIN_TAG = "plain"


# =============================================================================
# ISOLATION LEVELS AND PHENOMENA
# =============================================================================

class LevelNames:
    DEGREE_0 = "degree0"
    READ_UNCOMMITTED = "read-uncommitted"
    READ_COMMITTED = "read-committed"
    CURSOR_STABILITY = "cursor-stability"
    REPEATABLE_READ = "repeatable-read"
    SNAPSHOT = "snapshot"
    READ_CONSISTENCY = "read-consistency"
    SERIALIZABLE = "serializable"

    ALL_LEVELS = [
        DEGREE_0, READ_UNCOMMITTED, READ_COMMITTED, CURSOR_STABILITY,
        REPEATABLE_READ, SNAPSHOT, READ_CONSISTENCY, SERIALIZABLE,
    ]

    # Rows of the possible-anomalies table, top to bottom
    MATRIX_LEVELS = [
        READ_UNCOMMITTED, READ_COMMITTED, CURSOR_STABILITY,
        REPEATABLE_READ, SNAPSHOT, SERIALIZABLE,
    ]

    # Levels defined by their engine rather than by prohibited phenomena
    ENGINE_DEFINED = [SNAPSHOT, READ_CONSISTENCY]


class PhenomenonNames:
    P0 = "P0"
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    P4 = "P4"
    P4C = "P4C"
    A5A = "A5A"
    A5B = "A5B"

    # Columns of the possible-anomalies table, left to right
    MATRIX_PHENOMENA = [P0, P1, P4C, P4, P2, P3, A5A, A5B]


class TableEntries:
    NOT_POSSIBLE = "Not Possible"
    POSSIBLE = "Possible"
    SOMETIMES_POSSIBLE = "Sometimes Possible"


class IsolationTable:
    """
    Expected possible/not-possible verdicts per level and phenomenon.

    Sometimes Possible counts as Possible for admission and for the matrix
    comparison; it is kept here so reports can show the qualifier.
    """

    _NP = TableEntries.NOT_POSSIBLE
    _P = TableEntries.POSSIBLE
    _S = TableEntries.SOMETIMES_POSSIBLE

    # Column order follows PhenomenonNames.MATRIX_PHENOMENA
    ROWS = {
        LevelNames.READ_UNCOMMITTED: [_NP, _P, _P, _P, _P, _P, _P, _P],
        LevelNames.READ_COMMITTED: [_NP, _NP, _P, _P, _P, _P, _P, _P],
        LevelNames.CURSOR_STABILITY: [_NP, _NP, _NP, _S, _S, _P, _P, _S],
        LevelNames.REPEATABLE_READ: [_NP, _NP, _NP, _NP, _NP, _P, _NP, _NP],
        LevelNames.SNAPSHOT: [_NP, _NP, _NP, _NP, _NP, _S, _NP, _P],
        LevelNames.SERIALIZABLE: [_NP, _NP, _NP, _NP, _NP, _NP, _NP, _NP],
    }

    # Levels outside the table, described by what they prohibit
    EXTRA_PROHIBITIONS = {
        LevelNames.DEGREE_0: [],
        LevelNames.READ_CONSISTENCY: [PhenomenonNames.P0, PhenomenonNames.P1, PhenomenonNames.P4C],
    }

    @classmethod
    def entry(cls, level: str, phenomenon: str) -> str:
        row = cls.ROWS[level]
        return row[PhenomenonNames.MATRIX_PHENOMENA.index(phenomenon)]

    @classmethod
    def prohibited(cls, level: str) -> list[str]:
        if level in cls.EXTRA_PROHIBITIONS:
            return list(cls.EXTRA_PROHIBITIONS[level])
        return [
            phenomenon
            for phenomenon, entry in zip(PhenomenonNames.MATRIX_PHENOMENA, cls.ROWS[level])
            if entry == TableEntries.NOT_POSSIBLE
        ]


# =============================================================================
# REPORT RENDERING
# =============================================================================

class ReportFormats:
    TEXT = "text"
    RECORDS = "records"

    ALL_FORMATS = [TEXT, RECORDS]


class Verdicts:
    POSSIBLE = "possible"
    NOT_POSSIBLE = "not-possible"
    SERIALIZABLE = "serializable"
    NON_SERIALIZABLE = "non-serializable"


# =============================================================================
# ERROR MESSAGES
# =============================================================================

class ErrorMessages:
    # History notation errors
    UNEXPECTED_TOKEN = "Unexpected token '{token}'"
    BAD_TARGET = "Malformed target '{target}'"
    BAD_HEADER = "Malformed header line '{line}'"
    PREDICATE_READ_OP = "Predicate targets are only valid for plain reads: '{token}'"
    UNDECLARED_PREDICATE = "Undeclared predicate: {name}"
    UNKNOWN_KEY = "Key {key} is not in the declared universe"
    KEY_NOT_COVERED = "Key {key} is not covered by predicate {name}"
    ACTION_AFTER_TERMINAL = "Action {action} follows the terminal action of T{txn}"
    DUPLICATE_TERMINAL = "Transaction T{txn} has more than one terminal action"
    MIXED_VERSION_MARKERS = "Version markers must be present on every read and write of a multi-version history"
    WRITE_VERSION_MISMATCH = "Write {action} must carry its own transaction as version"
    VERSION_ON_SINGLE_VERSION = "Single-version histories carry no version markers: {action}"
    MULTIVERSION_INPUT = "Multi-version histories must be mapped with mv_to_sv before analysis"
    NOT_MULTIVERSION = "Expected a multi-version history"
    SNAPSHOT_READ_VIOLATION = "Read {action} observed version {observed}, expected {expected} at its snapshot"
    INVALID_TXN_ID = "Transaction ids are positive integers, got T{txn}"

    # Workload errors
    BAD_STEP = "Malformed program step '{step}'"
    BAD_CONSTRAINT = "Malformed constraint '{text}'"
    BAD_SCHEDULE = "Malformed schedule '{text}'"
    MISSING_TERMINAL = "Program of T{txn} must end with commit or abort"
    STEP_AFTER_TERMINAL = "Program of T{txn} has steps after its terminal step"
    DELTA_WITHOUT_READ = "Relative write to {key} in T{txn} has no earlier read or write of that key"
    CURSOR_NOT_OPEN = "Cursor on {name} is used by T{txn} before its first fetch"
    UNKNOWN_SCHEDULE_TXN = "Schedule references unknown transaction T{txn}"
    SCHEDULE_LENGTH_MISMATCH = "Reference schedule gives T{txn} {given} slots for {expected} steps"
    DUPLICATE_TXN = "Transaction T{txn} is declared twice"
    EMPTY_WORKLOAD = "Workload declares no transactions"
    UNKNOWN_WORKLOAD = "Unknown built-in workload: {name}"
    INVALID_MANIFEST = "Invalid workload manifest: {error}"
    UNSUPPORTED_WORKLOAD_FILE = "Unsupported workload file type: {path}"
    INVALID_SETTING = "{name} must be a positive integer, got '{value}'"
    NOT_A_MATRIX_COLUMN = "{phenomenon} is not a column of the possible-anomalies table"

    # Engine errors
    TERMINATED_REQUEST = "T{txn} has already terminated"
    NO_CURRENT_ROW = "Cursor on {name} has no current row for T{txn}"
    UNSUPPORTED_LEVEL = "Level {level} is not handled by the {engine} engine"
    NON_MONOTONE_COMMIT = "Commit timestamp {ts} does not follow {last} on {key}"
