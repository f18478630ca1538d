"""
Exception types shared by the isolation laboratory packages.
"""


class IsolabError(ValueError):
    """Base class for every error reported to callers of isolab"""


class HistorySyntaxError(IsolabError):
    """History text that does not follow the notation grammar"""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class HistoryValidationError(IsolabError):
    """Well-formed history text that breaks a history invariant"""


class WorkloadError(IsolabError):
    """Workload text, manifest or schedule problems"""


class EngineError(IsolabError):
    """Program step that an engine cannot execute"""
