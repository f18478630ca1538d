"""
Harness settings read from the environment.
"""
from __future__ import annotations

import os
from collections.abc import Mapping

from attrs import evolve, frozen

from isolab.shared.constants import Defaults, EnvironmentVariables, ErrorMessages
from isolab.shared.errors import IsolabError


def _require_positive(name: str, raw: object) -> int:
    try:
        value = int(raw)
    except (TypeError, ValueError):
        raise IsolabError(ErrorMessages.INVALID_SETTING.format(name=name, value=raw))
    if value < 1:
        raise IsolabError(ErrorMessages.INVALID_SETTING.format(name=name, value=raw))
    return value


def _positive_int(environ: Mapping[str, str], name: str, default: int) -> int:
    raw = environ.get(name)
    if raw is None or raw == "":
        return default
    return _require_positive(name, raw)


@frozen
class HarnessSettings:
    schedule_bound: int = Defaults.SCHEDULE_BOUND
    matrix_workers: int = Defaults.MATRIX_WORKERS

    @classmethod
    def from_environ(cls, environ: Mapping[str, str] | None = None) -> HarnessSettings:
        environ = os.environ if environ is None else environ
        return cls(
            schedule_bound=_positive_int(environ, EnvironmentVariables.SCHEDULE_BOUND, Defaults.SCHEDULE_BOUND),
            matrix_workers=_positive_int(environ, EnvironmentVariables.MATRIX_WORKERS, Defaults.MATRIX_WORKERS),
        )

    def with_overrides(self, schedule_bound: int | None = None, matrix_workers: int | None = None) -> HarnessSettings:
        """CLI flags win over the environment and are held to the same checks"""
        changes = {}
        if schedule_bound is not None:
            changes["schedule_bound"] = _require_positive("schedule_bound", schedule_bound)
        if matrix_workers is not None:
            changes["matrix_workers"] = _require_positive("matrix_workers", matrix_workers)
        return evolve(self, **changes)
