"""
Committed versions per key.
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping

from attrs import frozen

from isolab.shared.constants import Defaults, ErrorMessages
from isolab.shared.errors import EngineError


@frozen
class Version:
    key: str
    # None marks an absent row (never inserted, or deleted)
    value: int | None
    writer: int
    commit_ts: int


class VersionStore:
    """Per-key committed versions ordered by commit timestamp; version 0 holds the initial value"""

    def __init__(self, universe: Iterable[str], initial: Mapping[str, int | None]):
        self._versions: dict[str, list[Version]] = {
            key: [Version(key, initial.get(key), Defaults.INITIAL_VERSION, 0)] for key in sorted(universe)
        }

    def keys(self) -> list[str]:
        return list(self._versions)

    def versions(self, key: str) -> list[Version]:
        return list(self._chain(key))

    def _chain(self, key: str) -> list[Version]:
        if key not in self._versions:
            raise EngineError(ErrorMessages.UNKNOWN_KEY.format(key=key))
        return self._versions[key]

    def install(self, key: str, value: int | None, writer: int, commit_ts: int) -> Version:
        chain = self._chain(key)
        if commit_ts <= chain[-1].commit_ts:
            raise EngineError(ErrorMessages.NON_MONOTONE_COMMIT.format(ts=commit_ts, last=chain[-1].commit_ts, key=key))
        version = Version(key, value, writer, commit_ts)
        chain.append(version)
        return version

    def visible(self, key: str, as_of: int | None = None) -> Version:
        """Latest version committed at or before as_of (latest overall when as_of is None)"""
        chain = self._chain(key)
        if as_of is None:
            return chain[-1]
        return [version for version in chain if version.commit_ts <= as_of][-1]

    def writers_between(self, key: str, start_ts: int, end_ts: int) -> list[int]:
        """Writers whose versions of key committed strictly inside (start_ts, end_ts)"""
        return [version.writer for version in self._chain(key) if start_ts < version.commit_ts < end_ts]

    def snapshot(self, as_of: int | None = None) -> dict[str, int | None]:
        return {key: self.visible(key, as_of).value for key in self._versions}
