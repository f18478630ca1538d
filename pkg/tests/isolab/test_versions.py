import pytest

from isolab.mvcc.versions import Version, VersionStore
from isolab.shared.errors import EngineError


@pytest.fixture
def store():
    return VersionStore(["x", "y"], {"x": 50, "y": None})


def test_initial_versions(store):
    assert store.keys() == ["x", "y"]
    assert store.versions("x") == [Version("x", 50, 0, 0)]
    assert store.visible("y").value is None


def test_visible_as_of(store):
    store.install("x", 10, writer=1, commit_ts=3)
    store.install("x", 20, writer=2, commit_ts=5)

    assert store.visible("x", 2).value == 50
    assert store.visible("x", 3).value == 10
    assert store.visible("x", 4).writer == 1
    assert store.visible("x").value == 20
    assert store.snapshot(4) == {"x": 10, "y": None}


def test_writers_between_is_an_open_interval(store):
    store.install("x", 10, writer=1, commit_ts=3)
    store.install("x", 20, writer=2, commit_ts=5)

    assert store.writers_between("x", 1, 5) == [1]
    assert store.writers_between("x", 3, 6) == [2]
    assert store.writers_between("x", 0, 10) == [1, 2]
    assert store.writers_between("y", 0, 10) == []


def test_commit_timestamps_must_increase(store):
    store.install("x", 10, writer=1, commit_ts=3)

    with pytest.raises(EngineError, match="does not follow"):
        store.install("x", 20, writer=2, commit_ts=3)


def test_unknown_key(store):
    with pytest.raises(EngineError, match="not in the declared universe"):
        store.visible("z")
