import logging
import os
from unittest.mock import patch

import pytest

from isolab.harness.settings import HarnessSettings
from isolab.shared.errors import IsolabError
from isolab.shared.logging_utils import setup_logging


def test_defaults(clean_env):
    settings = HarnessSettings.from_environ()

    assert settings.schedule_bound == 14
    assert settings.matrix_workers == 1


@patch.dict(os.environ, {"ISOLAB_SCHEDULE_BOUND": "10", "ISOLAB_MATRIX_WORKERS": "4"})
def test_from_environment():
    settings = HarnessSettings.from_environ()

    assert settings.schedule_bound == 10
    assert settings.matrix_workers == 4


def test_empty_values_fall_back_to_defaults():
    settings = HarnessSettings.from_environ({"ISOLAB_SCHEDULE_BOUND": ""})

    assert settings.schedule_bound == 14


@pytest.mark.parametrize("value", ["0", "-3", "many"])
def test_invalid_values(value):
    with pytest.raises(IsolabError, match="ISOLAB_SCHEDULE_BOUND must be a positive integer"):
        HarnessSettings.from_environ({"ISOLAB_SCHEDULE_BOUND": value})


def test_overrides_win():
    settings = HarnessSettings.from_environ({"ISOLAB_SCHEDULE_BOUND": "10"})

    assert settings.with_overrides(schedule_bound=8).schedule_bound == 8
    assert settings.with_overrides(matrix_workers=3) == HarnessSettings(schedule_bound=10, matrix_workers=3)
    assert settings.with_overrides() == settings


def test_setup_logging_installs_one_handler(clean_env):
    setup_logging("debug")
    logger = setup_logging("info")

    assert logger is logging.getLogger()
    assert logger.level == logging.INFO
    assert len(logger.handlers) == 1


@patch.dict(os.environ, {"ISOLAB_LOG_LEVEL": "ERROR"})
def test_setup_logging_reads_the_environment():
    assert setup_logging().level == logging.ERROR


def test_unknown_level_falls_back_to_warning():
    assert setup_logging("chatty").level == logging.WARNING


@pytest.mark.parametrize("overrides", [{"schedule_bound": 0}, {"matrix_workers": 0}, {"matrix_workers": -2}])
def test_overrides_are_checked(clean_env, overrides):
    name = next(iter(overrides))

    with pytest.raises(IsolabError, match=f"{name} must be a positive integer"):
        HarnessSettings.from_environ().with_overrides(**overrides)
