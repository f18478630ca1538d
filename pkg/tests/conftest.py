import os
import sys

import pytest
from unittest.mock import patch

# Add src directory to Python path so tests run without an installed package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from isolab.harness.builtins import builtin_workloads
from isolab.history_core.notation import parse_history
from isolab.shared.constants import EnvironmentVariables

# Textbook histories used across the detector, graph and CLI tests
H1 = "r1[x=50] w1[x=10] r2[x=10] r2[y=50] c2 r1[y=50] w1[y=90] c1"
H2 = "r1[x=50] r2[x=50] w2[x=10] r2[y=50] w2[y=90] c2 r1[y=90] c1"
H3 = """
universe {e1,y,z}
pred active = {e1,y}
r1[P:active] w2[y=1 in P:active] r2[z=1] w2[z=2] c2 r1[z=2] c1
"""
H4 = "r1[x=100] r2[x=100] w2[x=120] c2 w1[x=130] c1"
H5 = "r1[x=50] r1[y=50] r2[x=50] r2[y=50] w1[y=-40] w2[x=-40] c1 c2"
H1_SI = "r1[x@0=50] w1[x@1=10] r2[x@0=50] r2[y@0=50] c2 r1[y@0=50] w1[y@1=90] c1"

# A cursor writer racing a delete of the only row it covers
CURSOR_AFTER_DELETE = """
name cursor-after-delete
init x=100
pred acct = {x}
txn 1: rc[P:acct] wc[P:acct+=30] commit
txn 2: d[x] commit
"""


@pytest.fixture
def history():
    """Parse notation text into a History"""
    return parse_history


@pytest.fixture
def textbook():
    return {
        "H1": parse_history(H1),
        "H2": parse_history(H2),
        "H3": parse_history(H3),
        "H4": parse_history(H4),
        "H5": parse_history(H5),
    }


@pytest.fixture
def workloads():
    return builtin_workloads()


@pytest.fixture
def workload(workloads):
    """Look up a built-in workload by name"""
    return lambda name: workloads[name]


@pytest.fixture(scope="function")
def clean_env():
    """Run with none of the isolab environment variables set"""
    names = [
        EnvironmentVariables.LOG_LEVEL,
        EnvironmentVariables.SCHEDULE_BOUND,
        EnvironmentVariables.MATRIX_WORKERS,
    ]
    environ = {key: value for key, value in os.environ.items() if key not in names}
    with patch.dict(os.environ, environ, clear=True):
        yield


@pytest.fixture(scope="session")
def full_matrix():
    """The six-by-eight table over the built-in workloads; built once per session"""
    from isolab.harness.matrix import build_matrix

    return build_matrix()


@pytest.fixture(scope="session")
def history_evidence():
    """Every non-serializable history any engine emits for the built-in workloads"""
    from isolab.harness.compare import collect_histories

    return collect_histories(list(builtin_workloads().values()))
