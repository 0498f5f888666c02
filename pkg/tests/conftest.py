import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wgeom.gof import builtin_datasets  # noqa: E402


@pytest.fixture(scope="session")
def datasets():
    return builtin_datasets()


@pytest.fixture(scope="session")
def auto_claims(datasets):
    return datasets["auto_claims"]


@pytest.fixture(scope="session")
def hospitalizations(datasets):
    return datasets["hospitalizations"]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title = results[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")
