import os
import sys
import tempfile
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# keep test runs away from the user's cache
os.environ.setdefault("TORICGW_CACHE_DIR", tempfile.mkdtemp(prefix="toricgw-test-"))


@pytest.fixture(scope="session")
def data_dir():
    from importlib import resources

    return Path(str(resources.files("toricgw") / "data"))


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    lines = test_acceptance.summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
