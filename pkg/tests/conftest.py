import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nehari_levels.params import ProblemParams  # noqa: E402
from nehari_levels.radial import shoot_ground_state  # noqa: E402


@pytest.fixture(scope="session")
def params():
    return ProblemParams(N=3, p=4.0)


@pytest.fixture(scope="session")
def w(params):
    return shoot_ground_state(params)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        ok, title, detail = RESULTS[k]
        line = f"{'PASS' if ok else 'FAIL'} criterion {k:2d}: {title}"
        terminalreporter.write_line(line + (f" [{detail}]" if detail else ""))
