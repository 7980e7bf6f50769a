import json
import sys
from pathlib import Path

import pytest

from finitefuel import ModelParams, solve_boundary

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def p():
    return ModelParams(1.0, 1.0, 0.9)


@pytest.fixture(scope="session")
def bp02(p):
    return solve_boundary(0.02, p)


@pytest.fixture(scope="session")
def golden():
    return json.loads((FIXTURES / "oracle_golden.json").read_text())


def pytest_terminal_summary(terminalreporter):
    # one verdict line per acceptance criterion that ran
    mod = next((v for k, v in sys.modules.items() if k.endswith("test_acceptance")), None)
    lines = getattr(mod, "VERDICTS", [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
