import json
import sys
from pathlib import Path

import pytest

from finsler_connections import FAMILIES, MetricSpec, TangentPoint, sample_points

sys.path.insert(0, str(Path(__file__).parent))

ORACLE_FILE = Path(__file__).with_name("oracle_values.json")


@pytest.fixture(scope="session")
def oracle_values():
    return json.loads(ORACLE_FILE.read_text())


@pytest.fixture(params=FAMILIES)
def family(request):
    return request.param


def spec_of(family, n=2, **params):
    return MetricSpec.create(family, n, **params)


def points_for(spec, count=3, seed=1):
    return sample_points(spec, count, seed=seed)


POINCARE_BASE = TangentPoint((0.0, 1.0), (1.0, 0.0))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    def log(number, title, worst, tol, ok):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title} (worst {worst:.3e} vs tol {tol:.0e})"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
