import math

import pytest

from proxysync.geometry import Rect, RoomConfig, SharedWorkspace


def close(a, b, tol=1e-9):
    return all(math.isclose(x, y, abs_tol=tol) for x, y in zip(a, b))


@pytest.fixture
def demo_rooms():
    return [RoomConfig(1, Rect(0.6, 0.4), -math.pi / 2), RoomConfig(2, Rect(0.5, 0.35), 0.0)]


@pytest.fixture
def ws_small():
    return SharedWorkspace(Rect(0.45, 0.3))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
