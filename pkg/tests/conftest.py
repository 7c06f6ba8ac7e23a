import math

import pytest
from hypothesis import strategies as st

from slapmap.geometry import build_polygon


@st.composite
def convex_polygons(draw, min_sides=3, max_sides=8):
    """Convex polygons inscribed in the unit circle with well separated vertices."""
    d = draw(st.integers(min_sides, max_sides))
    gaps = draw(st.lists(st.floats(0.2, 1.0), min_size=d, max_size=d))
    total = sum(gaps)
    offset = draw(st.floats(0, 2 * math.pi))
    angles, acc = [], offset
    for g in gaps:
        angles.append(acc)
        acc += 2 * math.pi * g / total
    if max(2 * math.pi * g / total for g in gaps) >= math.pi - 0.05:
        return None  # nearly degenerate: a side close to a diameter with a flat corner
    return build_polygon([(math.cos(a), math.sin(a)) for a in angles])


@pytest.fixture(scope="session")
def kite_root():
    from slapmap.kite import newton_solve

    return newton_solve()


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
