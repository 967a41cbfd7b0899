import time

import pytest

WALL_CLOCK_LIMIT = 300.0
_START = time.perf_counter()
_RESULTS: list[tuple[int, str, bool, str]] = []


def elapsed() -> float:
    return time.perf_counter() - _START


def pytest_collection_modifyitems(items):
    # acceptance criteria run last so criterion 12 sees the whole session's time
    items.sort(key=lambda item: item.module.__name__.endswith("test_acceptance"))


@pytest.fixture
def record():
    def _record(number: int, title: str, ok: bool, detail: str = "") -> None:
        _RESULTS.append((number, title, ok, detail))
    return _record


def pytest_sessionfinish(session, exitstatus):
    total = elapsed()
    if _RESULTS and total >= WALL_CLOCK_LIMIT:
        session.exitstatus = pytest.ExitCode.TESTS_FAILED


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, title, ok, detail in sorted(_RESULTS):
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title}" + (f" ({detail})" if detail else ""))
    total = elapsed()
    tr.write_line(f"[{'PASS' if total < WALL_CLOCK_LIMIT else 'FAIL'}] criterion 12: "
                  f"full pytest session wall-clock {total:.1f}s < {WALL_CLOCK_LIMIT:.0f}s")
