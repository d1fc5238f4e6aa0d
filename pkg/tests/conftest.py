import pytest

ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: call with (number, title, passed, detail)."""

    def record(number, title, passed, detail=""):
        ACCEPTANCE[number] = (title, passed, detail)
        print(f"[criterion {number}] {'PASS' if passed else 'FAIL'}  {title}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{number}. {'PASS' if passed else 'FAIL'}  {title}: {detail}")
