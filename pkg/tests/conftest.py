import pytest

# criterion number -> (passed, detail); filled by the acceptance tests
ACCEPTANCE = {}


def record(n, passed, detail):
    """Fold one check into criterion n's line; returns this check's own result."""
    ok, text = bool(passed), detail
    prev = ACCEPTANCE.get(n)
    if prev is not None:
        ok = ok and prev[0]
        text = f"{prev[1]}; {detail}"
    ACCEPTANCE[n] = (ok, text)
    return bool(passed)


@pytest.fixture
def accept():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
