import pytest

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    line = f"[{'PASS' if ok else 'FAIL'}] {key}: {detail}"
    print(line)
    return ok


@pytest.fixture
def criterion():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split()[0].rstrip("abc")), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")
