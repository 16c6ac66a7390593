import pytest

# filled by tests/test_acceptance.py: criterion number -> (passed, detail)
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def acceptance_record():
    def record(key, passed, detail):
        ACCEPTANCE[key] = (bool(passed), detail)
        assert passed, detail

    return record
