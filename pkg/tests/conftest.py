from attacksim.data import fixture_path

import pytest

_ACCEPTANCE: list[tuple[str, bool]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in _ACCEPTANCE:
        terminalreporter.write_line(f"{name}: {'PASS' if ok else 'FAIL'}")


@pytest.fixture(scope="session")
def cstr_paths():
    return {
        "system": fixture_path("cstr_system.json"),
        "actions": fixture_path("cstr_actions.json"),
        "profiles": fixture_path("cstr_profiles.json"),
    }
