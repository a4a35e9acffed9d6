import pytest

_GATE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and item.module.__name__.endswith("test_acceptance"):
        _GATE.append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _GATE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in _GATE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
