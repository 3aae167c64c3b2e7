import pytest

_acceptance = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and item.module.__name__.endswith("test_acceptance"):
        title = (item.function.__doc__ or item.name).strip().splitlines()[0]
        detail = dict(item.user_properties).get("detail", "")
        _acceptance.append((rep.outcome, title, detail))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for outcome, title, detail in _acceptance:
        tag = "PASS" if outcome == "passed" else "FAIL"
        line = f"[{tag}] {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
