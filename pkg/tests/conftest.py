import pytest

_ACCEPTANCE = []


@pytest.fixture
def measured(request):
    """Attach measured quantities to an acceptance test for the summary."""
    values = {}
    request.node.user_properties.append(("measured", values))
    return values


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    values = dict(report.user_properties).get("measured", {})
    _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome, values))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, values in _ACCEPTANCE:
        status = "PASS" if outcome == "passed" else "FAIL"
        detail = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                           for k, v in values.items())
        terminalreporter.write_line(f"{status}  {name}  {detail}")
