import pytest

_CRITERIA = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _CRITERIA[props["criterion"]] = (report.outcome, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        outcome, detail = _CRITERIA[k]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {k:2d}: {status}  {detail}")


@pytest.fixture
def criterion(record_property):
    """Tag an acceptance test with its number and a one-line detail string."""

    def tag(number, detail=""):
        record_property("criterion", number)
        record_property("detail", detail)

    return tag
