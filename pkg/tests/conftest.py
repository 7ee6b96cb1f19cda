import pytest

_ACCEPTANCE: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(criterion): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    key = str(marker.args[0])
    entry = _ACCEPTANCE.setdefault(key, {"passed": True, "details": []})
    entry["passed"] &= rep.passed
    entry["details"] += [v for k, v in item.user_properties if k == "measured"]


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: (int(k.rstrip("abcd")), k)):
        e = _ACCEPTANCE[key]
        status = "PASS" if e["passed"] else "FAIL"
        detail = "; ".join(e["details"])
        tr.write_line(f"criterion {key}: {status}  {detail}")


@pytest.fixture
def measured(record_property):
    """Record a human-readable measurement for the acceptance summary."""

    def _record(text: str):
        record_property("measured", text)

    return _record
