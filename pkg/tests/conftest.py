import pytest

_REPORT = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test body asserts, this prints the verdict."""
    holder = {}

    def declare(label):
        holder["label"] = label

    yield declare
    failed = getattr(request.node, "rep_call", None)
    ok = failed is not None and failed.passed
    _REPORT.append(f"[{'PASS' if ok else 'FAIL'}] {holder.get('label', request.node.name)}")


@pytest.hookimpl(hookwrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
