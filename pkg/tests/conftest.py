import pytest

_CRITERIA: list[tuple[str, bool, str]] = []


class CriterionRecorder:
    def __init__(self, name):
        self.name = name

    def report(self, passed: bool, detail: str = ""):
        _CRITERIA.append((self.name, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] {self.name} {detail}")
        assert passed, f"{self.name}: {detail}"


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion line; printed again in the terminal summary."""
    marker = request.node.get_closest_marker("criterion")
    name = marker.args[0] if marker else request.node.name
    return CriterionRecorder(name)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion label")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
