import contextlib

import pytest

_verdicts = {}


@pytest.fixture(scope="session")
def criterion():
    """``with criterion(n, name) as note:`` records PASS/FAIL for acceptance item n."""

    @contextlib.contextmanager
    def record(number, name):
        details = []
        verdict = "FAIL"
        try:
            yield details.append
            verdict = "PASS"
        finally:
            # parametrized criteria pass only if every instance passes
            old, _, old_details = _verdicts.get(number, ("PASS", name, ""))
            _verdicts[number] = ("PASS" if old == verdict == "PASS" else "FAIL", name,
                                 "; ".join(filter(None, [old_details] + details)))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_verdicts):
        verdict, name, details = _verdicts[number]
        terminalreporter.write_line(f"[{verdict}] {number}. {name}" + (f": {details}" if details else ""))
