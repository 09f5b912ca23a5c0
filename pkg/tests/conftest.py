import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def oscillator():
    from phasevol import make_schrodinger_inverse

    return make_schrodinger_inverse(2.0, 1.0, 1)


_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(tag: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {tag}: {detail}"
        _VERDICTS.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
