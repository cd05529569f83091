from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

# criterion number -> (title, passed); filled by the acceptance tests
ACCEPTANCE: dict = {}


@pytest.fixture
def corpus():
    return CORPUS


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test passes or fails as usual."""
    number, title = request.node.get_closest_marker("criterion").args
    ACCEPTANCE[number] = (title, None)

    def done(ok: bool):
        ACCEPTANCE[number] = (title, ok)
        print(f"criterion {number} {title}: {'PASS' if ok else 'FAIL'}")
        return ok

    return done


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[number]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}")
