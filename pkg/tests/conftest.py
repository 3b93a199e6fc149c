from importlib import resources

import pytest

from pexp_slicer.lang import parse_program


def fixture_text(name: str) -> str:
    return (resources.files("pexp_slicer") / "fixtures" / f"{name}.pexp").read_text()


def load_fixture(name: str):
    return parse_program(fixture_text(name))


FIXTURES = sorted(
    p.name[: -len(".pexp")] for p in (resources.files("pexp_slicer") / "fixtures").iterdir() if p.name.endswith(".pexp")
)


@pytest.fixture
def fixture():
    return load_fixture


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
