import pytest

from softuniform import fixture_path
from softuniform.core import ParameterSet, SoftSet, Universe
from softuniform.documents import build_instance, load_instance, load_mapping
from softuniform.uniformity import discrete_uniformity, full_uniformity

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def host():
    """Universe a,b,c with F(e1) = {a,b} and F(e2) = {b,c}."""
    u = Universe("abc")
    P = ParameterSet(["e1", "e2"])
    return SoftSet.from_sections(u, P, {"e1": "ab", "e2": "bc"})


@pytest.fixture
def discrete(host):
    return discrete_uniformity(host)


@pytest.fixture
def full(host):
    return full_uniformity(host)


def load(name):
    return build_instance(load_instance(fixture_path(name)))


def load_map(name):
    return load_mapping(fixture_path(name))
