import pytest

from emnls.grid import make_grid
from emnls.groundstate import ground_state


@pytest.fixture(scope="session")
def b33():
    return ground_state(3, 3.0)


@pytest.fixture(scope="session")
def grid64():
    return make_grid(3, 64, 8.0)


@pytest.fixture(scope="session")
def grid32():
    return make_grid(3, 32, 6.0)


@pytest.fixture(autouse=True)
def _output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("EMNLS_OUTPUT_ROOT", str(tmp_path / "runs"))


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Criterion lines collected for the terminal summary."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
