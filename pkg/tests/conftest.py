import pytest

from agriwsn.config import ExperimentConfig
from agriwsn.compare import run_hybrid
from agriwsn.field import FieldSpec


@pytest.fixture(scope="session")
def default_cfg():
    return ExperimentConfig()


@pytest.fixture(scope="session")
def spec300():
    return FieldSpec()


@pytest.fixture(scope="session")
def hybrid_ring(default_cfg):
    """Default hybrid run (seed 0) with overlap alignment."""
    dep, trace = run_hybrid(default_cfg, 0)
    return dep, trace


ACCEPTANCE_LINES: list[str] = []


def record_criterion(label: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
