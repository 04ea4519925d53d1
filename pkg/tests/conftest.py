import numpy as np
import pytest

from sigscan.tensor_algebra import TruncatedTensor


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


def random_tensor(rng, dim, depth, scale=1.0):
    return TruncatedTensor(dim, depth, [scale * rng.standard_normal(dim**n) for n in range(1, depth + 1)])


def random_path(rng, batch, length, dim, scale=0.5):
    """Random-walk paths; small steps keep high-degree terms moderate."""
    steps = scale * rng.standard_normal((batch, length, dim))
    return np.cumsum(steps, axis=1)


_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or report.failed:
        _acceptance.setdefault(name, report.outcome)
        if report.failed:
            _acceptance[name] = "failed"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_acceptance.items()):
        label = name.removeprefix("test_criterion_").replace("_", " ")
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  criterion {label}")
