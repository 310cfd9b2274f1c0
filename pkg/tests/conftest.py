import numpy as np
import pytest
from scipy.stats import unitary_group

from phasekick.circuit import Circuit, GateOp
from phasekick.sim import StateVector


def random_unitary(dim: int, seed: int) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=seed)


def random_state(n: int, seed: int) -> StateVector:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return StateVector.from_amplitudes(v, normalize=True)


def dense(matrix: np.ndarray, label: str = "") -> Circuit:
    n = matrix.shape[0].bit_length() - 1
    return Circuit(n, (GateOp("unitary", tuple(range(n)), matrix=matrix, label=label),))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for tag in sorted(verdicts):
        terminalreporter.write_line(verdicts[tag])
