import numpy as np
import pytest

from superradiance import Fidelity, paper_preset

# Published rates, kept here independently of the package constants.
G = np.array([0.123126, 0.107251, 0.123126])
OMEGA = (4.12065e-3, 7.2793e-5, 4.12065e-3)
J = (2.42439e-2, 5.06164e-4, 4.89101e-6)

ACCEPTANCE_RESULTS = {}


@pytest.fixture(scope="session")
def preset():
    return paper_preset(Fidelity.FULL)


@pytest.fixture(scope="session")
def ideal():
    return paper_preset(Fidelity.IDEAL)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")
